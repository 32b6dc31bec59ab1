from dataclasses import dataclass
import json
import os
from pathlib import Path
from typing import Optional

# Repository root (two levels above src/utils)
PROJECT_ROOT = Path(__file__).resolve().parents[2]
# Config file, overridable through IMPARTIALKIT_CONFIG
CONFIG_FILE = os.getenv("IMPARTIALKIT_CONFIG", str(PROJECT_ROOT / "config" / "config.json"))
# Log level override
LOG_LEVEL_ENV = "IMPARTIALKIT_LOG_LEVEL"

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def _require_positive(name: str, value: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer.")
    return value


@dataclass
class OracleConfig:
    """Feasibility budgets of the exact oracle"""
    _max_n_permutation: int
    _max_n_partition: int
    _max_k_partition: int
    _max_n_audit: int
    _max_n_symmetrize: int

    def __init__(self,
                 max_n_permutation: int = 8,
                 max_n_partition: int = 8,
                 max_k_partition: int = 3,
                 max_n_audit: int = 6,
                 max_n_symmetrize: int = 6,
                 **kwargs):
        self._max_n_permutation = _require_positive("max_n_permutation", max_n_permutation)
        self._max_n_partition = _require_positive("max_n_partition", max_n_partition)
        self._max_k_partition = _require_positive("max_k_partition", max_k_partition)
        self._max_n_audit = _require_positive("max_n_audit", max_n_audit)
        self._max_n_symmetrize = _require_positive("max_n_symmetrize", max_n_symmetrize)

    @property
    def max_n_permutation(self) -> int:
        return self._max_n_permutation

    @property
    def max_n_partition(self) -> int:
        return self._max_n_partition

    @property
    def max_k_partition(self) -> int:
        return self._max_k_partition

    @property
    def max_n_audit(self) -> int:
        return self._max_n_audit

    @property
    def max_n_symmetrize(self) -> int:
        return self._max_n_symmetrize


@dataclass
class EvaluationConfig:
    trials: int
    seed: int
    confidence: float
    workers: int

    def __init__(self, trials: int = 10000, seed: int = 0, confidence: float = 0.01,
                 workers: int = 1, **kwargs):
        self.trials = _require_positive("trials", trials)
        if not isinstance(seed, int) or seed < 0:
            raise ValueError("seed must be a non-negative integer.")
        self.seed = seed
        if not 0 < confidence < 1:
            raise ValueError("confidence must be strictly between 0 and 1.")
        self.confidence = confidence
        self.workers = _require_positive("workers", workers)


@dataclass
class GraphConfig:
    _exhaustive_indegree_limit: int

    def __init__(self, exhaustive_indegree_limit: int = 20, **kwargs):
        self._exhaustive_indegree_limit = _require_positive(
            "exhaustive_indegree_limit", exhaustive_indegree_limit)

    @property
    def exhaustive_indegree_limit(self) -> int:
        return self._exhaustive_indegree_limit


@dataclass
class StorageConfig:
    instance_dir: str

    def __init__(self, instance_dir: str = "instances", **kwargs):
        # Check directory name is not empty
        if not instance_dir:
            raise ValueError("instance_dir must not empty.")
        self.instance_dir = instance_dir


@dataclass
class LoggingConfig:
    level: str
    format: str
    file: str
    max_file_size_mb: int
    backup_count: int
    console_output: bool

    def __init__(self,
                 level: str = "INFO",
                 format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                 file: str = "",
                 max_file_size_mb: int = 10,
                 backup_count: int = 5,
                 console_output: bool = True,
                 **kwargs):
        level = os.getenv(LOG_LEVEL_ENV, level).upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"level must be one of {', '.join(sorted(_LOG_LEVELS))}.")
        self.level = level
        self.format = format
        self.file = file
        self.max_file_size_mb = _require_positive("max_file_size_mb", max_file_size_mb)
        if backup_count < 0:
            raise ValueError("backup_count must not be negative.")
        self.backup_count = backup_count
        self.console_output = bool(console_output)


@dataclass
class ConfigData:
    oracle: OracleConfig
    evaluation: EvaluationConfig
    graphs: GraphConfig
    storage: StorageConfig
    logging: LoggingConfig

    def __init__(self, config_dict: Optional[dict] = None):
        config_dict = config_dict or {}
        self.oracle = OracleConfig(**config_dict.get("oracle", {}))
        self.evaluation = EvaluationConfig(**config_dict.get("evaluation", {}))
        self.graphs = GraphConfig(**config_dict.get("graphs", {}))
        self.storage = StorageConfig(**config_dict.get("storage", {}))
        self.logging = LoggingConfig(**config_dict.get("logging", {}))

    def to_dict(self) -> dict:
        return {
            "oracle": {
                "max_n_permutation": self.oracle.max_n_permutation,
                "max_n_partition": self.oracle.max_n_partition,
                "max_k_partition": self.oracle.max_k_partition,
                "max_n_audit": self.oracle.max_n_audit,
                "max_n_symmetrize": self.oracle.max_n_symmetrize
            },
            "evaluation": {
                "trials": self.evaluation.trials,
                "seed": self.evaluation.seed,
                "confidence": self.evaluation.confidence,
                "workers": self.evaluation.workers
            },
            "graphs": {
                "exhaustive_indegree_limit": self.graphs.exhaustive_indegree_limit
            },
            "storage": {
                "instance_dir": self.storage.instance_dir
            },
            "logging": {
                "level": self.logging.level,
                "format": self.logging.format,
                "file": self.logging.file,
                "max_file_size_mb": self.logging.max_file_size_mb,
                "backup_count": self.logging.backup_count,
                "console_output": self.logging.console_output
            }
        }


class ConfigManager:
    _instance: Optional['ConfigManager'] = None
    _config: Optional[ConfigData] = None
    # Budgets are read-only at runtime; only run defaults may be changed
    _UPDATABLE_FIELDS = {
        "evaluation": {"trials", "seed", "confidence", "workers"},
        "storage": {"instance_dir"},
        "logging": {"level", "file", "console_output"}
    }
    _VALID_SECTIONS = {"oracle", "evaluation", "graphs", "storage", "logging"}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(ConfigManager, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        if self._config is None:
            self._load_config()

    def _load_config(self) -> None:
        """Load configuration from the JSON file"""
        try:
            with open(CONFIG_FILE, 'r', encoding='utf-8') as f:
                config_dict = json.load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"Configuration file '{CONFIG_FILE}' not found")
        except json.JSONDecodeError as e:
            raise ValueError(f"Configuration file '{CONFIG_FILE}' is not valid JSON: {e}")
        self._config = ConfigData(config_dict)

    def get_config(self, section: Optional[str] = None):
        """Get configuration section or entire config"""
        if self._config is None:
            raise RuntimeError("Configuration not loaded. Call _load_config() first.")

        if section:
            if section not in self._VALID_SECTIONS:
                raise ValueError(f"Unknown configuration section: {section}.")
            return getattr(self._config, section)

        return self._config

    def save_config(self) -> None:
        """Save current configuration to JSON file"""
        if self._config is None:
            raise RuntimeError("No configuration loaded to save")

        try:
            config_dir = os.path.dirname(CONFIG_FILE)
            if config_dir:
                os.makedirs(config_dir, exist_ok=True)
            with open(CONFIG_FILE, 'w', encoding='utf-8') as f:
                json.dump(self._config.to_dict(), f, indent=2)
        except (OSError, IOError) as e:
            raise RuntimeError(f"Failed to save configuration file '{CONFIG_FILE}': {e}")

    def update_config(self, section: str, **kwargs) -> None:
        """Update specific configuration section and save to file"""
        if self._config is None:
            raise RuntimeError("Configuration not loaded")

        if section not in self._UPDATABLE_FIELDS:
            raise ValueError(f"Unknown configuration section: {section}")

        allowed_fields = self._UPDATABLE_FIELDS[section]
        for key in kwargs:
            if key not in allowed_fields:
                raise ValueError(f"Field '{key}' is not updatable in section '{section}'. "
                                 f"Allowed fields: {', '.join(sorted(allowed_fields))}")

        # Rebuild the section so its validation runs on the new values
        merged = self._config.to_dict()[section]
        merged.update(kwargs)
        section_cls = type(getattr(self._config, section))
        setattr(self._config, section, section_cls(**merged))

        self.save_config()

    def reload_config(self) -> None:
        """Reload configuration from file"""
        self._load_config()
