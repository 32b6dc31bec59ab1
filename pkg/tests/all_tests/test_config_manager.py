import pytest
import json
import os
from unittest.mock import patch

from src.utils.config_manager import (
    OracleConfig,
    EvaluationConfig,
    GraphConfig,
    StorageConfig,
    LoggingConfig,
    ConfigData,
    ConfigManager,
)

class TestOracleConfig:
    """Test OracleConfig dataclass"""

    def test_oracle_config_init_with_defaults(self):
        """Test OracleConfig initialization with default budgets"""
        config = OracleConfig()
        assert config.max_n_permutation == 8
        assert config.max_n_partition == 8
        assert config.max_k_partition == 3
        assert config.max_n_audit == 6
        assert config.max_n_symmetrize == 6

    def test_oracle_config_init_with_kwargs(self):
        """Test OracleConfig initialization ignoring extra kwargs"""
        config = OracleConfig(max_n_permutation=5, extra_field="ignored")
        assert config.max_n_permutation == 5

    @pytest.mark.parametrize("field", ["max_n_permutation", "max_n_partition", "max_k_partition",
                                       "max_n_audit", "max_n_symmetrize"])
    def test_oracle_config_rejects_non_positive(self, field):
        """Test every budget must be a positive integer"""
        with pytest.raises(ValueError, match=f"{field} must be a positive integer."):
            OracleConfig(**{field: 0})

    def test_oracle_config_properties_readonly(self):
        """Test that budgets have no setter"""
        config = OracleConfig()
        assert hasattr(config, '_max_n_audit')
        with pytest.raises(AttributeError):
            config.max_n_audit = 10

class TestEvaluationConfig:
    """Test EvaluationConfig dataclass"""

    def test_evaluation_config_defaults(self):
        """Test EvaluationConfig defaults"""
        config = EvaluationConfig()
        assert config.trials == 10000
        assert config.seed == 0
        assert config.confidence == 0.01
        assert config.workers == 1

    def test_evaluation_config_negative_seed(self):
        """Test a negative seed is rejected"""
        with pytest.raises(ValueError, match="seed must be a non-negative integer."):
            EvaluationConfig(seed=-1)

    @pytest.mark.parametrize("confidence", [0, 1, 1.5])
    def test_evaluation_config_confidence_range(self, confidence):
        """Test confidence must lie strictly inside (0, 1)"""
        with pytest.raises(ValueError, match="confidence must be strictly between 0 and 1."):
            EvaluationConfig(confidence=confidence)

    def test_evaluation_config_zero_trials(self):
        """Test trials must be positive"""
        with pytest.raises(ValueError, match="trials must be a positive integer."):
            EvaluationConfig(trials=0)

class TestGraphAndStorageConfig:
    """Test GraphConfig and StorageConfig dataclasses"""

    def test_graph_config_default(self):
        """Test exhaustive limit default"""
        assert GraphConfig().exhaustive_indegree_limit == 20

    def test_storage_config_empty_dir(self):
        """Test creating storage config with empty directory"""
        with pytest.raises(ValueError, match="instance_dir must not empty."):
            StorageConfig(instance_dir="")

class TestLoggingConfig:
    """Test LoggingConfig dataclass"""

    def test_logging_config_level_upper_cased(self):
        """Test level names are normalized"""
        with patch.dict(os.environ, {}, clear=True):
            assert LoggingConfig(level="warning").level == "WARNING"

    def test_logging_config_env_override(self, mock_env_vars):
        """Test IMPARTIALKIT_LOG_LEVEL wins over the file value"""
        assert LoggingConfig(level="ERROR").level == "DEBUG"

    def test_logging_config_unknown_level(self):
        """Test an unknown level is rejected"""
        with patch.dict(os.environ, {}, clear=True):
            with pytest.raises(ValueError, match="level must be one of"):
                LoggingConfig(level="LOUD")

    def test_logging_config_negative_backup_count(self):
        """Test negative backup count is rejected"""
        with pytest.raises(ValueError, match="backup_count must not be negative."):
            LoggingConfig(backup_count=-1)

class TestConfigData:
    """Test ConfigData dataclass"""

    def test_config_data_init_without_dict(self):
        """Test ConfigData initialization without config dict"""
        config = ConfigData()
        assert isinstance(config.oracle, OracleConfig)
        assert isinstance(config.evaluation, EvaluationConfig)
        assert isinstance(config.graphs, GraphConfig)
        assert isinstance(config.storage, StorageConfig)
        assert isinstance(config.logging, LoggingConfig)

    def test_config_data_init_with_dict(self, sample_config_data):
        """Test ConfigData initialization with config dict"""
        config = ConfigData(sample_config_data)
        assert config.oracle.max_n_permutation == 7
        assert config.evaluation.trials == 500
        assert config.graphs.exhaustive_indegree_limit == 12
        assert config.storage.instance_dir == "test_instances"

    def test_config_data_to_dict(self, sample_config_data):
        """Test ConfigData to_dict round-trips the file sections"""
        with patch.dict(os.environ, {}, clear=True):
            result = ConfigData(sample_config_data).to_dict()
        assert result == sample_config_data

class TestConfigManager:
    """Test ConfigManager singleton class"""

    def test_config_manager_singleton(self, mock_config_file_path, config_file_with_data):
        """Test ConfigManager singleton pattern"""
        with mock_config_file_path(config_file_with_data):
            manager1 = ConfigManager()
            manager2 = ConfigManager()
            assert manager1 is manager2

    def test_config_manager_load_config_success(self, mock_config_file_path, config_file_with_data):
        """Test successful config loading"""
        with mock_config_file_path(config_file_with_data):
            config = ConfigManager().get_config()
            assert isinstance(config, ConfigData)
            assert config.oracle.max_n_audit == 5
            assert config.evaluation.seed == 7

    def test_config_manager_load_config_file_not_found(self, mock_config_file_path):
        """Test config loading when file doesn't exist"""
        with mock_config_file_path("/nonexistent/config.json"):
            with pytest.raises(FileNotFoundError, match="Configuration file '/nonexistent/config.json' not found"):
                ConfigManager()

    def test_config_manager_load_invalid_json(self, mock_config_file_path, temp_config_file):
        """Test config loading with a broken file"""
        with open(temp_config_file, 'w') as f:
            f.write("{not json")
        with mock_config_file_path(temp_config_file):
            with pytest.raises(ValueError, match="is not valid JSON"):
                ConfigManager()

    def test_get_config_sections(self, mock_config_file_path, config_file_with_data):
        """Test getting each configuration section"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            assert isinstance(manager.get_config("oracle"), OracleConfig)
            assert isinstance(manager.get_config("evaluation"), EvaluationConfig)
            assert isinstance(manager.get_config("graphs"), GraphConfig)
            assert isinstance(manager.get_config("storage"), StorageConfig)
            assert isinstance(manager.get_config("logging"), LoggingConfig)

    def test_get_config_unknown_section(self, mock_config_file_path, config_file_with_data):
        """Test getting unknown configuration section"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            with pytest.raises(ValueError, match="Unknown configuration section: unknown"):
                manager.get_config("unknown")

    def test_get_config_no_config_loaded(self, mock_config_file_path, config_file_with_data):
        """Test getting config when none is loaded"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            manager._config = None
            with pytest.raises(RuntimeError, match="Configuration not loaded"):
                manager.get_config()

    def test_save_config_creates_directory(self, mock_config_file_path, config_file_with_data, sample_config_data):
        """Test config saving creates directory if it doesn't exist"""
        new_config_file = os.path.join(os.path.dirname(config_file_with_data), "new_dir", "config.json")
        with patch.dict(os.environ, {}, clear=True):
            with mock_config_file_path(config_file_with_data):
                manager = ConfigManager()

        assert not os.path.exists(os.path.dirname(new_config_file))

        with mock_config_file_path(new_config_file):
            manager.save_config()
            with open(new_config_file, 'r') as f:
                assert json.load(f) == sample_config_data

    def test_save_config_no_config_loaded(self, mock_config_file_path, config_file_with_data):
        """Test saving config when none is loaded"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            manager._config = None
            with pytest.raises(RuntimeError, match="No configuration loaded to save"):
                manager.save_config()

    def test_save_config_io_error(self, mock_config_file_path, config_file_with_data, mocker):
        """Test save config with IO error"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            failing_open = mocker.patch('builtins.open', side_effect=OSError("Permission denied"))
            with pytest.raises(RuntimeError, match="Failed to save configuration file"):
                manager.save_config()
            failing_open.assert_called_once()

    def test_update_config_evaluation_section(self, mock_config_file_path, config_file_with_data):
        """Test updating evaluation defaults persists them"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            manager.update_config("evaluation", trials=2000, seed=3)
            assert manager.get_config("evaluation").trials == 2000
            with open(config_file_with_data, 'r') as f:
                saved = json.load(f)
            assert saved["evaluation"]["trials"] == 2000
            assert saved["evaluation"]["seed"] == 3
            assert saved["evaluation"]["confidence"] == 0.05

    def test_update_config_revalidates(self, mock_config_file_path, config_file_with_data):
        """Test an invalid update is rejected by the section class"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            with pytest.raises(ValueError, match="trials must be a positive integer."):
                manager.update_config("evaluation", trials=0)

    def test_update_config_oracle_is_read_only(self, mock_config_file_path, config_file_with_data):
        """Test oracle budgets cannot be changed at runtime"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            with pytest.raises(ValueError, match="Unknown configuration section: oracle"):
                manager.update_config("oracle", max_n_audit=9)

    def test_update_config_unknown_field(self, mock_config_file_path, config_file_with_data):
        """Test updating unknown section field"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            with pytest.raises(ValueError, match="Field 'format' is not updatable in section 'logging'"):
                manager.update_config("logging", format="%(message)s")

    def test_update_config_no_config_loaded(self, mock_config_file_path, config_file_with_data):
        """Test updating config when none is loaded"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            manager._config = None
            with pytest.raises(RuntimeError, match="Configuration not loaded"):
                manager.update_config("storage", instance_dir="elsewhere")

    def test_reload_config(self, mock_config_file_path, config_file_with_data, sample_config_data):
        """Test reloading configuration"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            assert manager.get_config("storage").instance_dir == "test_instances"

            sample_config_data["storage"]["instance_dir"] = "moved"
            with open(config_file_with_data, 'w') as f:
                json.dump(sample_config_data, f)

            manager.reload_config()
            assert manager.get_config("storage").instance_dir == "moved"

    def test_reload_config_file_not_found(self, mock_config_file_path, config_file_with_data):
        """Test reloading config when file is deleted"""
        with mock_config_file_path(config_file_with_data):
            manager = ConfigManager()
            os.remove(config_file_with_data)
            with pytest.raises(FileNotFoundError):
                manager.reload_config()

class TestLoggingSetup:
    """Test package logger configuration"""

    def test_configure_logging_console_only(self):
        """Test one console handler is attached and repeated calls do not stack"""
        from src.utils.logging_setup import configure_logging
        with patch.dict(os.environ, {}, clear=True):
            config = LoggingConfig(level="INFO", console_output=True)
        configure_logging(config)
        logger = configure_logging(config)
        marked = [h for h in logger.handlers if getattr(h, "_impartialkit_handler", False)]
        assert len(marked) == 1
        assert logger.level == 20
        configure_logging(LoggingConfig(console_output=False))

    def test_configure_logging_rotating_file(self, temp_config_dir):
        """Test a rotating file handler is created in a new directory"""
        from logging.handlers import RotatingFileHandler
        from src.utils.logging_setup import configure_logging
        log_file = os.path.join(temp_config_dir, "logs", "run.log")
        with patch.dict(os.environ, {}, clear=True):
            config = LoggingConfig(level="DEBUG", file=log_file, max_file_size_mb=2,
                                   backup_count=3, console_output=False)
        logger = configure_logging(config)
        handlers = [h for h in logger.handlers if isinstance(h, RotatingFileHandler)]
        assert len(handlers) == 1
        assert handlers[0].maxBytes == 2 * 1024 * 1024
        assert handlers[0].backupCount == 3
        logger.getChild("core").debug("hello")
        handlers[0].flush()
        with open(log_file, encoding="utf-8") as f:
            assert "hello" in f.read()
        configure_logging(LoggingConfig(console_output=False))
