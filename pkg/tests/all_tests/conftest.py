import pytest
import tempfile
import os
import json
import shutil
from unittest.mock import patch

import numpy as np

from src.core.graph_core import gen_figure_family
from src.data.models import (
    FigureFamily,
    InstanceFamily,
    MechanismKind,
    MechanismSpec,
    NominationGraph,
    Prediction,
)

#########################################
# Fixtures for Config Manager testing
#########################################

@pytest.fixture
def temp_config_dir():
    """Create a temporary directory for config files during testing"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)

@pytest.fixture
def temp_config_file(temp_config_dir):
    """Create a temporary config file path"""
    config_file = os.path.join(temp_config_dir, "config.json")
    return config_file

@pytest.fixture
def sample_config_data():
    """Sample configuration data for testing"""
    return {
        "oracle": {
            "max_n_permutation": 7,
            "max_n_partition": 6,
            "max_k_partition": 3,
            "max_n_audit": 5,
            "max_n_symmetrize": 5
        },
        "evaluation": {
            "trials": 500,
            "seed": 7,
            "confidence": 0.05,
            "workers": 1
        },
        "graphs": {
            "exhaustive_indegree_limit": 12
        },
        "storage": {
            "instance_dir": "test_instances"
        },
        "logging": {
            "level": "WARNING",
            "format": "%(levelname)s %(message)s",
            "file": "",
            "max_file_size_mb": 1,
            "backup_count": 2,
            "console_output": False
        }
    }

@pytest.fixture
def config_file_with_data(temp_config_file, sample_config_data):
    """Create a config file with sample data"""
    os.makedirs(os.path.dirname(temp_config_file), exist_ok=True)
    with open(temp_config_file, 'w') as f:
        json.dump(sample_config_data, f)
    return temp_config_file

@pytest.fixture
def mock_env_vars():
    """Mock the log level override environment variable"""
    env_vars = {'IMPARTIALKIT_LOG_LEVEL': 'debug'}
    with patch.dict(os.environ, env_vars):
        yield env_vars

@pytest.fixture(autouse=True)
def reset_config_manager():
    """Reset ConfigManager singleton between tests"""
    from src.utils.config_manager import ConfigManager
    ConfigManager._instance = None
    ConfigManager._config = None
    yield
    ConfigManager._instance = None
    ConfigManager._config = None

@pytest.fixture
def mock_config_file_path():
    """Mock the CONFIG_FILE path"""
    def _mock_path(path):
        return patch('src.utils.config_manager.CONFIG_FILE', path)
    return _mock_path

@pytest.fixture
def temp_instance_dir():
    """Create a temporary instance directory"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)

##############################################
# Fixtures for graphs, predictions and specs
##############################################

@pytest.fixture
def rng():
    """Seeded numpy generator"""
    return np.random.default_rng(12345)

@pytest.fixture
def single_edge_graph():
    """Two vertices, 1 nominates 0"""
    return NominationGraph(2, [(1, 0)])

@pytest.fixture
def star_graph():
    """Every other vertex nominates 0 on five vertices"""
    return NominationGraph(5, [(v, 0) for v in range(1, 5)])

@pytest.fixture
def directed_cycle():
    """0 -> 1 -> 2 -> 3 -> 0"""
    return NominationGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])

@pytest.fixture
def fig3_instances():
    return gen_figure_family(InstanceFamily(FigureFamily.FIG3_1SEL))

@pytest.fixture
def fig4_instances():
    return gen_figure_family(InstanceFamily(FigureFamily.FIG4_PLURALITY))

@pytest.fixture
def fig5_instances():
    return gen_figure_family(InstanceFamily(FigureFamily.FIG5_2SEL))

@pytest.fixture
def fig6_instances():
    return gen_figure_family(InstanceFamily(FigureFamily.FIG6_3SEL))

@pytest.fixture
def predict_zero():
    return Prediction([0])

@pytest.fixture
def rho_perm_spec():
    """rho-permutation with rho = 2/3"""
    return MechanismSpec(MechanismKind.RHO_PERMUTATION, rho="2/3")

@pytest.fixture
def uniform_spec():
    return MechanismSpec(MechanismKind.UNIFORM_PERMUTATION)

@pytest.fixture
def bidirectional_spec():
    return MechanismSpec(MechanismKind.FIXED_BIDIRECTIONAL)

@pytest.fixture
def lottery_spec():
    """Half rho-permutation(1), half uniform permutation"""
    return MechanismSpec(
        MechanismKind.LOTTERY,
        mix_weight="1/2",
        a=MechanismSpec(MechanismKind.RHO_PERMUTATION, rho=1),
        b=MechanismSpec(MechanismKind.UNIFORM_PERMUTATION),
    )
