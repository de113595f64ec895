"""pytest configuration"""

import os
from configparser import ConfigParser

import numpy as np
import pytest

from spikeesn.esn.pipeline import EncoderConfig, ModelConfig
from spikeesn.esn.reservoir import ReservoirConfig
from spikeesn.esn.timeseries import NormParams, Series, gen_synthetic


@pytest.fixture(scope="session")
def user_conf_file(tmp_path_factory, request):
    """Fixture to create a custom configuration file in tmp_path"""
    # custom configuration file
    config_data = request.param
    user_config = ConfigParser(allow_no_value=True)
    user_config.read_string(config_data)
    user_path = os.path.join(tmp_path_factory.mktemp("data"), "test_config.ini")
    with open(user_path, "w", encoding="utf8") as config_file:
        user_config.write(config_file)
    return user_path


@pytest.fixture
def isolated_config(monkeypatch, tmp_path):
    """Point the user configuration file into tmp_path"""
    user_path = os.path.join(tmp_path, "home", "configuration.ini")
    monkeypatch.setattr("spikeesn.configuration.CONFIG_PATH_FILE", user_path)
    return user_path


@pytest.fixture(scope="session")
def mackey_glass():
    """2000-point Mackey-Glass series"""
    return gen_synthetic("mackey_glass", 2000, seed=3)


@pytest.fixture(scope="session")
def mackey_glass_fine():
    """2000-point Mackey-Glass series sampled every quarter time unit, about 200 values per oscillation"""
    return gen_synthetic("mackey_glass", 2000, seed=3, sample_interval=0.25)


@pytest.fixture
def unit_norm():
    """Normalization over [0, 1]"""
    return NormParams(u_min=0.0, u_max=1.0)


@pytest.fixture
def small_config():
    """Small model that trains in well under a second"""
    return ModelConfig(
        encoder=EncoderConfig(n_sam=20, psi=50.0),
        reservoir=ReservoirConfig(n_res=30, rho=0.9, eta=0.2, input_scale=0.8),
        mu=1e-6,
        washout=20,
        steps=(1, 2),
        mode="spike",
        train_fraction=0.8,
    )


@pytest.fixture
def sine_series():
    """Noise-free 300-point sinusoid"""
    t = np.arange(300, dtype=float)
    return Series(np.sin(2.0 * np.pi * t / 25.0), name="sine")
