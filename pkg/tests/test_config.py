#!/usr/bin/env python3
"""
Tests for the SmallballConfig class.
"""

import os
import pytest
from unittest.mock import patch, mock_open
from pathlib import Path

from smallball.config import DEFAULTS, SmallballConfig, _coerce

class TestSmallballConfig:
    """Tests for the SmallballConfig class."""

    def test_init_default(self):
        """Test default initialization."""
        with patch('smallball.config.DEFAULT_DATADIR', Path('/home/user/.smallball')):
            config = SmallballConfig(use_env=False)
            assert config.datadir == Path('/home/user/.smallball')

    def test_init_custom_datadir(self):
        """Test initialization with custom datadir."""
        config = SmallballConfig(datadir='/custom/path', use_env=False)
        assert config.datadir == Path('/custom/path')
        assert config._get_config_path() == Path('/custom/path/smallball.conf')

    def test_load_config_file_not_found(self):
        """Test loading config when file not found."""
        with patch('pathlib.Path.exists', return_value=False):
            config = SmallballConfig(use_env=False)
            assert config.config == {}
            assert config.max_atoms == DEFAULTS['max_atoms']
            assert config.get('unknown_key') is None
            assert config.get('unknown_key', 7) == 7

    def test_load_config_file_found(self):
        """Test loading config when file is found."""
        mock_config_content = """
        # sampling
        mc_samples=5000
        esseen_constant=2.5
        candidate_depth = 3
        verbose
        """
        with patch('pathlib.Path.exists', return_value=True):
            with patch('builtins.open', mock_open(read_data=mock_config_content)):
                config = SmallballConfig(use_env=False)
                assert config.mc_samples == 5000
                assert config.esseen_constant == 2.5
                assert config.candidate_depth == 3
                assert config.get('verbose') is True

    def test_env_overrides_file(self):
        """Test SMALLBALL_<KEY> environment variables."""
        with patch('pathlib.Path.exists', return_value=True):
            with patch('builtins.open', mock_open(read_data="max_rank=3\nthreads=2\n")):
                with patch.dict(os.environ, {'SMALLBALL_MAX_RANK': '2'}):
                    config = SmallballConfig()
                    assert config.max_rank == 2
                    assert config.threads == 2

    def test_invalid_value_falls_back(self):
        """Test that unparseable values fall back to the defaults."""
        with patch('pathlib.Path.exists', return_value=True):
            with patch('builtins.open', mock_open(read_data="mc_samples=lots\nzero_mass_tol=tiny\n")):
                config = SmallballConfig(use_env=False)
                assert config.mc_samples == DEFAULTS['mc_samples']
                assert config.zero_mass_tol == DEFAULTS['zero_mass_tol']

    def test_threads_at_least_one(self):
        """Test the thread count floor."""
        with patch('pathlib.Path.exists', return_value=True):
            with patch('builtins.open', mock_open(read_data="threads=0\n")):
                assert SmallballConfig(use_env=False).threads == 1

    def test_dictionary_access(self):
        """Test dictionary-like access."""
        with patch('pathlib.Path.exists', return_value=False):
            config = SmallballConfig(use_env=False)
            assert 'exhaustive_budget' in config
            assert config['exhaustive_budget'] == DEFAULTS['exhaustive_budget']
            assert 'missing' not in config
            with pytest.raises(KeyError):
                config['missing']
            assert config.get_all() == DEFAULTS

    def test_read_error_is_logged(self, tmp_path):
        """Test that an unreadable config file leaves the defaults in place."""
        (tmp_path / 'smallball.conf').mkdir()
        config = SmallballConfig(datadir=tmp_path, use_env=False)
        assert config.config == {}

    @pytest.mark.parametrize("raw,expected", [
        ("12", 12),
        ("-3", -3),
        ("0.5", 0.5),
        ("1e-10", 1e-10),
        ("yes", True),
        ("off", False),
        ("1/3", "1/3"),
    ])
    def test_coerce(self, raw, expected):
        """Test value coercion."""
        assert _coerce(raw) == expected
