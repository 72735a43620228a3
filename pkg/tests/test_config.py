#!/usr/bin/env python3
"""
Tests for environment-driven configuration
Malformed values are reported by validate() instead of failing at import
"""

import io
import pytest
import sys
import os

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from config import Config, config
from main import main


class TestCacheSize:
    """HDKG_CACHE_SIZE parsing"""

    def test_default(self, monkeypatch):
        monkeypatch.setattr(Config, 'HDKG_CACHE_SIZE', '64')
        assert Config.cache_size() == 64
        assert Config.validate()

    def test_custom_value_with_spaces(self, monkeypatch):
        monkeypatch.setattr(Config, 'HDKG_CACHE_SIZE', ' 128 ')
        assert Config.cache_size() == 128

    @pytest.mark.parametrize("raw", ['abc', '0', '-3', '1.5', ''])
    def test_malformed_value_reported_by_validate(self, monkeypatch, raw):
        monkeypatch.setattr(Config, 'HDKG_CACHE_SIZE', raw)
        assert Config.cache_size() == Config.DEFAULT_CACHE_SIZE
        with pytest.raises(ValueError, match="HDKG_CACHE_SIZE"):
            Config.validate()

    def test_malformed_value_gives_exit_2(self, monkeypatch):
        """Test 1: the CLI maps a bad cache size to a validation exit"""
        print("🧪 Test 1: Malformed HDKG_CACHE_SIZE through the CLI")
        monkeypatch.setattr(Config, 'HDKG_CACHE_SIZE', 'lots')
        out, err = io.StringIO(), io.StringIO()
        code = main(['roots', '--from', '1', '--to', '1'], stdout=out, stderr=err)
        assert code == 2
        assert 'HDKG_CACHE_SIZE' in err.getvalue()
        assert out.getvalue() == ''
        print("✅ Exit 2 with the offending key named")


class TestThreads:
    """HDKG_THREADS parsing"""

    def test_explicit_thread_count(self, monkeypatch):
        monkeypatch.setattr(Config, 'HDKG_THREADS', '3')
        assert config.worker_count() == 3

    def test_empty_uses_cpu_count(self, monkeypatch):
        monkeypatch.setattr(Config, 'HDKG_THREADS', '')
        assert config.worker_count() >= 1
        assert Config.validate()

    def test_malformed_threads(self, monkeypatch):
        monkeypatch.setattr(Config, 'HDKG_THREADS', 'many')
        with pytest.raises(ValueError, match="HDKG_THREADS"):
            Config.validate()
