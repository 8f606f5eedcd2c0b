"""Unit tests for configuration loading and precedence."""

from pathlib import Path

import pytest

from app.config import Config, WebConfig
from app.core.exceptions import ConfigError
from app.models import SourceCategory


class TestConfig:
    """Test defaults, YAML files, environment and overrides."""

    def test_defaults(self):
        cfg = Config()

        assert cfg.scan.top_n == 25
        assert cfg.web.presume_auth is True
        assert cfg.web.presume_local is False
        assert cfg.purge.allow_auth is False
        assert cfg.purge.partial_len == 1_048_576
        assert "sharepoint.com" in cfg.categories.cloud_collaboration
        assert SourceCategory.WEBMAIL in cfg.categories.presume_auth_categories

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("WEBPURGE_CONCURRENCY", "9")
        monkeypatch.setenv("WEBPURGE_TOP_N", "7")

        cfg = Config()

        assert cfg.web.concurrency == 9
        assert cfg.scan.top_n == 7

    def test_yaml_beats_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("WEBPURGE_CONCURRENCY", "9")
        config_file = tmp_path / "webpurge.yml"
        config_file.write_text("web:\n  concurrency: 3\npurge:\n  store_dir: /tmp/recipes\n")

        cfg = Config(config_file)

        assert cfg.web.concurrency == 3
        assert cfg.purge.store_dir == Path("/tmp/recipes")

    def test_flags_beat_yaml(self, tmp_path):
        config_file = tmp_path / "webpurge.yml"
        config_file.write_text("web:\n  concurrency: 3\n  timeout_secs: 5\n")

        cfg = Config(config_file).override(web={"concurrency": 12, "timeout_secs": None})

        assert cfg.web.concurrency == 12
        assert cfg.web.timeout_secs == 5

    def test_user_categories_replace_single_lists(self, tmp_path):
        config_file = tmp_path / "webpurge.yml"
        config_file.write_text("categories:\n  small_csp:\n    - Files.Example.COM\n")

        cfg = Config(config_file)

        assert cfg.categories.small_csp == ["files.example.com"]
        assert "outlook.office.com" in cfg.categories.webmail

    @pytest.mark.parametrize(
        "content,message",
        [
            ("bogus: {}\n", "unknown config sections"),
            ("web: [1, 2\n", "cannot parse"),
            ("- a\n- b\n", "must contain a mapping"),
            ("web:\n  concurrency: 0\n", "invalid configuration"),
        ],
    )
    def test_invalid_files(self, tmp_path, content, message):
        config_file = tmp_path / "webpurge.yml"
        config_file.write_text(content)

        with pytest.raises(ConfigError, match=message):
            Config(config_file)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            Config(tmp_path / "missing.yml")

    def test_invalid_override(self):
        with pytest.raises(ConfigError):
            Config().override(web={"timeout_secs": -1})
        with pytest.raises(ConfigError):
            Config().override(network={"x": 1})

    def test_web_config_validation(self):
        with pytest.raises(ValueError):
            WebConfig(max_candidate_probes=0)
