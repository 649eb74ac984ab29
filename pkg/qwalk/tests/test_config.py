"""
Tests for settings loading and logging setup.
"""

import json
import logging

import pytest
from rich.logging import RichHandler

from qwalk.config import configure_logging, load_settings, load_settings_file
from qwalk.errors import ConfigError

pytestmark = pytest.mark.unit


class TestSettingsFile:
    """Raw settings file handling."""

    def test_missing_file_gives_empty(self, tmp_path):
        """No file means defaults."""
        assert load_settings_file(tmp_path / "absent.json") == {}

    def test_missing_file_warns(self, tmp_path, caplog):
        """A missing settings file is reported at WARNING."""
        config_logger = logging.getLogger("qwalk.config")
        config_logger.addHandler(caplog.handler)
        try:
            with caplog.at_level(logging.WARNING, logger="qwalk.config"):
                load_settings_file(tmp_path / "absent.json")
        finally:
            config_logger.removeHandler(caplog.handler)
        warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
        assert any("absent.json" in r.getMessage() for r in warnings)

    def test_malformed_file_gives_empty(self, tmp_path):
        """Unparseable JSON falls back to defaults."""
        path = tmp_path / "qwalk.json"
        path.write_text("{not json")
        assert load_settings_file(path) == {}


class TestLoadSettings:
    """Validated settings with environment fallback."""

    def test_defaults(self, tmp_path):
        """Nothing configured gives the documented defaults."""
        settings = load_settings(tmp_path / "absent.json", environ={})
        assert settings.log_level == "INFO"
        assert settings.parallel == 1
        assert settings.unitary_tol == 1e-12
        assert settings.norm_tol == 1e-10
        assert settings.seed is None

    def test_environment_fallback(self, tmp_path):
        """Environment fills keys the file does not set."""
        settings = load_settings(tmp_path / "absent.json", environ={"QWALK_PARALLEL": "4", "QWALK_SEED": "7"})
        assert settings.parallel == 4
        assert settings.seed == 7

    def test_file_wins_over_environment(self, tmp_path):
        """File values take precedence."""
        path = tmp_path / "qwalk.json"
        path.write_text(json.dumps({"parallel": 2, "comment": "local"}))
        settings = load_settings(path, environ={"QWALK_PARALLEL": "8"})
        assert settings.parallel == 2

    def test_empty_environment_value_ignored(self, tmp_path):
        """Blank variables do not override defaults."""
        settings = load_settings(tmp_path / "absent.json", environ={"QWALK_OUTPUT_DIR": ""})
        assert settings.output_dir == "results"

    def test_invalid_value_names_field(self, tmp_path):
        """Validation errors become ConfigError naming the setting."""
        with pytest.raises(ConfigError) as exc_info:
            load_settings(tmp_path / "absent.json", environ={"QWALK_PARALLEL": "0"})
        assert "parallel" in str(exc_info.value)


class TestLogging:
    """Rich handler installation."""

    def test_handler_installed_once(self):
        """Repeated calls keep a single Rich handler."""
        configure_logging("INFO")
        logger = configure_logging("DEBUG")
        handlers = [h for h in logger.handlers if isinstance(h, RichHandler)]
        assert len(handlers) == 1
        assert logger.level == logging.DEBUG

    def test_handler_writes_to_stderr(self):
        """Log records stay off stdout."""
        logger = configure_logging("INFO")
        handler = next(h for h in logger.handlers if isinstance(h, RichHandler))
        assert handler.console.stderr is True

    def test_log_lines_do_not_reach_stdout(self, capsys):
        """Command output on stdout is not interleaved with log lines."""
        logger = configure_logging("INFO")
        logger.info("Wrote somewhere")
        captured = capsys.readouterr()
        assert "Wrote somewhere" not in captured.out
        assert "Wrote somewhere" in captured.err
