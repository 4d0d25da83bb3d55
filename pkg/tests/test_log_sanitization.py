"""Log line helpers: text sanitizing, step ranges and stage timing"""
import logging

import numpy as np
import pytest

from menroll.core.logging_utils import format_steps, log_stage, sanitize_for_logging


class TestLogSanitization:

    def test_plain_station_id_unchanged(self):
        assert sanitize_for_logging("CS1") == "CS1"

    @pytest.mark.parametrize(
        "raw, expected",
        [
            ("depot\nnorth", "depot\\nnorth"),
            ("depot\rnorth", "depot\\rnorth"),
            ("depot\r\nnorth\nsouth", "depot\\r\\nnorth\\nsouth"),
        ],
    )
    def test_line_breaks_escaped(self, raw, expected):
        assert sanitize_for_logging(raw) == expected

    def test_forged_log_line_stays_on_one_line(self):
        name = "baseline\n2026-01-01 00:00:00 [ERROR] menroll - solver crashed"
        result = sanitize_for_logging(name)
        assert "\n" not in result
        assert result.startswith("baseline\\n")

    def test_control_and_escape_characters_removed(self):
        result = sanitize_for_logging("CS\x002\x01\x1f\x1b[31m red\x1b[0m")
        for ch in ("\x00", "\x01", "\x1f", "\x1b"):
            assert ch not in result
        assert result.startswith("CS2")

    def test_tabs_and_unicode_kept(self):
        assert sanitize_for_logging("Ladepark\tSüd ⚡") == "Ladepark\tSüd ⚡"

    def test_punctuation_kept(self):
        path = "scenarios/winter-2026_v2 (draft).json"
        assert sanitize_for_logging(path) == path

    @pytest.mark.parametrize("length, limit", [(300, 200), (150, 100)])
    def test_long_names_truncated(self, length, limit):
        result = sanitize_for_logging("x" * length, max_length=limit)
        assert len(result) == limit + 3
        assert result.endswith("...")

    def test_short_names_not_truncated(self):
        assert sanitize_for_logging("small", max_length=200) == "small"

    @pytest.mark.parametrize("value, expected", [("", ""), (12345, "12345"), (None, "None")])
    def test_non_text_input(self, value, expected):
        assert sanitize_for_logging(value) == expected


class TestStepFormatting:

    @pytest.mark.parametrize(
        "steps, expected",
        [
            ([], "none"),
            ([19], "19"),
            ([3, 4, 5, 6, 9, 17, 18, 19], "3-6, 9, 17-19"),
            ([5, 3, 4, 4], "3-5"),
        ],
    )
    def test_ranges(self, steps, expected):
        assert format_steps(steps) == expected

    def test_numpy_indices(self):
        assert format_steps(np.flatnonzero(np.array([0.0, 1.0, 1.0, 0.0, 2.0]))) == "1-2, 4"

    def test_long_lists_counted(self):
        assert format_steps(range(0, 20, 2), limit=3) == "0, 2, 4, ... (7 more)"


class TestLogStage:

    def test_success_logged_with_duration(self, caplog):
        logger = logging.getLogger("menroll.test.stage")
        with caplog.at_level(logging.INFO, logger="menroll.test.stage"):
            with log_stage(logger, "day-ahead"):
                pass
        assert any(rec.message.startswith("day-ahead: done in") for rec in caplog.records)

    def test_failure_logged_and_raised(self, caplog):
        logger = logging.getLogger("menroll.test.stage")
        with caplog.at_level(logging.INFO, logger="menroll.test.stage"):
            with pytest.raises(ValueError):
                with log_stage(logger, "rolling"):
                    raise ValueError("boom")
        errors = [rec for rec in caplog.records if rec.levelno == logging.ERROR]
        assert len(errors) == 1
        assert "rolling: failed after" in errors[0].message
        assert "ValueError" in errors[0].message
        assert not any("done in" in rec.message for rec in caplog.records)
