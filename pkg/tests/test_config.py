import logging
from pathlib import Path

import pytest

import config
from config import DEFAULT_GLUE, VerifierOptions, configure_logging


class TestVerifierOptions:
    @staticmethod
    def test_defaults():
        options = VerifierOptions.from_flags()
        assert options.glue == DEFAULT_GLUE
        assert options.heuristics == frozenset()
        assert options.uses_interaction_clocks

    @staticmethod
    def test_no_glue():
        options = VerifierOptions.from_flags(glue="none")
        assert options.glue == frozenset()
        assert not options.uses_interaction_clocks

    @staticmethod
    def test_comma_lists_and_repeated_flags():
        assert VerifierOptions.from_flags(glue="E, estar").glue == frozenset({"e", "estar"})
        assert VerifierOptions.from_flags(glue=["e", "sep,prec"]).glue == frozenset({"e", "sep", "prec"})

    @staticmethod
    def test_prec_via_heuristic():
        options = VerifierOptions.from_flags(glue="e", heuristic="prec")
        assert options.uses_prec
        assert options.uses_interaction_clocks
        assert not VerifierOptions.from_flags(glue="e").uses_interaction_clocks

    @staticmethod
    @pytest.mark.parametrize("kwargs, message", [
        ({"glue": "bogus"}, "Unknown glue family"),
        ({"heuristic": "magic"}, "Unknown heuristic"),
        ({"solver": "cvc"}, "Unknown solver"),
    ])
    def test_rejects_unknown_names(kwargs, message):
        with pytest.raises(ValueError, match=message):
            VerifierOptions.from_flags(**kwargs)

    @staticmethod
    def test_smt_out_becomes_a_path():
        assert VerifierOptions.from_flags(smt_out="q.smt2").smt_out == Path("q.smt2")

    @staticmethod
    def test_with_glue():
        assert VerifierOptions().with_glue("e").glue == frozenset({"e"})


class TestEnvironment:
    @staticmethod
    def test_integer_override(monkeypatch):
        monkeypatch.setenv("TINV_TEST_LIMIT", "12")
        assert config._env_int("TINV_TEST_LIMIT", 5) == 12

    @staticmethod
    def test_bad_integer_falls_back(monkeypatch, caplog):
        monkeypatch.setenv("TINV_TEST_LIMIT", "lots")
        with caplog.at_level(logging.WARNING):
            assert config._env_int("TINV_TEST_LIMIT", 5) == 5
        assert "Ignoring non-integer" in caplog.text

    @staticmethod
    def test_log_level(monkeypatch):
        root = logging.getLogger()
        previous = root.level
        monkeypatch.setenv("TINV_LOG_LEVEL", "info")
        try:
            configure_logging()
            assert root.level == logging.INFO
            configure_logging(verbose=True)
            assert root.level == logging.DEBUG
        finally:
            root.setLevel(previous)
