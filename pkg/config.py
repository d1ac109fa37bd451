"""Configuration module for the tinv verifier and dashboard."""

import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path


def _env_int(name, default):
    """Read an integer override from the environment."""
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"⚠️ Ignoring non-integer {name}={raw!r}")
        return default


# Exploration and solver limits
STATE_LIMIT = _env_int("TINV_STATE_LIMIT", 100000)
TRAP_LIMIT = _env_int("TINV_TRAP_LIMIT", 10000)
SEMIFLOW_LIMIT = _env_int("TINV_SEMIFLOW_LIMIT", 2000)
CUBE_BUDGET = _env_int("TINV_CUBE_BUDGET", 1000000)
GLUE_SIZE_LIMIT = _env_int("TINV_GLUE_SIZE_LIMIT", 200000)
REWRITE_LIMIT = _env_int("TINV_REWRITE_LIMIT", 10000)
BRANCH_LIMIT = _env_int("TINV_BRANCH_LIMIT", 5000)
PRODUCT_LIMIT = _env_int("TINV_PRODUCT_LIMIT", 200000)
DIFFCAP_FACTOR = _env_int("TINV_DIFFCAP_FACTOR", 2)

MODELS_DIR = Path(os.environ.get("TINV_MODELS_DIR", Path(__file__).resolve().parent / "models"))
REPORTS_DIR = os.environ.get("TINV_REPORTS_DIR", "data")

GLUE_FAMILIES = ("e", "estar", "sep", "sepc", "prec")
HEURISTICS = ("regex", "prec")
SOLVERS = ("internal", "smtlib")
DEFAULT_GLUE = frozenset({"estar", "sep"})

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbose=False):
    """Configure root logging once for CLI or dashboard use."""
    level_name = os.environ.get("TINV_LOG_LEVEL")
    if verbose:
        level = logging.DEBUG
    elif level_name:
        level = getattr(logging, level_name.upper(), logging.WARNING)
    else:
        level = logging.WARNING
    logging.basicConfig(format=LOG_FORMAT, level=level)
    logging.getLogger().setLevel(level)


def _split_flags(value):
    if value is None:
        return []
    if isinstance(value, str):
        value = [value]
    names = []
    for chunk in value:
        names.extend(part.strip().lower() for part in chunk.split(",") if part.strip())
    return names


@dataclass(frozen=True)
class VerifierOptions:
    """Switches and limits for one verification run."""

    glue: frozenset = DEFAULT_GLUE
    heuristics: frozenset = frozenset()
    symmetry: bool = False
    solver: str = "internal"
    smt_out: Path | None = None
    allow_history_props: bool = False
    exact_separation: bool = False
    use_traps: bool = True
    use_place_invariants: bool = True
    state_limit: int = STATE_LIMIT
    trap_limit: int = TRAP_LIMIT
    semiflow_limit: int = SEMIFLOW_LIMIT
    cube_budget: int = CUBE_BUDGET
    glue_size_limit: int = GLUE_SIZE_LIMIT
    rewrite_limit: int = REWRITE_LIMIT
    diffcap_factor: int = DIFFCAP_FACTOR
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_flags(cls, glue=None, heuristic=None, **kwargs):
        """Build options from CLI-style comma separated lists."""
        glue_names = _split_flags(glue)
        if glue is None:
            glue_set = DEFAULT_GLUE
        elif glue_names == ["none"]:
            glue_set = frozenset()
        else:
            unknown = [g for g in glue_names if g not in GLUE_FAMILIES]
            if unknown:
                raise ValueError(f"Unknown glue family: {', '.join(unknown)}")
            glue_set = frozenset(glue_names)

        heuristic_names = [h for h in _split_flags(heuristic) if h != "none"]
        unknown = [h for h in heuristic_names if h not in HEURISTICS]
        if unknown:
            raise ValueError(f"Unknown heuristic: {', '.join(unknown)}")

        solver = kwargs.get("solver", "internal")
        if solver not in SOLVERS:
            raise ValueError(f"Unknown solver: {solver}")
        if kwargs.get("smt_out") is not None:
            kwargs["smt_out"] = Path(kwargs["smt_out"])
        return cls(glue=glue_set, heuristics=frozenset(heuristic_names), **kwargs)

    @property
    def uses_interaction_clocks(self):
        return bool(self.glue & {"estar", "sep", "sepc", "prec"}) or "prec" in self.heuristics

    @property
    def uses_prec(self):
        return "prec" in self.glue or "prec" in self.heuristics

    def with_glue(self, *names):
        return replace(self, glue=frozenset(names))


def setup_page_config():
    """Set up Streamlit page configuration."""
    import streamlit as st

    st.set_page_config(
        page_title="tinv - Compositional Timed Verification",
        page_icon="⏱️",
        layout="wide",
        initial_sidebar_state="expanded"
    )


def setup_app_title():
    """Set up main application title and description."""
    import streamlit as st

    st.title("⏱️ tinv - Compositional Verification of Timed Systems")
    st.markdown("### Generate component, interaction and history-clock invariants and check safety properties")
