"""Data management module for the tinv dashboard."""

import logging

import streamlit as st

from config import MODELS_DIR, VerifierOptions
from errors import TinvError
from model_parser import load_model, parse_model
from persistent_storage import ReportStorage
from verifier import run
from visualizations import VerificationVisualizer

logger = logging.getLogger(__name__)


def bundled_models():
    """Bundled model files by display name."""
    return {p.stem: p for p in sorted(MODELS_DIR.glob("*.tinv"))}


def initialize_session_state():
    """Initialize session state with storage and an empty run."""
    if 'storage' not in st.session_state:
        st.session_state.storage = ReportStorage()
    for key in ('model', 'model_text', 'report', 'bundle', 'visualizer'):
        st.session_state.setdefault(key, None)


def load_bundled_model(name):
    """Load a bundled model into the session."""
    path = bundled_models()[name]
    try:
        st.session_state.model = load_model(path)
        st.session_state.model_text = path.read_text(encoding="utf-8")
    except TinvError as e:
        st.error(f"❌ Error loading {name}: {e}")
        st.session_state.model = None
        return False
    return True


def handle_file_upload(uploaded_file):
    """Parse an uploaded `.tinv` file."""
    try:
        text = uploaded_file.getvalue().decode("utf-8")
    except UnicodeDecodeError:
        st.error("❌ The file is not UTF-8 text.")
        return False
    try:
        st.session_state.model = parse_model(text, source=uploaded_file.name)
        st.session_state.model_text = text
    except TinvError as e:
        st.error(f"❌ {e}")
        return False
    st.success(f"✅ Model {uploaded_file.name} loaded")
    return True


def run_verification(prop_name, glue, heuristics, symmetry, allow_history_props):
    """Check the current model and archive the report."""
    model = st.session_state.model
    if model is None:
        st.warning("⚠️ Load a model first.")
        return None
    try:
        options = VerifierOptions.from_flags(
            glue=glue or ["none"],
            heuristic=heuristics,
            symmetry=symmetry,
            allow_history_props=allow_history_props,
        )
    except ValueError as e:
        st.error(f"❌ {e}")
        return None

    with st.spinner(f"Checking {prop_name}..."):
        report, bundle = run(model, prop_name, options)
    st.session_state.report = report
    st.session_state.bundle = bundle
    st.session_state.visualizer = VerificationVisualizer(report, bundle)
    st.session_state.storage.save_report(report)
    logger.info(f"📊 Dashboard run {report.property}: {report.verdict.value}")
    return report


def clear_all_data():
    """Forget the current run and the archive."""
    st.session_state.storage.clear_all_data()
    st.session_state.report = None
    st.session_state.bundle = None
    st.session_state.visualizer = None
    st.rerun()
