"""UI components module for the tinv dashboard."""

import streamlit as st

from config import DEFAULT_GLUE, GLUE_FAMILIES, HEURISTICS
from data_management import bundled_models, clear_all_data, handle_file_upload, load_bundled_model, run_verification
from verifier import DEADLOCK

VERDICT_ICONS = {"PROVED": "✅", "UNKNOWN": "⚠️", "BUDGET": "⏳", "ERROR": "❌"}


def show_model_input():
    """Show model selection in the sidebar."""
    st.header("📂 Model")
    source = st.radio("Source:", ["Bundled model", "Upload .tinv file"])

    if source == "Bundled model":
        names = list(bundled_models())
        if not names:
            st.warning("⚠️ No bundled models found.")
            return
        name = st.selectbox("Model:", names)
        if st.session_state.get('model_name') != name:
            if load_bundled_model(name):
                st.session_state.model_name = name
                st.session_state.report = None
    else:
        uploaded_file = st.file_uploader("Model file", type=['tinv', 'txt'])
        if uploaded_file is not None and st.session_state.get('model_name') != uploaded_file.name:
            if handle_file_upload(uploaded_file):
                st.session_state.model_name = uploaded_file.name
                st.session_state.report = None


def show_run_controls():
    """Property and pipeline switches; runs the check on demand."""
    model = st.session_state.model
    if model is None:
        return

    st.divider()
    st.header("⚙️ Verification")
    prop_name = st.selectbox("Property:", [*model.property_names, DEADLOCK])
    glue = st.multiselect("Glue:", list(GLUE_FAMILIES), default=sorted(DEFAULT_GLUE))
    heuristics = st.multiselect("Heuristics:", list(HEURISTICS))
    symmetry = st.checkbox("Symmetry reduction", disabled=not model.symmetry,
                           help="Needs a symmetry declaration in the model")
    allow_history = st.checkbox("Allow history clocks in the property")

    if st.button("▶️ Check", type="primary"):
        run_verification(prop_name, glue, heuristics, symmetry, allow_history)

    st.divider()
    if 'show_clear_confirmation' not in st.session_state:
        st.session_state.show_clear_confirmation = False
    if not st.session_state.show_clear_confirmation:
        if st.button("🗑️ Clear archived runs", type="secondary"):
            st.session_state.show_clear_confirmation = True
            st.rerun()
    else:
        st.warning("⚠️ Remove every archived report?")
        col1, col2 = st.columns(2)
        with col1:
            if st.button("Yes"):
                st.session_state.show_clear_confirmation = False
                clear_all_data()
        with col2:
            if st.button("No"):
                st.session_state.show_clear_confirmation = False
                st.rerun()


def display_model_overview(model):
    """Benchmark-table counts of the loaded model."""
    stats = model.stats()
    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("Components", stats["n"])
    with col2:
        st.metric("Locations", stats["q"])
    with col3:
        st.metric("Clocks", stats["c"])
    with col4:
        st.metric("Interactions", stats["i"])


def display_verdict(report):
    icon = VERDICT_ICONS[report.verdict.value]
    text = f"{icon} **{report.property}**: {report.verdict.value} in {report.total_time:.2f}s"
    if report.verdict.value == "PROVED":
        st.success(text)
    elif report.verdict.value == "ERROR":
        st.error(text)
    else:
        st.warning(text)
    if report.message:
        st.caption(report.message)


def display_welcome_screen():
    """Display welcome screen with instructions."""
    st.info("👈 Pick a bundled model or upload a `.tinv` file in the sidebar, then run a check.")
    with st.expander("📋 Model format"):
        st.code(
            "component Worker\n"
            "  clock y\n"
            "  location l1 initial\n"
            "  location l2\n"
            "  edge l1 -> l2 on b guard y >= 4\n"
            "  edge l2 -> l1 on d reset y\n"
            "end\n\n"
            "system\n"
            "  instance c Controller\n"
            "  instance w1 Worker\n"
            "  interaction ab1 = c.a | w1.b\n"
            "  property safe: c@lc1 and w1@l1 implies c.x - w1.y <= 0\n"
            "end",
            language="text",
        )
