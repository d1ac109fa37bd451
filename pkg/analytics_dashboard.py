"""Verification dashboard: verdict, invariants, zone graphs and archived runs."""

import streamlit as st

from model_core import format_formula
from traps import format_semiflows, format_traps
from ui_components import display_model_overview, display_verdict
from visualizations import VerificationVisualizer


def display_analytics():
    """Display the main verification dashboard."""
    model = st.session_state.model
    report = st.session_state.report
    bundle = st.session_state.bundle
    visualizer = st.session_state.visualizer or VerificationVisualizer()

    display_model_overview(model)
    st.divider()

    if report is not None:
        display_verdict(report)

    tab1, tab2, tab3, tab4, tab5 = st.tabs([
        "📊 Run",
        "🧩 Invariants",
        "🕸️ Zone graphs",
        "🔍 Counter-example",
        "🗂️ Archive",
    ])

    with tab1:
        show_run_summary(report, visualizer)
    with tab2:
        show_invariants(bundle)
    with tab3:
        show_zone_graphs(bundle, visualizer)
    with tab4:
        show_counter_example(report)
    with tab5:
        show_archive(visualizer)

    with st.expander("📄 Model source"):
        st.code(st.session_state.model_text or "", language="text")


def show_run_summary(report, visualizer):
    st.header("Run")
    if report is None:
        st.info("No check run yet for this model.")
        return
    col1, col2 = st.columns(2)
    with col1:
        st.plotly_chart(visualizer.create_timings_chart(report.timings), width='stretch')
    with col2:
        st.plotly_chart(visualizer.create_sizes_chart(report.sizes), width='stretch')
    st.write(f"**Glue:** {', '.join(report.glue) or 'none'}  |  **Heuristics:** "
             f"{', '.join(report.heuristics) or 'none'}  |  **Branches:** {report.branches}")


def show_invariants(bundle):
    st.header("Invariants")
    if bundle is None:
        st.info("Run a check to see the generated invariants.")
        return
    for name, formula in bundle.component_invariants.items():
        with st.expander(f"CI({name})"):
            st.code(format_formula(formula), language="text")
    if bundle.interaction_invariant is not None:
        with st.expander(f"Interaction invariant ({len(bundle.traps)} traps)"):
            st.code(format_traps(bundle.traps), language="text")
            st.code(format_formula(bundle.interaction_invariant), language="text")
    if bundle.place_invariant is not None:
        with st.expander(f"Place invariants ({len(bundle.semiflows)} semiflows)"):
            st.code(format_semiflows(bundle.semiflows), language="text")
            st.code(format_formula(bundle.place_invariant), language="text")
    for glue in bundle.glue:
        with st.expander(f"Glue {glue.provenance.value} ({glue.size} atoms)"):
            st.code(format_formula(glue.formula), language="text")
    if bundle.separation:
        st.write("**Separation constants**")
        st.dataframe({"action": list(bundle.separation), "k": list(bundle.separation.values())})


def show_zone_graphs(bundle, visualizer):
    st.header("Zone graphs")
    if bundle is None or not bundle.graphs:
        st.info("No zone graphs explored in this run.")
        return
    name = st.selectbox("Component:", list(bundle.graphs))
    graph = bundle.graphs[name]
    st.plotly_chart(visualizer.create_zone_graph_chart(graph), width='stretch')
    col1, col2 = st.columns([1, 2])
    with col1:
        st.plotly_chart(visualizer.create_location_histogram(graph), width='stretch')
    with col2:
        st.dataframe(graph.to_frame(), width='stretch')


def show_counter_example(report):
    st.header("Potential counter-example")
    if report is None or not report.witness:
        st.info("No witness: the property was proved or no check has run.")
        return
    st.warning("⚠️ A state satisfying GI and violating the property. It may be unreachable.")
    st.code("\n".join(report.witness), language="text")


def show_archive(visualizer):
    st.header("Archived runs")
    frame = st.session_state.storage.load_frame()
    if frame.empty:
        st.info("No archived runs yet.")
        return
    st.plotly_chart(visualizer.create_history_chart(frame), width='stretch')
    st.dataframe(frame.sort_values("created_at", ascending=False), width='stretch')
