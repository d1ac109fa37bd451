"""Main application module for the tinv dashboard."""

import streamlit as st

from analytics_dashboard import display_analytics
from config import configure_logging, setup_app_title, setup_page_config
from data_management import initialize_session_state
from ui_components import display_welcome_screen, show_model_input, show_run_controls


def setup_sidebar():
    """Setup sidebar content: model choice and run switches."""
    with st.sidebar:
        show_model_input()
        show_run_controls()


def main():
    """Main application function."""
    setup_page_config()
    configure_logging()

    # Setup main title
    setup_app_title()

    # Initialize session state
    initialize_session_state()

    # Setup sidebar
    setup_sidebar()

    if st.session_state.model is not None:
        display_analytics()
    else:
        display_welcome_screen()
