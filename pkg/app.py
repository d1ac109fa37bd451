"""tinv dashboard entry point: `streamlit run app.py`."""

from main_app import main

if __name__ == "__main__":
    main()
