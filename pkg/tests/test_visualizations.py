import pandas as pd

from cli import BENCH_COLUMNS
from visualizations import VerificationVisualizer
from zone_graph import ZoneGraph, reach


class TestVerificationVisualizer:
    @staticmethod
    def test_zone_graph_chart(wc1):
        fig = VerificationVisualizer().create_zone_graph_chart(reach(wc1.instance("c")))
        assert len(fig.data) == 2 + 3
        assert {trace.name for trace in fig.data[2:]} == {"lc0", "lc1", "lc2"}

    @staticmethod
    def test_empty_graph(wc1):
        fig = VerificationVisualizer().create_zone_graph_chart(ZoneGraph(wc1.instance("c")))
        assert len(fig.data) == 0
        assert fig.layout.annotations[0].text == "No reachable states"

    @staticmethod
    def test_location_histogram(wc1):
        fig = VerificationVisualizer().create_location_histogram(reach(wc1.instance("c")))
        assert sum(fig.data[0].y) == 3
        assert list(fig.data[0].x) == ["lc0", "lc1", "lc2"]

    @staticmethod
    def test_timings_and_sizes():
        viz = VerificationVisualizer()
        assert len(viz.create_timings_chart({"reach": 0.1, "check": 0.2}).data) == 2
        assert viz.create_timings_chart({}).layout.annotations[0].text == "No timings recorded"
        fig = viz.create_sizes_chart({"CI[c]": 5, "II": 2, "GI atoms": 0})
        assert list(fig.data[0].y) == ["CI[c]", "II"]

    @staticmethod
    def test_bench_chart():
        table = pd.DataFrame(
            [["wc1", 2, 5, 2, 2, 5, "PROVED", 0.4, 0.1]], columns=BENCH_COLUMNS,
        )
        fig = VerificationVisualizer().create_bench_chart(table)
        assert {trace.name for trace in fig.data} == {"t", "t_solver"}

    @staticmethod
    def test_history_chart_without_runs():
        fig = VerificationVisualizer().create_history_chart(pd.DataFrame())
        assert fig.layout.annotations[0].text == "No archived runs"
