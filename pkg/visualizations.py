import networkx as nx
import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from model_core import TAU


class VerificationVisualizer:
    """Class for creating visualizations of verification runs."""

    def __init__(self, report=None, bundle=None):
        self.report = report
        self.bundle = bundle

    def create_zone_graph_chart(self, graph, seed=7):
        """Zone graph of one component: nodes are symbolic states coloured by location."""
        if not graph.states:
            return self._create_empty_chart("No reachable states")

        g = graph.to_networkx()
        pos = nx.spring_layout(nx.DiGraph(g), seed=seed)

        edge_x, edge_y, label_x, label_y, labels = [], [], [], [], []
        for src, dst, data in g.edges(data=True):
            (x0, y0), (x1, y1) = pos[src], pos[dst]
            edge_x += [x0, x1, None]
            edge_y += [y0, y1, None]
            label_x.append((x0 + x1) / 2)
            label_y.append((y0 + y1) / 2)
            labels.append(data.get("action") or TAU)

        fig = go.Figure()
        fig.add_trace(go.Scatter(
            x=edge_x, y=edge_y, mode="lines", line=dict(width=1, color="#999"), hoverinfo="none", showlegend=False
        ))
        fig.add_trace(go.Scatter(
            x=label_x, y=label_y, mode="text", text=labels, textfont=dict(size=10, color="#555"),
            hoverinfo="none", showlegend=False
        ))
        for location in graph.locations:
            nodes = [k for k, s in enumerate(graph.states) if s.location == location]
            fig.add_trace(go.Scatter(
                x=[pos[k][0] for k in nodes],
                y=[pos[k][1] for k in nodes],
                mode="markers+text",
                name=location,
                text=[f"S{k}" for k in nodes],
                textposition="top center",
                hovertext=[g.nodes[k]["zone"] for k in nodes],
                hoverinfo="text",
                marker=dict(size=16),
            ))

        fig.update_layout(
            title=f"Zone graph of {graph.component.name} ({len(graph.states)} states)",
            height=500,
            xaxis=dict(showgrid=False, showticklabels=False, zeroline=False),
            yaxis=dict(showgrid=False, showticklabels=False, zeroline=False),
        )
        return fig

    def create_timings_chart(self, timings=None):
        """Bar chart of seconds spent per pipeline stage."""
        if timings is None:
            timings = self.report.timings if self.report else {}
        if not timings:
            return self._create_empty_chart("No timings recorded")

        fig = px.bar(
            x=list(timings.keys()),
            y=list(timings.values()),
            title="Time per stage",
            labels={"x": "Stage", "y": "Seconds"},
            color=list(timings.keys()),
        )
        fig.update_layout(height=400, showlegend=False)
        return fig

    def create_sizes_chart(self, sizes=None):
        """Invariant sizes on a log scale; CI counts disjuncts, II counts clauses."""
        if sizes is None:
            sizes = self.report.sizes if self.report else {}
        sizes = {k: v for k, v in sizes.items() if v}
        if not sizes:
            return self._create_empty_chart("No invariant sizes")

        fig = px.bar(
            x=list(sizes.values()),
            y=list(sizes.keys()),
            orientation="h",
            title="Invariant sizes",
            labels={"x": "Size", "y": "Conjunct"},
            log_x=max(sizes.values()) > 100,
        )
        fig.update_layout(height=max(300, 30 * len(sizes)), yaxis={"categoryorder": "total ascending"})
        return fig

    def create_history_chart(self, frame):
        """Archived runs over time, coloured by verdict."""
        if frame is None or frame.empty:
            return self._create_empty_chart("No archived runs")

        data = frame.copy()
        data["created_at"] = pd.to_datetime(data["created_at"], errors="coerce")
        fig = px.scatter(
            data,
            x="created_at",
            y="t",
            color="verdict",
            symbol="model",
            hover_data=["property", "glue", "heuristics"],
            title="Archived verification runs",
            labels={"created_at": "Run", "t": "Total seconds"},
        )
        fig.update_layout(height=400)
        return fig

    def create_bench_chart(self, table):
        """Total and solver time per benchmark model."""
        if table is None or table.empty:
            return self._create_empty_chart("No benchmark rows")

        long = table.melt(id_vars=["model", "verdict"], value_vars=["t", "t_solver"], var_name="kind", value_name="s")
        fig = px.bar(
            long, x="model", y="s", color="kind", barmode="group",
            hover_data=["verdict"], title="Benchmark timings", labels={"s": "Seconds", "model": "Model"},
        )
        fig.update_layout(height=400, xaxis_tickangle=-45)
        return fig

    def create_location_histogram(self, graph):
        """Number of symbolic states per location."""
        if not graph.states:
            return self._create_empty_chart("No reachable states")
        locations = np.array([s.location for s in graph.states])
        names, counts = np.unique(locations, return_counts=True)
        fig = px.bar(x=names, y=counts, title="States per location", labels={"x": "Location", "y": "States"})
        fig.update_layout(height=300)
        return fig

    def _create_empty_chart(self, message):
        """Create an empty chart with a message."""
        fig = go.Figure()
        fig.add_annotation(
            text=message,
            xref="paper", yref="paper",
            x=0.5, y=0.5,
            xanchor='center', yanchor='middle',
            showarrow=False,
            font=dict(size=16)
        )
        fig.update_layout(
            height=400,
            xaxis=dict(showgrid=False, showticklabels=False),
            yaxis=dict(showgrid=False, showticklabels=False)
        )
        return fig
