"""Scenario loading, closed-loop simulation, traces and summaries."""
from .runner import Simulation, run
from .scenario import (METHODS, HeadingReference, InnerLoop, ObserverConfig, Scenario,
                       build_path, load_scenario, load_scenario_file, parse_document, schema)
from .trace import (COLUMNS, Metrics, TraceTable, compute_metrics, convergence_time,
                    lyapunov_violations, read_csv, summarize, write_csv)

__all__ = [
    "METHODS", "COLUMNS", "HeadingReference", "InnerLoop", "Metrics", "ObserverConfig",
    "Scenario", "Simulation", "TraceTable", "build_path", "compute_metrics",
    "convergence_time", "load_scenario", "load_scenario_file", "lyapunov_violations",
    "parse_document", "read_csv", "run", "schema", "summarize", "write_csv",
]
