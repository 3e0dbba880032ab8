"""Exact enumeration and safety evaluation of 3+3 dose-escalation trials."""

__version__ = "0.1.0"

from .paths import (  # noqa: E402
    DesignTables,
    Path,
    build_tables,
    design_tables,
    enumerate_paths,
    path_to_matrix,
)
from .pharm import DoseHazards, NormScenario, RawScenario, hazards, normalize  # noqa: E402
from .safety import (  # noqa: E402
    Metric,
    SafetySummary,
    expected_fatalities,
    path_probabilities,
    prob_any_fatality,
    summarize,
)
from .schematic import minimax_slice, safety_field, schematic_point  # noqa: E402

__all__ = [
    "DesignTables", "Path", "build_tables", "design_tables", "enumerate_paths",
    "path_to_matrix", "DoseHazards", "NormScenario", "RawScenario", "hazards",
    "normalize", "Metric", "SafetySummary", "expected_fatalities",
    "path_probabilities", "prob_any_fatality", "summarize", "minimax_slice",
    "safety_field", "schematic_point",
]
