"""Blind-spot probability of a localisation target under correlated blocking."""

__version__ = "0.1.0"

from .analytic import (
    GAMMA_FIT,
    NumericalError,
    asymptotic_blindspot,
    conditional_blindspot,
    design_anchor_intensity,
    gamma_cell_area_pdf,
    independent_blindspot_lines,
    independent_blindspot_segments,
    mean_visible_area_lines,
    min_lambda0_for_delta,
    visibility_probability,
)
from .config import ScenarioConfig
from .simulator import (
    EstimateResult,
    estimate_blindspot,
    estimate_mean_unshadowed_area,
    run_sweep,
    sample_cell_areas,
)
