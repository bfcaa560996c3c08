"""Evans-function spectral stability of viscous shocks in isentropic gas dynamics."""
__version__ = "0.1.0"

from .backend import BACKEND  # noqa: E402
from .bounds import hf_bound, mn_condition, sharp_condition, stability_boundary  # noqa: E402
from .evans import EvansSystem, domain_length  # noqa: E402
from .evolution import Grid1D, simulate  # noqa: E402
from .model import ShockParams, mach, rh_coefficient, solve_profile, vplus_from_mach  # noqa: E402
from .winding import build_contour, contour_pipeline, evaluate_contour, winding_number  # noqa: E402

__all__ = [
    "BACKEND",
    "EvansSystem",
    "Grid1D",
    "ShockParams",
    "build_contour",
    "contour_pipeline",
    "domain_length",
    "evaluate_contour",
    "hf_bound",
    "mach",
    "mn_condition",
    "rh_coefficient",
    "sharp_condition",
    "simulate",
    "solve_profile",
    "stability_boundary",
    "vplus_from_mach",
    "winding_number",
]
