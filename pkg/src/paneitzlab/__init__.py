"""Spectral experiments with the Paneitz operator and conformal metrics on S^n.

The hot loops (three-term Jacobi recurrences in long double) run in a
compiled extension when it is available; ``paneitzlab.kernels.BACKEND``
reports which implementation was selected.
"""
__version__ = "0.1.0"

from .geometry import (RadialField, RadialGrid, ZonalCoeffs, analyze, make_grid,
                       sphere_volume, synthesize)
from .paneitz import (GreenValue, PaneitzConstants, coercivity_constant, green_paneitz,
                      paneitz_apply, paneitz_constants)
from .moebius import MoebiusMap, balance_parameter, dilate, dilation_factor
from .conformal import (ConformalFactor, dumbbell_factor, energy, lp_norm_q,
                        moebius_covariance_residual, moebius_factor, normalize_volume,
                        q_curvature, round_factor, volume)
from .spectrum import (EuclideanWeight, SpectralReport, lambda1_euclidean, lambda1_sphere,
                       rayleigh_quotient, volume_inequality_probe)
from .hersch import balance, center_of_mass, hersch_bound_check
from .blowup import limit_rayleigh_check, rescale, transfer_check, volume_capture
from .counterexample import admissible_p_window, q_closed_form, sweep, u_eps

__all__ = [
    "RadialField", "RadialGrid", "ZonalCoeffs", "analyze", "make_grid", "sphere_volume",
    "synthesize", "GreenValue", "PaneitzConstants", "coercivity_constant", "green_paneitz",
    "paneitz_apply", "paneitz_constants", "MoebiusMap", "balance_parameter", "dilate",
    "dilation_factor", "ConformalFactor", "dumbbell_factor", "energy", "lp_norm_q",
    "moebius_covariance_residual", "moebius_factor", "normalize_volume", "q_curvature",
    "round_factor", "volume", "EuclideanWeight", "SpectralReport", "lambda1_euclidean",
    "lambda1_sphere", "rayleigh_quotient", "volume_inequality_probe", "balance",
    "center_of_mass", "hersch_bound_check", "limit_rayleigh_check", "rescale",
    "transfer_check", "volume_capture", "admissible_p_window", "q_closed_form", "sweep",
    "u_eps",
]
