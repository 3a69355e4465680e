"""Frenet frames, curvatures and helix classification for curves in E^5."""

from .errors import *  # noqa: F401,F403
from .numkit import (
    ConstancyVerdict,
    Grid,
    ScalarSeries,
    constancy,
    differentiate,
    frenet_matrix,
    frequencies,
    integrate_ode,
    skew_expm,
)
from .frenet import (
    CurveSamples,
    FrenetData,
    check_unit_speed,
    extract_frames,
    reparametrize_arclength,
)
from .synthesis import (
    CurvatureSpec,
    WCurveSpec,
    synthesize_from_curvatures,
    synthesize_w_curve,
)
from .classify import HelixReport, Tolerances, classify_all

__version__ = "0.1.0"
