"""Helix characterizations for curves in E^5.

Each test turns an "is constant" / "vanishes identically" statement about
the curvatures into a residual compared against a tolerance.  Axis
reconstructions rebuild the fixed direction U from frame coefficients.
"""

from __future__ import annotations

import contextlib
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import (
    AxisNotConstant,
    DegenerateCurvature,
    IllConditionedFit,
    ImplicationViolated,
    InternalInconsistency,
    PentahelixError,
)
from .frenet import CurveSamples, FrenetData, extract_frames, frame_derivatives
from .numkit import (
    ConstancyVerdict,
    ScalarSeries,
    constancy,
    cumulative_integral,
    derivative_array,
    derivative_matrix,
    differentiate,
)

DEFAULT_TOL = 1e-6
# Stencil spacing (arc-length units) for derivatives of curvature-derived
# series.  Third derivatives at the sampling step would amplify round-off
# by ~1e9; a wider stencil keeps both round-off and truncation near 1e-8.
DERIVATIVE_SPACING = 0.03
AXIS_FACTOR = 10.0
NONEXISTENCE_GAP = 1e-3
CURVATURE_FLOOR = 1e-10
FIT_COND_MAX = 1e8


@dataclass(frozen=True)
class Tolerances:
    constancy: float = DEFAULT_TOL
    axis_factor: float = AXIS_FACTOR
    derivative_spacing: float = DERIVATIVE_SPACING
    nonexistence_gap: float = NONEXISTENCE_GAP
    # jets differenced from bare points carry ~1e-7 curvature noise, so both
    # the tolerance and the stencil spacing are widened for them
    fd_factor: float = 1e3
    fd_derivative_spacing: float = 0.2

    def effective(self, jet_source: str) -> float:
        return self.constancy * (self.fd_factor if jet_source == "fd" else 1.0)

    def spacing(self, jet_source: str) -> float:
        return self.fd_derivative_spacing if jet_source == "fd" else self.derivative_spacing


@dataclass(frozen=True)
class ResidualReport:
    passed: bool
    residual: float
    tolerance: float


@dataclass(frozen=True, eq=False)
class AxisEstimate:
    per_node_axis: np.ndarray
    mean_axis: np.ndarray
    constancy_residual: float
    angle: float
    coefficients: np.ndarray
    target: int
    derivative_norm: float
    angle_residual: float

    @property
    def cos_angle(self) -> float:
        return float(np.cos(self.angle))


@dataclass(frozen=True, eq=False)
class V1Functions:
    F: ScalarSeries
    f: ScalarSeries
    g: ScalarSeries
    A: Optional[float] = None
    B: Optional[float] = None


@dataclass(frozen=True, eq=False)
class V5Functions:
    f: ScalarSeries
    G: ScalarSeries
    ode_residual: ScalarSeries


@dataclass(frozen=True)
class IntegralCheck:
    A: float
    B: float
    residual: float
    tolerance: float
    passed: bool
    condition: float


@dataclass(frozen=True)
class NormRatioReport:
    mismatch_21: float
    mismatch_45: float
    ratio_21: ConstancyVerdict
    ratio_45: ConstancyVerdict
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class NonexistenceReport:
    sigma_v2: float
    sigma_v4: float
    residual_v2: float
    residual_v4: float
    gap: float
    passed: bool


@dataclass(frozen=True)
class ImplicationReport:
    applicable: bool
    holds: bool
    residual: float
    tolerance: float


# -- helpers -----------------------------------------------------------------

def _stride(fd: FrenetData, spacing: float) -> int:
    return fd.grid.stride_for(spacing, order_depth=3)


def _d(series: ScalarSeries, stride: int) -> ScalarSeries:
    return differentiate(series, 1, stride=stride)


def _require_nonzero(fd: FrenetData, which=(1, 2, 3, 4)) -> tuple:
    for i in which:
        k = fd.curvatures[i - 1].values
        j = int(np.argmin(np.abs(k)))
        if abs(k[j]) <= CURVATURE_FLOOR:
            raise DegenerateCurvature(f"k{i} vanishes near s={fd.grid.s_values[j]:.6g}")
    return fd.curvatures


def _max_scored(series: ScalarSeries) -> float:
    return float(np.max(np.abs(series.values[series.scored])))


def _build_axis(fd: FrenetData, coeffs: list, target: int, tol: float,
                spacing: float) -> AxisEstimate:
    """Normalize sum_i c_i V_i node by node and measure how fixed it is."""
    margin = max(c.margin for c in coeffs if isinstance(c, ScalarSeries))
    n = len(fd.grid)
    C = np.column_stack([c.values if isinstance(c, ScalarSeries) else np.full(n, float(c))
                         for c in coeffs])
    raw = np.einsum("ni,nik->nk", C, fd.frames)
    norm = np.linalg.norm(raw, axis=1)
    U = raw / norm[:, None]
    b = max(2, margin)
    sl = slice(b, n - b)
    mean = U[sl].mean(axis=0)
    mean /= np.linalg.norm(mean)
    residual = float(np.max(np.linalg.norm(U[sl] - mean, axis=1)))
    m = _stride(fd, spacing)
    dU = derivative_array(U, fd.grid, 1, stride=m)
    b2 = b + 2 * m
    dnorm = float(np.max(np.linalg.norm(dU[b2:n - b2], axis=1)))
    cos_t = fd.frames[:, target - 1, :] @ mean
    cos_mean = float(np.mean(cos_t[sl]))
    angle = float(np.arccos(np.clip(cos_mean, -1.0, 1.0)))
    ang_res = float(np.max(np.abs(cos_t[sl] - cos_mean)))
    if residual > tol:
        raise AxisNotConstant(f"axis V{target} moves by {residual:.3e} (allowed {tol:.1e})")
    return AxisEstimate(U, mean, residual, angle, C / norm[:, None], target, dnorm, ang_res)


# -- V1 helices -------------------------------------------------------------

def _v1_pieces(fd: FrenetData, spacing: float):
    k1, k2, k3, k4 = _require_nonzero(fd)
    m = _stride(fd, spacing)
    rho = k1 / k2
    g = _d(rho, m) / k3
    f = (rho * k3 + _d(g, m)) / k4
    return rho, g, f, m


def v1_helix_test(fd: FrenetData, tol: float = DEFAULT_TOL,
                  spacing: float = DERIVATIVE_SPACING) -> tuple[ConstancyVerdict, V1Functions]:
    """Constancy of (k1/k2)^2 + g^2 + f^2 with g = (k1/k2)'/k3 and
    f = (k1 k3/k2 + g')/k4.  This is the V1-helix (inclined curve) test."""
    rho, g, f, _ = _v1_pieces(fd, spacing)
    F = rho ** 2 + g ** 2 + f ** 2
    return constancy(F, tol), V1Functions(F=F, f=f, g=g)


def v1_axis(fd: FrenetData, tol: float = AXIS_FACTOR * DEFAULT_TOL,
            spacing: float = DERIVATIVE_SPACING) -> AxisEstimate:
    """U proportional to V1 + (k1/k2) V3 + g V4 + f V5; angle measured from V1."""
    rho, g, f, _ = _v1_pieces(fd, spacing)
    return _build_axis(fd, [1.0, 0.0, rho, g, f], 1, tol, spacing)


def v1_ode_check(fd: FrenetData, tol: float = DEFAULT_TOL,
                 spacing: float = DERIVATIVE_SPACING) -> ResidualReport:
    """With k4 f = k1 k3/k2 + g', check f'/k4 = -g pointwise."""
    _, g, f, m = _v1_pieces(fd, spacing)
    k4 = fd.curvatures[3]
    res = _max_scored(_d(f, m) / k4 + g)
    return ResidualReport(res <= tol, res, float(tol))


def v1_integral_check(fd: FrenetData, tol: float = DEFAULT_TOL,
                      spacing: float = DERIVATIVE_SPACING,
                      interval: Optional[tuple] = None) -> IntegralCheck:
    """Fit the constants A, B of the integral form of the V1-helix condition.

    With T(s) = int_{s0}^s k4, c = k1 k3/k2, the condition is
    g = (A - int c sin T) sin T - (B + int c cos T) cos T.
    A and B are fitted by least squares over the scored nodes (optionally
    restricted to ``interval``); the residual is the worst pointwise misfit.
    """
    k1, k2, k3, k4 = _require_nonzero(fd)
    _, g, _, _ = _v1_pieces(fd, spacing)
    theta = cumulative_integral(k4)
    sin_t, cos_t = np.sin(theta.values), np.cos(theta.values)
    c = k1 * k3 / k2
    i_s = cumulative_integral(c * sin_t).values
    i_c = cumulative_integral(c * cos_t).values
    lhs = g.values + i_s * sin_t + i_c * cos_t
    M = np.column_stack([sin_t, -cos_t])
    sl = g.scored
    mask = np.zeros(len(g), dtype=bool)
    mask[sl] = True
    if interval is not None:
        s = fd.grid.s_values
        mask &= (s >= interval[0]) & (s <= interval[1])
    cond = float(np.linalg.cond(M[mask]))
    if not cond <= FIT_COND_MAX:
        raise IllConditionedFit(f"design matrix condition {cond:.3e} exceeds {FIT_COND_MAX:.0e}")
    (A, B), *_ = np.linalg.lstsq(M[mask], lhs[mask], rcond=None)
    residual = float(np.max(np.abs(lhs[mask] - M[mask] @ np.array([A, B]))))
    return IntegralCheck(float(A), float(B), residual, float(tol), residual <= tol, cond)


# -- V3 slant helices -------------------------------------------------------

def v3_slant_test(fd: FrenetData, tol: float = DEFAULT_TOL) -> tuple[ConstancyVerdict, ConstancyVerdict]:
    """Constancy of k2/k1 and of k3/|k4|; the curve is a V3 slant helix iff both hold."""
    k1, k2, k3, k4 = _require_nonzero(fd)
    return constancy(k2 / k1, tol), constancy(k3 / abs(k4), tol)


def v3_axis(fd: FrenetData, tol: float = AXIS_FACTOR * DEFAULT_TOL,
            spacing: float = DERIVATIVE_SPACING) -> AxisEstimate:
    k1, k2, k3, k4 = _require_nonzero(fd)
    return _build_axis(fd, [k2 / k1, 0.0, 1.0, 0.0, k3 / k4], 3, tol, spacing)


def norm_ratio_check(fd: FrenetData, tol: float = DEFAULT_TOL) -> NormRatioReport:
    """Compare ||V2'||/||V1'|| and ||V4'||/||V5'|| with their curvature forms.

    The identities hold for every curve; their constancy matches the V3
    slant helix test.
    """
    k1, k2, k3, k4 = _require_nonzero(fd)
    dV = frame_derivatives(fd.frames, fd.grid)
    nrm = np.linalg.norm(dV, axis=2)
    left21 = ScalarSeries(fd.grid, nrm[:, 1] / nrm[:, 0], margin=fd.margin)
    left45 = ScalarSeries(fd.grid, nrm[:, 3] / nrm[:, 4], margin=fd.margin)
    right21 = (1.0 + (k2 / k1) ** 2) ** 0.5
    right45 = (1.0 + (k3 / k4) ** 2) ** 0.5
    mm21 = _max_scored(left21 - right21)
    mm45 = _max_scored(left45 - right45)
    return NormRatioReport(mm21, mm45, constancy(left21, tol), constancy(left45, tol),
                           float(tol), max(mm21, mm45) <= max(tol, 1e-4))


# -- V5 slant helices -------------------------------------------------------

def _v5_pieces(fd: FrenetData, spacing: float):
    k1, k2, k3, k4 = _require_nonzero(fd)
    m = _stride(fd, spacing)
    r = k4 / k3
    f = _d(r, m) / k2
    coef1 = (r * k2 + _d(f, m)) / k1
    G = coef1 ** 2 + f ** 2 + r ** 2
    ode = _d(coef1, m) + f * k1
    return r, f, coef1, G, ode


def v5_slant_test(fd: FrenetData, tol: float = DEFAULT_TOL,
                  spacing: float = DERIVATIVE_SPACING,
                  strict: bool = True) -> tuple[ConstancyVerdict, ResidualReport, V5Functions]:
    """V5 slant helix test by both equivalent routes.

    With f = (k4/k3)'/k2 and c1 = (k4 k2/k3 + f')/k1, the curve is a V5 slant
    helix iff G = c1^2 + f^2 + (k4/k3)^2 is constant, iff c1' + f k1 = 0.
    With ``strict`` a disagreement raises InternalInconsistency.
    """
    _, f, _, G, ode = _v5_pieces(fd, spacing)
    verdict = constancy(G, tol)
    res = _max_scored(ode)
    report = ResidualReport(res <= tol, res, float(tol))
    if strict and verdict.is_constant != report.passed:
        raise InternalInconsistency(
            f"V5 constancy residual {verdict.residual:.3e} and ODE residual {res:.3e} "
            f"disagree at tolerance {tol:.1e}"
        )
    return verdict, report, V5Functions(f=f, G=G, ode_residual=ode)


def v5_axis(fd: FrenetData, tol: float = AXIS_FACTOR * DEFAULT_TOL,
            spacing: float = DERIVATIVE_SPACING) -> AxisEstimate:
    """U proportional to c1 V1 - f V2 + (k4/k3) V3 + V5; angle measured from V5.

    The unnormalized coefficient vector has squared norm G + 1, so the
    reported cosine is 1/sqrt(G + 1).
    """
    r, f, coef1, _, _ = _v5_pieces(fd, spacing)
    return _build_axis(fd, [coef1, -f, r, 0.0, 1.0], 5, tol, spacing)


def v5_implication_check(fd: FrenetData, tol: float = DEFAULT_TOL,
                         v5_passed: Optional[bool] = None,
                         spacing: float = DERIVATIVE_SPACING,
                         ratio_tol: Optional[float] = None) -> ImplicationReport:
    """A V5 slant helix with k4/k3 constant must have k2/k1 constant.

    ``ratio_tol`` is the tolerance on k2/k1 (defaults to ``tol``).
    """
    rtol = tol if ratio_tol is None else ratio_tol
    k1, k2, k3, k4 = _require_nonzero(fd)
    if v5_passed is None:
        v5_passed = v5_slant_test(fd, tol, spacing, strict=False)[0].is_constant
    ratio43 = constancy(abs(k4) / k3, tol)
    if not (v5_passed and ratio43.is_constant):
        return ImplicationReport(False, True, float("nan"), float(rtol))
    ratio21 = constancy(k2 / k1, rtol)
    if not ratio21.is_constant:
        raise ImplicationViolated(
            f"V5 slant helix with constant k4/k3 but k2/k1 residual {ratio21.residual:.3e}"
        )
    return ImplicationReport(True, True, ratio21.residual, float(rtol))


def w_curve_implication_check(fd: FrenetData, tol: float = DEFAULT_TOL) -> ImplicationReport:
    """Constant curvatures must give a V3 slant helix."""
    verdicts = [constancy(k, tol) for k in _require_nonzero(fd)]
    if not all(v.is_constant for v in verdicts):
        return ImplicationReport(False, True, float("nan"), float(tol))
    a, b = v3_slant_test(fd, tol)
    if not (a.is_constant and b.is_constant):
        raise ImplicationViolated("W-curve failed the V3 slant helix test")
    return ImplicationReport(True, True, max(a.residual, b.residual), float(tol))


# -- V2 / V4 nonexistence -----------------------------------------------------

def _v2_system(k1, k2, k3, k4, D) -> sp.csr_matrix:
    """Constraints on (u2, u4, u5) stacked node-wise:
    -k1 u2 = 0, u2' = 0, k2 u2 - k3 u4 = 0, u4' - k4 u5 = 0, k4 u4 + u5' = 0."""
    Z = sp.csr_matrix(D.shape)
    dg = sp.diags
    return sp.bmat([
        [dg(-k1), Z, Z],
        [D, Z, Z],
        [dg(k2), dg(-k3), Z],
        [Z, D, dg(-k4)],
        [Z, dg(k4), D],
    ], format="csr")


def _smallest_singular(A: sp.csr_matrix) -> tuple[float, float]:
    AtA = (A.T @ A).tocsc()
    # fixed start vector: ARPACK's default is random, which breaks determinism
    v0 = np.ones(AtA.shape[0]) / np.sqrt(AtA.shape[0])
    vals, vecs = eigsh(AtA, k=1, sigma=0.0, which="LM", v0=v0)
    v = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    sigma = float(np.sqrt(max(vals[0], 0.0)))
    return sigma, float(np.linalg.norm(A @ v))


def v2_v4_nonexistence_check(fd: FrenetData, gap: float = NONEXISTENCE_GAP) -> NonexistenceReport:
    """Smallest singular value of the discretized V2 and V4 axis systems.

    A fixed U at a constant angle with V2 would give a unit-norm nonzero
    coefficient vector annihilated by the constraint operator; a positive
    sigma_min rules that out.  The V4 system is the V2 system of the
    reversed frame, whose curvatures are (k4, k3, k2, k1).
    """
    k1, k2, k3, k4 = (k.values for k in _require_nonzero(fd))
    D = derivative_matrix(fd.grid, 1)
    s2, r2 = _smallest_singular(_v2_system(k1, k2, k3, k4, D))
    s4, r4 = _smallest_singular(_v2_system(k4, k3, k2, k1, D))
    return NonexistenceReport(s2, s4, r2, r4, float(gap), min(s2, s4) >= gap)


# -- full report -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class V1Result:
    verdict: ConstancyVerdict
    functions: V1Functions
    ode: ResidualReport
    integral: IntegralCheck
    axis: Optional[AxisEstimate]

    @property
    def passed(self) -> bool:
        return self.verdict.is_constant


@dataclass(frozen=True, eq=False)
class V3Result:
    ratio_21: ConstancyVerdict
    ratio_34: ConstancyVerdict
    norm_ratios: NormRatioReport
    axis: Optional[AxisEstimate]

    @property
    def passed(self) -> bool:
        return self.ratio_21.is_constant and self.ratio_34.is_constant


@dataclass(frozen=True, eq=False)
class V5Result:
    verdict: ConstancyVerdict
    ode: ResidualReport
    functions: V5Functions
    axis: Optional[AxisEstimate]
    implication: ImplicationReport

    @property
    def passed(self) -> bool:
        return self.verdict.is_constant


@dataclass(frozen=True, eq=False)
class HelixReport:
    v1: V1Result
    v3: V3Result
    v5: V5Result
    nonexistence: NonexistenceReport
    tolerances: Tolerances
    tolerance_used: float
    jet_source: str
    k4_sign: int
    reparametrized: bool
    frenet: FrenetData = field(repr=False)

    @property
    def flags(self) -> dict:
        return {"v1": self.v1.passed, "v3": self.v3.passed, "v5": self.v5.passed}


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except PentahelixError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def classify_all(curve: CurveSamples, config: Tolerances = Tolerances()) -> HelixReport:
    """Extract frames and run every helix test, axis and consistency check."""
    with _stage("extract_frames"):
        fd = extract_frames(curve)
    tol = config.effective(fd.jet_source)
    atol = config.axis_factor * tol
    sp_ = config.spacing(fd.jet_source)

    with _stage("v1"):
        verdict, funcs = v1_helix_test(fd, tol, sp_)
        ode = v1_ode_check(fd, tol, sp_)
        integral = v1_integral_check(fd, tol, sp_)
        funcs = replace(funcs, A=integral.A, B=integral.B)
        if not (verdict.is_constant == ode.passed == integral.passed):
            raise InternalInconsistency(
                f"V1 characterizations disagree: constancy={verdict.is_constant} "
                f"({verdict.residual:.3e}), ode={ode.passed} ({ode.residual:.3e}), "
                f"integral={integral.passed} ({integral.residual:.3e})"
            )
    with _stage("v1_axis"):
        ax1 = v1_axis(fd, atol, sp_) if verdict.is_constant else None

    with _stage("v3"):
        r21, r34 = v3_slant_test(fd, tol)
        ratios = norm_ratio_check(fd, tol)
        v3_ok = r21.is_constant and r34.is_constant
    with _stage("v3_axis"):
        ax3 = v3_axis(fd, atol, sp_) if v3_ok else None
    with _stage("w_curve_implication"):
        w_curve_implication_check(fd, tol)

    with _stage("v5"):
        v5v, v5ode, v5f = v5_slant_test(fd, tol, sp_, strict=True)
    with _stage("v5_axis"):
        ax5 = v5_axis(fd, atol, sp_) if v5v.is_constant else None
    with _stage("v5_implication"):
        impl = v5_implication_check(fd, tol, v5v.is_constant, sp_)

    with _stage("nonexistence"):
        nonex = v2_v4_nonexistence_check(fd, config.nonexistence_gap)

    return HelixReport(
        v1=V1Result(verdict, funcs, ode, integral, ax1),
        v3=V3Result(r21, r34, ratios, ax3),
        v5=V5Result(v5v, v5ode, v5f, ax5, impl),
        nonexistence=nonex,
        tolerances=config,
        tolerance_used=tol,
        jet_source=fd.jet_source,
        k4_sign=fd.k4_sign,
        reparametrized=curve.reparametrized,
        frenet=fd,
    )


def _verdict_dict(v: ConstancyVerdict) -> dict:
    return {"is_constant": bool(v.is_constant), "mean": v.mean,
            "residual": v.residual, "tolerance": v.tolerance}


def _axis_dict(a: Optional[AxisEstimate]):
    if a is None:
        return None
    return {
        "target": f"V{a.target}",
        "mean_axis": [float(x) for x in a.mean_axis],
        "angle": a.angle,
        "cos_angle": a.cos_angle,
        "constancy_residual": a.constancy_residual,
        "derivative_norm": a.derivative_norm,
        "angle_residual": a.angle_residual,
    }


def report_to_dict(report: HelixReport) -> dict:
    """Scalar summary of a HelixReport as a nested dict (no per-node arrays)."""
    v1, v3, v5 = report.v1, report.v3, report.v5
    return {
        "flags": report.flags,
        "v1": {
            "passed": v1.passed,
            "constancy": _verdict_dict(v1.verdict),
            "ode_check": asdict(v1.ode),
            "integral_check": asdict(v1.integral),
            "axis": _axis_dict(v1.axis),
        },
        "v3": {
            "passed": v3.passed,
            "ratio_k2_k1": _verdict_dict(v3.ratio_21),
            "ratio_k3_k4": _verdict_dict(v3.ratio_34),
            "norm_ratios": {
                "mismatch_21": v3.norm_ratios.mismatch_21,
                "mismatch_45": v3.norm_ratios.mismatch_45,
                "ratio_21": _verdict_dict(v3.norm_ratios.ratio_21),
                "ratio_45": _verdict_dict(v3.norm_ratios.ratio_45),
                "passed": v3.norm_ratios.passed,
                "consistent_with_v3": (v3.norm_ratios.ratio_21.is_constant
                                       and v3.norm_ratios.ratio_45.is_constant) == v3.passed,
            },
            "axis": _axis_dict(v3.axis),
        },
        "v5": {
            "passed": v5.passed,
            "constancy": _verdict_dict(v5.verdict),
            "ode_check": asdict(v5.ode),
            "axis": _axis_dict(v5.axis),
            "implication_k2_k1": asdict(v5.implication),
        },
        "nonexistence": asdict(report.nonexistence),
        "tolerances": {**asdict(report.tolerances), "used": report.tolerance_used,
                       "derivative_spacing_used": report.tolerances.spacing(report.jet_source),
                       "axis": report.tolerances.axis_factor * report.tolerance_used,
                       "orthonormality": report.frenet.ortho_tolerance},
        "provenance": {
            "jet_source": report.jet_source,
            "reparametrized": report.reparametrized,
            "k4_sign": report.k4_sign,
            "orientation": "det[V1..V5] = +1",
            "samples": len(report.frenet.grid),
            "step": report.frenet.grid.step,
            "range": list(report.frenet.grid.span),
        },
    }
