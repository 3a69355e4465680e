"""Frenet frames and curvatures of unit-speed curves in E^5."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import DegenerateCurvature, DegenerateSpeed, GridTooSmall, NotUnitSpeed
from .numkit import (
    ConstancyVerdict,
    Grid,
    ScalarSeries,
    derivative_array,
)

DIM = 5
UNIT_SPEED_TOL = 1e-6
DEGENERACY_RTOL = 1e-10
ORTHO_TOL_EXACT = 1e-8
ORTHO_TOL_FD = 1e-5
# Stencil spacing (arc-length units) for jets derived from bare points.
JET_SPACING = 0.05


@dataclass(frozen=True, eq=False)
class CurveSamples:
    """Points of a curve on an arc-length grid.

    ``jets`` has shape (5, N, 5): ``jets[j]`` holds the (j+1)-th derivative
    at every node.  ``true_curvatures`` (4, N) is ground truth attached by
    the synthesizer and never used by the analysis itself.
    """

    grid: Grid
    points: np.ndarray
    jets: Optional[np.ndarray] = None
    jet_source: str = "none"
    true_curvatures: Optional[np.ndarray] = None
    reparametrized: bool = False

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.shape != (len(self.grid), DIM):
            raise ValueError(f"points must have shape ({len(self.grid)}, {DIM}), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.jets is not None:
            jets = np.array(self.jets, dtype=float)
            if jets.shape != (DIM, len(self.grid), DIM):
                raise ValueError(f"jets must have shape (5, {len(self.grid)}, 5)")
            jets.setflags(write=False)
            object.__setattr__(self, "jets", jets)

    def __len__(self) -> int:
        return len(self.grid)


@dataclass(frozen=True, eq=False)
class FrenetData:
    """Per-node frame (N, 5, 5) with ``frames[n, i]`` = V_{i+1}, and k1..k4."""

    grid: Grid
    frames: np.ndarray
    curvatures: tuple
    jet_source: str
    ortho_tolerance: float
    margin: int = 2

    @property
    def k(self) -> tuple:
        return self.curvatures

    @property
    def k4_sign(self) -> int:
        return 1 if np.median(self.curvatures[3].values) >= 0 else -1

    def vector(self, i: int) -> np.ndarray:
        """V_i for i in 1..5, shape (N, 5)."""
        return self.frames[:, i - 1, :]


def _speed(curve: CurveSamples) -> np.ndarray:
    if curve.jets is not None and curve.jet_source != "fd":
        d1 = curve.jets[0]
    else:
        d1 = derivative_array(curve.points, curve.grid, 1)
    return np.linalg.norm(d1, axis=1)


def check_unit_speed(curve: CurveSamples, tolerance: float = UNIT_SPEED_TOL) -> ConstancyVerdict:
    """Constancy verdict on the speed ||alpha'|| measured against 1."""
    speed = ScalarSeries(curve.grid, _speed(curve))
    vals = speed.values[speed.scored]
    if vals.size == 0:
        raise GridTooSmall("no interior nodes")
    residual = float(np.max(np.abs(vals - 1.0)))
    return ConstancyVerdict(residual <= tolerance, float(np.mean(vals)), residual, float(tolerance))


def fd_jets(curve: CurveSamples, spacing: float = JET_SPACING) -> tuple[np.ndarray, int]:
    """Derivatives 1..5 of the points by nested wide-stencil differences.

    Returns the jets and the number of nodes per end touched by one-sided
    stencils somewhere in the nesting.
    """
    g = curve.grid
    m = g.stride_for(spacing, order_depth=3)
    p = curve.points
    d1 = derivative_array(p, g, 1, stride=m)
    d2 = derivative_array(p, g, 2, stride=m)
    d3 = derivative_array(d2, g, 1, stride=m)
    d4 = derivative_array(d2, g, 2, stride=m)
    d5 = derivative_array(d4, g, 1, stride=m)
    return np.stack([d1, d2, d3, d4, d5]), 6 * m


def _gram_schmidt(jets: np.ndarray) -> np.ndarray:
    """Orthonormalize jets node-wise (modified GS, two passes).

    Returns frames (N, 5, 5).  V5 is taken from the fifth jet and then
    flipped where needed so that det[V1..V5] = +1.
    """
    n = jets.shape[1]
    frames = np.empty((n, DIM, DIM))
    for j in range(DIM):
        v = jets[j].copy()
        ref = np.linalg.norm(v, axis=1)
        for _ in range(2):
            for i in range(j):
                e = frames[:, i, :]
                v -= np.einsum("nk,nk->n", v, e)[:, None] * e
        r = np.linalg.norm(v, axis=1)
        bad = r < DEGENERACY_RTOL * np.maximum(ref, np.finfo(float).tiny)
        if np.any(bad):
            idx = int(np.argmax(bad))
            raise DegenerateCurvature(
                f"derivative {j + 1} has no component outside span(V1..V{j}) "
                f"at node {idx} (k{j} vanishes)"
            )
        frames[:, j, :] = v / r[:, None]
    sign = np.sign(np.linalg.det(frames))
    frames[:, 4, :] *= sign[:, None]
    return frames


def frame_derivatives(frames: np.ndarray, grid: Grid, stride: int = 1) -> np.ndarray:
    return derivative_array(frames, grid, 1, stride=stride)


def extract_frames(curve: CurveSamples, unit_speed_tol: float = UNIT_SPEED_TOL) -> FrenetData:
    """Frenet frame and curvatures at every node.

    V1..V4 come from Gram-Schmidt on alpha', ..., alpha''''; V5 completes the
    frame with positive orientation.  Curvatures are k_i = <V_i', V_{i+1}>
    with V_i' from 4th-order differences of the frame components.
    """
    check = check_unit_speed(curve, unit_speed_tol)
    if not check.is_constant:
        raise NotUnitSpeed(
            f"max | ||alpha'|| - 1 | = {check.residual:.3e} exceeds {unit_speed_tol:.1e}"
        )
    margin = 0
    if curve.jets is not None:
        jets, source = curve.jets, curve.jet_source or "exact"
        otol = ORTHO_TOL_EXACT if source == "exact" else ORTHO_TOL_FD
    else:
        (jets, margin), source, otol = fd_jets(curve), "fd", ORTHO_TOL_FD
    frames = _gram_schmidt(jets)
    dframes = frame_derivatives(frames, curve.grid)
    ks = []
    for i in range(4):
        vals = np.einsum("nk,nk->n", dframes[:, i, :], frames[:, i + 1, :])
        ks.append(ScalarSeries(curve.grid, vals, margin=margin + 2))
    return FrenetData(curve.grid, frames, tuple(ks), source, otol, margin + 2)


def orthonormality_defect(fd: FrenetData) -> float:
    """Largest |<Vi, Vj> - delta_ij| over all nodes."""
    gram = np.einsum("nik,njk->nij", fd.frames, fd.frames)
    return float(np.max(np.abs(gram - np.eye(DIM))))


def frenet_residual(fd: FrenetData) -> float:
    """max_i max_nodes ||V_i' + k_{i-1} V_{i-1} - k_i V_{i+1}|| over the interior."""
    dV = frame_derivatives(fd.frames, fd.grid)
    kk = np.zeros((len(fd.grid), 6))
    for i, ki in enumerate(fd.curvatures):
        kk[:, i + 1] = ki.values
    worst = 0.0
    sl = slice(fd.margin, len(fd.grid) - fd.margin)
    for i in range(DIM):
        rhs = np.zeros_like(dV[:, i, :])
        if i > 0:
            rhs -= kk[:, i, None] * fd.frames[:, i - 1, :]
        if i < DIM - 1:
            rhs += kk[:, i + 1, None] * fd.frames[:, i + 1, :]
        err = np.linalg.norm(dV[sl, i, :] - rhs[sl], axis=1)
        worst = max(worst, float(err.max()))
    return worst


def reparametrize_arclength(raw_points, t_values=None, n_samples: Optional[int] = None) -> CurveSamples:
    """Resample an arbitrarily parametrized curve at uniform arc length.

    Speed comes from 4th-order differences on the parameter grid, arc length
    from cumulative Simpson, and the points from a cubic spline in arc
    length.
    """
    pts = np.asarray(raw_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != DIM:
        raise ValueError("raw points must have shape (N, 5)")
    n = pts.shape[0]
    if n < 7:
        raise GridTooSmall(f"need at least 7 nodes, got {n}")
    tgrid = Grid.from_values(np.arange(n, dtype=float) if t_values is None else t_values)
    speed = np.linalg.norm(derivative_array(pts, tgrid, 1), axis=1)
    if np.min(speed) <= 1e-10:
        raise DegenerateSpeed(f"speed drops to {np.min(speed):.3e}")
    arclen = cumulative_simpson(speed, dx=tgrid.step, initial=0.0)
    if np.any(np.diff(arclen) <= 0):
        raise DegenerateSpeed("arc length is not strictly increasing")
    n_out = n if n_samples is None else int(n_samples)
    grid = Grid.uniform(0.0, float(arclen[-1]), float(arclen[-1]) / (n_out - 1))
    s = np.minimum(grid.s_values, arclen[-1])
    spline = CubicSpline(arclen, pts, axis=0)
    return CurveSamples(grid, spline(s), reparametrized=True)
