"""Ground-truth unit-speed curves in E^5.

W-curves (constant curvatures) come out in closed form; curves with
prescribed curvature functions are integrated from the Frenet system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import DegenerateCurvature, OrthonormalityDrift
from .frenet import CurveSamples
from .numkit import (
    Grid,
    ScalarSeries,
    derivative_array,
    frenet_matrix,
    frequencies,
    integrate_ode,
    skew_expm,
)

CurvatureFunc = Union[Callable[[np.ndarray], np.ndarray], ScalarSeries]

SPECTRAL_GAP_MIN = 1e-8
ODE_DRIFT_MAX = 1e-8


@dataclass(frozen=True, eq=False)
class WCurveSpec:
    k: tuple
    initial_frame: np.ndarray = field(default_factory=lambda: np.eye(5))
    initial_point: np.ndarray = field(default_factory=lambda: np.zeros(5))

    def __post_init__(self):
        k = tuple(float(x) for x in self.k)
        if len(k) != 4:
            raise ValueError("a W-curve needs four curvatures")
        object.__setattr__(self, "k", k)
        if any(x <= 0 for x in k):
            raise DegenerateCurvature(f"W-curve curvatures must be positive, got {k}")
        F = np.array(self.initial_frame, dtype=float)
        if F.shape != (5, 5) or np.max(np.abs(F @ F.T - np.eye(5))) > 1e-12:
            raise ValueError("initial_frame must be an orthonormal 5x5 matrix")
        object.__setattr__(self, "initial_frame", F)
        object.__setattr__(self, "initial_point", np.array(self.initial_point, dtype=float))

    @property
    def K(self) -> np.ndarray:
        return frenet_matrix(self.k)


@dataclass(frozen=True, eq=False)
class CurvatureSpec:
    """Curvature functions k1..k4 on ``[s0, s1]``.

    Each entry is a vectorized callable of s or a sampled ScalarSeries
    (interpolated by a cubic spline at RK4 half steps).
    """

    k_funcs: Sequence[CurvatureFunc]
    domain: tuple = (0.0, 10.0)
    step: float = 1e-3
    initial_frame: np.ndarray = field(default_factory=lambda: np.eye(5))
    initial_point: np.ndarray = field(default_factory=lambda: np.zeros(5))

    def __post_init__(self):
        if len(self.k_funcs) != 4:
            raise ValueError("need four curvature functions")
        if not self.step > 0:
            raise ValueError("step must be positive")
        funcs = []
        for f in self.k_funcs:
            if isinstance(f, ScalarSeries):
                spline = CubicSpline(f.grid.s_values, f.values)
                funcs.append(lambda s, _sp=spline: _sp(s))
            else:
                funcs.append(f)
        object.__setattr__(self, "_funcs", tuple(funcs))

    @property
    def grid(self) -> Grid:
        return Grid.uniform(self.domain[0], self.domain[1], self.step)

    def evaluate(self, s) -> np.ndarray:
        """Curvatures at ``s`` as an array of shape (4,) + shape(s)."""
        s = np.asarray(s, dtype=float)
        return np.array([np.broadcast_to(f(s), s.shape) for f in self._funcs], dtype=float)


def _w_frames_spectral(K: np.ndarray, F0: np.ndarray, s: np.ndarray):
    """Frames exp(sK) F0 and their integral from 0, via eigen-decomposition."""
    lam, Q = np.linalg.eig(K)
    Qinv = np.linalg.inv(Q)
    phase = np.exp(np.outer(s, lam))
    with np.errstate(divide="ignore", invalid="ignore"):
        integ = np.where(np.abs(lam) > 1e-12, (phase - 1.0) / lam, s[:, None] + 0j)
    frames = np.real(np.einsum("ij,nj,jk->nik", Q, phase, Qinv)) @ F0
    integrals = np.real(np.einsum("ij,nj,jk->nik", Q, integ, Qinv)) @ F0
    return frames, integrals


def _w_frames_stepped(K: np.ndarray, F0: np.ndarray, grid: Grid):
    E = skew_expm(K, grid.step)
    frames = np.empty((len(grid), 5, 5))
    frames[0] = skew_expm(K, grid.s_values[0]) @ F0
    for j in range(1, len(grid)):
        frames[j] = E @ frames[j - 1]
    integrals = cumulative_simpson(frames, dx=grid.step, axis=0, initial=0.0)
    return frames, integrals


def synthesize_w_curve(spec: WCurveSpec, grid: Grid) -> CurveSamples:
    """Constant-curvature curve with exact derivative jets.

    Frames follow V(s) = exp((s - s0) K) V(s0) and the position is the
    closed-form integral of the first frame row.  When the two rotation
    frequencies nearly coincide the spectral projectors are ill-conditioned
    and the frames are stepped with :func:`skew_expm` instead.
    """
    K = spec.K
    s = grid.s_values - grid.s_values[0]
    w1, w2 = frequencies(K)
    if abs(w2 - w1) < SPECTRAL_GAP_MIN:
        frames, integrals = _w_frames_stepped(K, spec.initial_frame,
                                              Grid(s, grid.step))
    else:
        frames, integrals = _w_frames_spectral(K, spec.initial_frame, s)
    points = spec.initial_point + integrals[:, 0, :]
    # alpha^(j) = row 1 of K^(j-1) V(s)
    jets = np.empty((5, len(grid), 5))
    row = np.zeros(5)
    row[0] = 1.0
    for j in range(5):
        jets[j] = np.einsum("i,nik->nk", row, frames)
        row = row @ K
    truth = np.repeat(np.array(spec.k)[:, None], len(grid), axis=1)
    return CurveSamples(grid, points, jets=jets, jet_source="exact", true_curvatures=truth)


def frenet_rhs(spec: CurvatureSpec, grid: Grid = None) -> Callable[[float, np.ndarray], np.ndarray]:
    """Right-hand side V' = K(s) V of the frame system.

    With ``grid`` the matrices at the nodes and RK4 half steps are evaluated
    in one vectorized call and looked up by abscissa.
    """
    cache = {}
    if grid is not None:
        s = grid.s_values
        pts = np.concatenate([s, s[:-1] + 0.5 * grid.step])
        kv = spec.evaluate(pts)
        Ks = np.zeros((pts.size, 5, 5))
        idx = np.arange(4)
        Ks[:, idx, idx + 1] = kv.T
        Ks[:, idx + 1, idx] = -kv.T
        cache = dict(zip(pts.tolist(), Ks))

    def rhs(s: float, V: np.ndarray) -> np.ndarray:
        K = cache.get(s)
        if K is None:
            K = frenet_matrix(spec.evaluate(s))
        return K @ V

    return rhs


def _jets_from_frames(frames: np.ndarray, kvals: np.ndarray, grid: Grid) -> np.ndarray:
    """alpha', ..., alpha^(5) written in the frame, then mapped to R^5.

    With alpha^(j) = sum_i c_i V_i, the Frenet equations give the next
    coefficients c_i' + c_{i+1} k_i - c_{i-1} k_{i-1}.  The c_i' terms are
    taken by finite differences; they only feed components along frame
    vectors that Gram-Schmidt removes again.
    """
    n = len(grid)
    kk = np.zeros((n, 6))
    kk[:, 1:5] = kvals.T
    c = np.zeros((n, 5))
    c[:, 0] = 1.0
    jets = np.empty((5, n, 5))
    for j in range(5):
        jets[j] = np.einsum("ni,nik->nk", c, frames)
        dc = derivative_array(c, grid, 1)
        nxt = dc.copy()
        for i in range(5):
            if i < 4:
                nxt[:, i] -= c[:, i + 1] * kk[:, i + 1]
            if i > 0:
                nxt[:, i] += c[:, i - 1] * kk[:, i]
        c = nxt
    return jets


def synthesize_from_curvatures(spec: CurvatureSpec) -> CurveSamples:
    """Integrate the Frenet system for prescribed k1..k4.

    Frames by RK4, position by cumulative Simpson on V1.  The prescribed
    curvatures at the nodes are attached as ground truth.
    """
    grid = spec.grid
    kvals = spec.evaluate(grid.s_values)
    if np.any(kvals[:3] <= 0) or np.any(kvals[3] == 0):
        raise DegenerateCurvature("k1, k2, k3 must be positive and k4 nonzero on the domain")
    frames = integrate_ode(frenet_rhs(spec, grid), spec.initial_frame, grid)
    gram = np.einsum("nik,njk->nij", frames, frames)
    drift = float(np.max(np.abs(gram - np.eye(5))))
    if drift > ODE_DRIFT_MAX:
        raise OrthonormalityDrift(f"RK4 frame drift {drift:.3e} exceeds {ODE_DRIFT_MAX:.0e}; reduce the step")
    points = spec.initial_point + cumulative_simpson(frames[:, 0, :], dx=grid.step, axis=0, initial=0.0)
    jets = _jets_from_frames(frames, kvals, grid)
    return CurveSamples(grid, points, jets=jets, jet_source="ode", true_curvatures=kvals)


# Reference curvature profiles used by the tests, demos and the verify suite.

def v3_profile(ratio21: float = 2.0, ratio43: float = 2.0, amp: float = 0.3):
    """k2/k1 and k4/k3 constant, curvatures oscillating."""
    return (
        lambda s: 1.0 + amp * np.sin(s),
        lambda s: ratio21 * (1.0 + amp * np.sin(s)),
        lambda s: 1.0 + amp * np.cos(s),
        lambda s: ratio43 * (1.0 + amp * np.cos(s)),
    )


def v1_helix_profile(k3: float = 1.0, k4: float = 1.0, amp: float = 0.3,
                     k2=lambda s: 1.0 + 0.2 * np.sin(s)):
    """V1-helix with non-constant curvatures.

    With k3, k4 constant the V1-helix condition on rho = k1/k2 reduces to
    rho''' + (k3^2 + k4^2) rho' = 0, solved by rho = 1 + amp cos(w s).
    """
    w = np.hypot(k3, k4)
    rho = lambda s: 1.0 + amp * np.cos(w * s)
    return (
        lambda s: rho(s) * k2(s),
        k2,
        lambda s: np.full_like(np.asarray(s, dtype=float), k3),
        lambda s: np.full_like(np.asarray(s, dtype=float), k4),
    )


def v5_helix_profile(k1: float = 1.0, k2: float = 1.0, amp: float = 0.3,
                     k3=lambda s: 1.0 + 0.2 * np.sin(s)):
    """V5 slant helix with non-constant curvatures.

    Reading the frame backwards (V5, -V4, V3, -V2, V1) swaps the roles of
    (k1, k2, k3, k4) and (k4, k3, k2, k1), so the V1-helix family above
    mirrors into k4/k3 = 1 + amp cos(w s) with w = hypot(k1, k2).
    """
    w = np.hypot(k1, k2)
    rho = lambda s: 1.0 + amp * np.cos(w * s)
    return (
        lambda s: np.full_like(np.asarray(s, dtype=float), k1),
        lambda s: np.full_like(np.asarray(s, dtype=float), k2),
        k3,
        lambda s: rho(s) * k3(s),
    )


def drifting_ratio_profile(rate: float = 0.2):
    """k2 = k1 (1 + rate s), other curvatures constant: k2/k1 drifts linearly."""
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    return (one, lambda s: 1.0 + rate * np.asarray(s, dtype=float), one, one)


def wobbly_k1_profile(amp: float = 0.5):
    """k1 = 1 + amp sin s, the rest 1: none of the helix conditions hold."""
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    return (lambda s: 1.0 + amp * np.sin(s), one, one, one)


def wobbly_k2_profile(amp: float = 0.5):
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))
    return (one, lambda s: 1.0 + amp * np.sin(s), one, one)
