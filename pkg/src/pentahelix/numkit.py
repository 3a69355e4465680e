"""Numerical kernels shared by every other module.

Finite differences on uniform grids, a constancy detector, fixed-step RK4,
the skew-symmetric matrix exponential and the spectrum of a Frenet matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_simpson

from .errors import GridTooSmall, NonFiniteState, NonUniformGrid, NotSkew

MIN_SAMPLES = 7
UNIFORM_RTOL = 1e-12
BOUNDARY_NODES = 2

# Integer stencil numerators; divide by 12 * spacing**order.
# Keys are (order, position) with position "c" (central), 0 or 1 (distance
# from the nearest end).  Offsets are in units of the stencil spacing.
_STENCILS = {
    (1, "c"): ((-2, -1, 0, 1, 2), (1, -8, 0, 8, -1)),
    (1, 0): ((0, 1, 2, 3, 4), (-25, 48, -36, 16, -3)),
    (1, 1): ((-1, 0, 1, 2, 3), (-3, -10, 18, -6, 1)),
    (2, "c"): ((-2, -1, 0, 1, 2), (-1, 16, -30, 16, -1)),
    (2, 0): ((0, 1, 2, 3, 4, 5), (45, -154, 214, -156, 61, -10)),
    (2, 1): ((-1, 0, 1, 2, 3, 4), (10, -15, -4, 14, -6, 1)),
}


def stencil(order: int, position) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights (already divided by 12) of a 4th-order stencil.

    ``position`` is ``"c"`` for the central stencil, ``0``/``1`` for the
    forward stencils used at the first two nodes, and ``-1``/``-2`` for the
    mirrored backward stencils at the last two nodes.
    """
    if position in ("c", 0, 1):
        offs, w = _STENCILS[(order, position)]
        return np.array(offs), np.array(w, dtype=float) / 12.0
    offs, w = _STENCILS[(order, -position - 1)]
    sign = -1.0 if order % 2 else 1.0
    return -np.array(offs), sign * np.array(w, dtype=float) / 12.0


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform arc-length grid.

    Build with :meth:`Grid.uniform` or :meth:`Grid.from_values`; the latter
    validates uniformity.
    """

    s_values: np.ndarray
    step: float

    def __post_init__(self):
        s = np.asarray(self.s_values, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "step", float(self.step))
        if s.ndim != 1 or s.size < MIN_SAMPLES:
            raise GridTooSmall(f"need at least {MIN_SAMPLES} samples, got {s.size}")
        if not np.all(np.isfinite(s)):
            raise NonUniformGrid("grid contains non-finite values")
        d = np.diff(s)
        if np.any(d <= 0):
            raise NonUniformGrid("grid must be strictly increasing")
        scale = max(self.step, float(np.max(np.abs(s))))
        if np.max(np.abs(d - self.step)) > UNIFORM_RTOL * scale:
            raise NonUniformGrid(
                f"spacing varies by {np.max(np.abs(d - self.step)):.3e} "
                f"(allowed {UNIFORM_RTOL * scale:.3e})"
            )

    @classmethod
    def uniform(cls, s0: float, s1: float, step: float) -> "Grid":
        n = int(round((s1 - s0) / step)) + 1
        return cls(s0 + step * np.arange(n), step)

    @classmethod
    def from_values(cls, s_values) -> "Grid":
        s = np.asarray(s_values, dtype=float)
        if s.ndim != 1 or s.size < MIN_SAMPLES:
            raise GridTooSmall(f"need at least {MIN_SAMPLES} samples, got {s.size}")
        return cls(s, (s[-1] - s[0]) / (s.size - 1))

    def __len__(self) -> int:
        return self.s_values.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.s_values[0]), float(self.s_values[-1])

    def stride_for(self, spacing: float, order_depth: int = 1) -> int:
        """Node stride closest to ``spacing``, clamped so stencils fit."""
        m = max(1, int(round(spacing / self.step)))
        cap = max(1, (len(self) - 1) // (6 * max(order_depth, 1)))
        return min(m, cap)


@dataclass(frozen=True, eq=False)
class ScalarSeries:
    """Values sampled on a grid.

    ``margin`` counts nodes at each end that are not scored by
    :func:`constancy` beyond the fixed two-node boundary; differentiation
    with wide stencils grows it.
    """

    grid: Grid
    values: np.ndarray
    margin: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise ValueError(f"expected {len(self.grid)} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteState("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def _combine(self, other, op):
        if isinstance(other, ScalarSeries):
            return ScalarSeries(self.grid, op(self.values, other.values),
                                max(self.margin, other.margin))
        return ScalarSeries(self.grid, op(self.values, other), self.margin)

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, np.divide)

    def __rtruediv__(self, other):
        return self._combine(other, lambda a, b: b / a)

    def __neg__(self):
        return ScalarSeries(self.grid, -self.values, self.margin)

    def __pow__(self, p):
        return ScalarSeries(self.grid, self.values ** p, self.margin)

    def __abs__(self):
        return ScalarSeries(self.grid, np.abs(self.values), self.margin)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ScalarSeries":
        return ScalarSeries(self.grid, fn(self.values), self.margin)

    @property
    def scored(self) -> slice:
        """Slice of nodes that enter constancy statistics."""
        b = max(BOUNDARY_NODES, self.margin)
        return slice(b, len(self) - b)


@dataclass(frozen=True)
class ConstancyVerdict:
    is_constant: bool
    mean: float
    residual: float
    tolerance: float
    extra: dict = field(default_factory=dict, compare=False)


def _check_stencil_fit(n: int, order: int, stride: int) -> None:
    width = 5 if order == 1 else 6
    if n < MIN_SAMPLES or n < (width - 1) * stride + 1 or n < 4 * stride + 1:
        raise GridTooSmall(
            f"{n} samples too few for order-{order} stencil at stride {stride}"
        )


@lru_cache(maxsize=64)
def _stencil_matrix(n: int, order: int, stride: int) -> sp.csr_matrix:
    """Unscaled stencil operator; multiply by 1 / (stride * h) ** order."""
    _check_stencil_fit(n, order, stride)
    m = stride
    rows, cols, vals = [], [], []

    def put(nodes, position):
        offs, w = stencil(order, position)
        for o, wj in zip(offs, w):
            rows.append(nodes)
            cols.append(nodes + o * m)
            vals.append(np.full(nodes.size, wj))

    put(np.arange(2 * m, n - 2 * m), "c")
    put(np.arange(0, m), 0)
    put(np.arange(m, 2 * m), 1)
    put(np.arange(n - m, n), -1)
    put(np.arange(n - 2 * m, n - m), -2)
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    mat.sum_duplicates()
    return mat


def derivative_matrix(grid: Grid, order: int = 1, stride: int = 1) -> sp.csr_matrix:
    """Sparse finite-difference operator matching :func:`differentiate`."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return _stencil_matrix(len(grid), order, stride) * (1.0 / (stride * grid.step) ** order)


def derivative_array(values: np.ndarray, grid: Grid, order: int = 1,
                     stride: int = 1) -> np.ndarray:
    """Differentiate ``values`` along axis 0 (any trailing shape)."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n != len(grid):
        raise ValueError("values do not match grid length")
    flat = values.reshape(n, -1)
    out = _stencil_matrix(n, order, stride) @ flat
    out /= (stride * grid.step) ** order
    return out.reshape(values.shape)


def differentiate(series: ScalarSeries, order: int = 1, stride: int = 1) -> ScalarSeries:
    """First or second derivative of a sampled series.

    Central 4th-order differences in the interior and one-sided 4th-order
    stencils on the two boundary nodes per end.  With ``stride > 1`` the
    stencil nodes sit ``stride`` grid steps apart, which trades truncation
    error for far less round-off amplification; the series margin grows by
    ``2 * stride``.
    """
    vals = derivative_array(series.values, series.grid, order, stride)
    return ScalarSeries(series.grid, vals, series.margin + BOUNDARY_NODES * stride)


def constancy(series: ScalarSeries, tolerance: float) -> ConstancyVerdict:
    """Decide whether ``series`` is constant over its scored interior.

    The residual is the largest deviation from the interior mean, divided by
    ``max(1, |mean|)``.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    vals = series.values[series.scored]
    if vals.size == 0:
        raise GridTooSmall("no interior nodes left after boundary exclusion")
    mean = float(np.mean(vals))
    residual = float(np.max(np.abs(vals - mean)) / max(1.0, abs(mean)))
    return ConstancyVerdict(residual <= tolerance, mean, residual, float(tolerance))


def cumulative_integral(series: ScalarSeries) -> ScalarSeries:
    """Running integral from the grid start by composite Simpson."""
    vals = cumulative_simpson(series.values, dx=series.grid.step, initial=0.0)
    return ScalarSeries(series.grid, vals, series.margin)


def integrate_ode(rhs: Callable[[float, np.ndarray], np.ndarray], initial, grid: Grid) -> np.ndarray:
    """Classical RK4 from node to node; returns the state at every node.

    ``rhs(s, x)`` must return an array shaped like ``x``.  The frame system
    uses a 5x5 state (rows V1..V5), i.e. a point of R^25.
    """
    x = np.array(initial, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteState("initial state is not finite")
    s = grid.s_values
    h = grid.step
    out = np.empty((len(grid),) + x.shape)
    out[0] = x
    for j in range(len(grid) - 1):
        t = s[j]
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"state became non-finite at s={s[j + 1]:.6g}")
        out[j + 1] = x
    return out


def frenet_matrix(k) -> np.ndarray:
    """Skew tridiagonal 5x5 matrix K with V' = K V for curvatures k1..k4."""
    k = np.asarray(k, dtype=float)
    if k.shape != (4,):
        raise ValueError("need exactly four curvatures")
    K = np.zeros((5, 5))
    idx = np.arange(4)
    K[idx, idx + 1] = k
    K[idx + 1, idx] = -k
    return K


def _require_skew(K: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.shape != (5, 5):
        raise NotSkew(f"expected a 5x5 matrix, got {K.shape}")
    if np.linalg.norm(K + K.T) > atol:
        raise NotSkew(f"||K + K^T|| = {np.linalg.norm(K + K.T):.3e}")
    return K


def skew_expm(K, t: float = 1.0) -> np.ndarray:
    """exp(t K) for skew-symmetric K by scaling and squaring.

    A degree-18 Taylor core is evaluated on ``t K / 2**j`` with the scaled
    norm below 1/2, then squared ``j`` times.  The result is re-orthogonalized
    with one Newton-Schulz step, which is harmless for an orthogonal matrix
    and removes squaring round-off drift.
    """
    A = _require_skew(K) * float(t)
    norm = np.linalg.norm(A, 1)
    j = max(0, int(np.ceil(np.log2(norm / 0.5))) if norm > 0 else 0)
    A = A / (2.0 ** j)
    E = np.eye(5)
    term = np.eye(5)
    for p in range(1, 19):
        term = term @ A / p
        E = E + term
    for _ in range(j):
        E = E @ E
    return 1.5 * E - 0.5 * E @ E.T @ E


def frequencies(K) -> tuple[float, float]:
    """The two rotation frequencies of a skew 5x5 matrix, ascending.

    Eigenvalues of a real skew 5x5 matrix are {0, +-i w1, +-i w2}.
    """
    K = _require_skew(K)
    lam = np.linalg.eigvals(K)
    im = np.sort(np.abs(lam.imag))
    # im = [~0, w1, w1, w2, w2]
    w1 = 0.5 * (im[1] + im[2])
    w2 = 0.5 * (im[3] + im[4])
    return float(w1), float(w2)
