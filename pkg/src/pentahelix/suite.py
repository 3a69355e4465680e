"""Property suite behind ``pentahelix verify``.

Each criterion returns a :class:`CriterionResult` carrying the measured
worst case and the threshold it was held to.  Curves are synthesized once
per :class:`SuiteContext` and shared between criteria.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .classify import (
    Tolerances,
    classify_all,
    v1_helix_test,
    v1_axis,
    v1_integral_check,
    v1_ode_check,
    v2_v4_nonexistence_check,
    v3_axis,
    v3_slant_test,
    v5_axis,
    v5_implication_check,
    v5_slant_test,
)
from .frenet import extract_frames, frenet_residual, orthonormality_defect
from .numkit import Grid
from .synthesis import (
    CurvatureSpec,
    WCurveSpec,
    drifting_ratio_profile,
    synthesize_from_curvatures,
    synthesize_w_curve,
    v1_helix_profile,
    v3_profile,
    v5_helix_profile,
    wobbly_k1_profile,
    wobbly_k2_profile,
)

DEFAULT_SEED = 20240501
N_RANDOM_W = 20


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] C{self.number:<2d} {self.name:<28s} "
                f"measured={self.measured:.6e} threshold={self.threshold:.1e}  {self.detail}")


@dataclass
class SuiteContext:
    seed: int = DEFAULT_SEED
    tol: float = 1e-6
    equivalence_tol: float = 1e-4
    step: float = 1e-3
    span: tuple = (0.0, 10.0)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> Grid:
        return Grid.uniform(self.span[0], self.span[1], self.step)

    @cached_property
    def random_k(self) -> list:
        rng = np.random.default_rng(self.seed)
        return [tuple(float(x) for x in rng.uniform(0.5, 5.0, 4)) for _ in range(N_RANDOM_W)]

    def w_curve(self, k):
        key = ("w", tuple(k))
        if key not in self._cache:
            self._cache[key] = synthesize_w_curve(WCurveSpec(k), self.grid)
        return self._cache[key]

    def profile_curve(self, name: str):
        key = ("p", name)
        if key not in self._cache:
            self._cache[key] = synthesize_from_curvatures(
                CurvatureSpec(PROFILES[name], self.span, self.step))
        return self._cache[key]

    def frenet(self, key):
        ck = ("fd",) + (key if isinstance(key, tuple) else (key,))
        if ck not in self._cache:
            curve = self.w_curve(key) if isinstance(key, tuple) else self.profile_curve(key)
            self._cache[ck] = extract_frames(curve)
        return self._cache[ck]

    def all_keys(self) -> list:
        return [(1.0, 2.0, 3.0, 4.0), (1.0, 1.0, 1.0, 1.0)] + self.random_k + list(PROFILES)


PROFILES: dict[str, tuple] = {
    "v3_sinusoid": v3_profile(2.0, 2.0),
    "v1_helix": v1_helix_profile(),
    "v1_helix_b": v1_helix_profile(1.5, 0.8, 0.25),
    "v5_helix": v5_helix_profile(),
    "v5_helix_b": v5_helix_profile(0.8, 1.5, 0.25),
    "ratio_drift": drifting_ratio_profile(0.2),
    "wobbly_k1": wobbly_k1_profile(0.5),
    "wobbly_k2": wobbly_k2_profile(0.5),
}
V1_HELICES = [(1.0, 2.0, 3.0, 4.0), "v3_sinusoid", "v1_helix", "v1_helix_b"]
V1_NON_HELICES = ["ratio_drift", "wobbly_k1", "wobbly_k2", "v5_helix", "v5_helix_b"]
V3_INSTANCES = [(1.0, 2.0, 3.0, 4.0), (1.0, 1.0, 1.0, 1.0), "v3_sinusoid"]
V5_INSTANCES = [(1.0, 2.0, 3.0, 4.0), (1.0, 1.0, 1.0, 1.0), "v3_sinusoid", "v5_helix", "v5_helix_b"]


def c1_frame_fidelity(ctx: SuiteContext) -> CriterionResult:
    ortho, resid = [], []
    for k in ctx.random_k:
        fd = ctx.frenet(k)
        ortho.append(orthonormality_defect(fd))
        resid.append(frenet_residual(fd))
    ok = max(ortho) <= 1e-8 and max(resid) <= 1e-4
    return CriterionResult(1, "frame_fidelity", ok, max(resid), 1e-4,
                           f"ortho_defect={max(ortho):.3e} (<=1e-8) over {len(ortho)} W-curves")


def c2_round_trip(ctx: SuiteContext) -> CriterionResult:
    curve = ctx.profile_curve("v3_sinusoid")
    fd = ctx.frenet("v3_sinusoid")
    worst = 0.0
    for i, k in enumerate(fd.curvatures):
        sl = k.scored
        truth = curve.true_curvatures[i][sl]
        worst = max(worst, float(np.max(np.abs(k.values[sl] - truth) / np.abs(truth))))
    return CriterionResult(2, "round_trip_curvatures", worst <= 1e-4, worst, 1e-4,
                           "max relative interior error, sinusoidal V3 profile")


def _report_residuals(rep) -> list:
    out = [rep.v1.verdict.residual, rep.v1.ode.residual, rep.v1.integral.residual,
           rep.v3.ratio_21.residual, rep.v3.ratio_34.residual,
           rep.v5.verdict.residual, rep.v5.ode.residual]
    for ax in (rep.v1.axis, rep.v3.axis, rep.v5.axis):
        if ax is not None:
            out.append(ax.constancy_residual)
    return out


def c3_w_curve_triple(ctx: SuiteContext) -> CriterionResult:
    cfg = Tolerances(constancy=ctx.tol)
    worst, flags_ok, bad = 0.0, True, []
    for k in ctx.random_k:
        try:
            rep = classify_all(ctx.w_curve(k), cfg)
        except Exception as exc:  # reported as a failure, not a crash
            flags_ok = False
            bad.append(f"{exc.__class__.__name__}")
            continue
        if not all(rep.flags.values()):
            flags_ok = False
            bad.append(str(rep.flags))
        worst = max(worst, max(_report_residuals(rep)))
    ok = flags_ok and worst <= 1e-6
    detail = f"{len(ctx.random_k)} W-curves flagged V1,V3,V5" if flags_ok else "; ".join(bad[:3])
    return CriterionResult(3, "w_curve_triple_flags", ok, worst, 1e-6, detail)


def c4_axis_values(ctx: SuiteContext) -> CriterionResult:
    fd = ctx.frenet((1.0, 2.0, 3.0, 4.0))
    expected = {"theta": 1 / np.sqrt(1.390625), "phi": 1 / np.sqrt(5.5625), "psi": 3 / np.sqrt(89.0)}
    axes = {"theta": v1_axis(fd), "phi": v3_axis(fd), "psi": v5_axis(fd)}
    cos_err = max(abs(axes[n].cos_angle - expected[n]) for n in axes)
    dev = max(a.constancy_residual for a in axes.values())
    dnorm = max(a.derivative_norm for a in axes.values())
    ok = cos_err <= 1e-5 and dev <= 1e-6 and dnorm <= 1e-5
    cosines = ", ".join(f"{axes[n].cos_angle:.6f}" for n in axes)
    return CriterionResult(4, "axis_values_k1234", ok, cos_err, 1e-5,
                           f"cos=({cosines}) deviation={dev:.2e} (<=1e-6) dU={dnorm:.2e} (<=1e-5)")


def c5_equivalence(ctx: SuiteContext) -> CriterionResult:
    tol = ctx.equivalence_tol
    disagreements, status_err = [], []
    keys = V1_HELICES + [ctx.random_k[0]] + V1_NON_HELICES
    for key in keys:
        fd = ctx.frenet(key)
        a = v1_helix_test(fd, tol)[0].is_constant
        b = v1_ode_check(fd, tol).passed
        c = v1_integral_check(fd, tol).passed
        v5c, v5o, _ = v5_slant_test(fd, tol, strict=False)
        if not (a == b == c):
            disagreements.append(f"V1 {key}")
        if v5c.is_constant != v5o.passed:
            disagreements.append(f"V5 {key}")
        if a != (key in V1_HELICES or key == ctx.random_k[0]):
            status_err.append(str(key))
    n_bad = len(disagreements) + len(status_err)
    detail = (f"{len(keys)} curves ({len(keys) - len(V1_NON_HELICES)} V1-helix, "
              f"{len(V1_NON_HELICES)} not) unanimous" if n_bad == 0
              else "; ".join(disagreements + status_err))
    return CriterionResult(5, "characterization_equivalence", n_bad == 0, float(n_bad), 0.0, detail)


def c6_orthogonality(ctx: SuiteContext) -> CriterionResult:
    worst = 0.0
    for key in V3_INSTANCES:
        fd = ctx.frenet(key)
        ax = v3_axis(fd)
        sl = fd.curvatures[0].scored
        for i in (2, 4):
            worst = max(worst, float(np.max(np.abs(fd.frames[sl, i - 1, :] @ ax.mean_axis))))
    for key in V5_INSTANCES:
        fd = ctx.frenet(key)
        ax = v5_axis(fd)
        sl = slice(4 * fd.margin, len(fd.grid) - 4 * fd.margin)
        worst = max(worst, float(np.max(np.abs(fd.frames[sl, 3, :] @ ax.mean_axis))))
    return CriterionResult(6, "axis_orthogonality", worst <= 1e-6, worst, 1e-6,
                           "<U,V2>, <U,V4> for V3 slant; <U,V4> for V5 slant")


def c7_implication(ctx: SuiteContext) -> CriterionResult:
    applicable, worst = 0, 0.0
    for key in ctx.all_keys():
        fd = ctx.frenet(key)
        rep = v5_implication_check(fd, ctx.tol, ratio_tol=1e-5)
        if rep.applicable:
            applicable += 1
            worst = max(worst, rep.residual)
    return CriterionResult(7, "v5_implies_v3", worst <= 1e-5, worst, 1e-5,
                           f"{applicable} applicable curves, zero violations")


def c8_nonexistence(ctx: SuiteContext) -> CriterionResult:
    sig, resid = [], []
    for key in ctx.all_keys():
        rep = v2_v4_nonexistence_check(ctx.frenet(key))
        sig += [rep.sigma_v2, rep.sigma_v4]
        resid += [rep.residual_v2, rep.residual_v4]
    ok = min(sig) >= 1e-3 and min(resid) >= 1e-4
    return CriterionResult(8, "v2_v4_nonexistence", ok, min(sig), 1e-3,
                           f"min unit-vector residual={min(resid):.3e} (>=1e-4) over {len(sig) // 2} curves")


def c9_negative_controls(ctx: SuiteContext) -> CriterionResult:
    fd = ctx.frenet("ratio_drift")
    r21, r34 = v3_slant_test(fd, ctx.tol)
    _, ode, _ = v5_slant_test(fd, ctx.tol, strict=False)
    margin = min(r21.residual, ode.residual) / ctx.tol
    ok = (not r21.is_constant) and r34.is_constant and margin >= 10.0
    return CriterionResult(9, "negative_controls", ok, margin, 10.0,
                           f"k2/k1 residual={r21.residual:.3e}, V5 ODE residual={ode.residual:.3e} "
                           f"(ratio to tol)")


CRITERIA: list[Callable[[SuiteContext], CriterionResult]] = [
    c1_frame_fidelity, c2_round_trip, c3_w_curve_triple, c4_axis_values,
    c5_equivalence, c6_orthogonality, c7_implication, c8_nonexistence,
    c9_negative_controls,
]


def run_suite(seed: int = DEFAULT_SEED, tol: float = 1e-6, equivalence_tol: float = 1e-4) -> list:
    ctx = SuiteContext(seed=seed, tol=tol, equivalence_tol=equivalence_tol)
    results = []
    for crit in CRITERIA:
        try:
            results.append(crit(ctx))
        except Exception as exc:
            n = CRITERIA.index(crit) + 1
            results.append(CriterionResult(n, crit.__name__[3:], False, float("nan"), float("nan"),
                                           f"raised {exc.__class__.__name__}: {exc}"))
    return results


def render(results: list) -> str:
    lines = [r.line() for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n"


def run_with_determinism(seed: int = DEFAULT_SEED, tol: float = 1e-6,
                         equivalence_tol: float = 1e-4) -> tuple[list, str]:
    """Run criteria 1-9 twice and add criterion 10 comparing the two reports."""
    first = render(run_suite(seed, tol, equivalence_tol))
    results = run_suite(seed, tol, equivalence_tol)
    second = render(results)
    same = first == second
    results.append(CriterionResult(10, "determinism", same, 0.0 if same else 1.0, 0.0,
                                   "two consecutive runs byte-identical" if same
                                   else "reports differ between runs"))
    return results, render(results)
