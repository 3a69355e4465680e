"""Acceptance criteria, one test per criterion.

Thresholds are pinned here rather than read back from the suite module, so
a loosened threshold in the package cannot make these pass.
"""

import numpy as np
import pytest

from pentahelix import classify as cl
from pentahelix.frenet import frenet_residual, orthonormality_defect
from pentahelix import suite

K1234 = (1.0, 2.0, 3.0, 4.0)


@pytest.fixture(scope="module")
def ctx():
    return suite.SuiteContext()


def test_c01_frame_fidelity(ctx, recorder):
    ortho = max(orthonormality_defect(ctx.frenet(k)) for k in ctx.random_k)
    resid = max(frenet_residual(ctx.frenet(k)) for k in ctx.random_k)
    ok = len(ctx.random_k) == 20 and ortho <= 1e-8 and resid <= 1e-4
    recorder(1, "frame fidelity (20 W-curves)", ok, max(ortho / 1e-8, resid / 1e-4),
             "ortho<=1e-8, Frenet residual<=1e-4 (shown as fraction of bound)")
    assert ortho <= 1e-8
    assert resid <= 1e-4


def test_c02_curvature_round_trip(ctx, recorder):
    curve = ctx.profile_curve("v3_sinusoid")
    fd = ctx.frenet("v3_sinusoid")
    worst = 0.0
    for i, k in enumerate(fd.curvatures):
        sl = k.scored
        truth = curve.true_curvatures[i][sl]
        worst = max(worst, np.max(np.abs(k.values[sl] - truth) / np.abs(truth)))
    recorder(2, "curvature round trip", worst <= 1e-4, worst, "<= 1e-4 relative")
    assert worst <= 1e-4


def test_c03_w_curves_are_all_three(ctx, recorder):
    worst, flags = 0.0, []
    for k in ctx.random_k:
        rep = cl.classify_all(ctx.w_curve(k), cl.Tolerances(constancy=1e-6))
        flags.append(all(rep.flags.values()))
        worst = max(worst, max(suite._report_residuals(rep)))
    ok = all(flags) and worst <= 1e-6
    recorder(3, "W-curves flagged V1, V3, V5", ok, worst, "all flags, residuals <= 1e-6")
    assert all(flags)
    assert worst <= 1e-6


def test_c04_axis_values(ctx, recorder):
    fd = ctx.frenet(K1234)
    a1, a3, a5 = cl.v1_axis(fd), cl.v3_axis(fd), cl.v5_axis(fd)
    err = max(abs(a1.cos_angle - 0.8479983), abs(a3.cos_angle - 0.4239992),
              abs(a5.cos_angle - 0.3179994))
    dev = max(a.constancy_residual for a in (a1, a3, a5))
    dnorm = max(a.derivative_norm for a in (a1, a3, a5))
    ok = err <= 1e-5 and dev <= 1e-6 and dnorm <= 1e-5
    recorder(4, "axis angles for k=(1,2,3,4)", ok, err,
             f"cos within 1e-5; deviation {dev:.1e}<=1e-6; |dU/ds| {dnorm:.1e}<=1e-5")
    assert err <= 1e-5
    assert dev <= 1e-6
    assert dnorm <= 1e-5


def test_c05_characterizations_agree(ctx, recorder):
    tol = 1e-4
    helices = suite.V1_HELICES + [ctx.random_k[0]]
    others = suite.V1_NON_HELICES
    assert len(helices) == 5 and len(others) == 5
    bad = 0
    for key in helices + others:
        fd = ctx.frenet(key)
        votes = {cl.v1_helix_test(fd, tol)[0].is_constant,
                 cl.v1_ode_check(fd, tol).passed,
                 cl.v1_integral_check(fd, tol).passed}
        v5c, v5o, _ = cl.v5_slant_test(fd, tol, strict=False)
        bad += len(votes) != 1
        bad += v5c.is_constant != v5o.passed
        bad += votes != {key in helices}
    recorder(5, "V1 and V5 tests unanimous", bad == 0, float(bad), "0 disagreements over 10 curves")
    assert bad == 0


def test_c06_axis_orthogonality(ctx, recorder):
    worst = 0.0
    for key in suite.V3_INSTANCES:
        fd = ctx.frenet(key)
        U = cl.v3_axis(fd).mean_axis
        sl = fd.curvatures[0].scored
        worst = max(worst, np.max(np.abs(fd.frames[sl, 1] @ U)), np.max(np.abs(fd.frames[sl, 3] @ U)))
    for key in suite.V5_INSTANCES:
        fd = ctx.frenet(key)
        U = cl.v5_axis(fd).mean_axis
        sl = slice(4 * fd.margin, len(fd.grid) - 4 * fd.margin)
        worst = max(worst, np.max(np.abs(fd.frames[sl, 3] @ U)))
    recorder(6, "axis orthogonal to V2/V4", worst <= 1e-6, worst, "<= 1e-6")
    assert worst <= 1e-6


def test_c07_v5_with_constant_k4_k3_has_constant_k2_k1(ctx, recorder):
    applicable, worst = 0, 0.0
    for key in ctx.all_keys():
        fd = ctx.frenet(key)
        v5 = cl.v5_slant_test(fd, 1e-6, strict=False)[0].is_constant
        r43 = cl.constancy(abs(fd.k[3]) / fd.k[2], 1e-6).is_constant
        if v5 and r43:
            applicable += 1
            worst = max(worst, cl.constancy(fd.k[1] / fd.k[0], 1e-5).residual)
    ok = applicable > 0 and worst <= 1e-5
    recorder(7, "V5 + const k4/k3 => const k2/k1", ok, worst, f"<= 1e-5 on {applicable} curves")
    assert applicable > 0
    assert worst <= 1e-5


def test_c08_no_v2_or_v4_helix(ctx, recorder):
    sig, res = [], []
    for key in ctx.all_keys():
        rep = cl.v2_v4_nonexistence_check(ctx.frenet(key))
        sig += [rep.sigma_v2, rep.sigma_v4]
        res += [rep.residual_v2, rep.residual_v4]
    ok = min(sig) >= 1e-3 and min(res) >= 1e-4
    recorder(8, "V2/V4 systems have no solution", ok, min(sig),
             f"sigma_min >= 1e-3; unit-vector residual {min(res):.1e} >= 1e-4")
    assert min(sig) >= 1e-3
    assert min(res) >= 1e-4


def test_c09_negative_control(ctx, recorder):
    tol = 1e-6
    fd = ctx.frenet("ratio_drift")
    r21, r34 = cl.v3_slant_test(fd, tol)
    _, ode, _ = cl.v5_slant_test(fd, tol, strict=False)
    ok = (not r21.is_constant and r34.is_constant
          and r21.residual >= 10 * tol and ode.residual >= 10 * tol)
    recorder(9, "drifting k2/k1 rejected", ok, min(r21.residual, ode.residual), ">= 10 * tol = 1e-5")
    assert not r21.is_constant
    assert r34.is_constant
    assert r21.residual >= 10 * tol
    assert ode.residual >= 10 * tol


def test_c10_verify_is_deterministic(recorder, capsys):
    from pentahelix.cli import main

    assert main(["verify"]) == 0
    first = capsys.readouterr().out
    assert main(["verify"]) == 0
    second = capsys.readouterr().out
    same = first == second
    recorder(10, "verify output byte-identical", same, 0.0 if same else 1.0, "identical twice")
    assert same
    assert "10/10 criteria passed" in first
