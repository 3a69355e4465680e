import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from pentahelix.classify import v3_slant_test
from pentahelix.errors import DegenerateCurvature, OrthonormalityDrift
from pentahelix.frenet import check_unit_speed, extract_frames
from pentahelix.numkit import Grid, ScalarSeries, frenet_matrix, frequencies
from pentahelix.synthesis import (
    CurvatureSpec,
    WCurveSpec,
    synthesize_from_curvatures,
    synthesize_w_curve,
    v1_helix_profile,
    v5_helix_profile,
)

G10 = Grid.uniform(0, 10, 1e-3)


def const(c):
    return lambda s: np.full_like(np.asarray(s, dtype=float), c)


class TestWCurve:
    def test_unit_speed(self):
        c = synthesize_w_curve(WCurveSpec((1, 2, 3, 4)), G10)
        assert check_unit_speed(c).residual <= 1e-9
        assert c.jet_source == "exact"

    def test_two_circular_motions(self):
        # alpha' is a drift along ker K = span(1, 0, 1, 0, 1) plus rotations
        # at frequencies 1 and sqrt 3, so
        # alpha^(5) + (w1^2 + w2^2) alpha''' + w1^2 w2^2 alpha' = w1^2 w2^2 drift
        c = synthesize_w_curve(WCurveSpec((1, 1, 1, 1)), G10)
        w1, w2 = frequencies(frenet_matrix((1, 1, 1, 1)))
        lhs = c.jets[4] + (w1 ** 2 + w2 ** 2) * c.jets[2] + (w1 * w2) ** 2 * c.jets[0]
        drift = np.array([1, 0, 1, 0, 1]) / 3.0
        assert np.max(np.abs(lhs - (w1 * w2) ** 2 * drift)) <= 1e-10
        # and the position agrees with the jets
        d = np.gradient(c.points, G10.step, axis=0, edge_order=2)
        assert np.max(np.abs(d[1:-1] - c.jets[0][1:-1])) <= 1e-6

    @pytest.mark.parametrize("k", [(1, 0, 3, 4), (1, 2, -1, 4), (0, 1, 1, 1)])
    def test_degenerate(self, k):
        with pytest.raises(DegenerateCurvature):
            WCurveSpec(k)

    def test_near_coincident_frequencies_use_stepping(self):
        # k = (1, 1e-5, 1e-5, 1) puts both frequencies near 1
        k = (1.0, 2e-9, 1.0, 2e-9)
        c = synthesize_w_curve(WCurveSpec(k), Grid.uniform(0, 5, 1e-3))
        assert check_unit_speed(c).residual <= 1e-9
        assert np.all(np.isfinite(c.points))

    @settings(max_examples=15, deadline=None)
    @given(st.lists(st.floats(0.5, 5.0), min_size=4, max_size=4), st.integers(0, 2 ** 31))
    def test_rigid_motion_covariance(self, k, seed):
        Q = special_ortho_group.rvs(5, random_state=seed)
        g = Grid.uniform(0, 3, 1e-3)
        base = synthesize_w_curve(WCurveSpec(k), g)
        moved = synthesize_w_curve(WCurveSpec(k, initial_frame=Q, initial_point=np.ones(5)), g)
        assert np.max(np.abs(moved.points - (1 + base.points @ Q))) <= 1e-9


class TestFromCurvatures:
    def test_constant_agrees_with_closed_form(self):
        ode = synthesize_from_curvatures(CurvatureSpec([const(c) for c in (1, 2, 3, 4)], (0, 10), 1e-3))
        exact = synthesize_w_curve(WCurveSpec((1, 2, 3, 4)), G10)
        assert np.max(np.abs(ode.points - exact.points)) <= 1e-7
        assert ode.jet_source == "ode"

    def test_v3_profile_on_two_pi(self):
        k = (lambda s: 1 + 0.3 * np.sin(s), lambda s: 2 * (1 + 0.3 * np.sin(s)),
             lambda s: 1 + 0.3 * np.cos(s), lambda s: 0.5 * (1 + 0.3 * np.cos(s)))
        curve = synthesize_from_curvatures(CurvatureSpec(k, (0, 2 * np.pi), 1e-3))
        r21, r34 = v3_slant_test(extract_frames(curve))
        assert r21.is_constant and r34.is_constant
        assert r21.mean == pytest.approx(2, abs=1e-6)
        assert r34.mean == pytest.approx(2, abs=1e-6)

    def test_wobbly_k2_is_not_v3(self):
        k = (const(1), lambda s: 1 + 0.5 * np.sin(s), const(1), const(1))
        curve = synthesize_from_curvatures(CurvatureSpec(k, (0, 2 * np.pi), 1e-3))
        r21, _ = v3_slant_test(extract_frames(curve))
        assert not r21.is_constant
        assert r21.residual > 0.3

    def test_sampled_curvatures(self):
        g = Grid.uniform(0, 10, 1e-2)
        series = [ScalarSeries(g, f(g.s_values)) for f in v1_helix_profile()]
        a = synthesize_from_curvatures(CurvatureSpec(series, (0, 10), 1e-3))
        b = synthesize_from_curvatures(CurvatureSpec(v1_helix_profile(), (0, 10), 1e-3))
        assert np.max(np.abs(a.points - b.points)) <= 1e-5

    def test_zero_curvature_rejected(self):
        k = (const(1), lambda s: np.cos(s), const(1), const(1))
        with pytest.raises(DegenerateCurvature):
            synthesize_from_curvatures(CurvatureSpec(k, (0, 10), 1e-3))

    def test_coarse_step_reports_drift(self):
        k = [const(c) for c in (20, 20, 20, 20)]
        with pytest.raises(OrthonormalityDrift):
            synthesize_from_curvatures(CurvatureSpec(k, (0, 10), 5e-2))

    def test_truth_attached(self):
        curve = synthesize_from_curvatures(CurvatureSpec(v5_helix_profile(), (0, 5), 1e-3))
        s = curve.grid.s_values
        assert np.allclose(curve.true_curvatures[3], (1 + 0.3 * np.cos(np.sqrt(2) * s)) *
                           (1 + 0.2 * np.sin(s)))
