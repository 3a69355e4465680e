"""
Why there are no V2 or V4 helices
=================================

An axis U making a constant angle with V2 would have coordinates
(u1, ..., u5) in the frame satisfying a first-order linear system.  Its first
equation forces u2 = 0, and the rest then collapses to zero.  Numerically the
discretized system keeps its smallest singular value well away from zero on
every curve we try.
"""

import numpy as np

from pentahelix import CurvatureSpec, Grid, WCurveSpec, extract_frames
from pentahelix import synthesize_from_curvatures, synthesize_w_curve
from pentahelix.classify import v2_v4_nonexistence_check
from pentahelix.synthesis import v1_helix_profile, v3_profile, v5_helix_profile, wobbly_k1_profile

grid = Grid.uniform(0.0, 10.0, 1e-3)
rng = np.random.default_rng(7)

cases = {"W (1,2,3,4)": synthesize_w_curve(WCurveSpec((1, 2, 3, 4)), grid)}
for i in range(3):
    k = rng.uniform(0.5, 5.0, 4)
    cases[f"W random {i}"] = synthesize_w_curve(WCurveSpec(k), grid)
for name, prof in (("V3 sinusoid", v3_profile()), ("V1 family", v1_helix_profile()),
                   ("V5 family", v5_helix_profile()), ("wobbly k1", wobbly_k1_profile())):
    cases[name] = synthesize_from_curvatures(CurvatureSpec(prof))

print(f"{'curve':<14s} {'sigma V2':>10s} {'sigma V4':>10s}")
for name, curve in cases.items():
    rep = v2_v4_nonexistence_check(extract_frames(curve))
    print(f"{name:<14s} {rep.sigma_v2:10.4f} {rep.sigma_v4:10.4f}")
