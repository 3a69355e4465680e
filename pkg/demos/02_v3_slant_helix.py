"""
A V3 slant helix with oscillating curvatures
============================================

Prescribe k2 = 2 k1 and k4 = 2 k3 with both k1 and k3 oscillating, integrate
the Frenet system and check what the classifier says.  Constant k2/k1 and
k3/k4 make the V1 and V5 functions constant too, so all three flags come up.
"""

import numpy as np

from pentahelix import CurvatureSpec, classify_all, synthesize_from_curvatures
from pentahelix.synthesis import v3_profile

spec = CurvatureSpec(v3_profile(ratio21=2.0, ratio43=2.0, amp=0.3), domain=(0.0, 10.0), step=1e-3)
curve = synthesize_from_curvatures(spec)
report = classify_all(curve)

k1, k2, k3, k4 = report.frenet.curvatures
sl = k1.scored
print(f"k1 ranges over [{k1.values[sl].min():.3f}, {k1.values[sl].max():.3f}]")
print(f"k2/k1 = {report.v3.ratio_21.mean:.8f} (residual {report.v3.ratio_21.residual:.1e})")
print(f"k3/k4 = {report.v3.ratio_34.mean:.8f} (residual {report.v3.ratio_34.residual:.1e})")
print("flags:", report.flags)

# The V3 axis is fixed even though the frame swings around.
ax = report.v3.axis
proj = report.frenet.frames[:, 2, :] @ ax.mean_axis
print(f"<V3, U> stays at {proj[sl].mean():.8f} +- {np.ptp(proj[sl]):.1e}")

# A small drift in the ratio is enough to lose the V3 property.
from pentahelix.synthesis import drifting_ratio_profile
drift = classify_all(synthesize_from_curvatures(CurvatureSpec(drifting_ratio_profile(0.2))))
print("k2 = k1 (1 + 0.2 s):", drift.flags, f"k2/k1 residual {drift.v3.ratio_21.residual:.3f}")
