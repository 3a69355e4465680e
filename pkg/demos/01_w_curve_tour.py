"""
A constant-curvature curve in E^5
=================================

Synthesize the W-curve with k = (1, 2, 3, 4), recover its Frenet frame from
the samples and look at the three fixed axes it carries.
"""

import numpy as np

from pentahelix import Grid, WCurveSpec, classify_all, extract_frames, synthesize_w_curve
from pentahelix.frenet import frenet_residual, orthonormality_defect
from pentahelix.numkit import frenet_matrix, frequencies

grid = Grid.uniform(0.0, 10.0, 1e-3)
curve = synthesize_w_curve(WCurveSpec((1, 2, 3, 4)), grid)
print(f"{len(curve)} samples, endpoint {np.round(curve.points[-1], 4)}")

# The frame rotates in two planes at once; these are the two frequencies.
w1, w2 = frequencies(frenet_matrix((1, 2, 3, 4)))
print(f"rotation frequencies: {w1:.6f}, {w2:.6f}")

# Frames come from Gram-Schmidt on the exact derivative jets; curvatures
# from differencing the frame.
fd = extract_frames(curve)
for i, k in enumerate(fd.curvatures, 1):
    v = k.values[k.scored]
    print(f"k{i}: mean {v.mean():.10f}  spread {np.ptp(v):.1e}")
print(f"orthonormality defect {orthonormality_defect(fd):.1e}, "
      f"Frenet residual {frenet_residual(fd):.1e}")

# Every W-curve is a V1-helix, a V3 slant helix and a V5 slant helix.
report = classify_all(curve)
print("flags:", report.flags)
for name, part in (("V1", report.v1), ("V3", report.v3), ("V5", report.v5)):
    ax = part.axis
    print(f"{name} axis {np.round(ax.mean_axis, 6)}  cos(angle) = {ax.cos_angle:.7f}")

# The three axes are one and the same vector: the kernel of the constant
# Frenet matrix, which is the direction of the curve's linear drift.
kernel = np.linalg.svd(frenet_matrix((1, 2, 3, 4)))[2][-1]
print("kernel of K:", np.round(np.abs(kernel), 6))

# Closed forms for comparison: 1/sqrt(1 + F) with F = 25/64, 1/sqrt(1 + 4 + 9/16),
# and 1/sqrt(1 + G) with G = 80/9.
print("expected:", 1 / np.sqrt(1 + 25 / 64), 1 / np.sqrt(5.5625), 3 / np.sqrt(89))

# No V2 or V4 helix: the linear system for an axis has only the zero solution.
nx = report.nonexistence
print(f"smallest singular values: V2 system {nx.sigma_v2:.3f}, V4 system {nx.sigma_v4:.3f}")
