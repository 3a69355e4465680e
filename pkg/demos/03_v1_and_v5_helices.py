"""
V1-helices and V5 slant helices that are not W-curves
=====================================================

With k3 and k4 constant the V1 condition on rho = k1/k2 becomes a linear
ODE, rho''' + (k3^2 + k4^2) rho' = 0, so rho = 1 + a cos(w s) works for any
positive k2.  Reading the frame backwards turns this into a V5 family.
"""

import numpy as np

from pentahelix import CurvatureSpec, classify_all, synthesize_from_curvatures
from pentahelix.classify import v1_integral_check, v1_ode_check
from pentahelix.synthesis import v1_helix_profile, v5_helix_profile

v1 = classify_all(synthesize_from_curvatures(CurvatureSpec(v1_helix_profile(k3=1.0, k4=1.0))))
print("V1 family:", v1.flags)
print(f"  F residual {v1.v1.verdict.residual:.1e}, ODE residual {v1.v1.ode.residual:.1e}, "
      f"integral fit residual {v1.v1.integral.residual:.1e}")
print(f"  angle between V1 and U: {np.degrees(v1.v1.axis.angle):.4f} deg")

# The integral form carries two constants A, B; they do not depend on where we fit.
fd = v1.frenet
whole = v1_integral_check(fd, 1e-4)
part = v1_integral_check(fd, 1e-4, interval=(3.0, 7.0))
print(f"  A, B on [0, 10]: {whole.A:.6f}, {whole.B:.6f}; on [3, 7]: {part.A:.6f}, {part.B:.6f}")

v5 = classify_all(synthesize_from_curvatures(CurvatureSpec(v5_helix_profile(k1=1.0, k2=1.0))))
print("V5 family:", v5.flags)
print(f"  G residual {v5.v5.verdict.residual:.1e}, ODE residual {v5.v5.ode.residual:.1e}")
print(f"  angle between V5 and U: {np.degrees(v5.v5.axis.angle):.4f} deg")

# Both routes to V1 agree on a curve that is not a helix.
print("V5 family through the V1 checks:",
      v1_ode_check(v5.frenet).passed, v1_integral_check(v5.frenet).passed)
