"""Anisotropic diffusion, advection and reaction on the square.

With A = [[2, 1], [1, 2]] the multiplier problem is elliptic in the metric
of A, and in that metric the unit square becomes a parallelogram.  Its
largest angle theta sets the corner exponent s0 = min(1, pi/theta - 1) and
the flux rate cap s0 + 1.  The scalar u of the manufactured solution is not
affected at p = 1, while the flux saturates below 2 for larger p.

    python demos/04_general_coefficients.py
"""

import numpy as np

from llstar import StudyConfig, run_study
from llstar.study import GENERAL_A

# map x -> A^{-1/2} x turns -div(A grad) into the plain Laplacian
w, V = np.linalg.eigh(GENERAL_A)
T = V @ np.diag(w**-0.5) @ V.T
e1, e2 = T @ [1.0, 0.0], T @ [0.0, 1.0]
angle = np.arccos(np.dot(e1, e2) / np.linalg.norm(e1) / np.linalg.norm(e2))
theta = max(angle, np.pi - angle)
s0 = min(1.0, np.pi / theta - 1)
print(f"largest angle of the mapped square: {np.degrees(theta):.1f} deg, s0 = {s0:.3f}, "
      f"cap s0 + 1 = {s0 + 1:.3f}")

print("\n p  rate_u  rate_sigma")
for p in range(1, 4):
    rep = run_study(StudyConfig("general", p, (2, 4) if p == 3 else (2, 5)))
    print(f"{p:2d} {rep.summary_rate('u'):7.3f} {rep.summary_rate('sigma'):11.3f}")
