"""u = 1 is trivially smooth, yet the pair (sigma, u) converges at order 2 at best.

Case (ii): f = 0 and u = 1 on the boundary.  The multiplier now solves
-Laplace lambda = 1 with lambda = 0 on the boundary, whose solution has
corner singularities (r^2 log r terms) at the four corners of the square.

The scalar error alone is not what saturates: the constant 1 lies in the
discrete range of -div, so ||u - u_h|| profits from a duality argument and
converges faster.  The flux error ||sigma - sigma_h|| carries the limited
rate, and so does the combined error of the pair.

At the end we compare lambda_h with a Fourier series of the true multiplier.

    python demos/03_rate_limited.py
"""

import numpy as np

from llstar import StudyConfig, run_study
from llstar.dofs import tabulate_rule
from llstar.quadrature import triangle_rule
from llstar.study import builtin_case, run_level

print(" p  rate_u  rate_sigma  rate_(sigma,u)")
for p in range(4):
    levels = {0: (2, 6), 3: (2, 4)}.get(p, (2, 5))
    rep = run_study(StudyConfig("ii", p, levels))
    print(f"{p:2d} {rep.summary_rate('u'):7.3f} {rep.summary_rate('sigma'):11.3f} "
          f"{rep.summary_rate('solution'):15.3f}")


# lambda = sum over odd m, n of 16 / (pi^4 m n (m^2 + n^2)) sin(m pi x) sin(n pi y)
def fourier_lambda(x, y, terms=199):
    k = np.arange(1, terms + 1, 2)
    C = 16 / (np.pi**4 * np.outer(k, k) * (k[:, None] ** 2 + k[None, :] ** 2))
    px, py = np.pi * np.outer(k, x.ravel()), np.pi * np.outer(k, y.ravel())
    sx, cx, sy, cy = np.sin(px), np.cos(px), np.sin(py), np.cos(py)
    kk = np.pi * k[:, None]
    val = np.einsum("mn,mp,np->p", C, sx, sy)
    gx = np.einsum("mn,mp,np->p", C, kk * cx, sy)
    gy = np.einsum("mn,mp,np->p", C, sx, kk * cy)
    return val.reshape(x.shape), np.stack([gx, gy], -1).reshape(x.shape + (2,))


print("\nH1 error of lambda_h against the Fourier multiplier (p = 1)")
case = builtin_case("ii")
prev = None
for level in range(1, 5):
    space, sol, _ = run_level(case, 1, level)
    tab = tabulate_rule(space, triangle_rule(10))
    _, lag = space.local_coefficients(sol.coeffs)
    lam = np.einsum("cqi,ci->cq", tab.lam, lag)
    grad = np.einsum("cqia,ci->cqa", tab.grad, lag)
    ref, ref_grad = fourier_lambda(tab.points[..., 0], tab.points[..., 1])
    err = np.sqrt(np.sum(tab.wdet * ((ref - lam) ** 2 + np.sum((ref_grad - grad) ** 2, -1))))
    rate = "" if prev is None else f"  rate {np.log2(prev / err):.2f}"
    print(f"  level {level}: {err:.3e}{rate}")
    prev = err

print("\nwithout the boundary flux term the method never sees u0 = 1:")
for level in (2, 3, 4):
    print(f"  level {level}: err_u = {run_level(case, 1, level, boundary_term=False)[2].err_u:.6f}")
