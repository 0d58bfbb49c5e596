"""Smooth solution with a smooth multiplier: rates follow the polynomial order.

Case (i): -Laplace u = 2 pi^2 sin(pi x) sin(pi y), u = 0 on the boundary.
The multiplier lambda is a multiple of u, so nothing but p limits the rate.

    python demos/02_standard_rates.py
"""

from llstar import StudyConfig, run_study

for p in range(4):
    levels = (2, 4) if p == 3 else (2, 5)
    rep = run_study(StudyConfig("i", p, levels))
    print(f"\np = {p}")
    print(" level        h      ndof       err_u   rate_u  err_lambda_h1  rate")
    ru, rl = rep.rates("u"), rep.rates("lambda_h1")
    for row, a, b in zip(rep.rows, ru, rl):
        a = f"{a:7.3f}" if a is not None else "       "
        b = f"{b:6.3f}" if b is not None else "      "
        print(f"{row.level:6d} {row.h:8.5f} {row.ndof:9d} {row.err_u:11.3e}  {a}  "
              f"{row.err_lambda_h1:13.3e} {b}")
