"""Convergence of the two time-stepping schemes on a manufactured solution.

Marches the sinusoidal benchmark on a short horizon over a sequence of
meshes and prints the observed L-infinity(L2) error rates: second order for
backward Euler with tau = h^2 and for Crank-Nicolson with tau = h.
"""

from paraest import convergence_rate, run_level, sinusoidal_benchmark
from paraest.timestepping import SchemeKind

problem = sinusoidal_benchmark()
T = 2.0

for scheme, tau_rule in ((SchemeKind.BACKWARD_EULER, "hsq"),
                         (SchemeKind.CRANK_NICOLSON, "h")):
    print(f"\n{scheme.name.lower()} with tau = {tau_rule}")
    prev = None
    for level in (2, 3, 4):
        rec = run_level(problem, scheme, level, tau_rule, T=T)
        line = (f"  i={level}: M={rec.M:2d}  N={rec.n_steps:4d}  "
                f"error={rec.final_error:.4e}")
        if prev is not None:
            rate = convergence_rate(rec.final_error, prev.final_error, rec.h, prev.h)
            line += f"  rate={rate:.2f}"
        print(line)
        prev = rec
