"""How the exponential accumulation weights tame L^p-in-time growth.

Reproduces the stream comparison: a constant stream, a random stream and a
random stream with one large early value, each accumulated in L^p(0,t) for
several p with the control-coefficient weights (alpha = 1, tau = 0.1).
"""

from paraest import synthetic_accumulation_study
from paraest.accumulation import DEFAULT_PSET, INF

LABELS = {1.0: "p=1", 2.0: "p=2", 4.0: "p=4", 8.0: "p=8", 16.0: "p=16", INF: "p=inf"}

for kind in ("ones", "random", "large_initial"):
    table = synthetic_accumulation_study(kind, alpha=1.0, seed=0)
    t = table["t"]
    print(f"\n{kind} stream, weighted accumulations c_(p,t) ||F||_Lp(0,t):")
    print("    t   " + "".join(f"{LABELS[p]:>10}" for p in DEFAULT_PSET))
    for i in (9, 49, 99, 149):      # t = 1, 5, 10, 15
        row = f"  {t[i]:5.1f} " + "".join(
            f"{table['weighted'][p][i]:10.3f}" for p in DEFAULT_PSET)
        print(row)

print("\nFor the constant stream the p=inf column saturates at 1 - e^{-t}: the")
print("weighted L-infinity accumulation stays bounded while every finite-p")
print("accumulation keeps growing; with a large early value the small-p")
print("columns barely move but the large-p columns jump.")
