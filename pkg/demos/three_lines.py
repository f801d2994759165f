"""Three lines in (Z^2, l1): the exact rational values next to the tail estimator.

    python3 demos/three_lines.py
"""

from anglemetric.cone import TailWindow, s_estimate, triangle_report
from anglemetric.euclidean import LatticeRay, LatticeSpace, l1_ray_s_exact

space = LatticeSpace(2, 1)
lines = {"L1": (1, 0), "L2": (2, 1), "L3": (1, 1)}
w = TailWindow(100, 1000)
exact = {}
for p, q in (("L1", "L2"), ("L2", "L3"), ("L1", "L3")):
    u, v = lines[p], lines[q]
    exact[p, q] = l1_ray_s_exact(u, v, "line")
    est = s_estimate(LatticeRay(space, u, "line"), LatticeRay(space, v, "line"), w)
    print(f"s({p},{q}) exact {exact[p, q]}  estimate {est.value:.6f}  spread {est.spread:.4f}")

rep = triangle_report(*(float(exact[k]) for k in (("L1", "L2"), ("L2", "L3"), ("L1", "L3"))))
print(f"plain triangle {'holds' if rep.plain else 'fails'}; weak triangle {'holds' if rep.weak else 'fails'}; "
      f"square roots {'hold' if rep.t_triangle else 'fail'}")
