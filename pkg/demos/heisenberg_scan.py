"""Boundary scans of H3(Z): word metric at radius 22 against the homogeneous gauge.

At radius 22 every word-metric pair saturates: reaching a central element
costs about 2 sqrt(|c|) letters, so orbits separate as fast as the window
grows.  The gauge quasi-metric has no horizon and orders horizontal
directions by angle.

    python3 demos/heisenberg_scan.py
"""

import numpy as np

from anglemetric import heisenberg as H
from anglemetric.cone import TailWindow
from anglemetric.lie.algebra import heisenberg3
from anglemetric.lie.gauge import Gauge

word = H.HeisenbergWordSpace(H.word_table(22))
gauge = H.HeisenbergGaugeSpace(Gauge(heisenberg3(), alpha=1.0))
print("q between word and gauge lengths:", round(H.comparison_constant(word.table, gauge), 3))
np.set_printoptions(precision=3, suppress=True)

for label, space, window in (("word [10,22]", word, TailWindow(10, 22)), ("gauge [10,40]", gauge, TailWindow(10, 40))):
    rep = H.boundary_scan(H.STANDARD5, window, space=space)
    print(f"\nstandard directions, {label}: {rep.component_count} components")
    print(rep.t_hat)

for label, space, window in (("word [10,22]", word, TailWindow(10, 22)), ("gauge [20,200]", gauge, TailWindow(20, 200))):
    rep = H.boundary_scan(H.horizontal_directions(16), window, space=space)
    print(f"16 horizontal directions, {label}: Spearman against the circle {rep.spearman}")
