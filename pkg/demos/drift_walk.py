"""A walk on H3(Z) with steps (1,0,0) and (1,1,0) drifts toward the semigroup of (2,1,0).

    python3 demos/drift_walk.py
"""

from fractions import Fraction

from anglemetric import walks

grp = walks.group("h3")
law = walks.StepDistribution(grp, [(1, 0, 0), (1, 1, 0)], [Fraction(1, 2)] * 2)
drift = walks.drift_element(law)
print(f"layer {drift.layer}, mean {tuple(str(m) for m in drift.vector)}, drift element {drift.representative.tolist()}")
reports = [walks.convergence_check(walks.simulate(law, 10_000, seed), drift, grp) for seed in range(3)]
print(walks.walk_csv(reports), end="")
print("converged:", [r.converged for r in reports])

try:
    walks.drift_element(walks.StepDistribution(grp, [(1, 0, 0), (-1, 0, 0)], [Fraction(1, 2)] * 2))
except walks.NoDrift as exc:
    print("centred walk:", exc)
