"""Overlapping digits give a discrete multiset whose multiplicities grow.

With A = 3 and digits {0, 1, 2, 3} the subdivision matrix is [4], larger
than |det A| = 3.  Starting from {0}, the iterates converge to a multiset
supported on the nonnegative integers, and the point 3^k is reached along
k + 1 different digit paths.
"""
from delone import fixtures
from delone.analysis import discreteness_scan
from delone.cycles import certify, enumerate_cycles, multiplicity_by_paths, solution_window
from delone.multiset import MultisetFamily, restrict
from delone.system import validate

sys = fixtures.ternary_overlap()
rep = validate(sys)
print(f"Perron root {rep.lambda_exact}, |det A| = {rep.det_A_abs:g}, condition {rep.condition.value}")

seed = MultisetFamily.from_values([[0]])
out = certify(sys, seed)
print(f"certification: {out.verdict}, stable from step {out.stabilized_at}")

run = solution_window(sys, seed, 3 ** 7, outcome=out)
X = run.frontier[0]
zero = next(c for c in enumerate_cycles(sys, 1) if c.vertices == (((0,), 0),))
print("\n  k   point   generated   counted by paths")
for k in range(7):
    target = ((3 ** k,), 0)
    print(f"{k:3d} {3 ** k:7d} {X.multiplicity(target[0]):11d} {multiplicity_by_paths(sys, zero, target):18d}")

# the largest count in a ball of radius 1/2 keeps growing with the window
for w in (10, 100, 1000):
    inner = restrict(X, lambda c: c[:, 0] <= w)
    print(f"window [0, {w:4d}]: at most {discreteness_scan(inner, 0.5).max_count_per_ball} points per ball")
