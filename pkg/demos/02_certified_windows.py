"""Certifying a seed and reading off exact windows of the limit.

The digit pi makes float arithmetic unavoidable.  Points are snapped to a
grid of spacing 1e-9, so integer matrices act exactly on the grid keys.
The certifier prunes to an adapted-norm ball where A^-1 contracts, and stops
when two iterates agree there.  After that, every further step grows the
exactly known region by a fixed factor.
"""
from delone import fixtures
from delone.analysis import Box, denseness_scan, discreteness_scan
from delone.cycles import certify, expansion_factor, generate, valid_window
from delone.multiset import MultisetFamily

sys = fixtures.ternary_pi()
seed = MultisetFamily.from_values([[0.0]], sys.mode)
out = certify(sys, seed)
norm = out.norm
print(f"{out.verdict}: stable from step {out.stabilized_at}, "
      f"adapted radius {out.window_radius:.3f}, rho = {norm.rho}")
print(f"each step multiplies the known radius by {expansion_factor(norm.rho):.4f}")
for k in range(out.stabilized_at, out.stabilized_at + 4):
    print(f"  step {k}: exact inside adapted radius {valid_window(norm, out, k):.2f}")

# new points at step n have n ternary digits
run = generate(sys, seed, 6, keep_history=True)
for n in range(1, 7):
    prev, cur = run.history[n - 1][0], run.history[n][0]
    xs = sorted(sys.mode.to_float(p[0]) for p in cur if p not in prev)
    print(f"shell {n}: {len(xs):4d} points in [{xs[0]:.3f}, {xs[-1]:.3f}]")

X = run.frontier[0]
print("multiplicity one everywhere:", X.is_ordinary())
for r in (0.5, 0.05, 0.005):
    print(f"  r = {r}: up to {discreteness_scan(X, r).max_count_per_ball} points in a ball")
print("covering radius on [0, 200]:", denseness_scan(X, Box.interval(0, 200)).R_cov)
