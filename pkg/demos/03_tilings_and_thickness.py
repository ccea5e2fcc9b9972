"""Cycles, their tiles, and how many times the tiles cover the line.

Each periodic cycle seeds one irreducible solution.  Translating the tile by
the points of that solution covers the line some fixed number of times,
called the thickness.  A period-p cycle gives thickness at most p.
"""
from delone import fixtures
from delone.cycles import certify, enumerate_cycles, seed_from_cycle
from delone.multiset import MultisetFamily
from delone.tiles import measure_estimate, self_replicating_check, tile_iterate

WINDOW = ((-20,), (20,))

for name in ("binary", "balanced_ternary", "negabinary"):
    sys = fixtures.get(name)
    tiles = tile_iterate(sys)
    print(f"\n{name}: A = {sys.A[0][0]}, tile = {[(str(a), str(b)) for a, b in tiles[0].intervals]}")
    for p in (1, 2):
        for cyc in enumerate_cycles(sys, p, minimal_only=True):
            out = certify(sys, seed_from_cycle(sys, cyc))
            pts = ", ".join(str(x[0]) for x, _ in cyc.vertices)
            if out.verdict != "Discrete":
                print(f"  cycle {{{pts}}}: {out.verdict}")
                continue
            rep = self_replicating_check(sys, out, tiles, WINDOW)
            hist = {k: round(v, 3) for k, v in sorted(rep.tiling.histogram.items())}
            print(f"  cycle {{{pts}}} (period {p}): {rep.label:18s} coverage {hist}")

# the irrational digit gives a measure-zero tile: no tiling, only a packing
sys = fixtures.ternary_pi()
out = certify(sys, MultisetFamily.from_values([[0.0]], sys.mode))
rep = self_replicating_check(sys, out, tile_iterate(sys), ((0,), (40,)))
print(f"\nternary_pi: {rep.label}; notes: {list(rep.notes)}")
for g in (9, 14, 20):
    est = measure_estimate(tile_iterate(sys, 12, resolution=g)[0])
    print(f"  measure estimate at cell size 2^-{g}: {est.value:.4f}")
