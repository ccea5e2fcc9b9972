"""A planar example: the twin dragon.

A = [[1, -1], [1, 1]] rotates by 45 degrees and scales by sqrt 2; with digits
{(0,0), (1,0)} the tile has area 1 and its integer translates tile the
plane.  Tiles are bitmaps here, so measures come with error bars from
boundary cells.  The SVG lands next to this script.
"""
from pathlib import Path

from delone import fixtures
from delone.cycles import certify, enumerate_cycles, seed_from_cycle, solution_window
from delone.render import render_svg
from delone.system import validate
from delone.tiles import measure_estimate, tile_iterate

sys = fixtures.twin_dragon()
print("Perron condition:", validate(sys).condition.value)

for depth in (4, 8, 12):
    t = tile_iterate(sys, depth, resolution=7)[0]
    est = measure_estimate(t)
    print(f"depth {depth:2d}: area {est.value:.3f} +/- {est.error:.3f}")

cyc = enumerate_cycles(sys, 2, minimal_only=True)[0]
print("period-2 cycle:", [tuple(float(c) for c in p) for p, _ in cyc.vertices])
seed = seed_from_cycle(sys, cyc)
out = certify(sys, seed)
run = solution_window(sys, seed, 4, outcome=out)
print(f"{out.verdict}; {run.frontier.point_count()} points in the exact window, "
      f"max multiplicity {run.frontier.max_multiplicity()}")

svg = render_svg(points=run.frontier, tiles=tile_iterate(sys, 12, resolution=7))
path = Path(__file__).with_name("twin_dragon.svg")
path.write_text(svg)
print("wrote", path)
