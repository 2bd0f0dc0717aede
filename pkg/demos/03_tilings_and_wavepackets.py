#!/usr/bin/env python3
"""Moment-curve boxes, their dual tiles, and wavepackets.

Over an interval K of length d the curve carries an anisotropic box with
sides d, d^2, ..., d^k.  Its difference set splits into exactly
d^(-k(k-1)/2) cubes of side d^k, and dually every cube of side d^-k
splits into that many tiles.  A function with transform in the box has
constant modulus on each tile.
"""

import random
from fractions import Fraction

from momentlab import ScaleConfig, ball, unit_interval
from momentlab.geometry import theta_diff_decompose, tile_partition
from momentlab.random_instances import random_box_function, random_curve_supported
from momentlab.wavepackets import pigeonhole, wavepacket_decompose

q, k, m = 3, 2, 1
K = unit_interval(q).partition(m)[1]
print(f"== geometry over K = {K} (q = {q}, k = {k}) ==")

cubes = theta_diff_decompose(K, k)
print(f"  difference box splits into {len(cubes)} cubes of side {cubes[0].side}")

Q = ball(q, k, m * k)
tiles = tile_partition(Q, K)
print(f"  the ball of radius {q}^{m*k} splits into {len(tiles)} tiles")
print(f"  volumes: {len(tiles)} x {tiles[0].volume} = {sum(t.volume for t in tiles)} = vol(ball)")

print("\n== wavepackets ==")
rng = random.Random(0)
g = random_box_function(rng, q, k, K, n_terms=3)
ws = wavepacket_decompose(g, K)
print(f"  a 3-wave function over K decomposes into {len(ws)} packets")
for tile, piece in ws.packets:
    h = abs(piece.evaluate(tile.offset_point()))
    print(f"    tile {tile.dual_corner}  height {h:.6f}")
print("  exact reconstruction:", ws.reconstruct().close_to(g, 1e-10))

print("\n== dyadic pigeonholing ==")
cfg = ScaleConfig.from_epsilon(q, k, 2, Fraction(1, 2))
f = random_curve_supported(rng, q, k, 2, n_intervals=6, terms_per_interval=2)
buckets, remainder, report = pigeonhole(f, cfg, p=8)
print(f"  H* = {report['H_star']:.4f}, {report['n_buckets']} buckets "
      f"(ceiling {report['class_bound']})")
for b in buckets:
    print(f"    H ~ {b.height_H:.4f}  packets/piece ~ {b.packet_count_alpha}  "
          f"siblings ~ {b.sibling_count_beta}")
print(f"  remainder: ||.||_8 = {report['remainder_lp']:.4g} "
      f"<= {report['remainder_bound']:.4g} (the square-sum bound)")
