#!/usr/bin/env python3
"""Exponent bookkeeping: the claimed bound, the sharp benchmark, and the
numeric unroll of the iteration.

With base exponent p0 = 2k and constant c0 = k^2/2 the claimed power of
1/delta falls short of the sharp supercritical exponent by a correction
that decays exponentially in p, at the price of an explicit power of q.
"""

from fractions import Fraction

from momentlab.exponents import (
    ExponentParams,
    bdg_sharp_exponent,
    corollary_q_exponent,
    iterate_D_bound,
    theorem_exponent,
)

k = 2
params = ExponentParams(k=k, p0=2 * k, c0=Fraction(k * k, 2), epsilon=Fraction(1, 100))

print(f"== claimed exponents at k = {k}, p0 = {2*k}, c0 = {Fraction(k*k, 2)} ==")
print(f"  {'p':>4} {'delta exponent':>16} {'sharp':>8} {'q exponent':>12}")
for p in range(2 * k, 41, 2 * k):
    te = theorem_exponent(params, p)
    print(
        f"  {p:>4} {te['delta_exponent_no_eps']:>16.6f} "
        f"{-bdg_sharp_exponent(k, p):>8.4f} {str(corollary_q_exponent(p, k)):>12}"
    )
print("  (the gap to the sharp value decays like (1 - 1/k)^(p/2k))")

print("\n== the numeric unroll tightens as epsilon shrinks ==")
te = theorem_exponent(params, 12)
print(f"  target at p = 12: {te['delta_exponent_no_eps']:.6f}")
for eps in (Fraction(1, 4), Fraction(1, 20), Fraction(1, 100)):
    pr = ExponentParams(k=k, p0=2 * k, c0=Fraction(k * k, 2), epsilon=eps)
    traj = iterate_D_bound(pr, 12)
    print(f"  eps = {str(eps):>6}: unrolled {traj.final_delta_exponent:.6f} "
          f"(q exponent {traj.final_q_exponent})")

print("\n== a per-rung trace at eps = 1/20 ==")
traj = iterate_D_bound(ExponentParams(k=k, p0=2 * k, c0=Fraction(2), epsilon=Fraction(1, 20)), 12)
for step in traj.steps:
    if step["branch"] == "base":
        print(f"  p = {step['p']:>2}: base exponent {step['T']:.4f}")
    else:
        print(f"  p = {step['p']:>2}: T = {step['T']:.4f} via the {step['branch']} branch "
              f"(M = {step['M']}, q exponent {step['q_exponent']})")
print("  constants tracked symbolically:", ", ".join(traj.constants))
