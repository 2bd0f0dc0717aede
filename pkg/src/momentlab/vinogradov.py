"""Exact solution counting for power-sum systems and the iteration bound.

The central object is the count J(s, k, X) of 2s-variable solutions of
the simultaneous equations sum x_i^j = sum y_i^j for j = 1..k with all
variables in [1, X].  Counting is done by a hash join on power-sum
vectors (O(X^s) time and memory) with an independent nested-loop oracle
for small instances.  On top sit the residue-restricted counts, the
exhaustive Linnik residue bound, the Newton-Girard identities, and the
recursive upper-bound trace that trades one counting step for a factor
p^(2s-2k) X^k p^(k(k-1)/2).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial, isqrt

from .errors import BudgetExceededError, MomentLabError

__all__ = [
    "count_J",
    "count_J_nested",
    "count_J_congruence",
    "count_power_sum_congruences",
    "newton_girard",
    "elementary_from_roots",
    "linnik_count",
    "linnik_max",
    "linnik_bound",
    "karatsuba_bound",
    "karatsuba_exponent_trace",
    "classical_iteration_exponent",
    "KaratsubaTrace",
]

DEFAULT_BUDGET = 50_000_000


def _check_budget(estimated: int, budget: int, what: str) -> None:
    if estimated > budget:
        raise BudgetExceededError(
            f"{what} needs about {estimated} operations (budget {budget})",
            estimated=estimated,
            budget=budget,
        )


def _power_sum_keys(s: int, k: int, values, budget: int) -> Counter:
    """Multiplicities of (p_1, ..., p_k) over s-tuples from the given range."""
    values = list(values)
    _check_budget(len(values) ** s, budget, "power-sum enumeration")
    powers = {v: tuple(v**j for j in range(1, k + 1)) for v in values}
    counts: Counter = Counter()
    for tup in product(values, repeat=s):
        key = tuple(sum(powers[v][j] for v in tup) for j in range(k))
        counts[key] += 1
    return counts


def count_J(s: int, k: int, X: int, budget: int = DEFAULT_BUDGET) -> int:
    """Exact number of solutions of the degree-k system in 2s variables.

    Hash join: enumerate x-side s-tuples once, key by the power-sum
    vector, and sum squared multiplicities.
    """
    if s < 1 or k < 1 or X < 1:
        raise ValueError("need s, k, X >= 1")
    counts = _power_sum_keys(s, k, range(1, X + 1), budget)
    return sum(m * m for m in counts.values())


def count_J_nested(s: int, k: int, X: int, budget: int = DEFAULT_BUDGET) -> int:
    """Independent oracle: plain nested loops over all 2s-tuples."""
    _check_budget(X ** (2 * s), budget, "nested-loop enumeration")
    total = 0
    rng = range(1, X + 1)
    for xs in product(rng, repeat=s):
        px = tuple(sum(v**j for v in xs) for j in range(1, k + 1))
        for ys in product(rng, repeat=s):
            if all(sum(v**j for v in ys) == px[j - 1] for j in range(1, k + 1)):
                total += 1
    return total


def _distinct_mod(tup, p: int, count: int) -> bool:
    seen = set()
    for v in tup[:count]:
        r = v % p
        if r in seen:
            return False
        seen.add(r)
    return True


def _restricted_side_keys(s, k, X, p, a, budget) -> Counter:
    """Power-sum keys over s-tuples with the first k entries pairwise
    distinct mod p and the rest congruent to a mod p (when a is given)."""
    if a is None:
        tail_range = list(range(1, X + 1))
    else:
        tail_range = [n for n in range(1, X + 1) if n % p == a % p]
    head_range = list(range(1, X + 1))
    _check_budget(len(head_range) ** min(s, k) * max(1, len(tail_range)) ** max(0, s - k), budget,
                  "restricted enumeration")
    counts: Counter = Counter()
    head_len = min(s, k)
    for head in product(head_range, repeat=head_len):
        if not _distinct_mod(head, p, head_len):
            continue
        base = tuple(sum(v**j for v in head) for j in range(1, k + 1))
        if s <= k:
            counts[base] += 1
            continue
        for tail in product(tail_range, repeat=s - k):
            key = tuple(base[j - 1] + sum(v**j for v in tail) for j in range(1, k + 1))
            counts[key] += 1
    return counts


def count_J_congruence(
    s: int,
    k: int,
    X: int,
    p: int,
    a: int | None = None,
    budget: int = DEFAULT_BUDGET,
    warn=None,
) -> int:
    """Restricted count: x_1..x_k (and y_1..y_k) pairwise distinct mod p;
    with a residue given, all later variables are pinned to it mod p.

    Symmetric in the two sides, so it is again a sum of squared
    multiplicities.
    """
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    if p <= k and warn is not None:
        warn(f"p = {p} is not larger than k = {k}; distinctness is very restrictive")
    counts = _restricted_side_keys(s, k, X, p, a, budget)
    return sum(m * m for m in counts.values())


def count_power_sum_congruences(
    s: int, k: int, base: int, moduli, budget: int = DEFAULT_BUDGET
) -> int:
    """Pairs of s-tuples from [0, base) with congruent power sums.

    moduli[j-1] is the modulus for the degree-j equation.  This is the
    counting kernel behind exponential-sum moments on big balls.
    """
    moduli = list(moduli)
    if len(moduli) != k:
        raise ValueError("need one modulus per degree")
    _check_budget(base**s, budget, "congruence enumeration")
    counts: Counter = Counter()
    values = range(base)
    powers = {v: tuple(v**j for j in range(1, k + 1)) for v in values}
    for tup in product(values, repeat=s):
        key = tuple(sum(powers[v][j] for v in tup) % moduli[j] for j in range(k))
        counts[key] += 1
    return sum(m * m for m in counts.values())


# -- Newton-Girard ------------------------------------------------------------


def newton_girard(power_sums):
    """Elementary symmetric values e_1..e_k from power sums p_1..p_k.

    Uses the alternating recurrence j*e_j = sum_i (-1)^i e_(j-i-1) p_(i+1)
    over any commutative ring with exact division by 1..k; integer input
    is promoted to Fraction so every division is exact.
    """
    ps = list(power_sums)
    k = len(ps)
    if k == 0:
        return []
    if all(isinstance(v, int) for v in ps):
        ps = [Fraction(v) for v in ps]
    one = ps[0] - ps[0] + 1 if not isinstance(ps[0], Fraction) else Fraction(1)
    es = [one]  # e_0 = 1
    for j in range(1, k + 1):
        acc = None
        sign = 1
        for i in range(j):
            term = es[j - i - 1] * ps[i]
            term = term if sign > 0 else -term
            acc = term if acc is None else acc + term
            sign = -sign
        es.append(acc / j)
    return es[1:]


def elementary_from_roots(roots):
    """Oracle for the identities: expand prod (X - x_i); coefficient of
    X^(k-j) is (-1)^j e_j."""
    coeffs = [1]
    for r in roots:
        new = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            new[i] += c
            new[i + 1] -= c * r
        coeffs = new
    return [(-1) ** j * coeffs[j] for j in range(1, len(coeffs))]


# -- Linnik's residue bound ----------------------------------------------------


def linnik_bound(k: int, p: int) -> int:
    """k! p^(k(k-1)/2), the residue-count ceiling."""
    return factorial(k) * p ** (k * (k - 1) // 2)


def _linnik_buckets(k: int, p: int, budget: int) -> Counter:
    pk = p**k
    _check_budget(pk**k, budget, "residue enumeration")
    moduli = [p**j for j in range(1, k + 1)]
    counts: Counter = Counter()
    powers = [None] * pk
    for x in range(pk):
        powers[x] = tuple(pow(x, j, moduli[j - 1]) for j in range(1, k + 1))
    for tup in product(range(pk), repeat=k):
        if not _distinct_mod(tup, p, k):
            continue
        key = tuple(sum(powers[x][j] for x in tup) % moduli[j] for j in range(k))
        counts[key] += 1
    return counts


def linnik_count(k: int, p: int, residues, budget: int = DEFAULT_BUDGET) -> int:
    """Number of k-tuples of residues mod p^k, pairwise distinct mod p,
    whose degree-j power sums hit the target residues mod p^j."""
    residues = list(residues)
    if len(residues) != k:
        raise ValueError("need one target residue per degree")
    counts = _linnik_buckets(k, p, budget)
    key = tuple(residues[j] % p ** (j + 1) for j in range(k))
    return counts.get(key, 0)


def linnik_max(k: int, p: int, budget: int = DEFAULT_BUDGET):
    """Exhaustive maximum of linnik_count over every target; with argmax."""
    counts = _linnik_buckets(k, p, budget)
    if not counts:
        return 0, None
    key, value = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    return value, list(key)


# -- the iteration bound --------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def smallest_prime_in(lo: Fraction, hi: Fraction):
    n = max(2, -(-lo.numerator // lo.denominator))  # ceil
    while n <= hi:
        if _is_prime(n):
            return n
        n += 1
    return None


@dataclass
class KaratsubaTrace:
    """Upper-bound value plus the per-step factors of the iteration."""

    s: int
    k: int
    X: Fraction
    bound: Fraction
    steps: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "k": self.k,
            "X": str(self.X),
            "bound": str(self.bound),
            "bound_float": float(self.bound),
            "steps": [
                {key: (str(v) if isinstance(v, Fraction) else v) for key, v in step.items()}
                for step in self.steps
            ],
            "warnings": list(self.warnings),
        }


def karatsuba_bound(s: int, k: int, X) -> KaratsubaTrace:
    """Recursive upper bound for the solution count, with full trace.

    Each step picks a prime p about X^(1/k) and multiplies the factor
    p^(2s-2k) X^k p^(k(k-1)/2), recursing on (s-k, X/p); the base case
    s = k is k! X^k from the Newton-Girard multiset argument.  Requires
    s to be a multiple of k.
    """
    if s % k != 0 or s < k:
        raise MomentLabError(f"iteration needs s a positive multiple of k, got s={s}, k={k}")
    X = Fraction(X)
    if X < 1:
        raise ValueError("X must be at least 1")
    trace = KaratsubaTrace(s=s, k=k, X=X, bound=Fraction(0))

    def recurse(s_cur: int, X_cur: Fraction) -> Fraction:
        X_eff = max(X_cur, Fraction(1))
        if s_cur == k:
            base = Fraction(factorial(k)) * X_eff**k
            trace.steps.append({"s": s_cur, "X": X_cur, "base_case": True, "factor": base})
            return base
        lo = _nth_root_ceil(X_eff, k)
        hi = Fraction(2 * lo)
        p = smallest_prime_in(Fraction(lo), hi)
        widened = False
        while p is None:
            hi *= 2
            widened = True
            p = smallest_prime_in(Fraction(lo), Fraction(hi))
        if widened:
            trace.warnings.append(
                f"no prime in [X^(1/k), 2X^(1/k)] at X={X_cur}; widened the range"
            )
        factor = Fraction(p) ** (2 * s_cur - 2 * k) * X_eff**k * Fraction(p) ** (
            k * (k - 1) // 2
        )
        trace.steps.append(
            {
                "s": s_cur,
                "X": X_cur,
                "prime": p,
                "union_bound_factor": Fraction(p) ** (2 * s_cur - 2 * k),
                "residue_factor": Fraction(p) ** (k * (k - 1) // 2),
                "choice_factor": X_eff**k,
                "factor": factor,
                "base_case": False,
            }
        )
        return factor * recurse(s_cur - k, X_cur / p)

    trace.bound = recurse(s, X)
    return trace


def _nth_root_ceil(x: Fraction, n: int) -> int:
    """ceil(x^(1/n)) for a nonnegative rational."""
    if x < 0:
        raise ValueError("negative radicand")
    lo, hi = 0, 1
    while Fraction(hi) ** n < x:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if Fraction(mid) ** n < x:
            lo = mid
        else:
            hi = mid
    return max(1, hi)


def karatsuba_exponent_trace(s: int, k: int):
    """Symbolic exponent of X after running the iteration with p = X^(1/k).

    Returns (exponent, steps): each step contributes (2s'-2k)/k + k +
    (k-1)/2 and rescales X by the power 1 - 1/k; the base contributes k.
    All arithmetic is exact rational.
    """
    if s % k != 0 or s < k:
        raise MomentLabError(f"iteration needs s a positive multiple of k, got s={s}, k={k}")
    steps = []
    exponent = Fraction(0)
    shrink = Fraction(1)  # current X is X_original^shrink
    s_cur = s
    while s_cur > k:
        step_exp = (Fraction(2 * s_cur - 2 * k, k) + k + Fraction(k - 1, 2)) * shrink
        steps.append({"s": s_cur, "scale_power": shrink, "exponent": step_exp})
        exponent += step_exp
        shrink *= Fraction(k - 1, k)
        s_cur -= k
    base_exp = Fraction(k) * shrink
    steps.append({"s": s_cur, "scale_power": shrink, "exponent": base_exp})
    exponent += base_exp
    return exponent, steps


def classical_iteration_exponent(s: int, k: int) -> Fraction:
    """Closed form 2s - k(k+1)/2 + (k^2/2)(1-1/k)^(s/k) for s a multiple of k."""
    if s % k != 0 or s < k:
        raise MomentLabError("closed form needs s a positive multiple of k")
    l = s // k
    return 2 * s - Fraction(k * (k + 1), 2) + Fraction(k**2, 2) * Fraction(k - 1, k) ** l
