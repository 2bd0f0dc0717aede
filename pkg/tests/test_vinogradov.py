import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentlab.errors import BudgetExceededError, MomentLabError
from momentlab.qadic import QRational
from momentlab.vinogradov import (
    KaratsubaTrace,
    classical_iteration_exponent,
    count_J,
    count_J_congruence,
    count_J_nested,
    count_power_sum_congruences,
    elementary_from_roots,
    karatsuba_bound,
    karatsuba_exponent_trace,
    linnik_bound,
    linnik_count,
    linnik_max,
    newton_girard,
    smallest_prime_in,
)


class TestExactCounts:
    def test_single_pair_is_diagonal(self):
        for k in (2, 3, 4):
            for X in (1, 3, 11):
                assert count_J(1, k, X) == X

    def test_two_pairs_degree_two_closed_form(self):
        assert count_J(2, 2, 2) == 6
        for X in range(1, 31):
            assert count_J(2, 2, X) == 2 * X * X - X

    def test_multiset_bound_at_the_base(self):
        for X in range(1, 13):
            v = count_J(3, 3, X)
            assert X**3 <= v <= 6 * X**3

    def test_strategies_agree(self):
        for s, k, X in ((2, 2, 5), (2, 3, 3), (3, 2, 3), (1, 4, 6)):
            assert count_J(s, k, X) == count_J_nested(s, k, X)

    def test_monotone_in_X_and_s(self):
        values = [count_J(2, 2, X) for X in range(1, 10)]
        assert values == sorted(values)
        for X in (2, 3, 4):
            assert count_J(3, 2, X) >= count_J(2, 2, X)

    def test_diagonal_lower_bound(self):
        for s, k, X in ((2, 2, 4), (3, 2, 3), (2, 3, 3)):
            assert count_J(s, k, X) >= X**s

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError):
            count_J(8, 2, 100, budget=1000)


class TestCongruenceCounts:
    def test_no_pinned_block_when_s_equals_k(self):
        # just the distinctness filter on both sides
        v = count_J_congruence(2, 2, 4, 5)
        assert v <= count_J(2, 2, 4)

    def test_restriction_shrinks_counts(self):
        rng = random.Random(0)
        for _ in range(10):
            s, k = rng.choice([(2, 2), (3, 2)])
            X = rng.randint(2, 6)
            p = rng.choice([3, 5])
            a = rng.randrange(p)
            assert count_J_congruence(s, k, X, p, a) <= count_J(s, k, X)

    def test_exact_value_against_independent_loop(self):
        s, k, X, p = 3, 2, 6, 5
        from itertools import product

        def side_keys(a):
            out = {}
            for tup in product(range(1, X + 1), repeat=s):
                if len({tup[0] % p, tup[1] % p}) != 2:
                    continue
                if a is not None and any(v % p != a % p for v in tup[2:]):
                    continue
                key = tuple(sum(v**j for v in tup) for j in (1, 2))
                out[key] = out.get(key, 0) + 1
            return out

        for a in (None, 2):
            keys = side_keys(a)
            expected = sum(m * m for m in keys.values())
            assert count_J_congruence(s, k, X, p, a) == expected

    def test_pinning_only_shrinks(self):
        # reported side by side; the only guaranteed relation is domination
        s, k, X, p = 3, 2, 9, 3
        unpinned = count_J_congruence(s, k, X, p)
        for a in range(p):
            assert count_J_congruence(s, k, X, p, a) <= unpinned

    def test_power_sum_congruence_kernel(self):
        # s = 1: pairs (a, b) in [0, n)^2 with a = b mod each modulus
        assert count_power_sum_congruences(1, 1, 9, [9]) == 9
        assert count_power_sum_congruences(1, 1, 9, [3]) == 27


class TestNewtonGirard:
    def test_first_identity(self):
        assert newton_girard([7]) == [7]

    def test_small_examples(self):
        assert newton_girard([3, 5]) == [3, 2]
        assert newton_girard([6, 14, 36]) == [6, 11, 6]

    def test_expansion_oracle(self):
        assert elementary_from_roots([1, 2, 3]) == [6, 11, 6]

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-8, 8), min_size=1, max_size=5))
    def test_against_expansion(self, roots):
        p = [sum(r**j for r in roots) for j in range(1, len(roots) + 1)]
        assert newton_girard(p) == elementary_from_roots(roots)

    def test_exact_ring_arithmetic(self):
        roots = [QRational(5, 2), QRational(5, 7)]
        p = [roots[0] + roots[1], roots[0] ** 2 + roots[1] ** 2]
        e = newton_girard(p)
        assert e[0] == QRational(5, 9) and e[1] == QRational(5, 14)

    def test_noninvertible_division_rejected(self):
        with pytest.raises(ValueError):
            newton_girard([QRational(3, 1), QRational(3, 2)])


class TestLinnik:
    def test_degree_one_is_unique(self):
        assert linnik_max(1, 5)[0] == 1 == linnik_bound(1, 5)

    def test_exhaustive_maxima_under_the_bound(self):
        for k, p in ((2, 3), (2, 5)):
            value, argmax = linnik_max(k, p)
            assert value <= linnik_bound(k, p)
            assert linnik_count(k, p, argmax) == value

    def test_specific_bound_values(self):
        assert linnik_bound(2, 3) == 6
        assert linnik_bound(2, 5) == 10
        assert linnik_bound(3, 5) == 750

    def test_count_matches_direct_enumeration(self):
        from itertools import product

        k, p = 2, 3
        H = [1, 2]
        direct = 0
        for tup in product(range(p**k), repeat=k):
            if tup[0] % p == tup[1] % p:
                continue
            if (tup[0] + tup[1]) % p == H[0] % p and (tup[0] ** 2 + tup[1] ** 2) % p**2 == H[1] % p**2:
                direct += 1
        assert linnik_count(k, p, H) == direct

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError):
            linnik_max(3, 7, budget=1000)


class TestKaratsuba:
    def test_base_case(self):
        trace = karatsuba_bound(2, 2, 5)
        assert trace.bound == 50
        assert trace.steps[0]["base_case"]

    def test_bound_dominates_exact_counts(self):
        for X in range(1, 9):
            for s in (2, 4):
                assert karatsuba_bound(s, 2, X).bound >= count_J(s, 2, X)

    def test_prime_selection_window(self):
        assert smallest_prime_in(Fraction(3), Fraction(6)) == 3
        assert smallest_prime_in(Fraction(24), Fraction(28)) is None

    def test_trace_records_primes_and_factors(self):
        trace = karatsuba_bound(6, 2, 30)
        primes = [s["prime"] for s in trace.steps if not s["base_case"]]
        assert len(primes) == 2
        assert all(p >= 2 for p in primes)
        as_json = trace.to_json()
        assert as_json["steps"][0]["prime"] == primes[0]

    def test_non_multiple_s_rejected(self):
        with pytest.raises(MomentLabError):
            karatsuba_bound(3, 2, 10)

    def test_symbolic_exponent_matches_closed_form(self):
        for k in (2, 3, 4, 5):
            for l in (1, 2, 3, 4, 5):
                got, steps = karatsuba_exponent_trace(k * l, k)
                assert got == classical_iteration_exponent(k * l, k)
                assert len(steps) == l

    def test_hand_unrolled_degree_two_chain(self):
        # s = 8, k = 2: steps contribute (2s'-4)/2 + 2 + 1/2 at shrinking scales
        exponent, steps = karatsuba_exponent_trace(8, 2)
        shrink = [Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
        by_hand = (
            (Fraction(6) + Fraction(5, 2)) * shrink[0]
            + (Fraction(4) + Fraction(5, 2)) * shrink[1]
            + (Fraction(2) + Fraction(5, 2)) * shrink[2]
            + Fraction(2) * shrink[3]
        )
        assert exponent == by_hand == Fraction(105, 8)
