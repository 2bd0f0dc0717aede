import random
from fractions import Fraction
from math import inf

import numpy as np
import pytest

import momentlab.quotient_dft as qd
from momentlab.errors import BudgetExceededError
from momentlab.geometry import Cube, ball, unit_interval
from momentlab.qadic import QRational, QVector
from momentlab.random_instances import random_modstep
from momentlab.stepfn import ModulatedStep, joint_cell_values


def q3(n, v=0):
    return QRational(3, n, v)


def vec(*vals):
    return QVector([q3(n) for n in vals])


def deep(n, v):
    return QRational(3, n, v)


class TestCanonicalize:
    def test_duplicate_indicators_merge(self):
        one = ModulatedStep.indicator(ball(3, 1, 0))
        two = one + one
        assert len(two.terms) == 1
        assert two.terms[0][0] == 2.0

    def test_complete_sibling_family_merges_to_parent(self):
        O = ball(3, 2, 0)
        children = O.subdivide(1)
        f = ModulatedStep(3, 2, [(1.5, QVector.zero(3, 2), c) for c in children])
        assert f.scale_exp == 0
        assert len(f.terms) == 1
        assert f.terms[0][2] == O

    def test_small_modulation_absorbed(self):
        # |b| at most the dual side is constant on the cube
        Q = Cube(vec(1, 0), 1)
        b = QVector([q3(1, -1), q3(0)])
        f = ModulatedStep.indicator(Q, 1.0, b)
        assert all(bi.is_zero for _, bb, _ in f.terms for bi in bb)
        want = complex(-0.5, 3**0.5 / 2)  # chi(1/3 * corner 1)
        assert abs(f.terms[0][0] - want) < 1e-15

    def test_live_modulation_kept(self):
        Q = Cube(vec(1, 0), 1)
        b = QVector([deep(1, -2), q3(0)])
        f = ModulatedStep.indicator(Q, 1.0, b)
        assert not all(bi.is_zero for _, bb, _ in f.terms for bi in bb)

    def test_idempotent(self):
        rng = random.Random(0)
        f = random_modstep(rng, 3, 2, 4, 2)
        g = ModulatedStep(3, 2, list(f.terms))
        assert f.is_identical(g)

    def test_zero_prunes(self):
        Q = ball(3, 1, 0)
        f = ModulatedStep(3, 1, [(1.0, QVector.zero(3, 1), Q), (-1.0, QVector.zero(3, 1), Q)])
        assert f.is_zero


class TestIntegration:
    def test_unit_mass(self):
        for k in (1, 2, 3):
            assert ModulatedStep.indicator(ball(3, k, 0)).integrate() == 1

    def test_haar_scaling(self):
        for m in (1, 2):
            f = ModulatedStep.indicator(Cube(QVector.zero(3, 2).rep_mod(m), m))
            assert abs(f.integrate() - float(Fraction(1, 9**m))) < 1e-15

    def test_oscillation_kills_the_integral(self):
        f = ModulatedStep.indicator(ball(3, 1, 0), 1.0, QVector([q3(1, -1)]))
        assert f.integrate() == 0
        # oracle: the three cube-rooted character values sum to zero
        s = sum(np.exp(2j * np.pi * j / 3) for j in range(3)) / 3
        assert abs(f.integrate() - s) < 1e-15


class TestFourier:
    def test_unit_cube_fixed_point(self):
        for q in (3, 5):
            for k in (1, 2, 3):
                one = ModulatedStep.indicator(ball(q, k, 0))
                assert one.fourier().is_identical(one)

    def test_small_ball_transform(self):
        # the indicator of 3 Z_3 maps to a third of the ball of radius 3
        f = ModulatedStep.indicator(Cube(QVector([q3(0)]), 1))
        hat = f.fourier()
        assert len(hat.terms) == 1
        coeff, b, cube = hat.terms[0]
        assert abs(coeff - 1 / 3) < 1e-15
        assert cube == Cube(QVector([q3(0)]), -1)
        # oracle: finite character sums over the quotient
        M, r = qd.grid_geometry(f)
        oracle = qd.dft_grid(qd.evaluate_on_grid(f, M, r), 3, r)
        sym = qd.evaluate_on_grid(hat, r, M)
        assert np.abs(oracle - sym).max() < 1e-15

    def test_double_transform_is_reflection(self):
        rng = random.Random(1)
        f = random_modstep(rng, 3, 2, 5, 2)
        rt = f.fourier().fourier()
        reflected = ModulatedStep(
            3,
            2,
            [
                (c, -b, Cube((-cube.corner).rep_mod(cube.scale_exp), cube.scale_exp))
                for c, b, cube in f.terms
            ],
        )
        assert rt.close_to(reflected, 1e-12)

    def test_round_trip(self):
        rng = random.Random(2)
        for _ in range(10):
            f = random_modstep(rng, 3, 2, rng.randint(1, 5), rng.randint(1, 2))
            assert f.fourier().inverse_fourier().close_to(f, 1e-12)

    def test_modulation_translation_duality(self):
        b = QVector([deep(1, -1)])
        f = ModulatedStep.indicator(ball(3, 1, 0), 1.0, b)
        hat = f.fourier()
        assert len(hat.terms) == 1
        assert hat.terms[0][2].corner == b.rep_mod(0)


class TestPointwise:
    def test_unit_modulus_squares_to_indicator(self):
        Q = ball(3, 2, 0)
        f = ModulatedStep.indicator(Q, 1.0, QVector([deep(1, -2), q3(0)]))
        sq = f.modulus_sq()
        assert sq.is_identical(ModulatedStep.indicator(Q))

    def test_multiplication_by_zero(self):
        f = ModulatedStep.indicator(ball(3, 2, 0))
        assert (f * ModulatedStep.zero(3, 2)).is_zero

    def test_product_transform_is_convolution(self):
        rng = random.Random(3)
        for _ in range(8):
            f = random_modstep(rng, 3, 2, rng.randint(1, 4), 2)
            g = random_modstep(rng, 3, 2, rng.randint(1, 3), 1)
            lhs = (f * g).fourier()
            rhs = f.fourier().convolve(g.fourier())
            assert lhs.close_to(rhs, 1e-10)

    def test_product_support_calculus(self):
        rng = random.Random(4)
        for _ in range(8):
            f = random_modstep(rng, 3, 2, 3, 2)
            g = random_modstep(rng, 3, 2, 3, 2)
            supp = {c for c in (f * g).support_cubes()}
            allowed = set()
            for a in f.support_cubes():
                for b in g.support_cubes():
                    if a == b:
                        allowed.add(a)
            assert supp <= allowed

    def test_transform_support_of_products_adds(self):
        rng = random.Random(5)
        for _ in range(5):
            f = random_modstep(rng, 3, 1, 2, 1, mod_depth=1)
            g = random_modstep(rng, 3, 1, 2, 1, mod_depth=1)
            prod_cubes = (f * g).freq_support_cubes()
            sums = set()
            for a in f.freq_support_cubes():
                for b in g.freq_support_cubes():
                    sums.add(a.minkowski_add(b))
            for cube in prod_cubes:
                assert any(s.contains_cube(cube) or cube.contains_cube(s) for s in sums)


class TestConvolution:
    def test_unit_ball_idempotent(self):
        one = ModulatedStep.indicator(ball(3, 2, 0))
        assert one.convolve(one).is_identical(one)

    def test_averaging_locally_constant(self):
        f = ModulatedStep.indicator(ball(3, 2, 0), 2.5)
        mollifier = ModulatedStep.indicator(Cube(QVector.zero(3, 2).rep_mod(2), 2), 81.0)
        assert f.convolve(mollifier).close_to(f, 1e-12)

    def test_corner_sum_support(self):
        a = ModulatedStep.indicator(Cube(vec(1, 2), 1))
        b = ModulatedStep.indicator(Cube(vec(2, 0), 1))
        conv = a.convolve(b)
        assert conv.support_cubes() == [Cube(vec(0, 2), 1)]


class TestRestriction:
    def test_full_interval_is_identity(self):
        # needs the transform inside the unit slab, so use curve support
        from momentlab.random_instances import random_curve_supported

        rng = random.Random(6)
        f = random_curve_supported(rng, 3, 2, 2, 3, 2)
        assert f.restrict_freq(unit_interval(3)).close_to(f, 1e-10)

    def test_disjoint_interval_kills(self):
        hat = ModulatedStep.indicator(Cube(vec(1, 0), 1))
        f = hat.inverse_fourier()
        I = unit_interval(3).partition(1)[2]
        assert f.restrict_freq(I).is_zero
        assert not f.restrict_freq(unit_interval(3).partition(1)[1]).is_zero

    def test_partition_of_unity(self):
        from momentlab.random_instances import random_curve_supported

        rng = random.Random(7)
        f = random_curve_supported(rng, 3, 2, 2, 4, 2)
        P = unit_interval(3).partition(2)
        comps = f.freq_components(P)
        total = ModulatedStep.zero(3, 2)
        for g in comps.values():
            total = total + g
        assert total.close_to(f, 1e-10)

    def test_projections_idempotent_and_commuting(self):
        from momentlab.random_instances import random_curve_supported

        rng = random.Random(8)
        f = random_curve_supported(rng, 3, 2, 1, 3, 2)
        P = unit_interval(3).partition(1)
        a = f.restrict_freq(P[0])
        assert a.restrict_freq(P[0]).close_to(a, 1e-10)
        assert a.restrict_freq(P[1]).is_zero


class TestNorms:
    def test_indicator_norm(self):
        Q = Cube(QVector.zero(3, 2).rep_mod(1), 1)
        f = ModulatedStep.indicator(Q)
        for p in (1, 2, 4, 8):
            assert abs(f.lp_norm(p) - float(Q.volume) ** (1 / p)) < 1e-12
        assert f.lp_norm(inf) == 1.0

    def test_modulation_invariance(self):
        Q = ball(3, 2, 0)
        f = ModulatedStep.indicator(Q, 1.5)
        g = ModulatedStep.indicator(Q, 1.5, QVector([deep(2, -2), deep(1, -1)]))
        for p in (1, 2, 6, inf):
            assert abs(f.lp_norm(p) - g.lp_norm(p)) < 1e-12

    def test_plancherel_random(self):
        rng = random.Random(9)
        for _ in range(20):
            f = random_modstep(rng, 3, 2, rng.randint(1, 5), rng.randint(1, 2))
            assert abs(f.lp_norm(2) - f.fourier().lp_norm(2)) < 1e-9

    def test_sup_attained_on_cells(self):
        rng = random.Random(10)
        f = random_modstep(rng, 3, 2, 4, 2)
        r = f.cell_scale()
        coarse = max(abs(v) for _, _, v in f.cell_values())
        fine = max(abs(f.evaluate(x)) for x, _, _ in f.cell_values(cell_exp=r + 1))
        assert abs(coarse - fine) < 1e-12
        assert abs(f.lp_norm(inf) - coarse) < 1e-12

    def test_small_p_rejected(self):
        f = ModulatedStep.indicator(ball(3, 1, 0))
        with pytest.raises(ValueError):
            f.lp_norm(0.5)

    def test_cell_budget(self):
        Q = ball(3, 2, 0)
        f = ModulatedStep(
            3,
            2,
            [
                (1.0, QVector([deep(1, -9), deep(1, -9)]), Q),
                (1.0, QVector([deep(2, -9), deep(1, -8)]), Q),
            ],
        )
        with pytest.raises(BudgetExceededError):
            f.lp_norm(2, budget=10)


class TestOracleAgreement:
    def test_transform_against_quotient_dft(self):
        rng = random.Random(11)
        for q, k in ((3, 1), (3, 2), (5, 2)):
            for _ in range(10):
                f = random_modstep(rng, q, k, rng.randint(1, 4), rng.randint(1, 3))
                M, r = qd.grid_geometry(f)
                oracle = qd.dft_grid(qd.evaluate_on_grid(f, M, r), q, r)
                sym = qd.evaluate_on_grid(f.fourier(), r, M)
                ref = max(1.0, float(np.abs(oracle).max()))
                assert np.abs(oracle - sym).max() / ref < 1e-12

    def test_convolution_against_quotient_dft(self):
        rng = random.Random(12)
        q, k = 3, 2
        for _ in range(8):
            f = random_modstep(rng, q, k, 3, 2)
            g = random_modstep(rng, q, k, 2, 1)
            Mf, rf = qd.grid_geometry(f)
            Mg, rg = qd.grid_geometry(g)
            M, r = max(Mf, Mg), max(rf, rg)
            oracle = qd.convolve_grids(
                qd.evaluate_on_grid(f, M, r), qd.evaluate_on_grid(g, M, r), q, r
            )
            sym = qd.evaluate_on_grid(f.convolve(g), M, r)
            assert np.abs(oracle - sym).max() < 1e-12

    def test_grid_points_match_symbolic_evaluation(self):
        rng = random.Random(13)
        f = random_modstep(rng, 3, 2, 3, 2)
        M, r = qd.grid_geometry(f)
        grid = qd.evaluate_on_grid(f, M, r)
        n = 3 ** (M + r)
        for _ in range(20):
            idx = (rng.randrange(n), rng.randrange(n))
            x = qd.grid_point(3, 2, M, idx)
            assert abs(grid[idx] - f.evaluate(x)) < 1e-12


class TestSerialization:
    def test_fixture_round_trip(self):
        rng = random.Random(14)
        f = random_modstep(rng, 3, 2, 4, 2)
        g = ModulatedStep.from_json(f.to_json())
        assert f.is_identical(g)

    def test_joint_cells_cover_union(self):
        a = ModulatedStep.indicator(Cube(vec(0, 0), 1))
        b = ModulatedStep.indicator(Cube(vec(1, 1), 1))
        corners, vol, matrix = joint_cell_values([a, b])
        assert len(corners) == 2
        assert sorted(sum(map(abs, row)) for row in matrix) == [1.0, 1.0]
