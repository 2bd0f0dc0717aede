import random
from fractions import Fraction
from math import fsum

import pytest

from momentlab import decoupling as dec
from momentlab.errors import MomentLabError, SupportError
from momentlab.geometry import Cube, ball, gamma, unit_interval
from momentlab.qadic import QRational, QVector
from momentlab.random_instances import random_box_function, random_curve_supported
from momentlab.stepfn import ModulatedStep
from momentlab.wavepackets import ScaleConfig


def cfg92():
    return ScaleConfig.from_epsilon(3, 2, 2, Fraction(1, 2))


class TestCertificates:
    def test_curve_supported_instances_pass(self):
        rng = random.Random(0)
        f = random_curve_supported(rng, 3, 2, 2, 4, 2)
        cert = dec.freq_certificate(f, 2)
        assert cert and all(K.scale_exp == 2 for K in cert)

    def test_off_curve_support_rejected(self):
        f = ModulatedStep.indicator(ball(3, 2, 0))
        with pytest.raises(SupportError):
            dec.freq_certificate(f, 2)

    def test_instance_type_checks_parity(self):
        rng = random.Random(1)
        f = random_curve_supported(rng, 3, 2, 2, 2, 2)
        with pytest.raises(ValueError):
            dec.DecouplingInstance(f, 2, 5)


class TestRatio:
    def test_single_interval_gives_one(self):
        rng = random.Random(2)
        K = unit_interval(3).partition(2)[4]
        f = random_box_function(rng, 3, 2, K, 3)
        ratio, _ = dec.decoupling_ratio(dec.DecouplingInstance(f, 2, 6))
        assert abs(ratio - 1.0) < 1e-12

    def test_disjoint_supports_with_equal_norms(self):
        # pieces on disjoint spatial balls: the ratio is (#K)^(1/p - 1/2)
        q, k, m, p = 3, 2, 1, 4
        big = ball(q, k, m * k)
        anchors = unit_interval(q).partition(m)
        terms = []
        for j, K in enumerate(anchors):
            corner = QVector([QRational(q, j, -(m * k + 1)), QRational(q, 0)])
            cube = Cube(corner.rep_mod(-m * k), -m * k)
            terms.append((1.0 + 0j, gamma(K.corner, k), cube))
        f = ModulatedStep(q, k, terms)
        ratio, rep = dec.decoupling_ratio(dec.DecouplingInstance(f, m, p))
        n = len(anchors)
        assert abs(ratio - n ** (1 / p - 1 / 2)) < 1e-12
        assert ratio <= n ** (1 / 2 - 1 / p) + 1e-12

    def test_zero_rejected(self):
        with pytest.raises(MomentLabError):
            dec.decoupling_ratio(dec.DecouplingInstance(ModulatedStep.zero(3, 2), 2, 4))

    def test_trivial_ceiling_on_random_instances(self):
        rng = random.Random(3)
        for _ in range(10):
            f = random_curve_supported(rng, 3, 2, 2, rng.randint(1, 9), 2)
            ratio, rep = dec.decoupling_ratio(dec.DecouplingInstance(f, 2, 8))
            assert ratio <= rep["trivial_ceiling"] * (1 + 1e-9)


class TestExtremizer:
    def test_plancherel_case_is_flat(self):
        ratio, _ = dec.exp_sum_lower_bound(3, 2, 1, 2)
        assert abs(ratio - 1.0) < 1e-12

    def test_counting_formula_agreement(self):
        for m, p in ((1, 4), (1, 12), (2, 4)):
            ratio, rep = dec.exp_sum_lower_bound(3, 2, m, p)
            assert abs(ratio - rep["ratio_from_count"]) < 1e-9

    def test_supercritical_growth(self):
        r1, rep1 = dec.exp_sum_lower_bound(3, 2, 1, 12)
        r2, rep2 = dec.exp_sum_lower_bound(3, 2, 2, 12)
        assert r2 >= r1 >= 1.0
        assert rep1["predicted_exponent"] == 0.25
        # the scale-one ratio already beats the predicted power of delta
        assert r1 >= 3 ** 0.25 - 1e-9


class TestBroadNarrow:
    def test_single_coarse_interval_is_narrow(self):
        rng = random.Random(4)
        cfg = cfg92()
        K = unit_interval(3).partition(2)[1]  # inside coarse interval 0
        g = random_box_function(rng, 3, 2, K, 3)
        rep = dec.broad_narrow_check(g, cfg)
        assert rep["holds"]
        assert rep["broad_binding"] == 0

    def test_aligned_transverse_waves_bind_broad(self):
        q, k, m = 3, 2, 1
        cfg = ScaleConfig.from_epsilon(q, k, m, Fraction(1, 2))
        big = ball(q, k, m * k)
        terms = [
            (1.0 + 0j, gamma(QRational(q, a), k), big) for a in (0, 1)
        ]
        g = ModulatedStep(q, k, terms)
        rep = dec.broad_narrow_check(g, cfg)
        assert rep["holds"]
        assert rep["broad_binding"] >= 1

    def test_zero_function(self):
        rep = dec.broad_narrow_check(ModulatedStep.zero(3, 2), cfg92())
        assert rep["holds"] and rep["points"] == 0

    def test_explicit_sample_points(self):
        rng = random.Random(5)
        g = random_curve_supported(rng, 3, 2, 2, 3, 2)
        pts = [QVector([QRational(3, t), QRational(3, t * t)]) for t in range(5)]
        rep = dec.broad_narrow_check(g, cfg92(), sample_points=pts)
        assert rep["holds"] and rep["points"] == 5


class TestCountingLemma:
    def test_diagonal_membership(self):
        cfg = ScaleConfig(3, 2, 2, 1, 1)
        coarse = cfg.coarse_partition()
        K1 = coarse[0].partition(2)[1]
        K2 = coarse[2].partition(2)[0]
        box = Cube(QVector.zero(3, 2), cfg.nu_exp * 2)
        qry = dec.CountingQuery([coarse[0], coarse[2]], [K1, K2], box, cfg)
        hits = dec.counting_set(qry)
        assert (K1, K2) in hits
        assert len(hits) <= 1

    def test_pointwise_oracle_agreement(self):
        cfg = ScaleConfig(3, 2, 2, 1, 1)
        coarse = cfg.coarse_partition()
        rng = random.Random(6)
        for trial in range(20):
            I = rng.sample(coarse, 2)
            anchors = [rng.choice(i.partition(2)) for i in I]
            w = QVector([QRational(3, rng.randrange(9)), QRational(3, rng.randrange(9))])
            box = Cube(w.rep_mod(cfg.nu_exp * 2), cfg.nu_exp * 2)
            qry = dec.CountingQuery(I, anchors, box, cfg)
            assert set(dec.counting_set(qry)) == set(
                dec.counting_set_pointwise_oracle(qry, random.Random(trial))
            )

    def test_support_mode_is_tighter(self):
        cfg = ScaleConfig(3, 2, 2, 1, 1)
        rng = random.Random(7)
        g = random_curve_supported(rng, 3, 2, 2, 9, 1)
        supports = dec.freq_certificate(g, 2)
        coarse = cfg.coarse_partition()
        tried = 0
        for trial in range(30):
            I = rng.sample(coarse, 2)
            anchors = [rng.choice(i.partition(2)) for i in I]
            w = QVector([QRational(3, rng.randrange(9)), QRational(3, rng.randrange(9))])
            box = Cube(w.rep_mod(cfg.nu_exp * 2), cfg.nu_exp * 2)
            qry = dec.CountingQuery(I, anchors, box, cfg)
            loose = set(dec.counting_set(qry))
            tight = set(dec.counting_set(qry, supports=supports))
            assert tight <= loose
            tried += 1
        assert tried == 30

    def test_exhaustive_bound_small(self):
        rep = dec.counting_lemma_exhaustive(3, 2, 2, 1)
        assert rep["holds"] and rep["bound"] == 1 and rep["worst_count"] == 1

    def test_invalid_queries_rejected(self):
        cfg = ScaleConfig(3, 2, 2, 1, 1)
        coarse = cfg.coarse_partition()
        box = Cube(QVector.zero(3, 2), cfg.nu_exp * 2)
        with pytest.raises(ValueError):
            dec.CountingQuery([coarse[0], coarse[0]], [coarse[0].partition(2)[0]] * 2, box, cfg)
        with pytest.raises(ValueError):
            dec.CountingQuery(
                [coarse[0], coarse[1]],
                [coarse[0].partition(2)[0], coarse[0].partition(2)[1]],
                box,
                cfg,
            )


class TestMainInequality:
    def test_zero_function(self):
        rep = dec.verify_main_lemma(ModulatedStep.zero(3, 2), cfg92(), 8)
        assert rep["holds"]

    def test_single_wavepacket(self):
        rng = random.Random(8)
        K = unit_interval(3).partition(2)[3]
        g = random_box_function(rng, 3, 2, K, 1)
        rep = dec.verify_main_lemma(g, cfg92(), 8)
        assert rep["holds"] and rep["N"] == 1

    def test_seeded_random_suite(self):
        rng = random.Random(0)
        for _ in range(8):
            g = random_curve_supported(rng, 3, 2, 2, rng.randint(1, 9), 2)
            assert dec.verify_main_lemma(g, cfg92(), 8)["holds"]

    def test_parity_rejected(self):
        rng = random.Random(9)
        g = random_curve_supported(rng, 3, 2, 2, 2, 2)
        with pytest.raises(ValueError):
            dec.verify_main_lemma(g, cfg92(), 7)
        with pytest.raises(ValueError):
            dec.verify_main_lemma(g, cfg92(), 4)  # p - 2k must be positive

    def test_supplied_decoupling_bounds_are_consumed(self):
        rng = random.Random(10)
        g = random_curve_supported(rng, 3, 2, 2, 4, 2)
        loose = dec.verify_main_lemma(g, cfg92(), 8)
        generous = dec.verify_main_lemma(
            g, cfg92(), 8, dec_bound_supplier=lambda p, m: 10.0 * dec.trivial_decoupling_bound(3, m)
        )
        assert generous["rhs"] > loose["rhs"]


class TestReversedHoelder:
    def test_single_interval_is_plain_hoelder(self):
        rng = random.Random(11)
        K = unit_interval(3).partition(2)[5]
        g = random_box_function(rng, 3, 2, K, 2)
        rep = dec.verify_reversed_holder(g, cfg92(), 8)
        assert rep["holds"] and rep["N"] == 1
        p, k = 8, 2
        lhs = g.lp_norm(p) ** p
        rhs = g.lp_norm(float("inf")) ** (2 * k) * g.lp_norm(p - 2 * k) ** (p - 2 * k)
        assert lhs <= rhs * (1 + 1e-9)

    def test_flat_instance_with_slack_recorded(self):
        rng = random.Random(12)
        fine = unit_interval(3).partition(2)
        g = ModulatedStep.zero(3, 2)
        for K in fine:
            g = g + random_box_function(rng, 3, 2, K, 1)
        rep = dec.verify_reversed_holder(g, cfg92(), 8)
        assert rep["holds"] and rep["rhs"] >= rep["lhs"]

    def test_seeded_random_suite(self):
        rng = random.Random(0)
        for _ in range(8):
            g = random_curve_supported(rng, 3, 2, 2, rng.randint(1, 9), 2)
            assert dec.verify_reversed_holder(g, cfg92(), 8)["holds"]

    def test_coarse_partition_variant_also_holds(self):
        rng = random.Random(13)
        g = random_curve_supported(rng, 3, 2, 2, 5, 2)
        assert dec.verify_reversed_holder(g, cfg92(), 8, partition="kappa")["holds"]


class TestAffineRescaling:
    def test_identity_interval(self):
        rng = random.Random(14)
        g = random_curve_supported(rng, 3, 2, 2, 4, 2)
        h, detm = dec.affine_rescale(g, unit_interval(3))
        assert detm == 1
        assert h.close_to(g, 1e-10)

    def test_norms_reproduced(self):
        rng = random.Random(15)
        g = random_curve_supported(rng, 3, 2, 2, 6, 2)
        for I in unit_interval(3).partition(1):
            if g.restrict_freq(I).is_zero:
                continue
            rep = dec.affine_rescale_verify(g, I, cfg92(), 8)
            assert rep["holds"]

    def test_rescaled_support_lands_at_the_quotient_scale(self):
        rng = random.Random(16)
        g = random_curve_supported(rng, 3, 2, 2, 6, 2)
        I = next(i for i in unit_interval(3).partition(1) if not g.restrict_freq(i).is_zero)
        h, _ = dec.affine_rescale(g.restrict_freq(I), I)
        cert = dec.freq_certificate(h, 2 - I.scale_exp)
        assert all(K.scale_exp == 1 for K in cert)


class TestReverseSquare:
    def test_single_interval_ratio_one(self):
        rng = random.Random(17)
        K = unit_interval(3).partition(2)[7]
        g = random_box_function(rng, 3, 2, K, 2)
        rep = dec.reverse_square_check(g, 2, 1)
        assert abs(rep["ratio"] - 1.0) < 1e-9

    def test_extremizer_family_under_trivial_ceiling(self):
        f = dec.exp_sum_extremizer(3, 2, 2)
        rep = dec.reverse_square_check(f, 2, 1)
        assert rep["ratio"] <= rep["trivial_ceiling"] * (1 + 1e-9)
        assert rep["recursion_holds"]

    def test_seeded_random_suite(self):
        rng = random.Random(0)
        for _ in range(6):
            g = random_curve_supported(rng, 3, 2, 2, rng.randint(1, 9), 2)
            rep = dec.reverse_square_check(g, 2, 1)
            assert rep["recursion_holds"] and rep["broad_holds"]
