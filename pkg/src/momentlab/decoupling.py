"""Decoupling functionals and instance checks for the moment-curve geometry.

The decoupling constant itself is a supremum over all admissible
functions and is never computed; instances give certified lower bounds,
and the checks consume certified upper bounds (by default the trivial
Cauchy-Schwarz ceiling) where one is needed on the right-hand side.

Conventions: delta = q^-delta_exp is the fine frequency scale, kappa and
nu the coarse and intermediate scales of a ScaleConfig.  For intervals of
a common length, distance > kappa is the same as being distinct, because
distinct same-length intervals are automatically q*kappa apart.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import fsum

from .errors import BudgetExceededError, MomentLabError, SupportError
from .geometry import Cube, Interval, ThetaBox, ball, gamma, tau_of, theta_of, unit_interval
from .qadic import QRational, QVector
from .stepfn import ModulatedStep, joint_cell_values
from .vinogradov import count_power_sum_congruences
from .wavepackets import ScaleConfig

__all__ = [
    "DecouplingInstance",
    "CountingQuery",
    "freq_certificate",
    "trivial_decoupling_bound",
    "decoupling_ratio",
    "exp_sum_extremizer",
    "exp_sum_lower_bound",
    "broad_narrow_check",
    "counting_set",
    "counting_set_pointwise_oracle",
    "counting_lemma_exhaustive",
    "main_inequality_constants",
    "verify_main_lemma",
    "verify_reversed_holder",
    "affine_rescale",
    "affine_rescale_verify",
    "reverse_square_check",
]

REL_TOL = 1e-9


def freq_certificate(f: ModulatedStep, delta_exp: int) -> dict[Interval, list[Cube]]:
    """Which fine intervals carry Fourier support, with the witness cubes.

    Refines the transform to the curve-box cube scale and tests each
    surviving cube against the box over its interval; a cube outside
    raises with the offender attached.
    """
    q, k, m = f.q, f.k, delta_exp
    if f.is_zero:
        return {}
    hat = f.fourier()
    refined = ModulatedStep(q, k, hat._terms_at_scale(max(hat.scale_exp, m * k)))
    boxes: dict[Interval, ThetaBox] = {}
    out: dict[Interval, list[Cube]] = {}
    for _, _, cube in refined.terms:
        first = cube.corner[0]
        if not first.is_zero and first.valuation < 0:
            raise SupportError("Fourier support leaves the unit interval", offending_cube=cube)
        K = Interval(first.rep_mod(m), m)
        box = boxes.get(K)
        if box is None:
            box = theta_of(K, k)
            boxes[K] = box
        if not box.contains_cube(cube):
            raise SupportError(
                f"Fourier support leaves the curve box over {K}", offending_cube=cube
            )
        out.setdefault(K, []).append(cube)
    return out


@dataclass
class DecouplingInstance:
    """A function with verified curve-box Fourier support, a scale, and p."""

    f: ModulatedStep
    delta_exp: int
    p: int
    certificate: dict[Interval, list[Cube]] | None = None

    def __post_init__(self):
        if self.p < 2 or self.p % 2 != 0:
            raise ValueError("p must be an even integer >= 2")
        if self.certificate is None:
            self.certificate = freq_certificate(self.f, self.delta_exp)


def trivial_decoupling_bound(q: int, scale_exp: int) -> float:
    """Cauchy-Schwarz ceiling: the constant at scale q^-m is at most q^(m/2)."""
    return float(q) ** (scale_exp / 2.0)


def decoupling_ratio(inst: DecouplingInstance, budget: int | None = None):
    """||f||_p divided by the square-function ell^2 aggregate of the pieces.

    Every instance certifies a lower bound for the decoupling constant at
    its scale; the trivial ceiling is asserted on the way out.
    """
    f, m, p = inst.f, inst.delta_exp, inst.p
    if f.is_zero:
        raise MomentLabError("the zero function has no decoupling ratio")
    kwargs = {"budget": budget} if budget else {}
    pieces = f.freq_components(unit_interval(f.q).partition(m))
    sq = fsum(fK.lp_norm(p, **kwargs) ** 2 for fK in pieces.values() if not fK.is_zero)
    numerator = f.lp_norm(p, **kwargs)
    ratio = numerator / sq**0.5
    ceiling = trivial_decoupling_bound(f.q, m)
    if ratio > ceiling * (1 + REL_TOL):
        raise MomentLabError(f"ratio {ratio} exceeds the trivial ceiling {ceiling}")
    report = {
        "ratio": ratio,
        "numerator": numerator,
        "pieces": sum(1 for fK in pieces.values() if not fK.is_zero),
        "square_sum": sq,
        "trivial_ceiling": ceiling,
    }
    return ratio, report


def exp_sum_extremizer(q: int, k: int, delta_exp: int) -> ModulatedStep:
    """Superposition of curve-frequency waves on the big ball.

    One wave chi(gamma(a) . x) per fine-partition anchor a, all carried by
    the ball of radius delta^-k; its p-th moments count power-sum
    congruences among the anchors.
    """
    m = delta_exp
    big = ball(q, k, m * k)
    terms = []
    for a in range(q**m):
        mod = gamma(QRational(q, a), k)
        terms.append((1.0 + 0j, mod, big))
    return ModulatedStep(q, k, terms)


def exp_sum_lower_bound(q: int, k: int, delta_exp: int, p: int, budget: int | None = None):
    """Decoupling ratio of the canonical wave superposition, cross-checked
    against the exact congruence count of anchor power sums."""
    if p % 2 != 0 or p < 2:
        raise ValueError("p must be an even integer >= 2")
    m = delta_exp
    f = exp_sum_extremizer(q, k, delta_exp)
    inst = DecouplingInstance(f, delta_exp=m, p=p)
    ratio, report = decoupling_ratio(inst, budget=budget)
    s = p // 2
    n_cong = count_power_sum_congruences(s, k, q**m, [q ** (m * k)] * k)
    # ||f||_p^p = vol(ball) * N and each ||f_K||_p = vol^(1/p), so the ratio
    # collapses to N^(1/p) / q^(m/2)
    predicted = n_cong ** (1.0 / p) / float(q) ** (m / 2.0)
    report.update(
        {
            "congruence_count": n_cong,
            "ratio_from_count": predicted,
            "predicted_exponent": max(0.0, 0.5 - k * (k + 1) / (2.0 * p)),
            "delta_exp": m,
            "p": p,
        }
    )
    if abs(ratio - predicted) > REL_TOL * max(1.0, predicted):
        raise MomentLabError(
            f"analytic ratio {ratio} disagrees with counting value {predicted}"
        )
    return ratio, report


# -- broad-narrow ---------------------------------------------------------------


def broad_narrow_check(g: ModulatedStep, cfg: ScaleConfig, sample_points=None):
    """Pointwise dichotomy: |g|^2k is controlled by the best narrow piece
    or by a transverse k-fold product, with explicit constants.

    With no sample points given, checks every cell of the common
    constancy grid (exhaustive for the instance), evaluated on the
    quotient grid for speed.
    """
    q, k = cfg.q, cfg.k
    if g.is_zero and sample_points is None:
        return {
            "points": 0,
            "narrow_binding": 0,
            "broad_binding": 0,
            "holds": True,
            "worst_ratio": 0.0,
        }
    kappa = float(cfg.kappa)
    coarse = cfg.coarse_partition()
    comps = g.freq_components(coarse)
    intervals = list(coarse)
    fns = [g] + [comps[I] for I in intervals]
    if sample_points is None:
        import numpy as np

        from .quotient_dft import evaluate_on_grid, grid_geometry

        geo = [grid_geometry(fn) for fn in fns if not fn.is_zero]
        M = max((mm for mm, _ in geo), default=0)
        r = max((rr for _, rr in geo), default=0)
        flats = [
            (
                np.zeros(q ** ((M + r) * k), dtype=complex)
                if fn.is_zero
                else evaluate_on_grid(fn, M, r).reshape(-1)
            )
            for fn in fns
        ]
        n_points = flats[0].size
        g_abs = np.abs(flats[0])
        piece_abs = np.stack([np.abs(v) for v in flats[1:]])
    else:
        import numpy as np

        points = list(sample_points)
        g_abs = np.array([abs(g.evaluate(x)) for x in points])
        piece_abs = np.stack(
            [np.array([abs(fn.evaluate(x)) for x in points]) for fn in fns[1:]]
        )
        n_points = len(points)
    narrow_const = 2.0 ** (2 * k - 1) * float(k) ** (2 * k)
    broad_const = 2.0 ** (2 * k - 1) * kappa ** (-(4 * k - 2))
    narrow = narrow_const * piece_abs.max(axis=0) ** (2 * k)
    broad_core = None
    for tup in permutations(range(len(intervals)), k):
        prod = piece_abs[tup[0]].copy()
        for i in tup[1:]:
            prod = prod * piece_abs[i]
        broad_core = prod if broad_core is None else np.maximum(broad_core, prod)
    broad = broad_const * (broad_core**2 if broad_core is not None else 0.0)
    lhs = g_abs ** (2 * k)
    rhs = narrow + broad
    holds = bool((lhs <= rhs * (1 + REL_TOL)).all())
    live = rhs > 0
    worst = float((lhs[live] / rhs[live]).max()) if live.any() else 0.0
    narrow_binding = int((narrow >= broad).sum())
    return {
        "points": int(n_points),
        "narrow_binding": narrow_binding,
        "broad_binding": int(n_points - narrow_binding),
        "holds": holds,
        "worst_ratio": worst,
    }


# -- the counting lemma -----------------------------------------------------------


@dataclass
class CountingQuery:
    """Fixed coarse intervals, one fine anchor interval in each, and a box.

    Pairwise-distinct coarse intervals of one length are automatically
    more than kappa apart; the box must have side nu^k, which is at most
    delta.
    """

    intervals: list[Interval]
    anchors: list[Interval]
    box: Cube
    cfg: ScaleConfig

    def __post_init__(self):
        cfg = self.cfg
        k = cfg.k
        if len(self.intervals) != k or len(self.anchors) != k:
            raise ValueError(f"need {k} intervals and {k} anchor intervals")
        if len({i.corner for i in self.intervals}) != k:
            raise ValueError("coarse intervals must be pairwise distinct (> kappa apart)")
        for I in self.intervals:
            if I.scale_exp != cfg.kappa_exp:
                raise ValueError("coarse intervals must have length kappa")
        for I, Kb in zip(self.intervals, self.anchors):
            if Kb.scale_exp != cfg.delta_exp or not I.contains_interval(Kb):
                raise ValueError("anchors must be delta-intervals inside their coarse interval")
        if self.box.scale_exp != cfg.nu_exp * k:
            raise ValueError("box must have side nu^k")
        if cfg.nu_exp * k < cfg.delta_exp:
            raise ValueError("box side must be at most delta")


def counting_set(qry: CountingQuery, supports: dict[Interval, list[Cube]] | None = None):
    """All ordered fine-interval tuples whose cube sums capture zero.

    Default mode decides membership on the enclosing cubes of the curve
    points (independent of any particular function); with explicit
    Fourier supports it uses those cubes instead, a strictly tighter
    test.  The count never exceeds (q kappa)^(-k(k-1)).
    """
    cfg = qry.cfg
    q, k, m = cfg.q, cfg.k, cfg.delta_exp
    choices = [I.partition(m) for I in qry.intervals]
    anchor_sum = QVector.zero(q, k)
    for Kb in qry.anchors:
        anchor_sum = anchor_sum + tau_of(Kb, k).corner
    target = qry.box.corner - anchor_sum
    hits = []
    for combo in product(*choices):
        if supports is None:
            total = target
            for K in combo:
                total = total + tau_of(K, k).corner
            if all(c.is_zero or c.valuation >= m for c in total):
                hits.append(combo)
        else:
            if _support_mode_member(qry, combo, supports):
                hits.append(combo)
    bound = _counting_bound(cfg)
    if len(hits) > bound:
        raise MomentLabError(
            f"counting set has {len(hits)} tuples, above the bound {bound}"
        )
    return hits


def _counting_bound(cfg: ScaleConfig) -> int:
    # (q kappa)^(-k(k-1)) with kappa = q^-kappa_exp
    k = cfg.k
    return cfg.q ** ((cfg.kappa_exp - 1) * k * (k - 1))


def _support_mode_member(qry, combo, supports) -> bool:
    cubes_pos = [supports.get(K, []) for K in combo]
    cubes_neg = [supports.get(Kb, []) for Kb in qry.anchors]
    if any(not lst for lst in cubes_pos) or any(not lst for lst in cubes_neg):
        return False
    for pos in product(*cubes_pos):
        for neg in product(*cubes_neg):
            total = qry.box.corner
            scale = qry.box.scale_exp
            for c in pos:
                total = total + c.corner
                scale = min(scale, c.scale_exp)
            for c in neg:
                total = total - c.corner
                scale = min(scale, c.scale_exp)
            if all(x.is_zero or x.valuation >= scale for x in total):
                return True
    return False


def counting_set_pointwise_oracle(qry: CountingQuery, rng: random.Random | None = None):
    """Independent membership route: sample actual points of every cube,
    sum them, and test the q-adic size of the result.

    Shifting a sample inside its cube moves the sum by a lattice element,
    so any sample decides membership; randomizing the samples exercises
    that invariance.
    """
    cfg = qry.cfg
    q, k, m = cfg.q, cfg.k, cfg.delta_exp
    rng = rng or random.Random(0)

    def sample_in(cube: Cube) -> QVector:
        shift = QVector(
            [QRational(q, rng.randrange(q**2), cube.scale_exp) for _ in range(k)]
        )
        return cube.corner + shift

    choices = [I.partition(m) for I in qry.intervals]
    hits = []
    for combo in product(*choices):
        total = sample_in(qry.box)
        for K in combo:
            total = total + sample_in(tau_of(K, k))
        for Kb in qry.anchors:
            total = total - sample_in(tau_of(Kb, k))
        if all(c.is_zero or c.valuation >= m for c in total):
            hits.append(combo)
    return hits


def counting_lemma_exhaustive(q: int, k: int, delta_exp: int, kappa_exp: int):
    """Check every admissible query at the given scales against the bound.

    Boxes are enumerated through their residues modulo the delta lattice
    (inequivalent residues exhaust the distinct membership questions, and
    boxes away from the unit ball give empty sets).  Returns a report with
    the worst count and the query space size.
    """
    cfg = ScaleConfig(q, k, delta_exp, -(-delta_exp // k), kappa_exp)
    m, r = delta_exp, kappa_exp
    coarse = unit_interval(q).partition(r)
    bound = _counting_bound(cfg)
    qm = q**m
    fine_by_coarse = {I: I.partition(m) for I in coarse}
    tau_corner: dict[Interval, tuple[int, ...]] = {}
    for I in coarse:
        for K in fine_by_coarse[I]:
            # anchors are canonical digit integers, so tau corners are integers
            corner = tau_of(K, k).corner
            tau_corner[K] = tuple(c.unit * q**c.valuation if not c.is_zero else 0 for c in corner)
    worst = 0
    worst_query = None
    n_queries = 0
    for combo_I in permutations(coarse, k):
        table: dict[tuple[int, ...], int] = {}
        for combo_K in product(*(fine_by_coarse[I] for I in combo_I)):
            key = tuple(
                sum(tau_corner[K][i] for K in combo_K) % qm for i in range(k)
            )
            table[key] = table.get(key, 0) + 1
        for combo_Kbar in product(*(fine_by_coarse[I] for I in combo_I)):
            base = tuple(sum(tau_corner[K][i] for K in combo_Kbar) % qm for i in range(k))
            for w in product(range(qm), repeat=k):
                n_queries += 1
                key = tuple((base[i] - w[i]) % qm for i in range(k))
                count = table.get(key, 0)
                if count > worst:
                    worst = count
                    worst_query = (combo_I, combo_Kbar, w)
    report = {
        "worst_count": worst,
        "bound": bound,
        "n_queries": n_queries,
        "holds": worst <= bound,
        "worst_query": None,
    }
    if worst_query is not None:
        combo_I, combo_Kbar, w = worst_query
        report["worst_query"] = {
            "intervals": [I.to_json() for I in combo_I],
            "anchors": [K.to_json() for K in combo_Kbar],
            "box_residue": list(w),
        }
    if not report["holds"]:
        raise MomentLabError(
            f"counting lemma violated: {worst} > {bound} at {report['worst_query']}"
        )
    return report


# -- the main inequality -------------------------------------------------------------


def main_inequality_constants(k: int, p: int) -> tuple[float, float]:
    """Explicit admissible constants for the two branches.

    Narrow: the pointwise constant 2^(2k-1) k^(2k) passes through Hoelder
    and an absorption with weight one half; broad: the pointwise constant
    doubles through the same absorption.
    """
    if p <= 2 * k:
        raise ValueError("need p > 2k")
    a1 = 2.0 ** (2 * k - 1) * float(k) ** (2 * k)
    lam = (2.0 * (p - 2 * k) / p) ** ((p - 2 * k) / p)
    c_narrow = 2.0 * (2.0 * k / p) * lam ** (p / (2.0 * k)) * a1 ** (p / (2.0 * k))
    c_broad = 2.0 ** (2 * k)
    return c_narrow, c_broad


def _norms_over(pieces: dict[Interval, ModulatedStep], p) -> dict[Interval, float]:
    return {K: fK.lp_norm(p) for K, fK in pieces.items() if not fK.is_zero}


def verify_main_lemma(g: ModulatedStep, cfg: ScaleConfig, p: int, dec_bound_supplier=None):
    """Instance check of the two-branch inequality controlling the p-th
    moment by a coarse decoupling term plus a counted transverse term.

    ``dec_bound_supplier(p', scale_exp)`` must return a certified upper
    bound for the decoupling constant at scale q^-scale_exp; the default
    is the trivial ceiling.  Every factor is computed from g and reported.
    """
    q, k = cfg.q, cfg.k
    if p % 2 != 0 or p < 2 * k + 2:
        raise ValueError("p must be even with p - 2k an even positive integer")
    if dec_bound_supplier is None:
        dec_bound_supplier = lambda pp, scale_exp: trivial_decoupling_bound(q, scale_exp)
    if g.is_zero:
        return {"lhs": 0.0, "rhs": 0.0, "holds": True, "zero": True}
    freq_certificate(g, cfg.delta_exp)

    fine = cfg.fine_partition()
    comps = g.freq_components(fine)
    norms_p = _norms_over(comps, p)
    norms_inf = _norms_over(comps, float("inf"))
    norms_low = _norms_over(comps, p - 2 * k)
    mid = cfg.mid_partition()
    mid_comps = g.freq_components(mid)
    live_J = [J for J, gJ in mid_comps.items() if not gJ.is_zero]
    N = len(live_J)

    lhs = g.lp_norm(p) ** p
    sq_sum = fsum(v**2 for v in norms_p.values())
    c_narrow, c_broad = main_inequality_constants(k, p)
    d_kappa = dec_bound_supplier(p, cfg.delta_exp - cfg.kappa_exp)
    d_nu = dec_bound_supplier(p - 2 * k, cfg.delta_exp - cfg.nu_exp)

    narrow_term = c_narrow * d_kappa**p * sq_sum ** (p / 2.0)

    children = {J: [K for K in fine if J.contains_interval(K)] for J in live_J}
    max_inner = max(
        (
            fsum(norms_low.get(K, 0.0) ** 2 for K in children[J]) ** ((p - 2 * k) / 2.0)
            for J in live_J
        ),
        default=0.0,
    )
    max_inf = max(norms_inf.values(), default=0.0)
    sum_inf = fsum(norms_inf.values())
    kappa, nu = float(cfg.kappa), float(cfg.nu)
    broad_term = (
        c_broad
        * float(q) ** (-k * (k - 1))
        * kappa ** (-(k * k + 4 * k - 2))
        * nu ** (-k * (k - 1) / 2.0)
        * N ** (p - 2 * k)
        * d_nu ** (p - 2 * k)
        * max_inf**k
        * sum_inf**k
        * max_inner
    )
    rhs = narrow_term + broad_term
    report = {
        "lhs": lhs,
        "rhs": rhs,
        "narrow_term": narrow_term,
        "broad_term": broad_term,
        "constants": {"narrow": c_narrow, "broad": c_broad},
        "dec_bounds": {"coarse": d_kappa, "mid": d_nu},
        "N": N,
        "max_piece_sup": max_inf,
        "sum_piece_sup": sum_inf,
        "max_inner_sum": max_inner,
        "square_sum": sq_sum,
        "holds": lhs <= rhs * (1 + REL_TOL),
    }
    if not report["holds"]:
        raise MomentLabError(f"main inequality failed: {lhs} > {rhs}")
    return report


def verify_reversed_holder(g: ModulatedStep, cfg: ScaleConfig, p: int, partition: str = "nu"):
    """Instance check of the reversed Hoelder chain for the square sum.

    The max over parents runs over the intermediate partition by default
    (what the main inequality consumes); 'kappa' selects the coarse one,
    which only weakens the right side.
    """
    q, k = cfg.q, cfg.k
    if p % 2 != 0 or p <= 2 * k:
        raise ValueError("p must be even and exceed 2k")
    if g.is_zero:
        return {"lhs": 0.0, "rhs": 0.0, "holds": True, "zero": True}
    fine = cfg.fine_partition()
    comps = g.freq_components(fine)
    norms_p = _norms_over(comps, p)
    norms_inf = _norms_over(comps, float("inf"))
    norms_low = _norms_over(comps, p - 2 * k)
    parents = cfg.mid_partition() if partition == "nu" else cfg.coarse_partition()
    mid_comps = g.freq_components(cfg.mid_partition())
    N = sum(1 for gJ in mid_comps.values() if not gJ.is_zero)

    lhs = fsum(v**2 for v in norms_p.values()) ** (p / 2.0)
    max_parent = max(
        (
            fsum(norms_low.get(K, 0.0) ** 2 for K in fine if J.contains_interval(K))
            ** ((p - 2 * k) / 2.0)
            for J in parents
        ),
        default=0.0,
    )
    rhs = (
        N ** ((p - 2 * k) / 2.0)
        * max(norms_inf.values(), default=0.0) ** k
        * fsum(norms_inf.values()) ** k
        * max_parent
    )
    report = {
        "lhs": lhs,
        "rhs": rhs,
        "N": N,
        "max_parent_sum": max_parent,
        "holds": lhs <= rhs * (1 + REL_TOL),
    }
    if not report["holds"]:
        raise MomentLabError(f"reversed Hoelder failed: {lhs} > {rhs}")
    return report


# -- affine rescaling ------------------------------------------------------------------


def _binomial_matrix(c: QRational, k: int, negate: bool = False):
    """Unipotent lower-triangular matrix with entries binom(j, i) c^(j-i)."""
    from math import comb

    base = -c if negate else c
    rows = []
    for j in range(1, k + 1):
        row = []
        for i in range(1, k + 1):
            if i > j:
                row.append(QRational(c.q, 0))
            else:
                row.append(QRational(c.q, comb(j, i)) * base ** (j - i))
        rows.append(tuple(row))
    return tuple(rows)


def _mat_apply(rows, v: QVector) -> QVector:
    out = []
    for row in rows:
        acc = None
        for entry, vi in zip(row, v):
            term = entry * vi
            acc = term if acc is None else acc + term
        out.append(acc)
    return QVector(out)


def affine_rescale(g_I: ModulatedStep, I: Interval) -> tuple[ModulatedStep, Fraction]:
    """Pull a piece over the interval I back to the unit interval.

    Returns (h, det_modulus): h is the exact rescaled function and
    det_modulus = kappa^(k(k+1)/2) the q-adic modulus of the frequency
    map's determinant, so ||g_I||_p = det_modulus^((p-1)/p) ||h||_p.
    """
    q, k = g_I.q, g_I.k
    r = I.scale_exp
    c = I.corner
    kappa_elt = QRational(q, 1, r)  # the element of norm kappa
    btrans = _binomial_matrix(c, k)  # B^T applied via transpose below
    bneg = _binomial_matrix(c, k, negate=True)  # B^(-1) = B(-c)
    gvec = gamma(c, k) if c.qnorm() <= 1 else None
    if gvec is None:
        raise ValueError("interval corner must lie in the unit ball")
    det_modulus = Fraction(1, q ** (r * k * (k + 1) // 2))
    coeff_scale = float(Fraction(1) / det_modulus)

    def b_transpose_apply(v: QVector) -> QVector:
        out = []
        for i in range(1, k + 1):
            acc = None
            for j in range(i, k + 1):
                term = btrans[j - 1][i - 1] * v[j - 1]
                acc = term if acc is None else acc + term
            out.append(acc)
        return QVector(out)

    terms = []
    for coeff, b, cube in g_I.terms:
        s = cube.scale_exp
        w = b_transpose_apply(cube.corner)
        # new modulation: diag(kappa^-i) B(-c) (b - gamma(c))
        shifted = _mat_apply(bneg, b - gvec)
        new_mod = QVector(
            [QRational(q, 1, -r * (i + 1)) * shifted[i] for i in range(k)]
        )
        fine_scale = s + r * k
        axis_corners = []
        for i in range(1, k + 1):
            base_i = kappa_elt**i * w[i - 1]
            steps = q ** (r * (k - i))
            axis_corners.append(
                [(base_i + QRational(q, t, s + r * i)).rep_mod(fine_scale) for t in range(steps)]
            )
        for combo in product(*axis_corners):
            terms.append(
                (coeff * coeff_scale, new_mod, Cube(QVector(combo), fine_scale))
            )
    return ModulatedStep(q, k, terms), det_modulus


def affine_rescale_verify(g: ModulatedStep, I: Interval, cfg: ScaleConfig, p: int):
    """Norm equalities and support transport under the rescaling map."""
    q, k, m = cfg.q, cfg.k, cfg.delta_exp
    g_I = g.restrict_freq(I)
    if g_I.is_zero:
        raise MomentLabError("the piece over I vanishes; nothing to rescale")
    h, det_modulus = affine_rescale(g_I, I)
    factor = float(det_modulus) ** ((p - 1) / p)
    lhs = g_I.lp_norm(p)
    rhs = factor * h.lp_norm(p)
    report = {
        "interval": I.to_json(),
        "norm_parent": lhs,
        "norm_rescaled": h.lp_norm(p),
        "det_modulus": det_modulus,
        "holds_parent": abs(lhs - rhs) <= REL_TOL * max(1.0, lhs),
        "pieces": [],
    }
    # the rescaled function decouples at the quotient scale over O
    new_exp = m - I.scale_exp
    freq_certificate(h, new_exp)
    for K in I.partition(m):
        g_K = g.restrict_freq(K)
        if g_K.is_zero:
            continue
        child_corner = (K.corner - I.corner) / QRational(q, 1, I.scale_exp)
        K_new = Interval(child_corner.rep_mod(new_exp), new_exp)
        h_K = h.restrict_freq(K_new)
        a = g_K.lp_norm(p)
        bnorm = factor * h_K.lp_norm(p)
        report["pieces"].append(
            {
                "K": K.to_json(),
                "K_rescaled": K_new.to_json(),
                "norm": a,
                "norm_rescaled_side": bnorm,
                "holds": abs(a - bnorm) <= REL_TOL * max(1.0, a),
            }
        )
    report["holds"] = report["holds_parent"] and all(x["holds"] for x in report["pieces"])
    if not report["holds"]:
        raise MomentLabError("affine rescaling failed to reproduce the norms")
    return report


# -- reverse square function ---------------------------------------------------------


def _square_sum_moment(pieces: list[ModulatedStep], k_power: int) -> float:
    """integral of (sum |g_K|^2)^k over the joint cells."""
    live = [f for f in pieces if not f.is_zero]
    if not live:
        return 0.0
    corners, vol, matrix = joint_cell_values(live)
    total = []
    for j in range(len(corners)):
        s = fsum(abs(matrix[i][j]) ** 2 for i in range(len(live)))
        total.append(s**k_power)
    return fsum(total) * float(vol)


def reverse_square_check(g: ModulatedStep, delta_exp: int, kappa_exp: int):
    """Instance ratio for the reverse square estimate plus its recursion.

    The ratio integral |g|^2k over integral (sum |g_K|^2)^k lower-bounds
    the 2k-th power of the best constant; the recursion inequality is
    checked with the narrow constant replaced by the certified ratios of
    the coarse pieces.
    """
    q, k = g.q, g.k
    if g.is_zero:
        raise MomentLabError("zero function has no reverse-square ratio")
    cfg = ScaleConfig(q, k, delta_exp, -(-delta_exp // k), kappa_exp)
    freq_certificate(g, delta_exp)
    fine = cfg.fine_partition()
    comps = g.freq_components(fine)
    fine_pieces = [comps[K] for K in fine]
    denom = _square_sum_moment(fine_pieces, k)
    numer = g.lp_norm(2 * k) ** (2 * k)
    ratio = numer / denom
    ceiling = float(q) ** (delta_exp * k)  # delta^-k, the trivial ceiling
    if ratio > ceiling * (1 + REL_TOL):
        raise MomentLabError(f"reverse-square ratio {ratio} above trivial ceiling {ceiling}")

    coarse = cfg.coarse_partition()
    coarse_comps = g.freq_components(coarse)
    narrow_ratios = []
    for I in coarse:
        g_i = coarse_comps[I]
        if g_i.is_zero:
            continue
        children = [comps[K] for K in fine if I.contains_interval(K)]
        d = _square_sum_moment(children, k)
        narrow_ratios.append(g_i.lp_norm(2 * k) ** (2 * k) / d)
    s_narrow = max(narrow_ratios, default=0.0)

    # direct transverse sum for the broad side of the dichotomy
    live = [(I, coarse_comps[I]) for I in coarse if not coarse_comps[I].is_zero]
    broad_sum = 0.0
    if len(live) >= k:
        fns = [f for _, f in live]
        corners, vol, matrix = joint_cell_values(fns)
        for tup in permutations(range(len(live)), k):
            vals = []
            for j in range(len(corners)):
                prod = 1.0
                for i in tup:
                    prod *= abs(matrix[i][j]) ** 2
                vals.append(prod)
            broad_sum += fsum(vals) * float(vol)
    kappa = float(cfg.kappa)
    count_bound = float(q) ** ((kappa_exp - 1) * k * (k - 1))
    broad_vs_square = count_bound * denom
    recursion_rhs = (
        2 ** (2 * k - 1) * float(k) ** (2 * k) * s_narrow
        + 2 ** (2 * k - 1) * kappa ** (-(4 * k - 2)) * count_bound
    )
    report = {
        "ratio": ratio,
        "trivial_ceiling": ceiling,
        "narrow_instance_constant": s_narrow,
        "broad_transverse_integral": broad_sum,
        "broad_counted_bound": broad_vs_square,
        "broad_holds": broad_sum <= broad_vs_square * (1 + REL_TOL),
        "recursion_rhs": recursion_rhs,
        "recursion_holds": ratio <= recursion_rhs * (1 + REL_TOL),
    }
    if not (report["broad_holds"] and report["recursion_holds"]):
        raise MomentLabError(f"reverse-square recursion failed: {report}")
    return report
