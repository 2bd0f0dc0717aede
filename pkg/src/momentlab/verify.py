"""Desk-scale verification suites.

Each suite checks one family of exact statements at small parameters and
returns a report dict with a ``passed`` flag; ``run_all`` strings the
applicable suites together for a given (q, k).  The acceptance tests and
the command-line ``verify-all`` both run these.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from math import fsum

import numpy as np

from . import decoupling as dec
from . import quotient_dft as qd
from .errors import MomentLabError, SupportError
from .exponents import (
    ExponentParams,
    a_coeff,
    a_coeff_recurrence,
    b_monotone_check,
    corollary_q_exponent,
    iterate_D_bound,
    positivity_hypothesis,
    supercritical_slack,
    theorem_exponent,
)
from .geometry import ball, tau_of, theta_diff_decompose, theta_of, tile_partition, unit_interval
from .qadic import QRational, QVector
from .random_instances import random_box_function, random_curve_supported, random_modstep
from .stepfn import ModulatedStep
from .vinogradov import (
    classical_iteration_exponent,
    count_J,
    count_J_nested,
    karatsuba_bound,
    karatsuba_exponent_trace,
    linnik_bound,
    linnik_max,
)
from .wavepackets import ScaleConfig, pigeonhole, verify_theta_support, wavepacket_decompose

GRID_CHECK_LIMIT = 600_000


def _suite(name):
    def wrap(fn):
        def run(*args, **kwargs):
            t0 = time.time()
            report = {"name": name, "passed": True, "failures": []}
            try:
                fn(report, *args, **kwargs)
            except (MomentLabError, AssertionError) as exc:
                report["passed"] = False
                report["failures"].append(str(exc))
            report["passed"] = report["passed"] and not report["failures"]
            report["runtime_s"] = round(time.time() - t0, 3)
            return report

        run.__name__ = fn.__name__
        return run

    return wrap


@_suite("fourier-identity")
def fourier_identity(report, q: int, ks=(1, 2, 3)):
    """The transform of the unit-cube indicator is itself, exactly."""
    for k in ks:
        one = ModulatedStep.indicator(ball(q, k, 0))
        if not one.fourier().is_identical(one):
            report["failures"].append(f"unit-cube transform differs at k={k}")
    report["cases"] = len(tuple(ks))


@_suite("oracle-agreement")
def oracle_agreement(report, q: int, k: int, n_instances: int = 100, seed: int = 0, tol=1e-9):
    """Symbolic transform, norms, and convolution against the quotient DFT."""
    rng = random.Random(seed)
    worst = 0.0
    heavy = q ** (3 * k) > GRID_CHECK_LIMIT
    for i in range(n_instances):
        scale = rng.choice([1, 1, 2, 2, 3]) if not heavy else rng.choice([1, 1, 1, 2, 2, 2, 2, 3])
        f = random_modstep(rng, q, k, rng.randint(1, 4), scale, mod_depth=scale)
        M, r = qd.grid_geometry(f)
        grid = qd.evaluate_on_grid(f, M, r)
        oracle_hat = qd.dft_grid(grid, q, r)
        fhat = f.fourier()
        sym_hat = qd.evaluate_on_grid(fhat, r, M)
        scale_ref = max(1.0, float(np.abs(oracle_hat).max()))
        worst = max(worst, float(np.abs(oracle_hat - sym_hat).max()) / scale_ref)
        worst = max(
            worst,
            abs(qd.grid_l2_norm(grid, q, r) - f.lp_norm(2)),
            abs(f.lp_norm(2) - qd.grid_l2_norm(sym_hat, q, M)),
        )
        g = random_modstep(rng, q, k, rng.randint(1, 3), max(1, scale - 1), mod_depth=1)
        prod_hat = (f * g).fourier()
        conv_hat = fhat.convolve(g.fourier())
        if not prod_hat.close_to(conv_hat, tol):
            report["failures"].append(f"product/convolution theorem failed at instance {i}")
        n = q ** (M + r)
        if n**k <= GRID_CHECK_LIMIT:
            Mg, rg = qd.grid_geometry(g)
            MM, rr = max(M, Mg), max(r, rg)
            conv_oracle = qd.convolve_grids(
                qd.evaluate_on_grid(f, MM, rr), qd.evaluate_on_grid(g, MM, rr), q, rr
            )
            conv_sym = qd.evaluate_on_grid(f.convolve(g), MM, rr)
            ref = max(1.0, float(np.abs(conv_oracle).max()))
            worst = max(worst, float(np.abs(conv_oracle - conv_sym).max()) / ref)
    report["worst_rel_error"] = worst
    report["instances"] = n_instances
    if worst > tol:
        report["failures"].append(f"relative error {worst} above {tol}")


@_suite("tilings")
def tilings(report, q: int, k: int, delta_exps=(1, 2), residue_check_limit: int = 200_000):
    """Counts, disjointness, and exact unions for both tiling statements."""
    fine = []
    for m in delta_exps:
        expected = q ** (m * k * (k - 1) // 2)
        for K in unit_interval(q).partition(m)[: q - 1]:
            box = theta_of(K, k)
            cubes = theta_diff_decompose(K, k)
            if len(cubes) != expected:
                report["failures"].append(f"difference-box count at m={m}: {len(cubes)}")
            if len({c.corner for c in cubes}) != expected:
                report["failures"].append(f"difference-box corners collide at m={m}")
            vol = sum((c.volume for c in cubes), Fraction(0))
            if vol != Fraction(1, q ** (m * k * (k + 1) // 2)):
                report["failures"].append(f"difference-box volume at m={m}: {vol}")
            if not all(box.difference_contains(c.corner) for c in cubes):
                report["failures"].append(f"difference-box corner escapes at m={m}")

            Q = ball(q, k, m * k)
            tiles = tile_partition(Q, K)
            if len(tiles) != expected:
                report["failures"].append(f"tile count at m={m}: {len(tiles)}")
            if len({t.dual_corner for t in tiles}) != expected:
                report["failures"].append(f"tile coset reps collide at m={m}")
            tvol = sum((t.volume for t in tiles), Fraction(0))
            if tvol != Q.volume:
                report["failures"].append(f"tile volumes at m={m}: {tvol} != {Q.volume}")
            if not all(t.contains(t.offset_point()) for t in tiles):
                report["failures"].append(f"tile offset point escapes at m={m}")
            # pointwise partition on the full residue lattice when affordable:
            # every residue's canonical owner exists and owners split evenly,
            # with direct membership double-checked on a sample
            n_residues = q ** (m * (k - 1) * k)
            if n_residues <= residue_check_limit:
                from .geometry import MaMatrix, tile_of_point

                matrix = MaMatrix(K.corner, k)
                tile_set = set(tiles)
                owners: dict = {}
                subcubes = Q.subdivide(-m)
                for sub in subcubes:
                    t = tile_of_point(sub.corner, K, matrix)
                    if t not in tile_set:
                        report["failures"].append(f"residue {sub.corner} owned by a foreign tile")
                        break
                    owners[t] = owners.get(t, 0) + 1
                if owners and set(owners.values()) != {len(subcubes) // len(tiles)}:
                    report["failures"].append(f"uneven tile ownership at m={m}")
                for sub in subcubes[:: max(1, len(subcubes) // 40)]:
                    direct = sum(1 for t in tiles if t.contains(sub.corner))
                    if direct != 1:
                        report["failures"].append(
                            f"residue {sub.corner} lies in {direct} tiles at m={m}"
                        )
                        break
            fine.append((m, K))
    report["checked"] = len(fine)


@_suite("interval-separation")
def interval_separation(report, q: int, max_scale: int = 3):
    """Distinct same-length intervals sit at least q times their length apart."""
    from .geometry import interval_distance

    for m in range(0, max_scale + 1):
        P = unit_interval(q).partition(m)
        length = Fraction(1, q**m)
        for i, a in enumerate(P):
            for b in P[i + 1 :]:
                d = interval_distance(a, b)
                if d < q * length:
                    report["failures"].append(f"{a} and {b} are only {d} apart")
    report["scales"] = max_scale + 1


@_suite("wavepackets")
def wavepackets_suite(report, q: int, k: int, delta_exps=(1, 2), n_instances: int = 50, seed: int = 0):
    """Reconstruction, constant modulus, and box support for tile pieces."""
    rng = random.Random(seed)
    per_scale = max(1, n_instances // len(tuple(delta_exps)))
    done = 0
    for m in delta_exps:
        P = unit_interval(q).partition(m)
        for _ in range(per_scale):
            K = rng.choice(P)
            g = random_box_function(rng, q, k, K, rng.randint(1, 4))
            ws = wavepacket_decompose(g, K)
            if not ws.reconstruct().close_to(g, 1e-9):
                report["failures"].append(f"reconstruction failed at m={m}")
            if len(ws) > q ** (m * k * (k - 1) // 2):
                report["failures"].append(f"tile count exceeded at m={m}")
            for tile, piece in ws.packets:
                vals = {round(abs(piece.evaluate(x)), 9) for x in tile.sample_points(6)}
                if len(vals) != 1:
                    report["failures"].append(f"modulus varies on a tile at m={m}: {vals}")
                try:
                    verify_theta_support(piece, K)
                except SupportError as exc:
                    report["failures"].append(f"packet support escapes at m={m}: {exc}")
            done += 1
    report["instances"] = done


@_suite("pigeonhole")
def pigeonhole_suite(report, q: int, k: int, delta_exp: int = 2, p: int = 8, n_instances: int = 10, seed: int = 0):
    """Bucket statistics, reconstruction, and the remainder bound."""
    rng = random.Random(seed)
    cfg = ScaleConfig.from_epsilon(q, k, delta_exp, Fraction(1, 2))
    fine = cfg.fine_partition()
    for i in range(n_instances):
        f = random_curve_supported(rng, q, k, delta_exp, rng.randint(1, len(fine)), 2)
        buckets, remainder, info = pigeonhole(f, cfg, p)
        for b in buckets:
            comps = b.function.freq_components(fine)
            live = {K: fK for K, fK in comps.items() if not fK.is_zero}
            parents: dict = {}
            for K, fK in live.items():
                ws = wavepacket_decompose(fK, K)
                hs = ws.heights()
                if not all(b.height_H / 2 < h <= b.height_H * (1 + 1e-9) for h in hs):
                    report["failures"].append(f"height class broken in instance {i}")
                if not (b.packet_count_alpha / 2 < len(ws) <= b.packet_count_alpha):
                    report["failures"].append(f"packet-count class broken in instance {i}")
                parents.setdefault(K.parent(cfg.nu_exp), []).append(K)
            for J, children in parents.items():
                if not (b.sibling_count_beta / 2 < len(children) <= b.sibling_count_beta):
                    report["failures"].append(f"sibling class broken in instance {i}")
            n_mid = sum(
                1 for gJ in b.function.freq_components(cfg.mid_partition()).values() if not gJ.is_zero
            )
            if n_mid > q**cfg.nu_exp:
                report["failures"].append("mid-interval count exceeds its ceiling")
    report["instances"] = n_instances


@_suite("linnik")
def linnik_suite(report, pairs=((2, 3), (2, 5), (3, 5))):
    """Exhaustive residue maxima against k! p^(k(k-1)/2)."""
    results = {}
    for k, p in pairs:
        bound = linnik_bound(k, p)
        value, argmax = linnik_max(k, p)
        results[f"k={k},p={p}"] = {"max": value, "bound": bound, "argmax": argmax}
        if value > bound:
            report["failures"].append(f"residue count {value} above {bound} at (k={k}, p={p})")
    report["results"] = results


@_suite("vinogradov")
def vinogradov_suite(report):
    """Exact counts, the closed form at s=k=2, and strategy agreement."""
    for X in (1, 4, 9):
        for k in (2, 3):
            if count_J(1, k, X) != X:
                report["failures"].append(f"diagonal count at X={X}")
    for X in range(1, 31):
        if count_J(2, 2, X) != 2 * X * X - X:
            report["failures"].append(f"closed form fails at X={X}")
    for X in range(1, 13):
        v = count_J(3, 3, X)
        if not X**3 <= v <= 6 * X**3:
            report["failures"].append(f"multiset bound fails at X={X}: {v}")
    for s, k, X in ((2, 2, 4), (2, 3, 3), (3, 2, 3)):
        if count_J(s, k, X) != count_J_nested(s, k, X):
            report["failures"].append(f"strategies disagree at (s,k,X)=({s},{k},{X})")
    report["checked"] = True


@_suite("karatsuba")
def karatsuba_suite(report):
    """Bound dominates exact counts; symbolic exponents match the closed form."""
    for X in range(1, 9):
        for s in (2, 4):
            bound = karatsuba_bound(s, 2, X).bound
            exact = count_J(s, 2, X)
            if bound < exact:
                report["failures"].append(f"bound {bound} below exact {exact} at (s={s}, X={X})")
    for k in (2, 3, 4):
        for l in (1, 2, 3, 4):
            got, _ = karatsuba_exponent_trace(k * l, k)
            want = classical_iteration_exponent(k * l, k)
            if got != want:
                report["failures"].append(f"exponent trace {got} != closed form {want}")
    report["checked"] = True


@_suite("counting-lemma")
def counting_lemma_suite(report, cases=((3, 2, 2, 1), (5, 2, 2, 1))):
    """Exhaustive verification over every admissible query."""
    results = {}
    for q, k, m, r in cases:
        rep = dec.counting_lemma_exhaustive(q, k, m, r)
        results[f"q={q}"] = {
            "worst": rep["worst_count"],
            "bound": rep["bound"],
            "queries": rep["n_queries"],
        }
        if not rep["holds"]:
            report["failures"].append(f"counting bound fails at q={q}")
    report["results"] = results


@_suite("broad-narrow")
def broad_narrow_suite(report, q: int = 3, k: int = 2, n_instances: int = 50, seed: int = 0):
    """Pointwise dichotomy on every constancy cell of seeded instances."""
    rng = random.Random(seed)
    cfg = ScaleConfig.from_epsilon(q, k, 2, Fraction(1, 2))
    narrow = broad = 0
    for i in range(n_instances):
        g = random_curve_supported(rng, q, k, 2, rng.randint(1, q**2), 2)
        rep = dec.broad_narrow_check(g, cfg)
        if not rep["holds"]:
            report["failures"].append(f"dichotomy fails at instance {i}")
        narrow += rep["narrow_binding"]
        broad += rep["broad_binding"]
    report["instances"] = n_instances
    report["narrow_binding_cells"] = narrow
    report["broad_binding_cells"] = broad


@_suite("main-inequality")
def main_lemma_suite(report, q: int = 3, k: int = 2, p: int = 8, n_instances: int = 20, seed: int = 0):
    rng = random.Random(seed)
    cfg = ScaleConfig.from_epsilon(q, k, 2, Fraction(1, 2))
    slack = []
    for i in range(n_instances):
        g = random_curve_supported(rng, q, k, 2, rng.randint(1, q**2), 2)
        rep = dec.verify_main_lemma(g, cfg, p)
        if not rep["holds"]:
            report["failures"].append(f"main inequality fails at instance {i}")
        if rep["lhs"] > 0:
            slack.append(rep["rhs"] / rep["lhs"])
    report["instances"] = n_instances
    report["min_slack"] = min(slack, default=float("inf"))


@_suite("reversed-holder")
def reversed_holder_suite(report, q: int = 3, k: int = 2, p: int = 8, n_instances: int = 20, seed: int = 0):
    rng = random.Random(seed)
    cfg = ScaleConfig.from_epsilon(q, k, 2, Fraction(1, 2))
    slack = []
    for i in range(n_instances):
        g = random_curve_supported(rng, q, k, 2, rng.randint(1, q**2), 2)
        rep = dec.verify_reversed_holder(g, cfg, p)
        if not rep["holds"]:
            report["failures"].append(f"reversed Hoelder fails at instance {i}")
        if rep["lhs"] > 0:
            slack.append(rep["rhs"] / rep["lhs"])
    report["instances"] = n_instances
    report["min_slack"] = min(slack, default=float("inf"))


@_suite("affine-rescaling")
def affine_rescaling_suite(report, q: int = 3, k: int = 2, p: int = 8, n_instances: int = 10, seed: int = 0):
    rng = random.Random(seed)
    cfg = ScaleConfig.from_epsilon(q, k, 2, Fraction(1, 2))
    done = 0
    for i in range(n_instances):
        g = random_curve_supported(rng, q, k, 2, rng.randint(2, q**2), 2)
        for I in unit_interval(q).partition(1):
            if g.restrict_freq(I).is_zero:
                continue
            rep = dec.affine_rescale_verify(g, I, cfg, p)
            if not rep["holds"]:
                report["failures"].append(f"rescaling fails at instance {i}")
            done += 1
    report["rescalings"] = done


@_suite("reverse-square")
def reverse_square_suite(report, q: int = 3, k: int = 2, n_instances: int = 20, seed: int = 0):
    rng = random.Random(seed)
    for i in range(n_instances):
        g = random_curve_supported(rng, q, k, 2, rng.randint(1, q**2), 2)
        rep = dec.reverse_square_check(g, 2, 1)
        if not (rep["recursion_holds"] and rep["broad_holds"]):
            report["failures"].append(f"reverse-square recursion fails at instance {i}")
    report["instances"] = n_instances


@_suite("extremizer")
def extremizer_suite(report, q: int = 3, k: int = 2, delta_exps=(1, 2), ps=(4, 12)):
    """Wave-superposition ratios against the counting formula and ceilings."""
    values = {}
    for m in delta_exps:
        for p in ps:
            ratio, rep = dec.exp_sum_lower_bound(q, k, m, p)
            values[(m, p)] = ratio
            if ratio > rep["trivial_ceiling"] * (1 + 1e-9):
                report["failures"].append(f"ratio above ceiling at (m={m}, p={p})")
    for p in ps:
        if p > 2:
            seq = [values[(m, p)] for m in sorted(delta_exps)]
            if any(b < a * (1 - 1e-9) for a, b in zip(seq, seq[1:])):
                report["failures"].append(f"ratio not monotone in 1/delta at p={p}")
    report["ratios"] = {f"delta_exp={m},p={p}": v for (m, p), v in values.items()}


@_suite("exponent-engine")
def exponent_suite(report):
    """Exact rational identities and the iteration's bookkeeping."""
    if a_coeff(4, 4, 2) != 0 or a_coeff(8, 4, 2) != 11:
        report["failures"].append("anchor values of the q-exponent are off")
    for k in range(2, 6):
        for p0 in (2 * k, 2 * k + 2):
            for j in range(0, 11):
                p = p0 + 2 * k * j
                if a_coeff(p, p0, k) != a_coeff_recurrence(p, p0, k):
                    report["failures"].append(f"recurrence != closed form at (k={k}, p={p})")
    if corollary_q_exponent(8, 2) != Fraction(11, 8):
        report["failures"].append("corollary exponent at (k=2, p=8) is off")
    for k in (2, 3, 4):
        if not b_monotone_check(k, 0) or not b_monotone_check(k, 7):
            report["failures"].append(f"b not monotone at k={k}")
    for k in (2, 3):
        for p0 in (2 * k, 4 * k):
            for c0 in (Fraction(k * k, 2) + 1, 3 * k * k):
                if positivity_hypothesis(k, p0, c0):
                    for j in range(12):
                        if supercritical_slack(k, c0, p0 + 2 * k * j) < -1e-12:
                            report["failures"].append(
                                f"positivity does not propagate at (k={k}, p0={p0})"
                            )
    params = ExponentParams(k=2, p0=4, c0=Fraction(2), epsilon=Fraction(1, 10))
    te = theorem_exponent(params, 8)
    tr = iterate_D_bound(params, 8)
    if tr.final_q_exponent != te["q_exponent"]:
        report["failures"].append("trajectory q-exponent disagrees with the closed form")
    gaps = []
    for eps in (Fraction(1, 4), Fraction(1, 10), Fraction(1, 50)):
        t = iterate_D_bound(
            ExponentParams(k=2, p0=4, c0=Fraction(2), epsilon=eps), 8
        )
        gaps.append(te["delta_exponent_no_eps"] - t.final_delta_exponent)
    if not all(g >= -1e-12 for g in gaps) or not all(
        a >= b - 1e-12 for a, b in zip(gaps, gaps[1:])
    ):
        report["failures"].append("iteration does not tighten as epsilon shrinks")
    report["checked"] = True


def run_all(q: int, k: int, seed: int = 0) -> list[dict]:
    """Every suite that applies at (q, k), smallest first."""
    if q <= k:
        raise MomentLabError(f"need a prime q > k, got q={q}, k={k}")
    reports = [
        fourier_identity(q),
        interval_separation(q),
        oracle_agreement(q, k, n_instances=30, seed=seed),
        vinogradov_suite(),
        linnik_suite(pairs=((2, 3), (2, 5))),
        karatsuba_suite(),
        exponent_suite(),
    ]
    if k >= 2:
        reports.append(tilings(q, k))
        reports.append(wavepackets_suite(q, k, n_instances=20, seed=seed))
        reports.append(pigeonhole_suite(q, k, n_instances=5, seed=seed))
        if k == 2:
            reports.append(counting_lemma_suite(cases=((q, k, 2, 1),)))
            reports.append(broad_narrow_suite(q, k, n_instances=20, seed=seed))
            reports.append(main_lemma_suite(q, k, n_instances=8, seed=seed))
            reports.append(reversed_holder_suite(q, k, n_instances=8, seed=seed))
            reports.append(affine_rescaling_suite(q, k, n_instances=4, seed=seed))
            reports.append(reverse_square_suite(q, k, n_instances=8, seed=seed))
            reports.append(extremizer_suite(q, k))
    return reports
