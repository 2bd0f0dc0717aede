"""Wavepacket decomposition and three-stage dyadic pigeonholing.

A function whose transform lives in the curve box over K restricts to each
dual tile with constant modulus, and the restriction keeps its Fourier
support inside the box.  Pigeonholing splits a frequency-decomposed
function into buckets that are uniform in wavepacket height H, per-piece
packet count alpha, and per-parent sibling count beta, plus a small
remainder controlled in L^p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .errors import MomentLabError, SupportError
from .geometry import Cube, Interval, MaMatrix, Tile, theta_of, tile_of_point, unit_interval
from .qadic import QVector
from .stepfn import ModulatedStep

__all__ = [
    "ScaleConfig",
    "WavepacketSet",
    "PigeonholeBucket",
    "wavepacket_decompose",
    "pigeonhole",
    "verify_theta_support",
]


@dataclass(frozen=True)
class ScaleConfig:
    """The (delta, nu, kappa) scale triple used by the main inequalities.

    delta = q^-delta_exp is the fine scale, nu the intermediate scale
    (largest q-power at most delta^(1/k)), kappa the coarse scale (largest
    q-power at most delta^epsilon).
    """

    q: int
    k: int
    delta_exp: int
    nu_exp: int
    kappa_exp: int
    epsilon: Fraction | None = None

    @classmethod
    def from_epsilon(cls, q: int, k: int, delta_exp: int, epsilon) -> "ScaleConfig":
        epsilon = Fraction(epsilon)
        if not 0 < epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        nu_exp = ceil(Fraction(delta_exp, k))
        kappa_exp = ceil(delta_exp * epsilon)
        return cls(q, k, delta_exp, nu_exp, kappa_exp, epsilon)

    def __post_init__(self):
        if self.delta_exp < 1:
            raise ValueError("need delta < 1")
        if self.nu_exp * self.k < self.delta_exp:
            raise ValueError("nu must be at most delta^(1/k)")
        if not 1 <= self.kappa_exp <= self.delta_exp:
            raise ValueError("kappa must lie in [delta, 1/q]")

    @property
    def delta(self) -> Fraction:
        return Fraction(1, self.q**self.delta_exp)

    @property
    def nu(self) -> Fraction:
        return Fraction(1, self.q**self.nu_exp)

    @property
    def kappa(self) -> Fraction:
        return Fraction(1, self.q**self.kappa_exp)

    def fine_partition(self) -> list[Interval]:
        return unit_interval(self.q).partition(self.delta_exp)

    def mid_partition(self) -> list[Interval]:
        return unit_interval(self.q).partition(self.nu_exp)

    def coarse_partition(self) -> list[Interval]:
        return unit_interval(self.q).partition(self.kappa_exp)


def verify_theta_support(g: ModulatedStep, K: Interval) -> None:
    """Check supp(FT g) inside the curve box over K; raise otherwise.

    The transform is refined to the box's cube scale, where membership is
    a corner test; a term surviving canonicalization outside the box is a
    genuine violation because distinct canonical modulations on one cube
    are linearly independent characters.
    """
    k = g.k
    box = theta_of(K, k)
    if g.is_zero:
        return
    hat = g.fourier()
    fine = K.scale_exp * k
    refined = ModulatedStep(g.q, g.k, hat._terms_at_scale(max(hat.scale_exp, fine)))
    for _, _, cube in refined.terms:
        if not box.contains_cube(cube):
            raise SupportError(
                f"Fourier support leaves the curve box over {K}", offending_cube=cube
            )


class WavepacketSet:
    """The tile decomposition of a single-box function."""

    def __init__(self, base_interval: Interval, packets: list[tuple[Tile, ModulatedStep]]):
        self.base_interval = base_interval
        self.packets = packets

    def reconstruct(self) -> ModulatedStep:
        if not self.packets:
            raise MomentLabError("empty wavepacket set has no ambient group data")
        total = ModulatedStep.zero(self.packets[0][1].q, self.packets[0][1].k)
        for _, piece in self.packets:
            total = total + piece
        return total

    def heights(self) -> list[float]:
        """Constant modulus of each packet on its tile."""
        out = []
        for tile, piece in self.packets:
            out.append(abs(piece.evaluate(tile.offset_point())))
        return out

    def __len__(self) -> int:
        return len(self.packets)


def wavepacket_decompose(g: ModulatedStep, K: Interval) -> WavepacketSet:
    """Split g (Fourier supported in the curve box over K) along dual tiles.

    Exact: the pieces sum back to g, each has constant modulus on its
    tile, and each stays Fourier supported in the box.
    """
    verify_theta_support(g, K)
    if g.is_zero:
        return WavepacketSet(K, [])
    k = g.k
    m = K.scale_exp
    matrix = MaMatrix(K.corner, k)
    by_tile: dict[Tile, list] = {}
    for coeff, b, cube in g._terms_at_scale(max(g.scale_exp, -m)):
        tile = tile_of_point(cube.corner, K, matrix)
        by_tile.setdefault(tile, []).append((coeff, b, cube))
    packets = [
        (tile, ModulatedStep(g.q, g.k, terms))
        for tile, terms in sorted(by_tile.items(), key=lambda kv: kv[0].key())
    ]
    packets = [(t, p) for t, p in packets if not p.is_zero]
    return WavepacketSet(K, packets)


@dataclass
class PigeonholeBucket:
    """All wavepackets with height ~H, packet count ~alpha, sibling count ~beta."""

    height_H: float
    packet_count_alpha: int
    sibling_count_beta: int
    function: ModulatedStep
    packet_tiles: dict[Interval, list[Tile]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "H": self.height_H,
            "alpha": self.packet_count_alpha,
            "beta": self.sibling_count_beta,
            "packet_tiles": [
                {"interval": K.to_json(), "tiles": [t.to_json() for t in tiles]}
                for K, tiles in sorted(self.packet_tiles.items(), key=lambda kv: kv[0].key())
            ],
        }


def _dyadic_class_down(value: float, top: float) -> int:
    """Index j >= 0 with value in (top/2^(j+1), top/2^j]; ties go down."""
    if value <= 0 or value > top:
        raise ValueError("value must lie in (0, top]")
    j = 0
    while value <= top / 2 ** (j + 1):
        j += 1
    return j


def _dyadic_class_up(count: int) -> int:
    """Smallest power of two at least count (count in (alpha/2, alpha])."""
    alpha = 1
    while alpha < count:
        alpha *= 2
    return alpha


def pigeonhole(
    f: ModulatedStep,
    cfg: ScaleConfig,
    p: int,
    height_floor_exponent: Fraction | None = None,
):
    """Three-stage dyadic pigeonholing of a frequency-decomposed function.

    Requires f spatially supported on one translate of the ball of radius
    delta^-k and Fourier supported in the union of curve boxes.  Returns
    (buckets, remainder, report); the remainder obeys
    ||remainder||_p <= (sum_K ||f_K||_p^2)^(1/2), asserted at runtime.
    """
    q, k, m = cfg.q, cfg.k, cfg.delta_exp
    if height_floor_exponent is None:
        height_floor_exponent = 1 + Fraction(k * (k - 1), 2 * p)
    ball_scale = -m * k
    if not f.is_zero:
        anchors = {cube.corner.rep_mod(ball_scale) for cube in f.support_cubes()}
        if len(anchors) > 1:
            raise SupportError(
                "function is not supported on a single translate of the big ball"
            )

    fine = cfg.fine_partition()
    components = f.freq_components(fine)
    live = {K: fK for K, fK in components.items() if not fK.is_zero}
    reconstructed = ModulatedStep.zero(q, k)
    for fK in live.values():
        reconstructed = reconstructed + fK
    if not reconstructed.close_to(f, 1e-9):
        raise SupportError("Fourier support leaves the union of curve boxes")

    packets: dict[Interval, WavepacketSet] = {
        K: wavepacket_decompose(fK, K) for K, fK in live.items()
    }
    heights: dict[Interval, list[float]] = {K: ws.heights() for K, ws in packets.items()}
    h_star = max((max(hs, default=0.0) for hs in heights.values()), default=0.0)
    report = {
        "H_star": h_star,
        "height_floor_exponent": height_floor_exponent,
        "n_intervals": len(live),
    }
    if h_star == 0.0:
        return [], ModulatedStep.zero(q, k), report

    floor = float(Fraction(q) ** (-m * height_floor_exponent)) * h_star
    max_h_classes = 0
    while h_star / 2 ** (max_h_classes + 1) > floor:
        max_h_classes += 1
    max_h_classes += 1

    # stage 1: heights; what falls below the floor is the remainder
    kept: dict[tuple[Interval, int], list[tuple[Tile, ModulatedStep, float]]] = {}
    remainder = ModulatedStep.zero(q, k)
    for K, ws in packets.items():
        for (tile, piece), h in zip(ws.packets, heights[K]):
            if h <= floor:
                remainder = remainder + piece
                continue
            j = _dyadic_class_down(h, h_star)
            kept.setdefault((K, j), []).append((tile, piece, h))

    # stage 2: packet counts per (K, H)
    staged: dict[tuple[Interval, int, int], list[tuple[Tile, ModulatedStep]]] = {}
    for (K, j), items in kept.items():
        alpha = _dyadic_class_up(len(items))
        staged[(K, j, alpha)] = [(t, piece) for t, piece, _ in items]

    # stage 3: sibling counts within the nu-parent
    mid = cfg.mid_partition()
    buckets: dict[tuple[int, int, int], dict] = {}
    for j in {j for (_, j, _) in staged}:
        for alpha in {a for (_, jj, a) in staged if jj == j}:
            siblings: dict[Interval, list[Interval]] = {}
            for (K, jj, aa) in staged:
                if jj == j and aa == alpha:
                    J = K.parent(cfg.nu_exp)
                    siblings.setdefault(J, []).append(K)
            for J, children in siblings.items():
                beta = _dyadic_class_up(len(children))
                slot = buckets.setdefault(
                    (j, alpha, beta),
                    {"function": ModulatedStep.zero(q, k), "tiles": {}},
                )
                for K in children:
                    for tile, piece in staged[(K, j, alpha)]:
                        slot["function"] = slot["function"] + piece
                        slot["tiles"].setdefault(K, []).append(tile)

    out = []
    for (j, alpha, beta), slot in sorted(buckets.items()):
        out.append(
            PigeonholeBucket(
                height_H=h_star / 2**j,
                packet_count_alpha=alpha,
                sibling_count_beta=beta,
                function=slot["function"],
                packet_tiles=slot["tiles"],
            )
        )

    # closure checks: exact reconstruction and the remainder L^p bound
    total = remainder
    for bucket in out:
        total = total + bucket.function
    if not total.close_to(f, 1e-9):
        raise MomentLabError("pigeonhole buckets plus remainder do not reconstruct f")
    if not remainder.is_zero:
        rhs = (
            sum(fK.lp_norm(p) ** 2 for fK in live.values()) ** 0.5
        )
        lhs = remainder.lp_norm(p)
        report["remainder_lp"] = lhs
        report["remainder_bound"] = rhs
        if lhs > rhs * (1 + 1e-9):
            raise MomentLabError(
                f"remainder bound violated: {lhs} > {rhs}"
            )
    else:
        report["remainder_lp"] = 0.0
        report["remainder_bound"] = 0.0

    # bucket count is cubically logarithmic in 1/delta
    max_alpha = q ** (m * k * (k - 1) // 2)
    max_beta = q ** (m - cfg.nu_exp)
    n_alpha_classes = max_alpha.bit_length() + 1
    n_beta_classes = max_beta.bit_length() + 1
    report["n_buckets"] = len(out)
    report["class_bound"] = max_h_classes * n_alpha_classes * n_beta_classes
    if len(out) > report["class_bound"]:
        raise MomentLabError("bucket count exceeds its logarithmic-cube bound")
    return out, remainder, report
