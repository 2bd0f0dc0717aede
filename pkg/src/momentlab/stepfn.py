"""Exact calculus for modulated step functions on Q_q^k.

A function is a finite sum of terms ``coeff * chi(b . x) * 1_Q(x)`` with Q
a cube.  The class is closed under sums, products, conjugation, Fourier
transform and convolution, all computed term by term in closed form.

Two evaluation layers coexist: support and cube bookkeeping is exact
(canonical corners, exact character angles), while coefficients are
floating complex numbers.  Norms and integrals are therefore exact up to
float rounding; the documented tolerance for comparisons is 1e-9.

Canonical form: all cubes at one common scale, at most one term per
(cube, modulation) pair with modulations reduced to canonical digit
representatives (so a modulation that is constant on its cube is absorbed
into the coefficient), and coefficients below a relative threshold pruned.
"""

from __future__ import annotations

from fractions import Fraction
from math import fsum, inf

from .errors import BudgetExceededError, MomentLabError
from .geometry import Cube, Interval
from .qadic import QRational, QVector, char_value

__all__ = ["ModulatedStep", "joint_cell_values"]

PRUNE_REL_TOL = 1e-12
DEFAULT_CELL_BUDGET = 8_000_000


def _phase(b: QVector, point: QVector) -> complex:
    return char_value(b.dot(point))


class ModulatedStep:
    """A finite linear combination of modulated cube indicators.

    ``terms`` is the canonical list of (coeff, modulation, cube) triples,
    sorted deterministically; ``scale_exp`` is the common cube scale.
    """

    __slots__ = ("q", "k", "scale_exp", "terms", "_by_cube")

    def __init__(self, q: int, k: int, terms=(), _canonical=False):
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "k", k)
        if _canonical:
            canon = list(terms)
            scale = canon[0][2].scale_exp if canon else 0
        else:
            canon, scale = self._canonicalize(q, k, list(terms))
        object.__setattr__(self, "scale_exp", scale)
        object.__setattr__(self, "terms", tuple(canon))
        by_cube: dict[Cube, list[tuple[complex, QVector]]] = {}
        for c, b, cube in canon:
            by_cube.setdefault(cube, []).append((c, b))
        object.__setattr__(self, "_by_cube", by_cube)

    def __setattr__(self, name, value):
        raise AttributeError("ModulatedStep is immutable")

    # -- construction --------------------------------------------------------

    @classmethod
    def zero(cls, q: int, k: int) -> "ModulatedStep":
        return cls(q, k, [])

    @classmethod
    def indicator(cls, cube: Cube, coeff: complex = 1.0, modulation: QVector | None = None) -> "ModulatedStep":
        if modulation is None:
            modulation = QVector.zero(cube.q, cube.k)
        return cls(cube.q, cube.k, [(complex(coeff), modulation, cube)])

    @staticmethod
    def _canonicalize(q, k, raw):
        terms = [(complex(c), b, cube) for c, b, cube in raw if c != 0]
        if not terms:
            return [], 0
        for _, b, cube in terms:
            if b.k != k or cube.k != k or cube.q != q or b.q != q:
                raise ValueError("term dimensions do not match the function")
        scale = max(cube.scale_exp for _, _, cube in terms)
        merged: dict[tuple, list] = {}
        for c, b, cube in terms:
            pieces = [cube] if cube.scale_exp == scale else cube.subdivide(scale)
            rep = b.rep_mod(-scale)
            drift = b - rep
            for piece in pieces:
                coeff = c * _phase(drift, piece.corner)
                key = (piece.key(), rep.key())
                slot = merged.get(key)
                if slot is None:
                    merged[key] = [coeff, rep, piece]
                else:
                    slot[0] += coeff
        out = [(c, b, cube) for c, b, cube in merged.values()]
        max_abs = max((abs(c) for c, _, _ in out), default=0.0)
        tol = max_abs * PRUNE_REL_TOL
        out = [(c, b, cube) for c, b, cube in out if abs(c) > tol]
        if not out:
            return [], 0
        out, scale = ModulatedStep._compact(q, k, out, scale)
        out.sort(key=lambda t: (t[2].key(), t[1].key()))
        return out, scale

    @staticmethod
    def _compact(q, k, terms, scale):
        """Merge complete sibling families with equal coefficients upward.

        Applied only when every term participates, so the common-scale
        invariant survives.
        """
        family = q**k
        while len(terms) % family == 0 and terms:
            groups: dict[tuple, list] = {}
            for c, b, cube in terms:
                parent = Cube(cube.corner.rep_mod(scale - 1), scale - 1)
                groups.setdefault((parent.key(), b.key()), []).append((c, b, cube, parent))
            mergeable = []
            ok = True
            for members in groups.values():
                if len(members) != family:
                    ok = False
                    break
                c0 = members[0][0]
                if any(abs(c - c0) > PRUNE_REL_TOL * max(1.0, abs(c0)) for c, _, _, _ in members):
                    ok = False
                    break
                mergeable.append((c0, members[0][1], members[0][3]))
            if not ok:
                break
            terms = mergeable
            scale -= 1
        return terms, scale

    # -- bookkeeping ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def support_cubes(self) -> list[Cube]:
        return sorted(self._by_cube.keys(), key=Cube.key)

    def support_volume(self) -> Fraction:
        return sum((c.volume for c in self._by_cube), Fraction(0))

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c, _, _ in self.terms), default=0.0)

    def _terms_at_scale(self, scale_exp: int):
        """Raw term list with every cube subdivided to the given finer scale.

        Modulations are left untouched, so they are canonical only for the
        original scale; consumers must not assume otherwise.
        """
        out = []
        for c, b, cube in self.terms:
            if cube.scale_exp == scale_exp:
                out.append((c, b, cube))
            else:
                out.extend((c, b, piece) for piece in cube.subdivide(scale_exp))
        return out

    # -- linear structure -----------------------------------------------------

    def __add__(self, other: "ModulatedStep") -> "ModulatedStep":
        if not isinstance(other, ModulatedStep):
            return NotImplemented
        if self.q != other.q or self.k != other.k:
            raise ValueError("cannot add functions over different groups")
        return ModulatedStep(self.q, self.k, list(self.terms) + list(other.terms))

    def __sub__(self, other: "ModulatedStep") -> "ModulatedStep":
        return self + other.scaled(-1)

    def scaled(self, factor: complex) -> "ModulatedStep":
        return ModulatedStep(self.q, self.k, [(c * factor, b, cube) for c, b, cube in self.terms])

    def conj(self) -> "ModulatedStep":
        return ModulatedStep(self.q, self.k, [(c.conjugate(), -b, cube) for c, b, cube in self.terms])

    def __mul__(self, other: "ModulatedStep") -> "ModulatedStep":
        """Pointwise product; supports intersect cube by cube."""
        if not isinstance(other, ModulatedStep):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return ModulatedStep.zero(self.q, self.k)
        scale = max(self.scale_exp, other.scale_exp)
        by_cube: dict[Cube, list[tuple[complex, QVector]]] = {}
        for c, b, cube in self._terms_at_scale(scale):
            by_cube.setdefault(cube, []).append((c, b))
        out = []
        for c2, b2, cube in other._terms_at_scale(scale):
            for c1, b1 in by_cube.get(cube, ()):
                out.append((c1 * c2, b1 + b2, cube))
        return ModulatedStep(self.q, self.k, out)

    def modulus_sq(self) -> "ModulatedStep":
        return self * self.conj()

    # -- integral calculus ----------------------------------------------------

    def integrate(self) -> complex:
        """Haar integral; a canonical modulation integrates to zero unless it vanishes."""
        vol = float(Fraction(self.q) ** (-self.scale_exp * self.k))
        parts = [c * vol for c, b, _ in self.terms if all(bi.is_zero for bi in b)]
        return complex(fsum(p.real for p in parts), fsum(p.imag for p in parts))

    def fourier(self) -> "ModulatedStep":
        """Exact transform: a modulated cube maps to a modulated dual cube."""
        out = []
        volume = float(Fraction(self.q) ** (-self.scale_exp * self.k))
        for c, b, cube in self.terms:
            corner = cube.corner
            coeff = c * volume * _phase(b, corner)
            out.append((coeff, -corner, Cube(b, -self.scale_exp)))
        return ModulatedStep(self.q, self.k, out)

    def inverse_fourier(self) -> "ModulatedStep":
        out = []
        volume = float(Fraction(self.q) ** (-self.scale_exp * self.k))
        for c, b, cube in self.terms:
            corner = cube.corner
            coeff = c * volume * _phase(b, corner)
            out.append((coeff, corner, Cube((-b).rep_mod(-self.scale_exp), -self.scale_exp)))
        return ModulatedStep(self.q, self.k, out)

    def convolve(self, other: "ModulatedStep") -> "ModulatedStep":
        """Haar convolution; only terms with matching modulations interact."""
        if not isinstance(other, ModulatedStep):
            raise TypeError("convolve expects a ModulatedStep")
        if self.is_zero or other.is_zero:
            return ModulatedStep.zero(self.q, self.k)
        scale = max(self.scale_exp, other.scale_exp)
        vol = float(Fraction(self.q) ** (-scale * self.k))
        fterms = self._terms_at_scale(scale)
        gterms = other._terms_at_scale(scale)
        out = []
        for c1, b1, cube1 in fterms:
            for c2, b2, cube2 in gterms:
                d = b1 - b2
                # the inner character integrates to zero unless the
                # modulations agree at the cube's dual threshold
                if any(not (di.is_zero or di.valuation >= -scale) for di in d):
                    continue
                corner = (cube1.corner + cube2.corner).rep_mod(scale)
                out.append((c1 * c2 * vol * _phase(d, cube1.corner), b2, Cube(corner, scale)))
        return ModulatedStep(self.q, self.k, out)

    # -- frequency restriction --------------------------------------------------

    def restrict_freq(self, I: Interval) -> "ModulatedStep":
        """The piece whose transform lives over the interval I in coordinate 1."""
        hat = self.fourier()
        kept = hat._filter_axis0(I)
        return kept.inverse_fourier()

    def _filter_axis0(self, I: Interval) -> "ModulatedStep":
        if self.is_zero:
            return self
        terms = self._terms_at_scale(max(self.scale_exp, I.scale_exp))
        out = [(c, b, cube) for c, b, cube in terms if I.contains(cube.corner[0])]
        return ModulatedStep(self.q, self.k, out)

    def freq_components(self, partition) -> dict[Interval, "ModulatedStep"]:
        """All restrictions over a partition at once (one transform, shared)."""
        hat = self.fourier()
        buckets: dict[Interval, list] = {i: [] for i in partition}
        if not hat.is_zero:
            scale = partition[0].scale_exp
            if any(i.scale_exp != scale for i in partition):
                raise MomentLabError("freq_components needs a uniform-scale partition")
            lookup = {i.corner: i for i in partition}
            for c, b, cube in hat._terms_at_scale(max(hat.scale_exp, scale)):
                key = cube.corner[0].rep_mod(scale)
                interval = lookup.get(key)
                if interval is not None:
                    buckets[interval].append((c, b, cube))
        return {
            i: ModulatedStep(self.q, self.k, terms).inverse_fourier()
            for i, terms in buckets.items()
        }

    def freq_support_cubes(self) -> list[Cube]:
        return self.fourier().support_cubes()

    # -- evaluation and norms ----------------------------------------------------

    def evaluate(self, x: QVector) -> complex:
        if self.is_zero:
            return 0j
        cube = Cube.containing(x, self.scale_exp)
        parts = self._by_cube.get(cube)
        if not parts:
            return 0j
        return sum((c * _phase(b, x) for c, b in parts), 0j)

    def cell_scale(self) -> int:
        """Scale at which |f| (indeed f itself) is constant on cells."""
        r = self.scale_exp
        for _, b, _ in self.terms:
            for bi in b:
                if not bi.is_zero:
                    r = max(r, -bi.valuation)
        return r

    def cell_values(self, cell_exp: int | None = None, budget: int = DEFAULT_CELL_BUDGET):
        """Yield (corner, volume, value) over constancy cells of the support."""
        if self.is_zero:
            return
        r = self.cell_scale() if cell_exp is None else max(cell_exp, self.cell_scale())
        per_cube = self.q ** ((r - self.scale_exp) * self.k)
        total = per_cube * len(self._by_cube)
        if total > budget:
            raise BudgetExceededError(
                f"{total} constancy cells exceed the budget", estimated=total, budget=budget
            )
        vol = Fraction(self.q) ** (-r * self.k)
        for cube, parts in self._by_cube.items():
            for cell in cube.subdivide(r):
                x = cell.corner
                value = sum((c * _phase(b, x) for c, b in parts), 0j)
                yield x, vol, value

    def _modulus_cells(self, budget: int = DEFAULT_CELL_BUDGET):
        """Yield (volume, |value|) over cells on which |f| is constant.

        Within one cube only modulation *differences* oscillate (a common
        phase has unit modulus), so the refinement is per cube and usually
        far coarser than the full constancy grid.
        """
        q, k = self.q, self.k
        spent = 0
        for cube, parts in self._by_cube.items():
            c0, b0 = parts[0]
            if len(parts) == 1:
                yield cube.volume, abs(c0)
                continue
            r = cube.scale_exp
            rel = [(c, b - b0) for c, b in parts]
            for _, d in rel:
                for di in d:
                    if not di.is_zero:
                        r = max(r, -di.valuation)
            spent += q ** ((r - cube.scale_exp) * k)
            if spent > budget:
                raise BudgetExceededError(
                    "modulus cells exceed the budget", estimated=spent, budget=budget
                )
            vol = Fraction(q) ** (-r * k)
            for cell in cube.subdivide(r):
                x = cell.corner
                yield vol, abs(sum((c * _phase(d, x) for c, d in rel), 0j))

    def lp_norm(self, p, budget: int = DEFAULT_CELL_BUDGET) -> float:
        """L^p norm, p in [1, inf].  Integrals are exact sums over cells."""
        if self.is_zero:
            return 0.0
        if p == inf:
            return max(v for _, v in self._modulus_cells(budget=budget))
        if p < 1:
            raise ValueError(f"p must be at least 1, got {p}")
        p = float(p)
        total = fsum(float(vol) * v**p for vol, v in self._modulus_cells(budget=budget))
        return total ** (1.0 / p)

    def linf_norm(self, budget: int = DEFAULT_CELL_BUDGET) -> float:
        return self.lp_norm(inf, budget=budget)

    # -- comparison ----------------------------------------------------------------

    def is_identical(self, other: "ModulatedStep") -> bool:
        """Same canonical support, modulations, and bitwise-equal coefficients."""
        if self.scale_exp != other.scale_exp or len(self.terms) != len(other.terms):
            return False
        return all(
            c1 == c2 and b1 == b2 and q1 == q2
            for (c1, b1, q1), (c2, b2, q2) in zip(self.terms, other.terms)
        )

    def close_to(self, other: "ModulatedStep", tol: float = 1e-9) -> bool:
        diff = self - other
        scale = max(self.max_abs_coeff(), other.max_abs_coeff(), 1.0)
        return diff.max_abs_coeff() <= tol * scale

    def __repr__(self) -> str:
        if self.is_zero:
            return f"ModulatedStep(0 on Q_{self.q}^{self.k})"
        return (
            f"ModulatedStep({len(self.terms)} terms at side {self.q}^-{self.scale_exp} "
            f"on Q_{self.q}^{self.k})"
        )

    # -- serialization ----------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "k": self.k,
            "terms": [
                {
                    "re": c.real,
                    "im": c.imag,
                    "modulation": [bi.to_text() for bi in b],
                    "cube": cube.to_json(),
                }
                for c, b, cube in self.terms
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ModulatedStep":
        q, k = int(obj["q"]), int(obj["k"])
        terms = []
        for t in obj["terms"]:
            coeff = complex(float(t["re"]), float(t.get("im", 0.0)))
            modulation = QVector([QRational.from_text(q, s) for s in t["modulation"]])
            cube = Cube.from_json(q, t["cube"])
            terms.append((coeff, modulation, cube))
        if not terms:
            return cls.zero(q, k)
        return cls(q, k, terms)


def joint_cell_values(fns, budget: int = DEFAULT_CELL_BUDGET):
    """Evaluate several functions on the common refinement of their cells.

    Returns (corners, volume, matrix) where matrix[i][j] is the value of
    fns[i] at corner j.  The cell grid covers the union of supports.
    """
    fns = list(fns)
    if not fns:
        raise MomentLabError("need at least one function")
    q, k = fns[0].q, fns[0].k
    live = [f for f in fns if not f.is_zero]
    if not live:
        return [], Fraction(0), [[] for _ in fns]
    r = max(f.cell_scale() for f in live)
    cubes: set[Cube] = set()
    for f in live:
        for cube in f.support_cubes():
            cubes.update(cube.subdivide(max(r, cube.scale_exp)) if cube.scale_exp < r else [cube])
    corners = sorted((c.corner for c in cubes), key=QVector.key)
    if len(corners) * len(fns) > budget:
        raise BudgetExceededError(
            f"{len(corners)} joint cells exceed the budget",
            estimated=len(corners) * len(fns),
            budget=budget,
        )
    vol = Fraction(q) ** (-r * k)
    matrix = [[f.evaluate(x) for x in corners] for f in fns]
    return corners, vol, matrix
