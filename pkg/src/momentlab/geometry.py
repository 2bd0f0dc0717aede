"""Intervals, cubes, moment-curve geometry, and the dual tilings.

Regions are cosets of digit subgroups, so "disjoint or identical" is
decidable by comparing canonical corners: an interval is corner + q^m Z_q
with the corner's digits all below position m.  The anisotropic boxes
along the moment curve and their dual tiles are represented by an anchor
plus exact membership predicates; their cube decompositions are
materialized only on demand.
"""

from __future__ import annotations

from fractions import Fraction
from math import perm

from .errors import MomentLabError
from .qadic import QRational, QVector, qnorm_of_fraction

__all__ = [
    "Interval",
    "Cube",
    "MaMatrix",
    "ThetaBox",
    "Tile",
    "gamma",
    "unit_interval",
    "ball",
    "theta_of",
    "tau_of",
    "theta_diff_decompose",
    "tile_partition",
    "tile_of_point",
    "interval_distance",
]


class Interval:
    """corner + q^scale_exp * Z_q, an interval of length q^(-scale_exp)."""

    __slots__ = ("q", "corner", "scale_exp")

    def __init__(self, corner: QRational, scale_exp: int):
        canon = corner.rep_mod(scale_exp)
        if canon != corner:
            raise ValueError(f"corner {corner} not canonical at scale {scale_exp}")
        object.__setattr__(self, "q", corner.q)
        object.__setattr__(self, "corner", corner)
        object.__setattr__(self, "scale_exp", scale_exp)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    @classmethod
    def containing(cls, x: QRational, scale_exp: int) -> "Interval":
        """The unique interval of length q^-scale_exp containing x."""
        return cls(x.rep_mod(scale_exp), scale_exp)

    @property
    def length(self) -> Fraction:
        m = self.scale_exp
        return Fraction(1, self.q**m) if m >= 0 else Fraction(self.q ** (-m))

    def contains(self, x: QRational) -> bool:
        d = x - self.corner
        return d.is_zero or d.valuation >= self.scale_exp

    def contains_interval(self, other: "Interval") -> bool:
        return other.scale_exp >= self.scale_exp and self.contains(other.corner)

    def partition(self, scale_exp: int) -> list["Interval"]:
        """Split into intervals of length q^-scale_exp, in digit order."""
        if scale_exp < self.scale_exp:
            raise ValueError(
                f"cannot partition length {self.length} interval at coarser scale {scale_exp}"
            )
        q = self.q
        step = QRational(q, 1, self.scale_exp)
        out = []
        for t in range(q ** (scale_exp - self.scale_exp)):
            corner = self.corner + step * QRational(q, t)
            out.append(Interval(corner.rep_mod(scale_exp), scale_exp))
        return out

    def parent(self, scale_exp: int) -> "Interval":
        if scale_exp > self.scale_exp:
            raise ValueError("parent must be coarser")
        return Interval(self.corner.rep_mod(scale_exp), scale_exp)

    def sample_points(self, scale_exp: int) -> list[QRational]:
        """Representatives of the sub-intervals at the given finer scale."""
        return [i.corner for i in self.partition(scale_exp)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self.corner == other.corner and self.scale_exp == other.scale_exp

    def __hash__(self):
        return hash((self.corner, self.scale_exp))

    def key(self):
        return (self.scale_exp, self.corner.key())

    def __repr__(self) -> str:
        return f"I({self.corner.to_text()}; len {self.q}^-{self.scale_exp})"

    def to_json(self) -> dict:
        return {"corner": self.corner.to_text(), "scale_exp": self.scale_exp}

    @classmethod
    def from_json(cls, q: int, obj: dict) -> "Interval":
        return cls(QRational.from_text(q, obj["corner"]), int(obj["scale_exp"]))


def unit_interval(q: int) -> Interval:
    """The ring of integers Z_q as an interval."""
    return Interval(QRational(q, 0), 0)


def interval_distance(a: Interval, b: Interval) -> Fraction:
    """Distance between two intervals of a common length.

    For distinct same-length intervals every cross pair of points is at
    the same distance |corner_a - corner_b|, which is at least q times
    the common length.
    """
    return (a.corner - b.corner).qnorm()


class Cube:
    """corner + q^scale_exp * Z_q^k, a cube of side q^(-scale_exp)."""

    __slots__ = ("q", "corner", "scale_exp")

    def __init__(self, corner: QVector, scale_exp: int):
        canon = corner.rep_mod(scale_exp)
        if canon != corner:
            raise ValueError(f"corner {corner} not canonical at scale {scale_exp}")
        object.__setattr__(self, "q", corner.q)
        object.__setattr__(self, "corner", corner)
        object.__setattr__(self, "scale_exp", scale_exp)

    def __setattr__(self, name, value):
        raise AttributeError("Cube is immutable")

    @classmethod
    def containing(cls, x: QVector, scale_exp: int) -> "Cube":
        return cls(x.rep_mod(scale_exp), scale_exp)

    @classmethod
    def from_intervals(cls, intervals) -> "Cube":
        intervals = list(intervals)
        m = intervals[0].scale_exp
        if any(i.scale_exp != m for i in intervals):
            raise ValueError("cube needs intervals of a common length")
        return cls(QVector([i.corner for i in intervals]), m)

    @property
    def k(self) -> int:
        return self.corner.k

    @property
    def side(self) -> Fraction:
        m = self.scale_exp
        return Fraction(1, self.q**m) if m >= 0 else Fraction(self.q ** (-m))

    @property
    def volume(self) -> Fraction:
        return self.side**self.k

    def axis_interval(self, i: int) -> Interval:
        return Interval(self.corner[i], self.scale_exp)

    def contains(self, x: QVector) -> bool:
        for xi, ci in zip(x, self.corner, strict=True):
            d = xi - ci
            if not (d.is_zero or d.valuation >= self.scale_exp):
                return False
        return True

    def contains_cube(self, other: "Cube") -> bool:
        return other.scale_exp >= self.scale_exp and self.contains(other.corner)

    def subdivide(self, scale_exp: int) -> list["Cube"]:
        """All subcubes of side q^-scale_exp, in lexicographic digit order."""
        if scale_exp < self.scale_exp:
            raise ValueError("cannot subdivide at a coarser scale")
        axes = [self.axis_interval(i).partition(scale_exp) for i in range(self.k)]
        out = []
        idx = [0] * self.k
        n = len(axes[0])
        total = n**self.k
        for flat in range(total):
            t = flat
            for i in range(self.k - 1, -1, -1):
                idx[i] = t % n
                t //= n
            out.append(Cube(QVector([axes[i][idx[i]].corner for i in range(self.k)]), scale_exp))
        return out

    def translate(self, v: QVector) -> "Cube":
        return Cube((self.corner + v).rep_mod(self.scale_exp), self.scale_exp)

    def minkowski_add(self, other: "Cube") -> "Cube":
        """Sum set; a cube again, at the coarser of the two scales."""
        m = min(self.scale_exp, other.scale_exp)
        return Cube((self.corner + other.corner).rep_mod(m), m)

    def minkowski_neg(self) -> "Cube":
        return Cube((-self.corner).rep_mod(self.scale_exp), self.scale_exp)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cube):
            return NotImplemented
        return self.corner == other.corner and self.scale_exp == other.scale_exp

    def __hash__(self):
        return hash((self.corner, self.scale_exp))

    def key(self):
        return (self.scale_exp, self.corner.key())

    def __repr__(self) -> str:
        return f"Cube({self.corner!r}; side {self.q}^-{self.scale_exp})"

    def to_json(self) -> dict:
        return {
            "corner": [c.to_text() for c in self.corner],
            "scale_exp": self.scale_exp,
        }

    @classmethod
    def from_json(cls, q: int, obj: dict) -> "Cube":
        return cls(
            QVector([QRational.from_text(q, t) for t in obj["corner"]]),
            int(obj["scale_exp"]),
        )


def ball(q: int, k: int, radius_exp: int) -> Cube:
    """The cube {|x| <= q^radius_exp} centered at 0."""
    return Cube(QVector.zero(q, k), -radius_exp)


def gamma(a: QRational, k: int) -> QVector:
    """Moment curve point (a, a^2, ..., a^k); requires |a| <= 1."""
    if a.qnorm() > 1:
        raise ValueError(f"moment curve parameter must satisfy |a| <= 1, got |{a}| = {a.qnorm()}")
    return QVector([a**j for j in range(1, k + 1)])


def gamma_derivative(a: QRational, j: int, k: int) -> QVector:
    """j-th derivative of the moment curve at a (column j of the frame matrix)."""
    coords = []
    for i in range(1, k + 1):
        if i >= j:
            coords.append(QRational(a.q, perm(i, j)) * a ** (i - j))
        else:
            coords.append(QRational(a.q, 0))
    return QVector(coords)


class MaMatrix:
    """The lower-triangular frame matrix with columns the curve derivatives.

    With |a| <= 1 and q > k the matrix has entries in Z_q and determinant
    of norm 1 (the diagonal is 1!, 2!, ..., k!), so it maps cubes of any
    side bijectively onto cubes of the same side.
    """

    __slots__ = ("q", "k", "a", "entries")

    def __init__(self, a: QRational, k: int):
        if a.qnorm() > 1:
            raise ValueError("anchor must satisfy |a| <= 1")
        q = a.q
        if q <= k:
            raise ValueError(f"need q > k for a unimodular frame, got q={q}, k={k}")
        cols = [gamma_derivative(a, j, k) for j in range(1, k + 1)]
        entries = tuple(tuple(cols[j][i] for j in range(k)) for i in range(k))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("MaMatrix is immutable")

    def det(self) -> QRational:
        d = QRational(self.q, 1)
        for i in range(self.k):
            d = d * self.entries[i][i]
        return d

    def apply(self, v: QVector) -> QVector:
        out = []
        for i in range(self.k):
            acc = QRational(self.q, 0)
            for j in range(i + 1):
                acc = acc + self.entries[i][j] * v[j]
            out.append(acc)
        return QVector(out)

    def transpose_apply(self, v: QVector) -> QVector:
        out = []
        for i in range(self.k):
            acc = QRational(self.q, 0)
            for j in range(i, self.k):
                acc = acc + self.entries[j][i] * v[j]
            out.append(acc)
        return QVector(out)

    def solve(self, v: QVector) -> list[Fraction]:
        """Exact rational solution t of M t = v (forward substitution).

        The solution lives in Q (divisions by j! leave Z[1/q]), which is
        fine: only its q-adic norms are consumed by membership tests.
        """
        rhs = [c.to_fraction() for c in v]
        t: list[Fraction] = []
        for i in range(self.k):
            acc = rhs[i]
            for j in range(i):
                acc -= self.entries[i][j].to_fraction() * t[j]
            t.append(acc / self.entries[i][i].to_fraction())
        return t

    def solve_transpose(self, v: QVector) -> list[Fraction]:
        """Exact rational solution t of M^T t = v (back substitution)."""
        rhs = [c.to_fraction() for c in v]
        t: list[Fraction | None] = [None] * self.k
        for i in range(self.k - 1, -1, -1):
            acc = rhs[i]
            for j in range(i + 1, self.k):
                acc -= self.entries[j][i].to_fraction() * t[j]
            t[i] = acc / self.entries[i][i].to_fraction()
        return t  # type: ignore[return-value]

    def adjugate(self) -> tuple[tuple[QRational, ...], ...]:
        """det(M) * M^(-1), entries in Z[1/q].

        Lets membership tests scale solutions by the unit-norm determinant
        instead of dividing: the q-adic size of M^(-1) v is that of adj(M) v.
        """
        n = self.k
        A = [[self.entries[i][j].to_fraction() for j in range(n)] for i in range(n)]
        det = Fraction(1)
        for i in range(n):
            det *= A[i][i]
        inv = [[Fraction(0)] * n for _ in range(n)]
        for col in range(n):
            x = [Fraction(0)] * n
            for i in range(n):
                s = Fraction(1) if i == col else Fraction(0)
                for j in range(i):
                    s -= A[i][j] * x[j]
                x[i] = s / A[i][i]
            for i in range(n):
                inv[i][col] = x[i]
        q = self.q
        return tuple(
            tuple(QRational.from_fraction(q, inv[i][j] * det) for j in range(n)) for i in range(n)
        )


class ThetaBox:
    """The anisotropic box of dimensions d, d^2, ..., d^k along the curve.

    Anchored at a point of the base interval; membership is independent of
    which anchor is used.  As a set it is gamma(anchor) + M_a(theta group),
    where the group is the product of the balls of radii d^j.
    """

    __slots__ = ("q", "k", "anchor", "scale_exp", "_matrix", "_gamma", "_adj")

    def __init__(self, anchor: QRational, scale_exp: int, k: int):
        matrix = MaMatrix(anchor, k)
        object.__setattr__(self, "q", anchor.q)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "scale_exp", scale_exp)
        object.__setattr__(self, "_matrix", matrix)
        object.__setattr__(self, "_gamma", gamma(anchor, k))
        object.__setattr__(self, "_adj", matrix.adjugate())

    def __setattr__(self, name, value):
        raise AttributeError("ThetaBox is immutable")

    @property
    def matrix(self) -> MaMatrix:
        return self._matrix

    def _group_member(self, w: QVector) -> bool:
        # scaled solve: |t_j| = |(adj w)_j| because the determinant is a unit
        m, k = self.scale_exp, self.k
        for j in range(k):
            acc = None
            row = self._adj[j]
            for i in range(j + 1):
                term = row[i] * w[i]
                acc = term if acc is None else acc + term
            if not (acc.is_zero or acc.valuation >= m * (j + 1)):
                return False
        return True

    def contains(self, xi: QVector) -> bool:
        return self._group_member(xi - self._gamma)

    def contains_cube(self, cube: Cube) -> bool:
        """Exact: a cube lies inside iff its corner does and its side is <= d^k."""
        return cube.scale_exp >= self.scale_exp * self.k and self.contains(cube.corner)

    def difference_contains(self, xi: QVector) -> bool:
        """Membership in the centered group box (the set minus itself)."""
        return self._group_member(xi)


def theta_of(K: Interval, k: int) -> ThetaBox:
    """The curve box over a base interval inside the unit interval."""
    if K.scale_exp < 0:
        raise ValueError("base interval must lie inside the unit interval")
    return ThetaBox(K.corner, K.scale_exp, k)


def tau_of(K: Interval, k: int) -> Cube:
    """The enclosing cube of side |K| around the curve point of K."""
    g = gamma(K.corner, k)
    return Cube(g.rep_mod(K.scale_exp), K.scale_exp)


def theta_diff_decompose(K: Interval, k: int) -> list[Cube]:
    """The centered box theta_K - theta_K as disjoint cubes of side d^k.

    Exactly d^(-k(k-1)/2) cubes: the group box (product of balls of radii
    d^j) splits coordinatewise, and the unimodular frame matrix maps each
    piece to a cube of the same side.
    """
    q, m = K.q, K.scale_exp
    mat = MaMatrix(K.corner, k)
    axis_choices = []
    for j in range(1, k + 1):
        base = Interval(QRational(q, 0), m * j)
        axis_choices.append([c for c in base.partition(m * k)])
    cubes = []
    idx = [0] * k
    sizes = [len(ax) for ax in axis_choices]
    total = 1
    for s in sizes:
        total *= s
    for flat in range(total):
        t = flat
        for i in range(k - 1, -1, -1):
            idx[i] = t % sizes[i]
            t //= sizes[i]
        corner = QVector([axis_choices[i][idx[i]].corner for i in range(k)])
        cubes.append(Cube(mat.apply(corner).rep_mod(m * k), m * k))
    return cubes


class Tile:
    """A translate of the dual box of theta_K; the spatial wavepacket atom.

    Stored through its dual-side corner w: the tile is
    {x : M_a^T x  in  w + T-group}, where the T-group is the product of the
    balls of radii d^-j.  The canonical w (digits below position -m*j in
    coordinate j) identifies the coset, so tiles compare by (K, w).
    """

    __slots__ = ("q", "k", "base_interval", "dual_corner", "_matrix")

    def __init__(self, base_interval: Interval, dual_corner: QVector, matrix: MaMatrix | None = None):
        k = dual_corner.k
        m = base_interval.scale_exp
        canon = QVector(
            [dual_corner[j].rep_mod(-m * (j + 1)) for j in range(k)]
        )
        if canon != dual_corner:
            raise ValueError("dual corner not canonical for this base interval")
        if matrix is None:
            matrix = MaMatrix(base_interval.corner, k)
        object.__setattr__(self, "q", base_interval.q)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "base_interval", base_interval)
        object.__setattr__(self, "dual_corner", dual_corner)
        object.__setattr__(self, "_matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("Tile is immutable")

    @property
    def volume(self) -> Fraction:
        m = self.base_interval.scale_exp
        return Fraction(self.q) ** (m * self.k * (self.k + 1) // 2)

    def contains(self, x: QVector) -> bool:
        m = self.base_interval.scale_exp
        y = self._matrix.transpose_apply(x)
        for j in range(self.k):
            d = y[j] - self.dual_corner[j]
            if not (d.is_zero or d.valuation >= -m * (j + 1)):
                return False
        return True

    def contains_cube(self, cube: Cube) -> bool:
        """A cube of side at most d^-1 lies in a single tile."""
        return cube.scale_exp >= -self.base_interval.scale_exp and self.contains(cube.corner)

    def offset_point(self) -> QVector:
        """A point of the tile with coordinates in Z[1/q].

        Solves M^T x = w modulo the dual group by back substitution,
        inverting the factorial diagonal q-adically to enough precision.
        """
        q, k, m = self.q, self.k, self.base_interval.scale_exp
        x: list[QRational] = [QRational(q, 0)] * k
        for j in range(k - 1, -1, -1):
            r = self.dual_corner[j]
            for i in range(j + 1, k):
                r = r - self._matrix.entries[i][j] * x[i]
            if r.is_zero or r.valuation >= -m * (j + 1):
                x[j] = QRational(q, 0)
                continue
            e = -m * (j + 1) - r.valuation
            diag = self._matrix.entries[j][j].unit
            inv = pow(diag, -1, q**e)
            x[j] = QRational(q, (r.unit * inv) % q**e, r.valuation)
        return QVector(x)

    def sample_points(self, count: int = 8) -> list[QVector]:
        """A few lattice points of the tile: the offset plus small shifts.

        Shifts run over the cubic lattice of step q^-m inside the ball of
        radius q^m, which the tile's group contains.
        """
        q, k, m = self.q, self.k, self.base_interval.scale_exp
        base = self.offset_point()
        span = q ** (2 * m) if m > 0 else q
        out = []
        for t in range(count):
            digits = []
            tt = t
            for _ in range(k):
                digits.append(tt % span)
                tt //= span
            shift = QVector([QRational(q, d, -m) for d in digits])
            out.append(base + shift)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tile):
            return NotImplemented
        return self.base_interval == other.base_interval and self.dual_corner == other.dual_corner

    def __hash__(self):
        return hash((self.base_interval, self.dual_corner))

    def key(self):
        return (self.base_interval.key(), self.dual_corner.key())

    def __repr__(self) -> str:
        return f"Tile(K={self.base_interval!r}, w={self.dual_corner!r})"

    def to_json(self) -> dict:
        return {
            "base_interval": self.base_interval.to_json(),
            "dual_corner": [c.to_text() for c in self.dual_corner],
        }


def tile_of_point(x: QVector, K: Interval, matrix: MaMatrix | None = None) -> Tile:
    """The unique tile over K containing x."""
    k = x.k
    if matrix is None:
        matrix = MaMatrix(K.corner, k)
    m = K.scale_exp
    y = matrix.transpose_apply(x)
    w = QVector([y[j].rep_mod(-m * (j + 1)) for j in range(k)])
    return Tile(K, w, matrix)


def tile_partition(Q: Cube, K: Interval) -> list[Tile]:
    """Partition a cube of side d^-k into tiles over K.

    Exactly d^(-k(k-1)/2) tiles; enumerated through dual-side coset
    representatives, so the construction is exact and deterministic.
    """
    q, k, m = Q.q, Q.k, K.scale_exp
    if Q.scale_exp != -m * k:
        raise MomentLabError(
            f"tile partition needs a cube of side q^{m * k}, got side exponent {-Q.scale_exp}"
        )
    matrix = MaMatrix(K.corner, k)
    base = matrix.transpose_apply(Q.corner)
    axis_reps = []
    for j in range(1, k + 1):
        reps = []
        for t in range(q ** (m * (k - j))):
            shift = QRational(q, t, -m * k)
            reps.append((base[j - 1] + shift).rep_mod(-m * j))
        axis_reps.append(sorted(set(reps), key=QRational.key))
    tiles = []
    sizes = [len(ax) for ax in axis_reps]
    idx = [0] * k
    total = 1
    for s in sizes:
        total *= s
    for flat in range(total):
        t = flat
        for i in range(k - 1, -1, -1):
            idx[i] = t % sizes[i]
            t //= sizes[i]
        w = QVector([axis_reps[i][idx[i]] for i in range(k)])
        tiles.append(Tile(K, w, matrix))
    return tiles
