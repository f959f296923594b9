"""Root systems and finite Weyl groups with exact integer arithmetic.

Elements are canonically represented by the permutation they induce on the
full set of roots, so equality and hashing are O(1) on tuples and immune to
braid-relation ambiguity.  Products compose as functions: ``(a * b)`` acts on
a root ``x`` by ``a(b(x))``, and a word ``[i1, ..., ik]`` denotes the product
``s_{i1} * ... * s_{ik}`` (the rightmost letter acts first).

Supported types: A1-A4, B2-B4, C2-C4, D3-D4, G2.  Everything here is
desk-scale: the largest supported group is B4/C4 with 384 elements, and the
group-wide tables (multiplication, Bruhat order) are memoised per system.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, ResourceCapError, UsageError

SUPPORTED_RANKS = {
    "A": range(1, 5),
    "B": range(2, 5),
    "C": range(2, 5),
    "D": range(3, 5),
    "G2": range(2, 3),
}

DEFAULT_WEYL_CAP = 10_000


def _env_cap(default):
    raw = os.environ.get("ZIPSTRATA_CAP")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"ZIPSTRATA_CAP must be an integer, got {raw!r}")


def cartan_matrix(family: str, rank: int) -> tuple[tuple[int, ...], ...]:
    """Cartan matrix with rows indexed by coroots: M[i][j] = <alpha_j, alpha_i^v>.

    With this convention the simple reflection s_i acts on root-lattice
    coordinates c by c_i -> c_i - sum_j M[i][j] c_j.
    """
    if family not in SUPPORTED_RANKS:
        raise ConfigurationError(f"unsupported family {family!r}")
    if rank not in SUPPORTED_RANKS[family]:
        raise ConfigurationError(f"unsupported rank {rank} for family {family}")
    m = [[2 if i == j else 0 for j in range(rank)] for i in range(rank)]
    if family == "G2":
        m[0][1] = -3
        m[1][0] = -1
        return tuple(tuple(r) for r in m)
    for i in range(rank - 1):
        m[i][i + 1] = -1
        m[i + 1][i] = -1
    if family == "B" and rank >= 2:
        # alpha_rank short: <alpha_{r-1}, alpha_r^v> = -2
        m[rank - 1][rank - 2] = -2
    elif family == "C" and rank >= 2:
        # alpha_rank long
        m[rank - 2][rank - 1] = -2
    elif family == "D":
        m[rank - 2][rank - 1] = 0
        m[rank - 1][rank - 2] = 0
        m[rank - 3][rank - 1] = -1
        m[rank - 1][rank - 3] = -1
    return tuple(tuple(r) for r in m)


@dataclass(frozen=True)
class CartanDatum:
    """Type/rank plus an optional Dynkin-diagram automorphism.

    ``diagram_automorphism`` is a 1-based permutation of {1..rank}; entry i-1
    is the image of node i.  The identity models the split case.
    """

    family: str
    rank: int
    diagram_automorphism: tuple[int, ...] = ()

    def __post_init__(self):
        matrix = cartan_matrix(self.family, self.rank)
        sigma = self.diagram_automorphism
        if not sigma:
            object.__setattr__(self, "diagram_automorphism", tuple(range(1, self.rank + 1)))
            sigma = self.diagram_automorphism
        if sorted(sigma) != list(range(1, self.rank + 1)):
            raise ConfigurationError(
                f"diagram_automorphism {sigma} is not a permutation of 1..{self.rank}"
            )
        for i in range(self.rank):
            for j in range(self.rank):
                if matrix[sigma[i] - 1][sigma[j] - 1] != matrix[i][j]:
                    raise ConfigurationError(
                        f"diagram_automorphism {sigma} does not preserve the Cartan matrix"
                    )

    @property
    def cartan_matrix(self) -> tuple[tuple[int, ...], ...]:
        return cartan_matrix(self.family, self.rank)

    @property
    def is_split(self) -> bool:
        return self.diagram_automorphism == tuple(range(1, self.rank + 1))

    def label(self) -> str:
        return f"{self.family}{self.rank}" if self.family != "G2" else "G2"


EXPECTED_ROOT_COUNT = {
    "A": lambda r: r * (r + 1),
    "B": lambda r: 2 * r * r,
    "C": lambda r: 2 * r * r,
    "D": lambda r: 2 * r * (r - 1),
    "G2": lambda r: 12,
}


@dataclass(frozen=True, eq=False)
class WeylElement:
    """A Weyl group element in canonical form: its permutation of the roots."""

    system: "RootSystem"
    perm: tuple[int, ...]

    def __eq__(self, other):
        return (
            isinstance(other, WeylElement)
            and self.system is other.system
            and self.perm == other.perm
        )

    def __hash__(self):
        return hash(self.perm)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return multiply(self, other)

    def inverse(self) -> "WeylElement":
        inv = [0] * len(self.perm)
        for src, dst in enumerate(self.perm):
            inv[dst] = src
        return WeylElement(self.system, tuple(inv))

    @property
    def length(self) -> int:
        p = self.system.positive_root_count
        return sum(1 for k in range(p) if self.perm[k] >= p)

    def reduced_word(self) -> tuple[int, ...]:
        return reduced_word(self)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.perm))

    def word_str(self) -> str:
        word = self.reduced_word()
        return "".join(str(i) for i in word) if word else "e"

    def __repr__(self):
        return f"W[{self.system.datum.label()}:{self.word_str()}]"


class RootSystem:
    """Roots of a Cartan datum plus per-generator permutation actions.

    The constructor closes the simple roots under the simple reflections and
    orders the result positives-first (by height, then lexicographically),
    with negatives mirroring the positive order.  Group-wide tables (element
    list, multiplication, Bruhat order) are built on first use; the build is
    deterministic and idempotent, so concurrent builders can only ever write
    identical data.
    """

    def __init__(self, datum: CartanDatum):
        self.datum = datum
        m = datum.cartan_matrix
        rank = datum.rank
        simple = [tuple(1 if j == i else 0 for j in range(rank)) for i in range(rank)]

        def reflect(i, coords):
            c = list(coords)
            c[i] -= sum(m[i][j] * coords[j] for j in range(rank))
            return tuple(c)

        seen = set(simple)
        frontier = list(simple)
        while frontier:
            nxt = []
            for coords in frontier:
                for i in range(rank):
                    img = reflect(i, coords)
                    if img not in seen:
                        seen.add(img)
                        nxt.append(img)
            frontier = nxt
        positives = sorted(
            (c for c in seen if all(x >= 0 for x in c)),
            key=lambda c: (sum(c), c),
        )
        roots = positives + [tuple(-x for x in c) for c in positives]
        expected = EXPECTED_ROOT_COUNT[datum.family](rank)
        if len(roots) != expected:
            raise ConfigurationError(
                f"root closure for {datum.label()} produced {len(roots)} roots,"
                f" expected {expected}"
            )
        self.roots: tuple[tuple[int, ...], ...] = tuple(roots)
        self.positive_root_count: int = len(positives)
        index = {c: k for k, c in enumerate(roots)}
        self._root_index = index
        self.simple_reflection_action: tuple[tuple[int, ...], ...] = tuple(
            tuple(index[reflect(i, c)] for c in roots) for i in range(rank)
        )
        self._identity = WeylElement(self, tuple(range(len(roots))))
        self._simples = tuple(
            WeylElement(self, self.simple_reflection_action[i]) for i in range(rank)
        )
        # Index of the simple root alpha_i among the roots.
        self._simple_root_index = tuple(index[c] for c in simple)
        self._frob_root_perm = self._build_frobenius_root_perm()
        self._tables = None

    # -- basic accessors ---------------------------------------------------

    @property
    def rank(self) -> int:
        return self.datum.rank

    def identity(self) -> WeylElement:
        return self._identity

    def simple(self, i: int) -> WeylElement:
        """Simple reflection s_i, 1-based."""
        if not 1 <= i <= self.rank:
            raise UsageError(f"simple reflection index {i} out of range 1..{self.rank}")
        return self._simples[i - 1]

    def from_word(self, word) -> WeylElement:
        w = self._identity
        for i in word:
            w = multiply(w, self.simple(int(i)))
        return w

    def negative_of(self, k: int) -> int:
        p = self.positive_root_count
        return k + p if k < p else k - p

    def _build_frobenius_root_perm(self) -> tuple[int, ...]:
        sigma = self.datum.diagram_automorphism
        rank = self.rank
        perm = []
        for coords in self.roots:
            img = [0] * rank
            for i in range(rank):
                img[sigma[i] - 1] = coords[i]
            perm.append(self._root_index[tuple(img)])
        return tuple(perm)

    # -- descents ----------------------------------------------------------

    def has_left_descent(self, w: WeylElement, i: int) -> bool:
        """True iff l(s_i w) < l(w), i.e. w^-1(alpha_i) < 0."""
        target = self.negative_of(self._simple_root_index[i - 1])
        return w.perm.index(target) < self.positive_root_count

    def has_right_descent(self, w: WeylElement, i: int) -> bool:
        """True iff l(w s_i) < l(w), i.e. w(alpha_i) < 0."""
        return w.perm[self._simple_root_index[i - 1]] >= self.positive_root_count

    # -- memoised group tables ----------------------------------------------

    def tables(self) -> "GroupTables":
        if self._tables is None:
            self._tables = GroupTables(self)
        return self._tables

    def elements(self) -> tuple[WeylElement, ...]:
        return self.tables().elements

    def index_of(self, w: WeylElement) -> int:
        return self.tables().index[w.perm]

    def longest(self) -> WeylElement:
        return longest_element(self)


@dataclass
class GroupTables:
    """Element list sorted by (length, word) plus multiplication and Bruhat tables."""

    system: RootSystem
    elements: tuple[WeylElement, ...] = field(init=False)
    index: dict = field(init=False)
    lengths: np.ndarray = field(init=False)
    rmul: np.ndarray = field(init=False)  # rmul[i-1][x] = index of elements[x] * s_i
    lmul: np.ndarray = field(init=False)  # lmul[i-1][x] = index of s_i * elements[x]
    inv: np.ndarray = field(init=False)
    words: tuple[tuple[int, ...], ...] = field(init=False)
    mult: np.ndarray = field(init=False)  # mult[a][b] = index of elements[a]*elements[b]
    left_descent_mask: np.ndarray = field(init=False)

    def __post_init__(self):
        rs = self.system
        cap = _env_cap(DEFAULT_WEYL_CAP)
        raw = _bfs_elements(rs, cap)
        order = sorted(range(len(raw)), key=lambda k: (raw[k].length, raw[k].reduced_word()))
        self.elements = tuple(raw[k] for k in order)
        self.index = {w.perm: k for k, w in enumerate(self.elements)}
        n = len(self.elements)
        self.lengths = np.array([w.length for w in self.elements], dtype=np.int32)
        self.rmul = np.empty((rs.rank, n), dtype=np.int32)
        self.lmul = np.empty((rs.rank, n), dtype=np.int32)
        for i in range(rs.rank):
            s = rs._simples[i]
            for x, w in enumerate(self.elements):
                self.rmul[i, x] = self.index[multiply(w, s).perm]
                self.lmul[i, x] = self.index[multiply(s, w).perm]
        self.inv = np.array([self.index[w.inverse().perm] for w in self.elements], dtype=np.int32)
        self.words = tuple(w.reduced_word() for w in self.elements)
        self.mult = self._build_mult()
        masks = np.zeros(n, dtype=np.int64)
        for i in range(rs.rank):
            smaller = self.lengths[self.lmul[i]] < self.lengths
            masks |= smaller.astype(np.int64) << i
        self.left_descent_mask = masks
        self._bruhat = None

    def _build_mult(self) -> np.ndarray:
        n = len(self.elements)
        mult = np.empty((n, n), dtype=np.int32)
        col = np.arange(n, dtype=np.int32)
        # a*b follows b's reduced word by repeated right multiplication.
        for b, word in enumerate(self.words):
            acc = col
            for i in word:
                acc = self.rmul[i - 1][acc]
            mult[:, b] = acc
        return mult

    @property
    def bruhat(self) -> np.ndarray:
        """Boolean table: bruhat[u, w] iff u <= w in Bruhat order.

        Filled by the descent recursion: for s with l(ws) < l(w),
        u <= w iff min(u, us) <= ws.
        """
        if self._bruhat is None:
            n = len(self.elements)
            leq = np.zeros((n, n), dtype=bool)
            all_idx = np.arange(n, dtype=np.int32)
            for w in range(n):  # elements sorted by length, so ws precedes w
                if self.lengths[w] == 0:
                    leq[:, w] = self.lengths == 0
                    continue
                s = next(
                    i for i in range(self.system.rank)
                    if self.lengths[self.rmul[i, w]] < self.lengths[w]
                )
                ws = self.rmul[s, w]
                us = self.rmul[s]
                u_or_us = np.where(self.lengths[us] < self.lengths, us, all_idx)
                leq[:, w] = leq[u_or_us, ws]
            self._bruhat = leq
        return self._bruhat


def _bfs_elements(rs: RootSystem, cap: int) -> list[WeylElement]:
    seen = {rs._identity.perm: rs._identity}
    frontier = [rs._identity]
    while frontier:
        nxt = []
        for w in frontier:
            for s in rs._simples:
                u = multiply(w, s)
                if u.perm not in seen:
                    seen[u.perm] = u
                    nxt.append(u)
        if len(seen) > cap:
            raise ResourceCapError(
                f"|W| for {rs.datum.label()} exceeds the enumeration cap {cap}"
            )
        frontier = nxt
    return list(seen.values())


# -- spec-level operations ---------------------------------------------------


def build_root_system(datum: CartanDatum) -> RootSystem:
    return RootSystem(datum)


def multiply(a: WeylElement, b: WeylElement) -> WeylElement:
    """Composition (a*b)(x) = a(b(x))."""
    if a.system is not b.system:
        raise UsageError("cannot multiply elements of different root systems")
    bp = b.perm
    ap = a.perm
    return WeylElement(a.system, tuple(ap[bp[k]] for k in range(len(ap))))


def length(w: WeylElement) -> int:
    return w.length


def longest_element(rs: RootSystem) -> WeylElement:
    w = rs.identity()
    target = rs.positive_root_count
    while w.length < target:
        for i in range(1, rs.rank + 1):
            u = multiply(rs.simple(i), w)
            if u.length > w.length:
                w = u
                break
        else:  # pragma: no cover - impossible for finite systems
            raise UsageError("no ascent found before reaching the longest element")
    return w


def reduced_word(w: WeylElement) -> tuple[int, ...]:
    """Deterministic reduced word: repeatedly strip the smallest left descent."""
    rs = w.system
    word = []
    cur = w
    while cur.length > 0:
        for i in range(1, rs.rank + 1):
            if rs.has_left_descent(cur, i):
                word.append(i)
                cur = multiply(rs.simple(i), cur)
                break
    return tuple(word)


def bruhat_leq(u: WeylElement, w: WeylElement) -> bool:
    if u.system is not w.system:
        raise UsageError("cannot compare elements of different root systems")
    t = u.system.tables()
    return bool(t.bruhat[t.index[u.perm], t.index[w.perm]])


def apply_frobenius(datum: CartanDatum, w: WeylElement) -> WeylElement:
    """The Weyl-group automorphism induced by the diagram automorphism.

    Identity in the split case; always length-preserving.
    """
    rs = w.system
    if rs.datum != datum:
        raise UsageError("datum does not match the element's root system")
    if datum.is_split:
        return w
    sigma = rs._frob_root_perm
    inv_sigma = [0] * len(sigma)
    for src, dst in enumerate(sigma):
        inv_sigma[dst] = src
    return WeylElement(rs, tuple(sigma[w.perm[inv_sigma[k]]] for k in range(len(sigma))))


def enumerate_elements(rs: RootSystem, cap: int | None = None) -> tuple[WeylElement, ...]:
    """All elements of W, each exactly once, sorted by (length, reduced word)."""
    if cap is not None:
        _bfs_elements(rs, cap)  # raises ResourceCapError when over
    return rs.elements()


def reflections(rs: RootSystem) -> tuple[WeylElement, ...]:
    """All reflections of W (conjugates of simple reflections)."""
    out = {}
    for w in rs.elements():
        winv = w.inverse()
        for s in rs._simples:
            t = multiply(multiply(w, s), winv)
            out[t.perm] = t
    return tuple(out.values())
