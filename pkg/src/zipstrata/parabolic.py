"""Parabolic types I of Delta: W_I, minimal coset representatives, w0 identities.

``{}^I W`` denotes the minimal-length representatives of W_I \\ W (no left
descent inside I) and ``W^I`` those of W / W_I.  Every w factors uniquely and
length-additively as w = w_I * {}^I w.  The distinguished elements are

* ``w_I0``        -- longest element of W_I,
* ``w0_upper_I``  -- w0^I, the longest element of W^I  (w0 = w0^I * w_I0),
* ``upper_I_w0``  -- {}^I w0, the longest element of {}^I W  (w0 = w_I0 * {}^I w0).
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import UsageError
from .root_weyl import RootSystem, WeylElement, longest_element, multiply


@dataclass(frozen=True)
class TypeSubset:
    """A subset of the simple-reflection indices {1..rank}."""

    indices: frozenset[int]

    @staticmethod
    def of(*indices: int) -> "TypeSubset":
        return TypeSubset(frozenset(indices))

    @staticmethod
    def from_mask(mask: int) -> "TypeSubset":
        return TypeSubset(frozenset(i + 1 for i in range(mask.bit_length()) if mask >> i & 1))

    @property
    def mask(self) -> int:
        return sum(1 << (i - 1) for i in self.indices)

    def validate(self, rank: int) -> None:
        bad = [i for i in self.indices if not 1 <= i <= rank]
        if bad:
            raise UsageError(f"type subset indices {sorted(bad)} out of range 1..{rank}")

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def __len__(self) -> int:
        return len(self.indices)

    def __repr__(self):
        inside = ",".join(str(i) for i in self.sorted())
        return "{" + inside + "}"


def all_subsets(rank: int):
    """All 2^rank parabolic types, in mask order."""
    for mask in range(1 << rank):
        yield TypeSubset.from_mask(mask)


@dataclass(frozen=True)
class CosetSystem:
    I: TypeSubset
    w_I_elements: tuple[WeylElement, ...]
    left_reps: tuple[WeylElement, ...]  # {}^I W
    right_reps: tuple[WeylElement, ...]  # W^I
    w_I0: WeylElement
    w0_upper_I: WeylElement  # w0^I
    upper_I_w0: WeylElement  # {}^I w0


def subgroup_elements(rs: RootSystem, I: TypeSubset) -> tuple[WeylElement, ...]:
    """W_I, closed under the generators {s_i : i in I}, sorted like rs.elements()."""
    I.validate(rs.rank)
    seen = {rs.identity().perm: rs.identity()}
    frontier = [rs.identity()]
    while frontier:
        nxt = []
        for w in frontier:
            for i in I.sorted():
                u = multiply(w, rs.simple(i))
                if u.perm not in seen:
                    seen[u.perm] = u
                    nxt.append(u)
        frontier = nxt
    return tuple(sorted(seen.values(), key=lambda w: (w.length, w.reduced_word())))


def coset_system(rs: RootSystem, I: TypeSubset) -> CosetSystem:
    I.validate(rs.rank)
    elements = rs.elements()
    w_i = subgroup_elements(rs, I)
    ordered = I.sorted()
    left = tuple(
        w for w in elements if not any(rs.has_left_descent(w, i) for i in ordered)
    )
    right = tuple(
        w for w in elements if not any(rs.has_right_descent(w, i) for i in ordered)
    )
    w0 = longest_element(rs)
    w_i0 = max(w_i, key=lambda w: w.length)
    w0_upper = multiply(w0, w_i0)  # w0^I
    upper_w0 = multiply(w_i0, w0)  # {}^I w0
    assert len(w_i) * len(left) == len(elements)
    assert len(w_i) * len(right) == len(elements)
    assert multiply(w_i0, upper_w0) == w0 == multiply(w0_upper, w_i0)
    assert w0_upper in set(right) and upper_w0 in set(left)
    return CosetSystem(I, w_i, left, right, w_i0, w0_upper, upper_w0)


def decompose_left(w: WeylElement, I: TypeSubset) -> tuple[WeylElement, WeylElement]:
    """The unique length-additive factorisation w = w_I * {}^I w."""
    rs = w.system
    I.validate(rs.rank)
    ordered = I.sorted()
    rep = w
    while True:
        for i in ordered:
            if rs.has_left_descent(rep, i):
                rep = multiply(rs.simple(i), rep)
                break
        else:
            break
    part = multiply(w, rep.inverse())
    assert part.length + rep.length == w.length
    return part, rep


def opposite_type(rs: RootSystem, I: TypeSubset) -> TypeSubset:
    """The subset J with s_j = w0 s_i w0 elementwise; an involution on subsets."""
    I.validate(rs.rank)
    w0 = longest_element(rs)
    out = set()
    simples = {rs.simple(i).perm: i for i in range(1, rs.rank + 1)}
    for i in I.indices:
        conj = multiply(multiply(w0, rs.simple(i)), w0)
        out.add(simples[conj.perm])
    return TypeSubset(frozenset(out))
