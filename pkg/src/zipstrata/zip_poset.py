"""Algebraic zip datum combinatorics: twisted orders, strata posets, dualities.

A zip datum here is the Weyl-group shadow of a pair of parabolics (types I
and J) linked by a length-preserving isomorphism psi: W_I -> W_J with
psi(I) = J.  The twisted order on the label set is

    w' <= w   iff   there is y in W_I with  y * w' * psi(y)^{-1}  <=  w

in Bruhat order.  Two flavors are built in:

* DL:  J = phi(I), psi = phi restricted to W_I (phi = diagram automorphism);
* EO:  J = K := {}^{w0} phi(I), frame element z = w0^K, and psi conjugates
  phi by c = phi(w0^I).  Note c = (w0^K)^{-1}: conjugating by the frame
  element itself does not send W_I into W_K (already false in A2), so the
  Levi isomorphism uses c while z labels orbit representatives w~ z~^{-1}.
  ``compare_eo_twists`` measures the literal-z order against this one.

The duality sigma0(w) = w0^I * w maps {}^I W onto {}^J W (J opposite to I),
reverses the EO/DL order pair and complements lengths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConsistencyError, UsageError
from .parabolic import TypeSubset, coset_system, opposite_type
from .root_weyl import (
    RootSystem,
    WeylElement,
    apply_frobenius,
    multiply,
)

FLAVOR_DL = "DL"
FLAVOR_EO = "EO"
FLAVOR_CUSTOM = "custom"


@dataclass(frozen=True)
class ZipDatum:
    rs: RootSystem
    I: TypeSubset
    J: TypeSubset
    psi: dict  # WeylElement (in W_I) -> WeylElement (in W_J)
    frame_z: WeylElement
    flavor: str

    def labels_left(self) -> tuple[WeylElement, ...]:
        """{}^I W, sorted by (length, word)."""
        return coset_system(self.rs, self.I).left_reps

    def labels_right(self) -> tuple[WeylElement, ...]:
        """W^J, sorted by (length, word)."""
        return coset_system(self.rs, self.J).right_reps


def _validate_psi(rs, I, J, psi):
    cs_i = coset_system(rs, I)
    cs_j = coset_system(rs, J)
    w_i, w_j = set(cs_i.w_I_elements), set(cs_j.w_I_elements)
    if set(psi) != w_i:
        raise UsageError("psi must be defined on exactly W_I")
    if set(psi.values()) != w_j:
        raise UsageError("psi must map W_I bijectively onto W_J")
    for a in w_i:
        if psi[a].length != a.length:
            raise UsageError("psi must preserve length")
        for b in w_i:
            if psi[multiply(a, b)] != multiply(psi[a], psi[b]):
                raise UsageError("psi must be a group homomorphism")
    simple_images = {psi[rs.simple(i)] for i in I.sorted()}
    if simple_images != {rs.simple(j) for j in J.sorted()}:
        raise UsageError("psi must map the simple reflections of I onto those of J")


def custom_zip_datum(
    rs: RootSystem,
    I: TypeSubset,
    J: TypeSubset,
    psi: dict,
    frame_z: WeylElement | None = None,
) -> ZipDatum:
    """A user-supplied zip datum; psi is validated against all invariants."""
    I.validate(rs.rank)
    J.validate(rs.rank)
    _validate_psi(rs, I, J, psi)
    return ZipDatum(rs, I, J, dict(psi), frame_z or rs.identity(), FLAVOR_CUSTOM)


def make_zip_datum(rs: RootSystem, I: TypeSubset, flavor: str) -> ZipDatum:
    I.validate(rs.rank)
    datum = rs.datum
    phi_I = TypeSubset(frozenset(datum.diagram_automorphism[i - 1] for i in I.indices))
    cs_i = coset_system(rs, I)
    if flavor.upper() == FLAVOR_DL:
        psi = {w: apply_frobenius(datum, w) for w in cs_i.w_I_elements}
        out = ZipDatum(rs, I, phi_I, psi, rs.identity(), FLAVOR_DL)
    elif flavor.upper() == FLAVOR_EO:
        K = opposite_type(rs, phi_I)
        cs_k = coset_system(rs, K)
        frame_z = cs_k.w0_upper_I  # w0^K
        conj = apply_frobenius(datum, cs_i.w0_upper_I)  # phi(w0^I)
        assert conj == frame_z.inverse()
        conj_inv = conj.inverse()
        psi = {
            w: multiply(multiply(conj, apply_frobenius(datum, w)), conj_inv)
            for w in cs_i.w_I_elements
        }
        out = ZipDatum(rs, I, K, psi, frame_z, FLAVOR_EO)
    else:
        raise UsageError(f"unknown zip flavor {flavor!r}")
    _validate_psi(rs, out.I, out.J, out.psi)
    return out


def twisted_leq(d: ZipDatum, wp: WeylElement, w: WeylElement) -> bool:
    """w' <= w iff some y in W_I satisfies y w' psi(y)^{-1} <= w in Bruhat order."""
    t = d.rs.tables()
    w_idx = t.index[w.perm]
    for y, psi_y in d.psi.items():
        cand = multiply(multiply(y, wp), psi_y.inverse())
        if t.bruhat[t.index[cand.perm], w_idx]:
            return True
    return False


def _twisted_matrix(d: ZipDatum, labels) -> np.ndarray:
    """Full twisted-order matrix over `labels`, vectorised over the Bruhat table."""
    t = d.rs.tables()
    lab_idx = np.array([t.index[w.perm] for w in labels], dtype=np.int32)
    n = len(labels)
    out = np.zeros((n, n), dtype=bool)
    for y, psi_y in d.psi.items():
        y_idx = t.index[y.perm]
        pinv_idx = t.index[psi_y.inverse().perm]
        twisted = t.mult[t.mult[y_idx, lab_idx], pinv_idx]
        out |= t.bruhat[np.ix_(twisted, lab_idx)]
    return out


@dataclass(frozen=True)
class StrataPoset:
    labels: tuple[WeylElement, ...]
    dims: tuple[int, ...]
    leq: np.ndarray  # leq[i, j] iff labels[i] <= labels[j]
    hasse: tuple[tuple[int, int], ...]  # covering edges as label indices

    def hasse_labels(self) -> tuple[tuple[WeylElement, WeylElement], ...]:
        return tuple((self.labels[i], self.labels[j]) for i, j in self.hasse)

    def maximum(self) -> WeylElement:
        return self.labels[int(np.argmax(self.leq.sum(axis=0)))]


def _assert_partial_order(leq: np.ndarray, what: str) -> None:
    n = leq.shape[0]
    if not np.all(np.diag(leq)):
        raise ConsistencyError(f"{what}: relation is not reflexive")
    both = leq & leq.T & ~np.eye(n, dtype=bool)
    if both.any():
        i, j = map(int, np.argwhere(both)[0])
        raise ConsistencyError(f"{what}: antisymmetry fails at label pair ({i}, {j})")
    closure = leq @ leq
    if (closure & ~leq).any():
        i, j = map(int, np.argwhere(closure & ~leq)[0])
        raise ConsistencyError(f"{what}: transitivity fails at label pair ({i}, {j})")


def transitive_reduction(leq: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Minimal edge set whose reflexive-transitive closure is `leq`."""
    strict = leq & ~np.eye(leq.shape[0], dtype=bool)
    # u -> v is a cover iff no intermediate x with u < x < v
    redundant = strict @ strict
    covers = strict & ~redundant
    return tuple((int(i), int(j)) for i, j in np.argwhere(covers))


def strata_poset(d: ZipDatum, side: str = "left") -> StrataPoset:
    if side not in ("left", "right"):
        raise UsageError(f"side must be 'left' or 'right', got {side!r}")
    labels = d.labels_left() if side == "left" else d.labels_right()
    leq = _twisted_matrix(d, labels)
    what = f"{d.flavor} strata poset on {d.rs.datum.label()}, I={d.I}, side={side}"
    _assert_partial_order(leq, what)
    dims = tuple(w.length for w in labels)
    maximal = [i for i in range(len(labels)) if leq[:, i].all()]
    if len(maximal) != 1:
        raise ConsistencyError(f"{what}: expected a unique maximal element, found {len(maximal)}")
    if dims[maximal[0]] != max(dims):
        raise ConsistencyError(f"{what}: maximal element does not have maximal length")
    return StrataPoset(labels, dims, leq, transitive_reduction(leq))


def hasse_edges(p: StrataPoset) -> tuple[tuple[WeylElement, WeylElement], ...]:
    return p.hasse_labels()


def sigma(d: ZipDatum, w: WeylElement) -> WeylElement:
    """The W^J label of the orbit of w in {}^I W.

    Searches y in W_I for elements y w psi(y)^{-1} lying in W^J with the same
    length as w; the value must be unique.
    """
    right = set(d.labels_right())
    candidates = {}
    for y, psi_y in d.psi.items():
        cand = multiply(multiply(y, w), psi_y.inverse())
        if cand.length == w.length and cand in right:
            candidates[cand] = y
    if len(candidates) != 1:
        raise ConsistencyError(
            f"sigma({w!r}) on {d.rs.datum.label()} I={d.I} flavor={d.flavor}: "
            f"expected one candidate of length {w.length} in W^J, got "
            f"{sorted(c.word_str() for c in candidates)} "
            f"(witnesses {[(c.word_str(), y.word_str()) for c, y in candidates.items()]})"
        )
    return next(iter(candidates))


def sigma0(rs: RootSystem, I: TypeSubset) -> dict:
    """The duality {}^I W -> {}^J W, w -> w0^I * w, with J opposite to I."""
    I.validate(rs.rank)
    cs = coset_system(rs, I)
    return {w: multiply(cs.w0_upper_I, w) for w in cs.left_reps}


@dataclass(frozen=True)
class EquivalenceReport:
    family: str
    rank: int
    I_plus: TypeSubset
    I_minus: TypeSubset
    pairs_checked: int
    counterexamples: tuple

    @property
    def holds(self) -> bool:
        return not self.counterexamples


def main_theorem_equivalence(rs: RootSystem, I_plus: TypeSubset) -> EquivalenceReport:
    """Check [w <=_DL sigma0(w')] <=> [w' <=_EO sigma0(w)] over all label pairs.

    w' runs over the EO labels {}^{I+} W and w over the DL labels {}^{I-} W
    with I- opposite to I+.  Failures are report content, not exceptions.
    """
    I_minus = opposite_type(rs, I_plus)
    eo = make_zip_datum(rs, I_plus, FLAVOR_EO)
    dl = make_zip_datum(rs, I_minus, FLAVOR_DL)
    s0_plus = sigma0(rs, I_plus)  # {}^{I+}W -> {}^{I-}W
    s0_minus = sigma0(rs, I_minus)  # {}^{I-}W -> {}^{I+}W
    bad = []
    count = 0
    for wp in eo.labels_left():
        for w in dl.labels_left():
            count += 1
            lhs = twisted_leq(dl, w, s0_plus[wp])
            rhs = twisted_leq(eo, wp, s0_minus[w])
            if lhs != rhs:
                bad.append((wp, w, lhs, rhs))
    return EquivalenceReport(
        rs.datum.family, rs.datum.rank, I_plus, I_minus, count, tuple(bad)
    )


@dataclass(frozen=True)
class TwistComparison:
    family: str
    rank: int
    I: TypeSubset
    coincide: bool
    pairs_checked: int
    mismatches: tuple


def compare_eo_twists(rs: RootSystem, I: TypeSubset) -> TwistComparison:
    """Compare the EO order twisted by c = phi(w0^I) against the literal z = w0^K twist.

    Both relations quantify y over W_I and compare y w' (c phi(y) c^{-1})^{-1}
    resp. y w' (z phi(y) z^{-1})^{-1} with w in Bruhat order.  Whether they
    coincide is a finding, not an assumption.
    """
    I.validate(rs.rank)
    datum = rs.datum
    eo = make_zip_datum(rs, I, FLAVOR_EO)
    z = eo.frame_z  # w0^K
    z_inv = z.inverse()
    literal_psi = {
        y: multiply(multiply(z, apply_frobenius(datum, y)), z_inv) for y in eo.psi
    }
    labels = eo.labels_left()
    t = rs.tables()

    def relation(psi_map):
        lab_idx = np.array([t.index[w.perm] for w in labels], dtype=np.int32)
        out = np.zeros((len(labels), len(labels)), dtype=bool)
        for y, psi_y in psi_map.items():
            twisted = t.mult[t.mult[t.index[y.perm], lab_idx], t.index[psi_y.inverse().perm]]
            out |= t.bruhat[np.ix_(twisted, lab_idx)]
        return out

    rel_dual = relation(eo.psi)
    rel_literal = relation(literal_psi)
    diff = np.argwhere(rel_dual != rel_literal)
    mismatches = tuple(
        (labels[int(i)], labels[int(j)], bool(rel_dual[i, j]), bool(rel_literal[i, j]))
        for i, j in diff
    )
    return TwistComparison(
        datum.family, datum.rank, I, not mismatches, len(labels) ** 2, mismatches
    )
