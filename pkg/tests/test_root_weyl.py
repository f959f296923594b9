import itertools

import numpy as np
import pytest

from zipstrata.exceptions import ConfigurationError, ResourceCapError, UsageError
from zipstrata.root_weyl import (
    CartanDatum,
    apply_frobenius,
    bruhat_leq,
    build_root_system,
    enumerate_elements,
    length,
    longest_element,
    multiply,
    reduced_word,
    reflections,
)

# (family, rank) -> (#roots, |W|)
CLASSICAL_COUNTS = {
    ("A", 1): (2, 2),
    ("A", 2): (6, 6),
    ("A", 3): (12, 24),
    ("A", 4): (20, 120),
    ("B", 2): (8, 8),
    ("B", 3): (18, 48),
    ("B", 4): (32, 384),
    ("C", 2): (8, 8),
    ("C", 3): (18, 48),
    ("C", 4): (32, 384),
    ("D", 3): (12, 24),
    ("D", 4): (24, 192),
    ("G2", 2): (12, 12),
}

SMALL_TYPES = [("A", 1), ("A", 2), ("A", 3), ("B", 2), ("B", 3), ("C", 3), ("D", 3), ("G2", 2)]


def rs_of(family, rank, sigma=()):
    return build_root_system(CartanDatum(family, rank, sigma))


@pytest.mark.parametrize("family,rank", sorted(CLASSICAL_COUNTS))
def test_root_and_group_counts(family, rank):
    nroots, order = CLASSICAL_COUNTS[(family, rank)]
    rs = rs_of(family, rank)
    assert len(rs.roots) == nroots
    assert rs.positive_root_count == nroots // 2
    assert len(enumerate_elements(rs)) == order


def test_roots_come_in_pairs():
    rs = rs_of("B", 3)
    p = rs.positive_root_count
    for k in range(p):
        assert rs.roots[k + p] == tuple(-x for x in rs.roots[k])
        assert all(x >= 0 for x in rs.roots[k])


def test_simple_reflection_permutes_positives():
    for family, rank in SMALL_TYPES:
        rs = rs_of(family, rank)
        p = rs.positive_root_count
        for i in range(rank):
            perm = rs.simple_reflection_action[i]
            alpha_idx = rs._simple_root_index[i]
            assert perm[alpha_idx] == rs.negative_of(alpha_idx)
            for k in range(p):
                if k != alpha_idx:
                    assert perm[k] < p


def test_unsupported_configurations():
    with pytest.raises(ConfigurationError):
        CartanDatum("E", 6)
    with pytest.raises(ConfigurationError):
        CartanDatum("A", 5)
    with pytest.raises(ConfigurationError):
        CartanDatum("D", 2)
    with pytest.raises(ConfigurationError):
        CartanDatum("A", 2, (1, 1))
    with pytest.raises(ConfigurationError):
        # swapping the two B3 end nodes does not preserve the Cartan matrix
        CartanDatum("B", 3, (3, 2, 1))


def test_multiply_identity_and_involution():
    rs = rs_of("A", 2)
    e = rs.identity()
    for w in enumerate_elements(rs):
        assert multiply(e, w) == w
        assert multiply(w, e) == w
    for i in (1, 2):
        assert multiply(rs.simple(i), rs.simple(i)) == e
    assert length(multiply(rs.simple(1), rs.simple(2))) == 2


def test_multiply_rejects_mismatched_systems():
    a = rs_of("A", 2)
    b = rs_of("A", 2)
    with pytest.raises(UsageError):
        multiply(a.simple(1), b.simple(1))


def test_length_examples():
    a2 = rs_of("A", 2)
    assert length(a2.identity()) == 0
    assert length(longest_element(a2)) == 3
    c2 = rs_of("C", 2)
    assert length(longest_element(c2)) == 4


@pytest.mark.parametrize("family,rank", SMALL_TYPES)
def test_longest_element_against_exhaustive_search(family, rank):
    rs = rs_of(family, rank)
    elements = enumerate_elements(rs)
    # independent oracle: scan the whole group for the maximum length
    best = max(elements, key=length)
    w0 = longest_element(rs)
    assert w0 == best
    assert length(w0) == rs.positive_root_count
    assert multiply(w0, w0) == rs.identity()
    for w in elements:
        assert length(multiply(w, w0)) == length(w0) - length(w)
        assert length(multiply(w0, w)) == length(w0) - length(w)


def test_longest_element_small_cases():
    a1 = rs_of("A", 1)
    assert longest_element(a1) == a1.simple(1)
    a2 = rs_of("A", 2)
    assert longest_element(a2) == a2.from_word([1, 2, 1])


def test_reduced_word_examples():
    rs = rs_of("A", 2)
    assert reduced_word(rs.identity()) == ()
    assert reduced_word(rs.simple(2)) == (2,)
    assert reduced_word(longest_element(rs)) == (1, 2, 1)


@pytest.mark.parametrize("family,rank", SMALL_TYPES)
def test_reduced_word_reconstructs_and_has_correct_length(family, rank):
    rs = rs_of(family, rank)
    for w in enumerate_elements(rs):
        word = reduced_word(w)
        assert len(word) == length(w)
        assert rs.from_word(word) == w


def _all_reduced_words(w):
    """Every reduced word of w, by peeling every left descent."""
    rs = w.system
    if w.length == 0:
        return [()]
    out = []
    for i in range(1, rs.rank + 1):
        if rs.has_left_descent(w, i):
            for rest in _all_reduced_words(multiply(rs.simple(i), w)):
                out.append((i,) + rest)
    return out


def _bruhat_by_subword(u, w):
    """Subword-criterion oracle: some subsequence of a reduced word of w equals u."""
    rs = u.system
    uword = reduced_word(u)
    for word in _all_reduced_words(w):
        for positions in itertools.combinations(range(len(word)), len(uword)):
            if tuple(word[p] for p in positions) == uword:
                if rs.from_word(uword) == u:
                    return True
    return u == w and not uword


def test_bruhat_subword_oracle_a2():
    rs = rs_of("A", 2)
    for u in enumerate_elements(rs):
        for w in enumerate_elements(rs):
            assert bruhat_leq(u, w) == _bruhat_by_subword(u, w), (u, w)
    assert not bruhat_leq(rs.simple(1), rs.simple(2))


@pytest.mark.parametrize("family,rank", [("A", 2), ("B", 2), ("G2", 2)])
def test_bruhat_extremes(family, rank):
    rs = rs_of(family, rank)
    e = rs.identity()
    w0 = longest_element(rs)
    for w in enumerate_elements(rs):
        assert bruhat_leq(e, w)
        assert bruhat_leq(w, w0)
        assert bruhat_leq(w0, w) == (w == w0)


def reflection_cover_closure(rs):
    """Independent Bruhat oracle: reflexive-transitive closure of u -> t u covers."""
    t = rs.tables()
    n = len(t.elements)
    leq = np.eye(n, dtype=bool)
    refls = reflections(rs)
    for u_idx, u in enumerate(t.elements):
        for tr in refls:
            tu = multiply(tr, u)
            if tu.length == u.length + 1:
                leq[u_idx, t.index[tu.perm]] = True
    # transitive closure by repeated boolean squaring
    while True:
        nxt = leq | (leq @ leq)
        if np.array_equal(nxt, leq):
            return leq
        leq = nxt


@pytest.mark.parametrize("family,rank", [("A", 2), ("B", 2), ("G2", 2)])
def test_bruhat_against_reflection_closure_rank2(family, rank):
    rs = rs_of(family, rank)
    assert np.array_equal(rs.tables().bruhat, reflection_cover_closure(rs))


def test_length_changes_by_one_under_simple_multiplication():
    for family, rank in SMALL_TYPES:
        rs = rs_of(family, rank)
        for w in enumerate_elements(rs):
            for i in range(1, rank + 1):
                assert abs(length(multiply(w, rs.simple(i))) - length(w)) == 1


def test_inversion_is_length_preserving_bijection():
    for family, rank in SMALL_TYPES:
        rs = rs_of(family, rank)
        elements = enumerate_elements(rs)
        inverses = {w.inverse() for w in elements}
        assert inverses == set(elements)
        for w in elements:
            assert length(w.inverse()) == length(w)


@pytest.mark.parametrize("family,rank", [("A", 2), ("B", 2)])
def test_bruhat_symmetries(family, rank):
    rs = rs_of(family, rank)
    w0 = longest_element(rs)
    for u in enumerate_elements(rs):
        for w in enumerate_elements(rs):
            flag = bruhat_leq(u, w)
            assert flag == bruhat_leq(u.inverse(), w.inverse())
            assert flag == bruhat_leq(multiply(w0, w), multiply(w0, u))


def test_apply_frobenius_split_is_identity():
    datum = CartanDatum("B", 3)
    rs = build_root_system(datum)
    for w in enumerate_elements(rs):
        assert apply_frobenius(datum, w) == w


def test_apply_frobenius_swap_on_a2():
    datum = CartanDatum("A", 2, (2, 1))
    rs = build_root_system(datum)
    assert apply_frobenius(datum, rs.simple(1)) == rs.simple(2)
    assert apply_frobenius(datum, rs.simple(2)) == rs.simple(1)


@pytest.mark.parametrize(
    "family,rank,sigma",
    [
        ("A", 2, (2, 1)),
        ("A", 3, (3, 2, 1)),
        ("D", 4, (1, 2, 4, 3)),
        ("D", 4, (3, 2, 4, 1)),  # triality
    ],
)
def test_apply_frobenius_properties(family, rank, sigma):
    datum = CartanDatum(family, rank, sigma)
    rs = build_root_system(datum)
    w0 = longest_element(rs)
    assert apply_frobenius(datum, w0) == w0
    elements = enumerate_elements(rs)
    images = set()
    for w in elements:
        fw = apply_frobenius(datum, w)
        images.add(fw)
        assert length(fw) == length(w)
    assert images == set(elements)
    # group automorphism
    for w in elements[:12]:
        for u in elements[:12]:
            assert apply_frobenius(datum, multiply(w, u)) == multiply(
                apply_frobenius(datum, w), apply_frobenius(datum, u)
            )


def test_enumeration_cap(monkeypatch):
    monkeypatch.setenv("ZIPSTRATA_CAP", "5")
    rs = rs_of("A", 2)
    with pytest.raises(ResourceCapError):
        enumerate_elements(rs)


def test_enumeration_cap_argument():
    rs = rs_of("A", 3)
    with pytest.raises(ResourceCapError):
        enumerate_elements(rs, cap=10)


def test_element_order_is_deterministic():
    rs1 = rs_of("B", 2)
    rs2 = rs_of("B", 2)
    words1 = [w.reduced_word() for w in enumerate_elements(rs1)]
    words2 = [w.reduced_word() for w in enumerate_elements(rs2)]
    assert words1 == words2
    lengths = [w.length for w in enumerate_elements(rs1)]
    assert lengths == sorted(lengths)
