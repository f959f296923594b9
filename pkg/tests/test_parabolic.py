import pytest

from zipstrata.exceptions import UsageError
from zipstrata.parabolic import (
    TypeSubset,
    all_subsets,
    coset_system,
    decompose_left,
    opposite_type,
    subgroup_elements,
)
from zipstrata.root_weyl import (
    CartanDatum,
    bruhat_leq,
    build_root_system,
    enumerate_elements,
    longest_element,
    multiply,
)

RANK3_TYPES = [("A", 1), ("A", 2), ("A", 3), ("B", 2), ("B", 3), ("C", 2), ("C", 3), ("D", 3), ("G2", 2)]


def rs_of(family, rank):
    return build_root_system(CartanDatum(family, rank))


def test_subset_validation():
    rs = rs_of("A", 2)
    with pytest.raises(UsageError):
        coset_system(rs, TypeSubset.of(3))
    with pytest.raises(UsageError):
        coset_system(rs, TypeSubset.of(0))


def test_all_subsets_enumeration():
    subsets = list(all_subsets(3))
    assert len(subsets) == 8
    assert TypeSubset.of() in subsets
    assert TypeSubset.of(1, 2, 3) in subsets
    for sub in subsets:
        assert TypeSubset.from_mask(sub.mask) == sub


def test_coset_system_examples():
    a2 = rs_of("A", 2)
    cs_empty = coset_system(a2, TypeSubset.of())
    assert len(cs_empty.left_reps) == 6
    cs_full = coset_system(a2, TypeSubset.of(1, 2))
    assert cs_full.left_reps == (a2.identity(),)

    c2 = rs_of("C", 2)
    cs = coset_system(c2, TypeSubset.of(1))
    assert len(cs.left_reps) == 4
    assert sorted(w.length for w in cs.left_reps) == [0, 1, 2, 3]


def _min_coset_reps_oracle(rs, I, side):
    """Independent oracle: minimise length over each coset explicitly."""
    w_i = subgroup_elements(rs, I)
    reps = set()
    for w in enumerate_elements(rs):
        if side == "left":  # W_I w
            coset = [multiply(y, w) for y in w_i]
        else:  # w W_I
            coset = [multiply(w, y) for y in w_i]
        reps.add(min(coset, key=lambda u: (u.length, u.reduced_word())))
    return reps


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_reps_match_coset_minimisation_oracle(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        cs = coset_system(rs, I)
        assert set(cs.left_reps) == _min_coset_reps_oracle(rs, I, "left")
        assert set(cs.right_reps) == _min_coset_reps_oracle(rs, I, "right")


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_unique_length_additive_factorisation(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        cs = coset_system(rs, I)
        left_set = set(cs.left_reps)
        for w in enumerate_elements(rs):
            part, rep = decompose_left(w, I)
            assert part in set(cs.w_I_elements)
            assert rep in left_set
            assert multiply(part, rep) == w
            assert part.length + rep.length == w.length


def test_decompose_left_examples():
    a2 = rs_of("A", 2)
    I = TypeSubset.of(1)
    s1, s2 = a2.simple(1), a2.simple(2)
    assert decompose_left(s1, I) == (s1, a2.identity())
    assert decompose_left(s2, I) == (a2.identity(), s2)
    # exhaustive factor search over the 2-element W_I
    w = multiply(s1, s2)
    factorisations = [
        (a, multiply(a.inverse(), w))
        for a in subgroup_elements(a2, I)
        if multiply(a.inverse(), w).length + a.length == w.length
    ]
    valid = [
        (a, b) for a, b in factorisations
        if not any(a2.has_left_descent(b, i) for i in I.sorted())
    ]
    assert valid == [decompose_left(w, I)]


def test_opposite_type_examples():
    a1 = rs_of("A", 1)
    assert opposite_type(a1, TypeSubset.of(1)) == TypeSubset.of(1)
    a2 = rs_of("A", 2)
    assert opposite_type(a2, TypeSubset.of(1)) == TypeSubset.of(2)
    c2 = rs_of("C", 2)
    assert opposite_type(c2, TypeSubset.of(1)) == TypeSubset.of(1)


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_opposite_type_is_involution(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        assert opposite_type(rs, opposite_type(rs, I)) == I


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_w0_conjugation_identities(family, rank):
    """Conjugation by w0 swaps the parabolic data of I and its opposite."""
    rs = rs_of(family, rank)
    w0 = longest_element(rs)
    for I in all_subsets(rank):
        J = opposite_type(rs, I)
        cs_i = coset_system(rs, I)
        cs_j = coset_system(rs, J)

        def conj(w):
            return multiply(multiply(w0, w), w0)

        # (a) W_J = w0 W_I w0, length-preserving
        assert {conj(w) for w in cs_i.w_I_elements} == set(cs_j.w_I_elements)
        for w in cs_i.w_I_elements:
            assert conj(w).length == w.length
        # (b) same for both kinds of minimal representatives
        assert {conj(w) for w in cs_i.right_reps} == set(cs_j.right_reps)
        assert {conj(w) for w in cs_i.left_reps} == set(cs_j.left_reps)
        # (c) w_I0 = w0 w_J0 w0, hence w0^J = {}^I w0 and w0^I = {}^J w0
        assert cs_i.w_I0 == conj(cs_j.w_I0)
        assert cs_j.w0_upper_I == cs_i.upper_I_w0
        assert cs_i.w0_upper_I == cs_j.upper_I_w0


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_right_rep_duality_is_order_reversing(family, rank):
    """w -> w0 w w_I0 restricts to an order-reversing bijection of W^I."""
    rs = rs_of(family, rank)
    w0 = longest_element(rs)
    for I in all_subsets(rank):
        cs = coset_system(rs, I)
        image = {}
        for w in cs.right_reps:
            img = multiply(multiply(w0, w), cs.w_I0)
            image[w] = img
            assert img.length == cs.w0_upper_I.length - w.length
        assert set(image.values()) == set(cs.right_reps)
        for u in cs.right_reps:
            for w in cs.right_reps:
                if bruhat_leq(u, w):
                    assert bruhat_leq(image[w], image[u])


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_inverse_swaps_left_and_right_decompositions(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        cs = coset_system(rs, I)
        right_set = set(cs.right_reps)
        w_i_set = set(cs.w_I_elements)
        # if w = w^I w_I then w^{-1} = w_I^{-1} (w^I)^{-1} with the stated memberships
        for w in enumerate_elements(rs):
            part, rep = decompose_left(w.inverse(), I)  # w^{-1} = part * rep
            w_upper = rep.inverse()  # so w = rep^{-1} * part^{-1} = w^I w_I
            w_sub = part.inverse()
            assert multiply(w_upper, w_sub) == w
            assert w_upper in right_set
            assert w_sub in w_i_set
            assert w_upper.length + w_sub.length == w.length
