import numpy as np
import pytest

from zipstrata.exceptions import UsageError
from zipstrata.parabolic import TypeSubset, all_subsets, coset_system, opposite_type
from zipstrata.root_weyl import (
    CartanDatum,
    apply_frobenius,
    bruhat_leq,
    build_root_system,
    multiply,
)
from zipstrata.zip_poset import (
    FLAVOR_DL,
    FLAVOR_EO,
    compare_eo_twists,
    custom_zip_datum,
    hasse_edges,
    main_theorem_equivalence,
    make_zip_datum,
    sigma,
    sigma0,
    strata_poset,
    transitive_reduction,
    twisted_leq,
)

RANK2_TYPES = [("A", 1), ("A", 2), ("B", 2), ("C", 2), ("G2", 2)]
RANK3_TYPES = RANK2_TYPES + [("A", 3), ("B", 3), ("C", 3), ("D", 3)]


def rs_of(family, rank, sigma_perm=()):
    return build_root_system(CartanDatum(family, rank, sigma_perm))


def test_make_zip_datum_examples():
    a1 = rs_of("A", 1)
    d = make_zip_datum(a1, TypeSubset.of(), FLAVOR_DL)
    assert d.J == TypeSubset.of()
    assert d.psi == {a1.identity(): a1.identity()}

    a2 = rs_of("A", 2)
    d = make_zip_datum(a2, TypeSubset.of(1), FLAVOR_DL)
    assert d.J == TypeSubset.of(1)
    assert all(d.psi[w] == w for w in d.psi)  # split: psi = id on W_{1}

    d = make_zip_datum(a2, TypeSubset.of(1), FLAVOR_EO)
    assert d.J == TypeSubset.of(2)  # K = {}^{w0}{1}
    cs_k = coset_system(a2, TypeSubset.of(2))
    assert d.frame_z == cs_k.w0_upper_I


def test_eo_psi_maps_I_onto_K():
    for family, rank in RANK3_TYPES:
        rs = rs_of(family, rank)
        for I in all_subsets(rank):
            d = make_zip_datum(rs, I, FLAVOR_EO)
            for i in I.sorted():
                img = d.psi[rs.simple(i)]
                assert img in {rs.simple(j) for j in d.J.sorted()}
            # the two candidate twist elements are inverse to one another
            cs_i = coset_system(rs, I)
            assert apply_frobenius(rs.datum, cs_i.w0_upper_I) == d.frame_z.inverse()


def test_nonsplit_dl_datum():
    rs = rs_of("A", 2, (2, 1))
    d = make_zip_datum(rs, TypeSubset.of(1), FLAVOR_DL)
    assert d.J == TypeSubset.of(2)
    assert d.psi[rs.simple(1)] == rs.simple(2)


def test_custom_zip_datum_validation():
    rs = rs_of("A", 2)
    I = TypeSubset.of(1)
    good = {rs.identity(): rs.identity(), rs.simple(1): rs.simple(2)}
    d = custom_zip_datum(rs, I, TypeSubset.of(2), good)
    assert d.flavor == "custom"
    bad = {rs.identity(): rs.identity(), rs.simple(1): rs.identity()}
    with pytest.raises(UsageError):
        custom_zip_datum(rs, I, TypeSubset.of(2), bad)
    not_simple = {rs.identity(): rs.identity(), rs.simple(1): rs.from_word([2, 1, 2])}
    with pytest.raises(UsageError):
        custom_zip_datum(rs, I, TypeSubset.of(2), not_simple)


def test_twisted_leq_trivial_cases():
    rs = rs_of("A", 2)
    d = make_zip_datum(rs, TypeSubset.of(1), FLAVOR_EO)
    labels = d.labels_left()
    for w in labels:
        assert twisted_leq(d, rs.identity(), w)
        assert twisted_leq(d, w, w)


def test_a2_eo_chain():
    rs = rs_of("A", 2)
    d = make_zip_datum(rs, TypeSubset.of(1), FLAVOR_EO)
    p = strata_poset(d, "left")
    assert p.dims == (0, 1, 2)
    # total order
    expected = np.triu(np.ones((3, 3), dtype=bool))
    assert np.array_equal(p.leq, expected)


def test_strata_poset_examples():
    a2 = rs_of("A", 2)
    p = strata_poset(make_zip_datum(a2, TypeSubset.of(1, 2), FLAVOR_EO))
    assert len(p.labels) == 1 and p.labels[0] == a2.identity()

    c2 = rs_of("C", 2)
    p = strata_poset(make_zip_datum(c2, TypeSubset.of(1), FLAVOR_EO))
    assert len(p.labels) == 4
    assert p.dims == (0, 1, 2, 3)
    assert np.array_equal(p.leq, np.triu(np.ones((4, 4), dtype=bool)))  # chain
    assert len(p.hasse) == 3

    a3 = rs_of("A", 3)
    p = strata_poset(make_zip_datum(a3, TypeSubset.of(1, 3), FLAVOR_DL))
    assert len(p.labels) == 6  # |W| / |W_I| = 24 / 4


def test_poset_dims_are_lengths_and_max_is_unique():
    for family, rank in RANK3_TYPES:
        rs = rs_of(family, rank)
        for I in all_subsets(rank):
            for flavor in (FLAVOR_EO, FLAVOR_DL):
                for side in ("left", "right"):
                    p = strata_poset(make_zip_datum(rs, I, flavor), side)
                    assert p.dims == tuple(w.length for w in p.labels)
                    assert p.maximum().length == max(p.dims)


def test_twisted_order_refines_length_and_contains_bruhat():
    for family, rank in [("A", 2), ("B", 2), ("A", 3)]:
        rs = rs_of(family, rank)
        for I in all_subsets(rank):
            for flavor in (FLAVOR_EO, FLAVOR_DL):
                d = make_zip_datum(rs, I, flavor)
                labels = d.labels_left()
                for wp in labels:
                    for w in labels:
                        if bruhat_leq(wp, w):
                            assert twisted_leq(d, wp, w)
                        if twisted_leq(d, wp, w) and wp != w:
                            assert wp.length < w.length


def test_empty_type_gives_bruhat_exactly():
    for family, rank in [("A", 1), ("A", 2)]:
        rs = rs_of(family, rank)
        for flavor in (FLAVOR_EO, FLAVOR_DL):
            d = make_zip_datum(rs, TypeSubset.of(), flavor)
            labels = d.labels_left()
            assert len(labels) == len(rs.elements())
            for wp in labels:
                for w in labels:
                    assert twisted_leq(d, wp, w) == bruhat_leq(wp, w)


def test_eo_poset_maximum_length():
    for family, rank in RANK3_TYPES:
        rs = rs_of(family, rank)
        for I in all_subsets(rank):
            cs = coset_system(rs, I)
            p = strata_poset(make_zip_datum(rs, I, FLAVOR_EO))
            w0_len = rs.positive_root_count
            assert max(p.dims) == w0_len - cs.w_I0.length == cs.w0_upper_I.length


def test_sigma_examples():
    rs = rs_of("C", 2)
    I = TypeSubset.of(1)
    d = make_zip_datum(rs, I, FLAVOR_EO)
    right = set(d.labels_right())
    seen = set()
    for w in d.labels_left():
        img = sigma(d, w)
        assert img.length == w.length
        assert img in right
        seen.add(img)
    assert seen == right
    assert sigma(d, rs.identity()) == rs.identity()


def test_sigma_is_identity_for_empty_type():
    rs = rs_of("A", 2)
    d = make_zip_datum(rs, TypeSubset.of(), FLAVOR_DL)
    for w in d.labels_left():
        assert sigma(d, w) == w


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_sigma_bijective_all_types(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        for flavor in (FLAVOR_EO, FLAVOR_DL):
            d = make_zip_datum(rs, I, flavor)
            images = {sigma(d, w) for w in d.labels_left()}
            assert images == set(d.labels_right())


def test_sigma0_examples():
    a1 = rs_of("A", 1)
    m = sigma0(a1, TypeSubset.of())
    assert m[a1.identity()] == a1.simple(1)
    assert m[a1.simple(1)] == a1.identity()

    a2 = rs_of("A", 2)
    I = TypeSubset.of(1)
    cs = coset_system(a2, I)
    m = sigma0(a2, I)
    assert m[a2.identity()] == cs.w0_upper_I
    assert m[a2.identity()].length == cs.w0_upper_I.length


@pytest.mark.parametrize("family,rank", RANK3_TYPES)
def test_sigma0_bijection_and_length_formula(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        J = opposite_type(rs, I)
        cs_j = coset_system(rs, J)
        m = sigma0(rs, I)
        assert set(m.values()) == set(cs_j.left_reps)
        for w, img in m.items():
            assert img.length == cs_j.w0_upper_I.length - w.length


@pytest.mark.parametrize("family,rank", RANK2_TYPES)
def test_sigma0_reverses_the_order_pair(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        J = opposite_type(rs, I)
        eo = make_zip_datum(rs, I, FLAVOR_EO)
        dl = make_zip_datum(rs, J, FLAVOR_DL)
        m = sigma0(rs, I)
        labels = eo.labels_left()
        for u in labels:
            for v in labels:
                if twisted_leq(eo, u, v):
                    assert twisted_leq(dl, m[v], m[u])


def test_main_theorem_equivalence_examples():
    a1 = rs_of("A", 1)
    rep = main_theorem_equivalence(a1, TypeSubset.of())
    assert rep.holds and rep.pairs_checked == 4

    c2 = rs_of("C", 2)
    rep = main_theorem_equivalence(c2, TypeSubset.of(1))
    assert rep.holds and rep.pairs_checked == 16

    rep = main_theorem_equivalence(c2, TypeSubset.of(1, 2))
    assert rep.holds and rep.pairs_checked == 1


@pytest.mark.parametrize("family,rank", RANK2_TYPES)
def test_main_theorem_equivalence_rank2(family, rank):
    rs = rs_of(family, rank)
    for I in all_subsets(rank):
        assert main_theorem_equivalence(rs, I).holds


def test_transitive_reduction_shapes():
    chain = np.triu(np.ones((4, 4), dtype=bool))
    assert transitive_reduction(chain) == ((0, 1), (1, 2), (2, 3))
    antichain = np.eye(3, dtype=bool)
    assert transitive_reduction(antichain) == ()
    # diamond: bottom 0, middle 1 and 2, top 3
    diamond = np.eye(4, dtype=bool)
    for i, j in [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]:
        diamond[i, j] = True
    assert set(transitive_reduction(diamond)) == {(0, 1), (0, 2), (1, 3), (2, 3)}


def test_hasse_edges_of_chain():
    c2 = rs_of("C", 2)
    p = strata_poset(make_zip_datum(c2, TypeSubset.of(1), FLAVOR_EO))
    edges = hasse_edges(p)
    assert len(edges) == 3
    for u, v in edges:
        assert v.length == u.length + 1


def test_compare_eo_twists_reports():
    for family, rank in RANK2_TYPES:
        rs = rs_of(family, rank)
        for I in all_subsets(rank):
            cmp = compare_eo_twists(rs, I)
            assert cmp.pairs_checked == len(make_zip_datum(rs, I, FLAVOR_EO).labels_left()) ** 2
            assert isinstance(cmp.coincide, bool)


def test_twisted_leq_nonsplit():
    # quasi-split A2: diagram swap, EO datum still satisfies its invariants
    rs = rs_of("A", 2, (2, 1))
    for I in all_subsets(2):
        d = make_zip_datum(rs, I, FLAVOR_EO)
        p = strata_poset(d)
        assert p.dims == tuple(sorted(p.dims))
        rep = main_theorem_equivalence(rs, I)
        assert rep.holds
