from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hgls.gamma import (
    GammaVector,
    NotAGammaVector,
    format_gamma,
    gamma_from_params,
    m0,
    params_from_gamma,
    parse_gamma,
    reduce,
    splittings,
    total_twist_gamma,
)
from hgls.hodge import hodge_vector
from hgls.params import (
    CycloProfile,
    HGParams,
    NotRationalError,
    galois_orbit,
    is_defined_over_Q,
    is_irreducible,
    is_mum,
    total_twist_params,
)

F = Fraction


def test_galois_orbit():
    assert galois_orbit(1) == (F(0),)
    assert galois_orbit(8) == (F(1, 8), F(3, 8), F(5, 8), F(7, 8))
    assert len(galois_orbit(12)) == 4


def test_params_normalize_and_validate():
    p = HGParams(["1/2", "1/2", "1/3", "2/3"], [0, 0, 0, 0])
    assert p.alpha == (F(1, 3), F(1, 2), F(1, 2), F(2, 3))
    with pytest.raises(ValueError):
        HGParams([F(1, 2)], [0, 0])
    with pytest.raises(ValueError):
        HGParams([1], [0])


def test_rationality_and_irreducibility():
    assert is_defined_over_Q(HGParams([F(1, 5), F(2, 5), F(3, 5), F(4, 5)], [0] * 4))
    assert not is_defined_over_Q(HGParams([F(1, 5), F(2, 5)], [0, 0]))
    with pytest.raises(NotRationalError):
        CycloProfile.from_params(HGParams([F(1, 3)], [0]))
    assert not is_irreducible(HGParams([F(1, 2), 0], [0, 0]))


def test_cyclo_profile_round_trip():
    p = HGParams([F(1, 4), F(3, 4), F(1, 2), F(1, 2)], [0] * 4)
    prof = p.profile()
    assert prof.numerator_orders == (2, 2, 4)
    assert prof.denominator_orders == (1, 1, 1, 1)
    assert prof.to_params() == p


def test_total_twist_params_is_involution():
    p = HGParams([F(1, 3), F(2, 3), F(1, 2), F(1, 2)], [0] * 4)
    t = total_twist_params(p)
    assert t.alpha == (0, 0, F(1, 6), F(5, 6))
    assert total_twist_params(t) == p


def test_mum():
    assert is_mum(HGParams([F(1, 2)] * 4, [0] * 4))
    assert is_mum(HGParams([0] * 4, [F(1, 2)] * 4))
    assert not is_mum(HGParams([F(1, 2)] * 4, [F(1, 3), F(2, 3), 0, 0]))


@pytest.mark.parametrize("alpha, beta, h", [
    ([F(1, 2)] * 4, [0] * 4, (1, 1, 1, 1)),
    ([F(1, 5), F(2, 5), F(3, 5), F(4, 5)], [0] * 4, (1, 1, 1, 1)),
    ([F(1, 2), F(1, 2)], [F(1, 3), F(2, 3)], (1, 1)),
    ([F(1, 4), F(3, 4)], [0, F(1, 2)], (2,)),
])
def test_hodge_vector(alpha, beta, h):
    hv = hodge_vector(HGParams(alpha, beta))
    assert hv == h
    assert hv.rank == len(alpha)
    assert hv.is_symmetric


def test_hodge_rejects_reducible():
    with pytest.raises(ValueError):
        hodge_vector(HGParams([0, F(1, 2)], [0, 0]))


def test_gamma_vector_validation():
    assert tuple(GammaVector([1, -2, 1])) == (-2, 1, 1)
    for bad in ([], [0, 1, -1], [1, 1], [-2, 2]):
        with pytest.raises(NotAGammaVector):
            GammaVector(bad)


def test_gamma_attributes():
    g = GammaVector([-4, -1, -1, -1, -1, -1, 2, 2, 2, 3])
    assert (g.d, g.l_o, g.L_o, g.L_e, g.gcd, g.r) == (8, 6, -2, 2, 1, 2)
    assert GammaVector([-6, 3, 3]).gcd == 3


def test_worked_examples():
    assert tuple(reduce([-6, -3, -2, 1, 2, 2, 6])) == (-3, 1, 2)
    assert tuple(total_twist_gamma([-6, -1, 2, 2, 3])) == (-6, -3, -2, 1, 2, 2, 6)
    assert m0([-4, -1, -1, -1, -1, -1, 2, 2, 2, 3]) == F(-27, 4)


def test_params_gamma_round_trip():
    p = HGParams([F(1, 2)] * 4, [0] * 4)
    g = gamma_from_params(p)
    assert tuple(g) == (-2, -2, -2, -2, 1, 1, 1, 1, 1, 1, 1, 1)
    assert params_from_gamma(g) == p


def test_parse_and_format():
    g = parse_gamma("-2^4 1^8")
    assert format_gamma(g) == "-2^4 1^8"
    assert parse_gamma("(-3, 1, 2)") == GammaVector([-3, 1, 2])
    with pytest.raises(ValueError):
        parse_gamma("-3 x 2")


def test_case_41_has_no_five_part_splitting():
    g = parse_gamma("-3^3 -2^4 1^5 6^2")
    sp = splittings(g)
    assert max(s.s for s in sp) == 4
    assert not splittings(g, min_parts=5)


# properties

small = st.integers(min_value=1, max_value=6)


@st.composite
def gamma_vectors(draw):
    pos = draw(st.lists(small, min_size=1, max_size=4))
    neg = draw(st.lists(small, min_size=1, max_size=4))
    diff = sum(pos) - sum(neg)
    if diff > 0:
        neg.append(diff)
    elif diff < 0:
        pos.append(-diff)
    entries = pos + [-x for x in neg]
    try:
        return GammaVector(entries)
    except NotAGammaVector:
        return GammaVector([-2, 1, 1])


@given(gamma_vectors())
def test_reduce_idempotent_and_reduced(g):
    r = reduce(g)
    assert r.is_reduced
    assert reduce(r) == r
    assert sum(r) == 0


@given(gamma_vectors())
def test_twist_is_involution_up_to_reduction(g):
    assert reduce(total_twist_gamma(total_twist_gamma(g))) == reduce(g)


@given(gamma_vectors())
def test_twisted_m0(g):
    assert m0(total_twist_gamma(g)) == F(4) ** g.L_o * m0(g)


@given(gamma_vectors())
def test_reduce_preserves_parameters(g):
    assert params_from_gamma(reduce(g)) == params_from_gamma(g)


@given(gamma_vectors())
def test_splittings_partition_the_vector(g):
    for s in splittings(g, min_parts=1)[:20]:
        assert sorted(x for p in s.parts for x in p) == sorted(g)
        assert all(sum(p) == 0 for p in s.parts)
