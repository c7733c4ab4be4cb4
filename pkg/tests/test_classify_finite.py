import json
from fractions import Fraction
from itertools import product

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from hgls._arith import fundamental_discriminant, kronecker, primes_upto
from hgls.classify import (
    classify_all,
    compare_to_reference,
    emit_tables,
    enumerate_candidates,
    load_reference_tables,
    record_schema,
)
from hgls.conifold import disc_radicand, quad_invariants, sign_rule, twist_radicand
from hgls.finite import (
    BadPrimeError,
    ap_series,
    euler_factor_conifold,
    frobenius_trace,
    hgm_sum,
    hgm_sum_at,
    is_good_prime,
    twist_relation,
    working_precision,
)
from hgls.gamma import m0


@pytest.fixture(scope="module")
def records():
    return classify_all()


def test_counts(records):
    assert len(records) == 47
    assert sum(r.is_mum for r in records) == 14
    assert [r.index for r in records] == list(range(1, 48))


def test_candidates_cover_the_classes():
    keys = {c.unordered_key() for c in enumerate_candidates()}
    assert all(r.params.unordered_key() in keys for r in classify_all())


def test_matches_bundled_tables(records):
    assert compare_to_reference(records) == []


def test_compare_flags_a_wrong_row(records):
    ref = load_reference_tables()
    ref[4] = dict(ref[4], D=ref[4]["D"] + 1)
    probs = compare_to_reference(records, ref)
    assert len(probs) == 1 and "case 5" in probs[0]


def test_json_output_is_schema_valid(records):
    doc = json.loads(emit_tables(records, "json"))
    schema = record_schema()
    for row in doc:
        jsonschema.validate(row, schema)
    assert len(doc) == 47


def test_markdown_and_csv(records):
    md = emit_tables(records, "md")
    assert "MUM cases (14)" in md and "without a MUM point (33)" in md
    assert sum(line.startswith("| ") for line in md.splitlines()) == 47 + 2
    csv_out = emit_tables(records, "csv").splitlines()
    assert len(csv_out) == 48
    with pytest.raises(ValueError):
        emit_tables(records, "xml")


def test_case_28_invariants(records):
    r = records[27]
    assert r.m0 == Fraction(-27, 4)
    assert (r.D, r.E) == (-24, 12)
    assert r.twist_partner == 39


def test_quad_invariants_via_formulas(records):
    for r in records:
        q = quad_invariants(r.gamma_red)
        assert (q.D, q.E) == (r.D, r.E)
        assert fundamental_discriminant(disc_radicand(r.gamma_red)) == r.D
        assert (1 if disc_radicand(r.gamma_red) > 0 else -1) == sign_rule(r.gamma_red)
        assert fundamental_discriminant(twist_radicand(r.gamma_red)) == r.E


def test_fundamental_discriminant():
    assert [fundamental_discriminant(n) for n in (1, -3, 12, -4, 8, 5, -27)] == [1, -3, 12, -4, 8, 5, -3]
    assert fundamental_discriminant(Fraction(-27, 4)) == -3


def test_kronecker_against_euler_criterion():
    for p in primes_upto(40)[1:]:
        for a in range(1, p):
            assert kronecker(a, p) == (1 if pow(a, (p - 1) // 2, p) == 1 else -1)


# finite sums against a brute-force count of
#   z_1 + ... + z_l = 0,  prod z_j^g_j = M0 t   (projective, all z_j nonzero)
# valid when alpha and beta share only one 0


def _brute_count(g, lam, p):
    n = 0
    for z in product(range(1, p), repeat=len(g) - 1):
        last = -sum(z) % p
        if last == 0:
            continue
        v = 1
        for x, e in zip(z + (last,), g):
            v = v * pow(x, e % (p - 1), p) % p
        n += v == lam % p
    return Fraction(n, p - 1)


@pytest.mark.parametrize("g", [(-2, 1, 1), (-3, 1, 2), (-4, 1, 3), (-5, 2, 3), (-3, 1, 1, 1), (-1, -1, -1, 3)])
@pytest.mark.parametrize("p", [7, 11, 13])
def test_hgm_sum_brute_force(g, p):
    l = len(g)
    A = Fraction((p - 1) ** (l - 2) - (-1) ** l, p)
    c = (-1) ** (l + 1)
    mu = m0(g)
    mp = mu.numerator * pow(mu.denominator, -1, p) % p
    for t in range(1, p):
        assert _brute_count(g, mp * t, p) == A + c * hgm_sum(g, t, p)


def test_hgm_sum_at_matches_parametrized():
    g, p = (-3, 1, 2), 7
    mu = m0(g)
    mp = mu.numerator * pow(mu.denominator, -1, p) % p
    assert all(hgm_sum_at(g, mp * t % p, p) == hgm_sum(g, t, p) for t in range(1, p))


def test_bad_primes():
    with pytest.raises(BadPrimeError):
        hgm_sum((-3, 1, 2), 1, 3)
    assert is_good_prime((-3, 1, 2), 2) == (False, "p = 2")
    assert not is_good_prime((-3, 1, 2), 5, t=5)[0]


def test_precision_grows_with_p():
    g = classify_all()[0].gamma_red
    assert working_precision(g, 7) >= 15
    assert working_precision(g, 97) > working_precision(g, 7)


def test_case_1_ap():
    # coefficients of the weight-4 level-8 newform
    expected = {3: -4, 5: -2, 7: 24, 11: -44, 13: 22}
    got = {e.p: e.a_p for e in ap_series(classify_all()[0], 13) if e.good}
    assert got == expected


def test_euler_factor(records):
    e = euler_factor_conifold(records[0], 5)
    lin, quad = e.factor()
    assert lin == [1, -5 * e.sigma_p]
    assert quad == [1, 2, 125]
    with pytest.raises(BadPrimeError):
        euler_factor_conifold(records[0], 2)


def test_weil_bound_all_cases(records):
    for r in records:
        for e in ap_series(r, 30):
            if e.good:
                assert e.a_p ** 2 <= 4 * e.p ** 3


def test_twist_relation_pair(records):
    checks = twist_relation(records[1].gamma_red, records[14].gamma_red, 20)
    assert checks and all(c.ok for c in checks)


@settings(max_examples=25)
@given(st.sampled_from([(2, 15), (5, 18), (11, 24), (28, 39), (36, 46)]),
       st.sampled_from([5, 7, 11, 13, 17, 19, 23, 29]), st.integers(min_value=1, max_value=28))
def test_twist_character_relation(pair, p, t):
    recs = classify_all()
    g, h = recs[pair[0] - 1].gamma_red, recs[pair[1] - 1].gamma_red
    if any(x % p == 0 for x in list(g) + list(h)) or t % p == 0:
        return
    c = twist_radicand(g, t)
    chi = kronecker(c.numerator * c.denominator, p)
    assert frobenius_trace(h, t, p) == chi * frobenius_trace(g, t, p)
