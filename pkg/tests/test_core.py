"""Layer-ring arithmetic: worked examples with independent oracles, ring
axioms as properties, parser roundtrips, torsion classification."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiltlab.core import (
    ABOVE_PRECISION,
    BadIdealExponent,
    NonPrime,
    NotInvertible,
    ParseError,
    PrecisionBudget,
    Prime,
    ProductRing,
    RingMismatch,
    layer_make,
)

from test_kernels import eisenstein_oracle


def O(p=5, N=6, e=5, **kw):
    return layer_make(p, PrecisionBudget(N), e, **kw)


# -- construction ------------------------------------------------------------


def test_layer_make_base_layer():
    ring = O(e=1)
    assert ring.e == 1 and ring.coeff_mod == 5**6
    assert ring.f0() == ring.from_int(5)


def test_layer_make_first_layer():
    ring = O(e=5)
    assert ring.f0() == ring.t_gen() ** 5
    assert ring.f0() == ring.from_int(5)


def test_layer_make_kummer_layer():
    # eps * e must be integral: fails at e=10, works at e=50 with f0 = t^6.
    with pytest.raises(BadIdealExponent):
        O(e=10, ideal_exp=Fraction(3, 25))
    ring = O(e=50, ideal_exp=Fraction(3, 25), e0=2, level=2)
    f0 = ring.f0()
    assert f0 == ring.monomial(6)
    assert f0.valuation() == Fraction(3, 25)  # oracle: 6/50


def test_layer_make_rejects_bad_input():
    with pytest.raises(NonPrime):
        layer_make(6, PrecisionBudget(2), 2)
    with pytest.raises(BadIdealExponent):
        O(ideal_exp=Fraction(3, 2))
    with pytest.raises(NonPrime):
        Prime(1)


# -- multiplication against the integer oracle --------------------------------


def test_mul_eisenstein_relation():
    ring = O()
    t = ring.t_gen()
    assert t * t**4 == ring.from_int(5)
    assert (1 + t) * (ring.one() - t) == ring.one() - t**2


def test_mul_with_carry_tracked_mod_25():
    ring = O(N=2)
    t = ring.t_gen()
    got = t**3 * t**3
    want = eisenstein_oracle([0, 0, 0, 1, 0], [0, 0, 0, 1, 0], 5, 5, 25)
    assert [got.terms.get((k, ()), 0) for k in range(5)] == want
    assert got == ring.monomial(1, coeff=5)


def test_mul_random_matches_oracle():
    ring = O(N=3, e=7 and 5)
    rng = random.Random(1)
    for _ in range(50):
        a = ring.random_element(rng, 4)
        b = ring.random_element(rng, 4)
        fa = [a.terms.get((k, ()), 0) for k in range(ring.e)]
        fb = [b.terms.get((k, ()), 0) for k in range(ring.e)]
        want = eisenstein_oracle(fa, fb, ring.e, ring.p, ring.coeff_mod)
        got = a * b
        assert [got.terms.get((k, ()), 0) for k in range(ring.e)] == want


def test_ring_mismatch_raises():
    with pytest.raises(RingMismatch):
        O().t_gen() * O(N=2).t_gen()


# -- valuation -----------------------------------------------------------------


def test_valuation_examples():
    ring = O()
    assert ring.from_int(5).valuation() == 1
    assert ring.t_gen().valuation() == Fraction(1, 5)
    assert ring.zero().valuation() is ABOVE_PRECISION


def test_valuation_multiplicative_on_monogenic_layers():
    ring = O(N=4)
    rng = random.Random(2)
    for _ in range(200):
        a = ring.random_element(rng, 3)
        b = ring.random_element(rng, 3)
        va, vb, vab = a.valuation(), b.valuation(), (a * b).valuation()
        if va is ABOVE_PRECISION or vb is ABOVE_PRECISION:
            continue
        if va + vb < ring.val_cap:
            assert vab == va + vb


# -- ring axioms (hypothesis) -----------------------------------------------------


@st.composite
def ring_and_elems(draw, count):
    p = draw(st.sampled_from([2, 3, 5]))
    e = draw(st.sampled_from([1, 2, 4, 5]))
    nd = draw(st.integers(min_value=1, max_value=4))
    ring = layer_make(p, PrecisionBudget(nd), e)
    elems = []
    for _ in range(count):
        n_terms = draw(st.integers(min_value=0, max_value=3))
        items = [
            (
                draw(st.integers(min_value=0, max_value=2 * e)),
                (),
                draw(st.integers(min_value=1, max_value=ring.coeff_mod)),
            )
            for _ in range(n_terms)
        ]
        elems.append(ring._from_items(items))
    return ring, elems


@settings(max_examples=200, deadline=None, derandomize=True)
@given(ring_and_elems(3))
def test_ring_axioms(data):
    ring, (x, y, z) = data
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x + (y + z) == (x + y) + z
    assert x + (-x) == ring.zero()
    assert x * ring.one() == x


@settings(max_examples=200, deadline=None, derandomize=True)
@given(ring_and_elems(2))
def test_reduce_mod_ideal_is_a_ring_hom(data):
    ring, (x, y) = data
    red = ring.reduce_mod_ideal
    assert red(x * y) == red(x) * red(y)
    assert red(x + y) == red(x) + red(y)
    assert red(ring.one()).is_one()


# -- reduction examples -----------------------------------------------------------


def test_reduce_examples():
    base = O(e=1)
    assert base.reduce_mod_ideal(base.from_int(5)).is_zero()

    ring = O()
    x = ring.parse("1 + t^{1/5} + t^{7/5}")  # t^7 = 5 t^2 vanishes mod 5
    q = ring.reduce_mod_ideal(x)
    assert q == q.ring.parse("1 + T^{1/5}")

    kummer = O(e=50, ideal_exp=Fraction(3, 25), e0=2, level=2)
    q2 = kummer.reduce_mod_ideal(kummer.parse("2 + 3*t^{3/50}"))
    # oracle: valuation 3/50 < 6/50, so the term survives
    assert q2 == q2.ring.parse("2 + 3*T^{3/50}")
    assert q2.ring.window == 6


def test_lift_section_of_reduce():
    ring = O()
    rng = random.Random(3)
    for _ in range(50):
        q = ring.quotient_ring().random_element(rng, 3)
        assert ring.reduce_mod_ideal(ring.lift(q)) == q


# -- torsion ---------------------------------------------------------------------


def test_torsion_eisenstein_layer_is_free():
    ring = O()
    rep = ring.torsion_submodule(ring.t_gen())
    assert rep.genuine == [] and rep.is_torsion_free


def test_torsion_base_layer_is_all_artifact():
    base = O(e=1)
    rep = base.torsion_submodule(base.from_int(5))
    assert rep.genuine == []
    assert rep.artifact_dim == base.rank
    assert "PRECISION_ARTIFACT" in rep.flags


def test_torsion_product_with_killed_factor():
    base = O(e=1)
    prod = ProductRing((base, base))
    f = prod.wrap([base.from_int(5), base.zero()])
    rep = prod.torsion_submodule(f)
    # oracle: (0, x) is genuinely killed by (5, 0) in the product
    assert len(rep.genuine) == base.rank
    assert all(part.is_zero() for g in rep.genuine for part in (g.parts[0],))


def test_torsion_unit_is_empty():
    ring = O()
    rep = ring.torsion_submodule(ring.one() + ring.t_gen())
    assert rep.genuine == [] and rep.artifact_dim == 0


# -- variables ----------------------------------------------------------------------


def test_variable_degree_cap_marks_lossy():
    ring = layer_make(5, PrecisionBudget(3, var_degree_cap=Fraction(2)), 5, num_vars=1)
    x = ring.var_gen(0)
    assert (x * x * x).is_zero()
    assert (x * x * x).lossy
    assert not (x * x).lossy


def test_variable_lattice_parse_and_render():
    ring = layer_make(
        5, PrecisionBudget(3, var_degree_cap=Fraction(2)), 25, num_vars=1, level=2
    )
    x = ring.parse("3*x1^{2/25} * t^{1/25}")
    assert x.to_text() == "3*t^{1/25}*x1^{2/25}"
    assert ring.parse(x.to_text()) == x


# -- parser / renderer ---------------------------------------------------------------


def test_parse_examples():
    ring = O()
    x = ring.parse("1 + 2*t^{1/5}")
    assert x == ring.one() + ring.t_gen() * 2
    assert ring.parse("p") == ring.from_int(5)
    assert ring.parse("t^2") == ring.t_gen() ** 2
    assert ring.parse("1 - t^2 + t^2") == ring.one()


def test_parse_rejects_garbage():
    ring = O()
    for bad in ("", "t^{1/3}", "q + 1", "1 +", "t^^2", "x1"):
        with pytest.raises(ParseError):
            ring.parse(bad)


def test_render_roundtrip_random():
    rng = random.Random(4)
    for ring in (O(), O(e=1), O(e=50, ideal_exp=Fraction(3, 25), e0=2, level=2)):
        for _ in range(100):
            x = ring.random_element(rng, 4)
            assert ring.parse(x.to_text()) == x


def test_render_roundtrip_charp():
    ring = O().quotient_ring()
    rng = random.Random(5)
    for _ in range(100):
        x = ring.random_element(rng, 4)
        assert ring.parse(x.to_text()) == x


# -- units ----------------------------------------------------------------------------


def test_invert_one_plus_ideal():
    ring = O()
    rng = random.Random(6)
    for _ in range(50):
        z = ring.f0() * ring.random_element(rng, 3)
        u = ring.one() + z
        assert u * ring.invert(u) == ring.one()


def test_invert_rejects_non_units():
    ring = O()
    with pytest.raises(NotInvertible):
        ring.invert(ring.t_gen())
    with pytest.raises(NotInvertible):
        ring.invert(ring.from_int(5))


def test_divide_by_monomial_roundtrip():
    ring = O(N=4)
    x = ring.parse("5*t^{2/5} + t^{4/5}")
    q = x.divide_by_monomial(2)
    assert q * ring.monomial(2) == x
    with pytest.raises(ValueError):
        ring.one().divide_by_monomial(1)


def test_divide_with_p_borrow():
    ring = O(N=4)
    # 5 = t^5, so 5*t is divisible by t^3 with quotient t^3.
    x = ring.monomial(1, coeff=5)
    assert x.divide_by_monomial(3) == ring.monomial(3)


def test_pow_rejects_negative():
    with pytest.raises(ValueError):
        O().t_gen() ** -1
