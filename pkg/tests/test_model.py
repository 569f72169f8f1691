import random
from fractions import Fraction

import pytest

from crconvex.algebra import Poly, RationalComplex
from crconvex.errors import ModelError
from crconvex.model import (
    WeightVector,
    analyze_model,
    compute_type,
    compute_weight,
    generalized_model,
    is_weighted_homogeneous,
    kn_invariants,
)
from crconvex.parser import parse

from .oracles import poly_value_exact

M_A = "|z|^8 + (|z|^6 + {a}*|z|^2 Re(z^4))*u^2 + |z|^2*u^8"

MODEL_INPUTS = [
    "|z|^4",
    "|z|^8 + (15/7)*|z|^2*Re(z^6)",
    M_A.format(a=1),
    M_A.format(a="1/2"),
    "|z|^4 + Re(z^4) + |z|^2 u^2 + u^3 |z|^2",
    "|z|^6 + |z|^2 u^2 + Re(z^3 u) + u^5",
    "|z|^2 + u^2",
    "Re(z^2) + |z|^4 + Re(z^2 zbar^2 z) + |z|^2 u",
]


def test_type_and_weight_of_ma():
    F = parse(M_A.format(a=1))
    assert compute_type(F) == 8
    assert compute_weight(F, 8) == Fraction(1, 8)
    m = analyze_model(F)
    assert m.model == parse("|z|^8 + (|z|^6 + |z|^2 Re(z^4))*u^2")
    assert m.residual_terms == parse("|z|^2*u^8")
    assert m.standard_model == Poly.abs_z(8)
    assert m.weight_pair == (7, 1)


def test_mu_zero_model_is_standard_part():
    F = parse("Re(z^2) + |z|^4 + |z|^4 u^3 + u^5")
    m = analyze_model(F)
    assert (m.type_k, m.mu) == (4, 0)
    assert m.model == Poly.abs_z(4)
    assert m.removable_terms == parse("Re(z^2) + u^5")
    assert m.residual_terms == parse("|z|^4 u^3")


def test_harmonic_u_terms_warn():
    m = analyze_model(parse("|z|^4 + |z|^2 u^2 + Re(z u)"))
    assert m.removable_terms == parse("Re(z u)")
    assert m.warnings


def test_infinite_type_and_odd_type_rejected():
    with pytest.raises(ModelError, match="infinite type"):
        compute_type(parse("Re(z^2) + u^2"))
    with pytest.raises(ModelError, match="odd"):
        compute_type(parse("Re(z^2 zbar) + |z|^4"))


def test_low_weight_mixed_term_rejected():
    with pytest.raises(ModelError, match="adapted"):
        generalized_model(parse("|z|^4 + |z|^2 u"), 4, Fraction(1, 4))


def test_weight_vector():
    w = WeightVector.from_type(8, Fraction(1, 8))
    assert w.integer_pair() == (7, 1)
    assert w.weight((1, 1, 2)) == Fraction(1, 2)
    assert WeightVector.from_type(6, Fraction(1, 3)).integer_pair() == (4, 1)
    with pytest.raises(ValueError):
        WeightVector(Fraction(2, 5), Fraction(0))


@pytest.mark.parametrize("text", MODEL_INPUTS)
def test_generalized_model_weighted_homogeneous_exact(text):
    m = analyze_model(parse(text))
    k, mu = m.type_k, m.mu
    P = m.model
    if mu:
        assert is_weighted_homogeneous(P, k, mu)
    rng = random.Random(hash(text) & 0xFFFF)
    # t = s^L with L a common multiple of the weight denominators, so that
    # t^(1/k) and t^mu are rational
    L = k * (mu.denominator if mu else 1)
    for _ in range(10):
        s = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        t = s**L
        zs = s ** (L // k)
        us = s ** int(L * mu) if mu else Fraction(1)
        z = (Fraction(rng.randint(-5, 5), rng.randint(1, 5)), Fraction(rng.randint(-5, 5), 3))
        u = Fraction(rng.randint(-5, 5), rng.randint(1, 5)) if mu else Fraction(0)
        scaled = poly_value_exact(P.terms, (z[0] * zs, z[1] * zs), u * us)
        base = poly_value_exact(P.terms, z, u)
        assert scaled == (t * base[0], t * base[1])


def test_kn_invariants_exact():
    inv = kn_invariants(parse("|z|^8 + (15/7)*|z|^2*Re(z^6)"))
    assert inv.k == 8 and inv.a0 == 1
    assert inv.kappa_sq == {2: 0, 4: 0, 6: Fraction(225, 49)}
    assert inv.kappa_exact(6) == Fraction(15, 7)
    assert inv.nonzero() == [6]


def test_kn_invariants_complex_coefficient():
    inv = kn_invariants(parse("2|z|^6 + Re((3 + 4 i) z^4 zbar^2)"))
    # |a_2| = |3 + 4i| = 5 and a0 = 2
    assert inv.kappa_exact(2) == Fraction(5, 2)


def test_kn_invariants_require_positive_diagonal():
    with pytest.raises(ModelError):
        kn_invariants(parse("-|z|^4 + Re(z^3 zbar)"))
    with pytest.raises(ModelError):
        kn_invariants(Poly({(3, 1, 0): RationalComplex(1), (1, 3, 0): RationalComplex(1)}))
