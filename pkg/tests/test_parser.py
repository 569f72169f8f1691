from fractions import Fraction

import pytest
from hypothesis import given, settings

from crconvex.algebra import Poly, RationalComplex
from crconvex.errors import ParseError, RealityError
from crconvex.parser import format_holomorphic, format_poly, parse

from .test_algebra import real_polys


def test_kohn_nirenberg_polynomial():
    p = parse("|z|^8 + (15/7)*|z|^2*Re(z^6)")
    assert dict(p.terms) == {
        (4, 4, 0): RationalComplex(1),
        (7, 1, 0): RationalComplex(Fraction(15, 14)),
        (1, 7, 0): RationalComplex(Fraction(15, 14)),
    }


def test_juxtaposition_and_unicode_operators():
    assert parse("2 |z|^2 u") == parse("2*|z|^2*u")
    assert parse("|z|^2 − u·u") == parse("|z|^2 - u^2")
    assert parse("u**3") == parse("u^3")


def test_re_im_and_complex_literals():
    p = parse("Re((1 + 2 i) z^2)")
    assert p.coef(2, 0, 0) == RationalComplex(Fraction(1, 2), 1)
    assert p.coef(0, 2, 0) == RationalComplex(Fraction(1, 2), -1)
    assert parse("Im(z^2)") == parse("Re(-i*z^2)")


def test_decimals_are_exact():
    assert parse("0.25*u^2").coef(0, 0, 2) == Fraction(1, 4)


def test_division_by_constant_only():
    assert parse("u^2/4") == parse("(1/4) u^2")
    with pytest.raises(ParseError):
        parse("u^2/u")
    with pytest.raises(ParseError):
        parse("u^2/0")


def test_odd_abs_power_rejected():
    with pytest.raises(ParseError, match="odd power"):
        parse("|z|^3")


def test_non_real_input_names_monomial():
    with pytest.raises(RealityError, match="z\\^3"):
        parse("z^3 + |z|^2")


@pytest.mark.parametrize("text", ["", "z^", "(z", "u + * u", "q^2", "z^-1", "2 @ z"])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse("|z|^2 + qq")
    assert info.value.pos == 8


def test_holomorphic_mode():
    g = parse("2*w + (1+i) z w^2", holomorphic=True)
    assert g.coef(0, 0, 1) == 2 and g.coef(1, 0, 2) == RationalComplex(1, 1)
    with pytest.raises(ParseError):
        parse("zbar*w", holomorphic=True)
    with pytest.raises(ParseError):
        parse("w", holomorphic=False)
    assert format_holomorphic(g) == "2*w + (1 + i)*z*w^2"


def test_format_examples():
    assert format_poly(parse("|z|^8 + (|z|^6 + |z|^2 Re(z^4))*u^2")) == \
        "|z|^6*u^2 + |z|^2*Re(z^4)*u^2 + |z|^8"
    assert format_poly(Poly()) == "0"
    assert format_poly(parse("-u^2 + Re((1/2 - 3 i) z^3 u)")) == "-u^2 + Re((1/2 - 3 i)*z^3)*u"


@given(real_polys(max_deg=6, max_terms=6))
@settings(max_examples=80, deadline=None)
def test_format_round_trip(p):
    assert parse(format_poly(p)) == p
