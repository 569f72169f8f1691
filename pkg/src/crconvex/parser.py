"""Text form of defining polynomials.

Grammar (one-token lookahead)::

    expr   := ["+"|"-"] term (("+"|"-") term)*
    term   := factor (("*"|"/")? factor)*
    factor := atom ("^" integer)?
    atom   := number | "(" expr ")" | "z" | "zbar" | "u" | "i" | "|z|"
            | "Re" "(" expr ")" | "Im" "(" expr ")"

Numbers are integers or decimals and are kept exact; ``p/q`` is ordinary
division by a constant.  ``i`` is the imaginary unit, so complex literals
read naturally as ``(1/2 + 3/4 i)``.  With ``holomorphic=True`` the variable
``w`` is accepted in place of ``u`` and no reality check is made.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .algebra import Poly, RationalComplex
from .errors import ParseError, RealityError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?|\.\d+)
  | (?P<absz>\|\s*z\s*\|)
  | (?P<name>[A-Za-z_]+)
  | (?P<op>\*\*|[-+*/^()−·])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tok = m.group()
        if kind == "op":
            tok = {"−": "-", "·": "*", "**": "^"}.get(tok, tok)
        if kind != "ws":
            tokens.append(Token(kind, tok, pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, holomorphic: bool):
        self.tokens = tokenize(text)
        self.i = 0
        self.holomorphic = holomorphic

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.tok.pos)
        return self.advance()

    def parse(self) -> Poly:
        p = self.expr()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return p

    def expr(self) -> Poly:
        sign = 1
        if self.tok.text in "+-" and self.tok.kind == "op":
            sign = -1 if self.advance().text == "-" else 1
        result = self.term()
        if sign < 0:
            result = -result
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def _starts_factor(self) -> bool:
        t = self.tok
        return t.kind in ("num", "absz", "name") or t.text == "("

    def term(self) -> Poly:
        result = self.factor()
        while True:
            if self.tok.text == "*":
                self.advance()
                result = result * self.factor()
            elif self.tok.text == "/":
                pos = self.advance().pos
                divisor = self.factor()
                if not divisor.is_constant() or not divisor:
                    raise ParseError("division only by a nonzero constant", pos)
                result = result / divisor.coef(0, 0, 0)
            elif self._starts_factor():
                result = result * self.factor()
            else:
                return result

    def factor(self) -> Poly:
        start = self.tok
        base = self.atom()
        if self.tok.text == "^":
            self.advance()
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ParseError("exponent must be a nonnegative integer", t.pos)
            self.advance()
            n = int(t.text)
            if start.kind == "absz":
                if n % 2:
                    raise ParseError(f"odd power |z|^{n} is not a polynomial", t.pos)
                return Poly.abs_z(n)
            return base**n
        if start.kind == "absz":
            raise ParseError("|z| must carry an even exponent, e.g. |z|^2", start.pos)
        return base

    def atom(self) -> Poly:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Poly.const(Fraction(t.text))
        if t.kind == "absz":
            self.advance()
            if self.holomorphic:
                raise ParseError("|z| is not holomorphic", t.pos)
            return Poly()  # placeholder; factor() builds |z|^n
        if t.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if t.kind == "name":
            self.advance()
            name = t.text
            if name == "z":
                return Poly.z()
            if name == "i":
                return Poly.const(RationalComplex(0, 1))
            if name in ("zbar", "u", "Re", "Im") and self.holomorphic:
                raise ParseError(f"{name!r} is not allowed in a holomorphic expression", t.pos)
            if name == "w" and self.holomorphic:
                return Poly.u()
            if name == "zbar":
                return Poly.zbar()
            if name == "u":
                return Poly.u()
            if name in ("Re", "Im"):
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return inner.real_part() if name == "Re" else inner.imag_part()
            raise ParseError(f"unknown name {name!r}", t.pos)
        found = t.text or "end of input"
        raise ParseError(f"unexpected {found!r}", t.pos)


def parse(text: str, holomorphic: bool = False) -> Poly:
    """Parse `text` into an exact polynomial.

    Real mode (the default) rejects expressions that are not real-valued and
    names the first monomial lacking a conjugate partner.
    """
    poly = _Parser(text, holomorphic).parse()
    if not holomorphic:
        bad = poly.reality_defect()
        if bad is not None:
            raise RealityError(
                f"non-real polynomial: monomial {_monomial_text(*bad)} has no matching "
                "conjugate term"
            )
    return poly


# ---------------------------------------------------------------------------
# Formatting


def _monomial_text(a: int, b: int, l: int) -> str:
    parts = []
    for name, e in (("z", a), ("zbar", b), ("u", l)):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) or "1"


def _rational_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})"


def _complex_text(c: RationalComplex) -> str:
    re_, im = c.re, c.im
    im_abs = abs(im)
    im_part = "i" if im_abs == 1 else f"{_bare(im_abs)} i"
    if not re_:
        return f"({'-' if im < 0 else ''}{im_part})"
    return f"({_bare(re_)} {'-' if im < 0 else '+'} {im_part})"


def _bare(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _sort_key(key):
    a, b, l = key
    return (a + b, l, a)


def format_poly(P: Poly) -> str:
    """Canonical text: diagonal terms as ``|z|^k``, conjugate pairs as ``Re(...)``.

    Terms are ordered by (a+b, l, a).  ``parse(format_poly(P)) == P`` for every
    real polynomial.
    """
    bad = P.reality_defect()
    if bad is not None:
        raise RealityError(f"cannot format non-real polynomial (monomial {_monomial_text(*bad)})")
    pieces: list[tuple[int, str]] = []  # (sign, body)
    for key in sorted(P.terms, key=_sort_key):
        a, b, l = key
        if a < b:
            continue
        c = P.terms[key]
        factors = []
        if a == b:
            coef = c.re
            if a:
                factors.append(f"|z|^{2 * a}")
        else:
            c2 = c * 2
            if not c2.im:
                coef = c2.re
                inner = _monomial_text(a - b, 0, 0)
            else:
                coef = Fraction(1)
                inner = f"{_complex_text(c2)}*{_monomial_text(a - b, 0, 0)}"
            if b:
                factors.append(f"|z|^{2 * b}")
            factors.append(f"Re({inner})")
        if l:
            factors.append(_monomial_text(0, 0, l))
        sign = -1 if coef < 0 else 1
        mag = abs(coef)
        if mag != 1 or not factors:
            factors.insert(0, _rational_text(mag))
        pieces.append((sign, "*".join(factors)))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] < 0 else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += (" - " if sign < 0 else " + ") + body
    return out


def format_holomorphic(P: Poly) -> str:
    """Text for a holomorphic polynomial in (z, w) stored as (i, 0, j) triples."""
    pieces = []
    for (a, _, l), c in sorted(P.terms.items(), key=lambda kv: (kv[0][0] + kv[0][2], kv[0][2])):
        mono = "*".join(
            p for p in (
                ("z" if a == 1 else f"z^{a}") if a else "",
                ("w" if l == 1 else f"w^{l}") if l else "",
            ) if p
        )
        coef = _bare(c.re) if not c.im else _complex_text(c)
        if not c.im and c.re.denominator != 1:
            coef = f"({coef})"
        pieces.append(coef if not mono else (mono if c == 1 else f"{coef}*{mono}"))
    return " + ".join(pieces) or "0"
