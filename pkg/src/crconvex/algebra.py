"""Exact sparse polynomials in (z, zbar, u) and Wirtinger calculus.

A `Poly` maps exponent triples ``(a, b, l)`` (powers of z, zbar, u) to
`RationalComplex` coefficients.  A polynomial is *real* when
``coef(a, b, l) == conj(coef(b, a, l))`` for every triple; such polynomials
take real values for complex z and real u.  The same container also holds
holomorphic polynomials in (z, w) by convention ``(i, 0, j) -> z^i w^j``
(see `crconvex.transform`).

Floating point only appears in the evaluation helpers at the bottom.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import RealityError

Triple = tuple[int, int, int]

_REALITY_RTOL = 1e-12


class RationalComplex:
    """Gaussian rational ``re + im*i`` with exact `Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, RationalComplex):
            re, im = re.re, re.im + Fraction(im)
        elif isinstance(re, complex):
            re, im = Fraction(re.real), Fraction(re.imag) + Fraction(im)
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "RationalComplex":
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @classmethod
    def coerce(cls, value) -> "RationalComplex":
        if isinstance(value, RationalComplex):
            return value
        return cls(value)

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return RationalComplex._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return RationalComplex._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        if not o.im:
            return RationalComplex._raw(self.re * o.re, self.im * o.re)
        if not self.im:
            return RationalComplex._raw(self.re * o.re, self.re * o.im)
        return RationalComplex._raw(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        d = o.abs2()
        if not d:
            raise ZeroDivisionError("division by zero RationalComplex")
        return self * RationalComplex._raw(o.re / d, -o.im / d)

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return RationalComplex._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if n < 0:
            return RationalComplex(1) / self ** (-n)
        result = RationalComplex._raw(Fraction(1), Fraction(0))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "RationalComplex":
        return RationalComplex._raw(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return float(abs(complex(self)))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        if not self.im:
            return f"RationalComplex({self.re})"
        return f"RationalComplex({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"


def _coerce_or_none(value):
    if isinstance(value, RationalComplex):
        return value
    if isinstance(value, (int, Rational)):
        return RationalComplex._raw(Fraction(value), Fraction(0))
    if isinstance(value, (float, complex)):
        return RationalComplex(value)
    return None


ZERO = RationalComplex(0)
ONE = RationalComplex(1)
I = RationalComplex(0, 1)

VARIABLES = ("z", "zbar", "u")


class Poly:
    """Immutable sparse polynomial in (z, zbar, u) with Gaussian-rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Triple, object] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[Triple, RationalComplex] = {}
        for key, c in items:
            a, b, l = key
            if a < 0 or b < 0 or l < 0:
                raise ValueError(f"negative exponent in {key}")
            c = RationalComplex.coerce(c)
            prev = clean.get((a, b, l))
            if prev is not None:
                c = prev + c
            clean[(a, b, l)] = c
        self._terms = {k: v for k, v in clean.items() if v}
        self._hash = None

    @classmethod
    def _from_clean(cls, terms: dict) -> "Poly":
        obj = object.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors -------------------------------------------------------
    @classmethod
    def monomial(cls, a: int, b: int, l: int, c=1) -> "Poly":
        return cls({(a, b, l): c})

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(0, 0, 0): c})

    @classmethod
    def z(cls) -> "Poly":
        return cls.monomial(1, 0, 0)

    @classmethod
    def zbar(cls) -> "Poly":
        return cls.monomial(0, 1, 0)

    @classmethod
    def u(cls) -> "Poly":
        return cls.monomial(0, 0, 1)

    @classmethod
    def abs_z(cls, k: int, c=1) -> "Poly":
        """``c*|z|^k`` for even k."""
        if k % 2:
            raise ValueError("|z|^k is polynomial only for even k")
        return cls.monomial(k // 2, k // 2, 0, c)

    # container protocol -------------------------------------------------
    @property
    def terms(self) -> Mapping[Triple, RationalComplex]:
        return MappingProxyType(self._terms)

    def coef(self, a: int, b: int, l: int = 0) -> RationalComplex:
        return self._terms.get((a, b, l), ZERO)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._terms == other._terms
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self == Poly.const(o)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in sorted(self._terms.items()))
        return f"Poly({{{inner}}})"

    def __str__(self):
        from .parser import format_poly

        try:
            return format_poly(self)
        except RealityError:
            return repr(self)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            prev = out.get(k)
            if prev is None:
                out[k] = c
            else:
                s = prev + c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return Poly._from_clean(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._from_clean({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self.mul(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            if isinstance(other, Poly) and other.is_constant() and other:
                o = other.coef(0, 0, 0)
            else:
                return NotImplemented
        inv = RationalComplex(1) / o
        return self.scale(inv)

    def scale(self, c) -> "Poly":
        c = RationalComplex.coerce(c)
        if not c:
            return Poly()
        return Poly._from_clean({k: v * c for k, v in self._terms.items()})

    def mul(self, other: "Poly", cutoff: int | None = None) -> "Poly":
        """Product, discarding terms of total degree above `cutoff`."""
        out: dict[Triple, RationalComplex] = {}
        left = list(self._terms.items())
        right = list(other._terms.items())
        if cutoff is not None:
            right.sort(key=lambda kv: sum(kv[0]))
        for (a1, b1, l1), c1 in left:
            d1 = a1 + b1 + l1
            if cutoff is not None and d1 > cutoff:
                continue
            r1, i1 = c1.re, c1.im
            for (a2, b2, l2), c2 in right:
                if cutoff is not None and d1 + a2 + b2 + l2 > cutoff:
                    break
                key = (a1 + a2, b1 + b2, l1 + l2)
                r2, i2 = c2.re, c2.im
                if i1 or i2:
                    re = r1 * r2 - i1 * i2
                    im = r1 * i2 + i1 * r2
                else:
                    re = r1 * r2
                    im = i1
                prev = out.get(key)
                if prev is None:
                    out[key] = RationalComplex._raw(re, im)
                else:
                    out[key] = RationalComplex._raw(prev.re + re, prev.im + im)
        return Poly._from_clean({k: v for k, v in out.items() if v})

    def __pow__(self, n: int):
        return self.pow(n)

    def pow(self, n: int, cutoff: int | None = None) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result.mul(base, cutoff)
            n >>= 1
            if n:
                base = base.mul(base, cutoff)
        return result

    # structure ----------------------------------------------------------
    def conjugate(self) -> "Poly":
        """Complex conjugate as a function of (z, u) with u real."""
        return Poly._from_clean(
            {(b, a, l): c.conjugate() for (a, b, l), c in self._terms.items()}
        )

    def real_part(self) -> "Poly":
        return (self + self.conjugate()).scale(Fraction(1, 2))

    def imag_part(self) -> "Poly":
        return (self - self.conjugate()).scale(RationalComplex(0, Fraction(-1, 2)))

    def is_real(self) -> bool:
        for (a, b, l), c in self._terms.items():
            if self._terms.get((b, a, l), ZERO) != c.conjugate():
                return False
        return True

    def reality_defect(self) -> Triple | None:
        """First triple violating the conjugate pairing, or None."""
        for key in sorted(self._terms):
            a, b, l = key
            if self._terms.get((b, a, l), ZERO) != self._terms[key].conjugate():
                return key
        return None

    def is_constant(self) -> bool:
        return all(k == (0, 0, 0) for k in self._terms)

    def degree(self) -> int:
        """Total (unweighted) degree a+b+l; -1 for the zero polynomial."""
        return max((a + b + l for a, b, l in self._terms), default=-1)

    def truncate(self, cutoff: int) -> "Poly":
        return Poly._from_clean(
            {k: c for k, c in self._terms.items() if sum(k) <= cutoff}
        )

    def filter(self, predicate) -> "Poly":
        return Poly._from_clean({k: c for k, c in self._terms.items() if predicate(k)})

    def is_z_harmonic(self) -> bool:
        return all(a == 0 or b == 0 for a, b, _ in self._terms)

    def u_slice(self, l: int) -> "Poly":
        """Coefficient of u^l, as a u-free polynomial."""
        return Poly._from_clean(
            {(a, b, 0): c for (a, b, ll), c in self._terms.items() if ll == l}
        )

    # calculus -----------------------------------------------------------
    def diff(self, var: str) -> "Poly":
        """Formal partial derivative in one of 'z', 'zbar', 'u'."""
        idx = VARIABLES.index(var)
        out = {}
        for key, c in self._terms.items():
            e = key[idx]
            if e == 0:
                continue
            new = list(key)
            new[idx] = e - 1
            out[tuple(new)] = c * e
        return Poly._from_clean(out)

    def laplacian_z(self) -> "Poly":
        """Euclidean Laplacian in the real coordinates of z: ``4 d_z d_zbar``."""
        out = {}
        for (a, b, l), c in self._terms.items():
            if a and b:
                out[(a - 1, b - 1, l)] = c * (4 * a * b)
        return Poly._from_clean(out)

    # substitution -------------------------------------------------------
    def compose(self, zs: "Poly", zbs: "Poly", us: "Poly", cutoff: int) -> "Poly":
        """``P(zs, zbs, us)`` truncated at total degree `cutoff`.

        The substituted polynomials must have no constant term, otherwise the
        truncation would be wrong.
        """
        for s in (zs, zbs, us):
            if s.coef(0, 0, 0):
                raise ValueError("substituted series must vanish at the origin")
        zp = _PowerCache(zs, cutoff)
        zbp = _PowerCache(zbs, cutoff)
        up = _PowerCache(us, cutoff)
        mixed: dict[tuple[int, int], Poly] = {}
        result = Poly()
        for (a, b, l), c in sorted(self._terms.items()):
            if a + b + l > cutoff:
                continue
            ab = mixed.get((a, b))
            if ab is None:
                ab = zp[a].mul(zbp[b], cutoff)
                mixed[(a, b)] = ab
            result = result + ab.mul(up[l], cutoff).scale(c)
        return result

    def substitute(self, q: "Poly", cutoff: int | None = None) -> "Poly":
        """Shift ``z -> z + q(u)``, ``zbar -> zbar + conj(q)(u)``.

        `q` must be a polynomial in u alone.  Exact binomial expansion; terms
        above `cutoff` (default: no truncation) are discarded.
        """
        if any(a or b for a, b, _ in q._terms):
            raise ValueError("shift must depend on u only")
        if cutoff is None:
            cutoff = max(self.degree(), 0) * max(q.degree(), 1)
        zs = Poly.z() + q
        zbs = Poly.zbar() + q.conjugate()
        zp = _PowerCache(zs, cutoff)
        zbp = _PowerCache(zbs, cutoff)
        result = Poly()
        for (a, b, l), c in sorted(self._terms.items()):
            part = zp[a].mul(zbp[b], cutoff).mul(Poly.monomial(0, 0, l, c), cutoff)
            result = result + part
        return result


class _PowerCache:
    def __init__(self, base: Poly, cutoff: int):
        self.base = base
        self.cutoff = cutoff
        self.powers = [Poly.const(1)]

    def __getitem__(self, n: int) -> Poly:
        while len(self.powers) <= n:
            self.powers.append(self.powers[-1].mul(self.base, self.cutoff))
        return self.powers[n]


def _as_poly(value) -> Poly | None:
    if isinstance(value, Poly):
        return value
    c = _coerce_or_none(value)
    if c is None:
        return None
    return Poly.const(c)


# ---------------------------------------------------------------------------
# Numeric evaluation


class CompiledPoly:
    """Vectorised float evaluator for a fixed `Poly`."""

    def __init__(self, poly: Poly):
        self.keys = np.array(list(poly.terms.keys()), dtype=int).reshape(-1, 3)
        self.coefs = np.array([complex(c) for c in poly.terms.values()], dtype=complex)
        self.max_a = int(self.keys[:, 0].max(initial=0))
        self.max_b = int(self.keys[:, 1].max(initial=0))
        self.max_l = int(self.keys[:, 2].max(initial=0))

    def __call__(self, z, u, powers=None):
        z = np.asarray(z, dtype=complex)
        u = np.asarray(u, dtype=float)
        shape = np.broadcast(z, u).shape
        if len(self.coefs) == 0:
            return np.zeros(shape, dtype=complex)
        if powers is None:
            powers = PowerTable(z, u)
        zp = powers.z(self.max_a)
        zbp = powers.zbar(self.max_b)
        up = powers.u(self.max_l)
        out = np.zeros(shape, dtype=complex)
        for (a, b, l), c in zip(self.keys, self.coefs):
            out += c * zp[a] * zbp[b] * up[l]
        return out


class PowerTable:
    """Cached integer powers of z, zbar and u over a batch of points."""

    def __init__(self, z, u):
        z = np.asarray(z, dtype=complex)
        u = np.asarray(u, dtype=float)
        z, u = np.broadcast_arrays(z, u)
        ones = np.ones(z.shape, dtype=complex)
        self._z = [ones, z]
        self._zb = [ones, np.conj(z)]
        self._u = [ones, u.astype(complex)]

    @staticmethod
    def _extend(table, n):
        while len(table) <= n:
            table.append(table[-1] * table[1])
        return table

    def z(self, n):
        return self._extend(self._z, n)

    def zbar(self, n):
        return self._extend(self._zb, n)

    def u(self, n):
        return self._extend(self._u, n)


def evaluate_complex(P: Poly, z, u):
    return CompiledPoly(P)(z, u)


def evaluate(P: Poly, z, u) -> float:
    """Evaluate a real polynomial; a non-negligible imaginary part is an error."""
    val = complex(CompiledPoly(P)(complex(z), float(u)))
    scale = sum(abs(complex(c)) for c in P.terms.values()) * max(1.0, abs(z), abs(u)) ** max(P.degree(), 0)
    if abs(val.imag) > _REALITY_RTOL * max(scale, 1e-300):
        raise RealityError(
            f"polynomial evaluated to non-real value {val}; coefficient map is corrupted"
        )
    return val.real


@dataclass(frozen=True)
class HessianForm:
    """Value of the real z-Hessian of P at (z, u) in direction zeta."""

    z: complex
    u: float
    zeta: complex
    value: float


class ZDerivatives:
    """Compiled ``P_zz`` and ``P_zzbar`` of a real polynomial."""

    def __init__(self, P: Poly):
        self.pzz = CompiledPoly(P.diff("z").diff("z"))
        self.pzzb = CompiledPoly(P.diff("z").diff("zbar"))

    def __call__(self, z, u, powers=None):
        if powers is None:
            powers = PowerTable(z, u)
        return self.pzz(z, u, powers), self.pzzb(z, u, powers).real

    def hessian(self, z, u, zeta):
        pzz, pzzb = self(z, u)
        zeta = np.asarray(zeta, dtype=complex)
        return 2.0 * np.real(pzz * zeta**2) + 2.0 * pzzb * np.abs(zeta) ** 2

    def min_over_directions(self, z, u, powers=None):
        """``min_{|zeta|=1}`` of the Hessian form and the minimising zeta."""
        pzz, pzzb = self(z, u, powers)
        value = 2.0 * (pzzb - np.abs(pzz))
        zeta = np.exp(0.5j * (np.pi - np.angle(pzz)))
        return value, zeta


def hessian_z(P: Poly, z, u, zeta) -> float:
    """``sum d^2P/dx_i dx_j xi_i xi_j`` with z = x1 + i x2 and zeta = xi1 + i xi2."""
    return float(ZDerivatives(P).hessian(complex(z), float(u), complex(zeta)))


def hessian_form(P: Poly, z, u, zeta) -> HessianForm:
    return HessianForm(complex(z), float(u), complex(zeta), hessian_z(P, z, u, zeta))


def real_hessian(P: Poly, z, u) -> np.ndarray:
    """3x3 Hessian of P in the real variables (x, y, u) at one point."""
    d = {
        "zz": P.diff("z").diff("z"),
        "zzb": P.diff("z").diff("zbar"),
        "zbzb": P.diff("zbar").diff("zbar"),
        "zu": P.diff("z").diff("u"),
        "zbu": P.diff("zbar").diff("u"),
        "uu": P.diff("u").diff("u"),
    }
    v = {name: complex(evaluate_complex(q, complex(z), float(u))) for name, q in d.items()}
    # d/dx = d_z + d_zbar, d/dy = i (d_z - d_zbar)
    hxx = v["zz"] + 2 * v["zzb"] + v["zbzb"]
    hyy = -(v["zz"] - 2 * v["zzb"] + v["zbzb"])
    hxy = 1j * (v["zz"] - v["zbzb"])
    hxu = v["zu"] + v["zbu"]
    hyu = 1j * (v["zu"] - v["zbu"])
    hess = np.array(
        [[hxx, hxy, hxu], [hxy, hyy, hyu], [hxu, hyu, v["uu"]]], dtype=complex
    )
    return hess.real


def diff(P: Poly, var: str) -> Poly:
    return P.diff(var)


def laplacian_z(P: Poly) -> Poly:
    return P.laplacian_z()


def substitute(P: Poly, q: Poly, cutoff: int | None = None) -> Poly:
    return P.substitute(q, cutoff)


def weight(triple: Triple, k: int, mu: Fraction) -> Fraction:
    """Weight ``(a+b)/k + mu*l`` of the monomial z^a zbar^b u^l."""
    a, b, l = triple
    return Fraction(a + b, k) + mu * l
