"""Holomorphic coordinate changes acting on truncated defining polynomials.

A map ``z* = z + g(z, w)``, ``w* = w + f(z, w)`` sends the graph
``v = F(z, zbar, u)`` to a graph ``v* = F*(z*, zbar*, u*)``.  Restricted to the
hypersurface, ``w = u + i F``, so F* is characterised by

    F*(z + g(z, u + iF), conj, u + Re f(z, u + iF)) = F + Im f(z, u + iF).

Holomorphic polynomials in (z, w) are stored as `Poly` objects whose
triples are ``(i, 0, j)`` for ``z^i w^j``.  All truncation is by total degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Poly, RationalComplex, weight
from .errors import TransformError
from .parser import format_holomorphic, parse

DEFAULT_CUTOFF = 10


def _holomorphic(P: Poly, name: str) -> Poly:
    if any(b for _, b, _ in P.terms):
        raise TransformError(f"{name} must be holomorphic (no zbar)")
    return P


def _coeff_map(P: Poly) -> dict[tuple[int, int], RationalComplex]:
    return {(a, l): c for (a, _, l), c in sorted(P.terms.items())}


@dataclass(frozen=True)
class HoloMap:
    """Truncated normalised map (z, w) -> (z + g, w + f)."""

    g: Poly = field(default_factory=Poly)
    f: Poly = field(default_factory=Poly)
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        g = _holomorphic(self.g, "g").truncate(self.cutoff)
        f = _holomorphic(self.f, "f").truncate(self.cutoff)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", f)
        if g.coef(0, 0, 0) or f.coef(0, 0, 0):
            raise TransformError("map must fix the origin (no constant terms in f, g)")
        if g.coef(1, 0, 0):
            raise TransformError("g_z must vanish at the origin (no linear z term in g)")
        if f.coef(1, 0, 0):
            raise TransformError("f_z must vanish at the origin (no linear z term in f)")
        if f.coef(0, 0, 1):
            raise TransformError("f_w must vanish at the origin (no linear w term in f)")

    @classmethod
    def identity(cls, cutoff: int = DEFAULT_CUTOFF) -> "HoloMap":
        return cls(Poly(), Poly(), cutoff)

    @classmethod
    def from_coeffs(cls, g_coeffs=None, f_coeffs=None, cutoff: int = DEFAULT_CUTOFF) -> "HoloMap":
        """Build from maps (i, j) -> coefficient of z^i w^j."""
        g = Poly({(i, 0, j): c for (i, j), c in (g_coeffs or {}).items()})
        f = Poly({(i, 0, j): c for (i, j), c in (f_coeffs or {}).items()})
        return cls(g, f, cutoff)

    @property
    def g_coeffs(self):
        return _coeff_map(self.g)

    @property
    def f_coeffs(self):
        return _coeff_map(self.f)

    def alpha(self, j: int) -> RationalComplex:
        """Coefficient of the pure w^j term in g."""
        return self.g.coef(0, 0, j)

    def epsilon(self, j: int) -> RationalComplex:
        """Coefficient of the pure w^j term in f."""
        return self.f.coef(0, 0, j)

    def __str__(self):
        return f"g = {format_holomorphic(self.g)}; f = {format_holomorphic(self.f)}"


@dataclass(frozen=True)
class ShiftMap:
    """z -> z + sum_m delta_m w^m for m = 1..N, N = floor(1/(k mu))."""

    delta: tuple[RationalComplex, ...]

    def as_poly(self) -> Poly:
        return Poly({(0, 0, m): d for m, d in enumerate(self.delta, start=1)})

    def to_holomap(self, cutoff: int = DEFAULT_CUTOFF) -> HoloMap:
        return HoloMap(self.as_poly(), Poly(), cutoff)


def shift_length(k: int, mu) -> int:
    mu = Fraction(mu)
    if mu <= 0:
        raise TransformError("shift maps need mu > 0 (N = floor(1/(k mu)) is infinite)")
    return int(1 / (k * mu))


# ---------------------------------------------------------------------------
# Holomorphic substitution


def _compose_holo(P: Poly, zs: Poly, ws: Poly, cutoff: int) -> Poly:
    """P(zs, ws) for holomorphic P; zs, ws may be arbitrary series without constant term."""
    return P.compose(zs, zs.conjugate(), ws, cutoff)


def _graph_images(F: Poly, T: HoloMap, z: Poly, u: Poly, cutoff: int):
    """Images of z* and u* and the right-hand side at the point (z, u) of the graph.

    `z`, `u` are series (u real); returns (z*, u*, F + Im f) with w = u + iF.
    """
    Fz = F.compose(z, z.conjugate(), u, cutoff)
    w = u + Fz.scale(RationalComplex(0, 1))
    g = _compose_holo(T.g, z, w, cutoff)
    f = _compose_holo(T.f, z, w, cutoff)
    return z + g, u + f.real_part(), Fz + f.imag_part()


def apply_holomorphic(F: Poly, T: HoloMap, cutoff: int | None = None) -> Poly:
    """The defining polynomial F* of the image of ``v = F`` under T.

    The graph map (z, u) -> (z*, u*) is inverted as a formal series by
    fixed-point iteration, then composed with the right-hand side.  The
    defining identity is re-checked exactly through `cutoff`.
    """
    if not F.is_real():
        raise TransformError("defining polynomial must be real")
    if F.coef(0, 0, 0) or F.coef(1, 0, 0) or F.coef(0, 0, 1):
        raise TransformError("defining polynomial must vanish to second order at the origin")
    cutoff = T.cutoff if cutoff is None else cutoff
    F = F.truncate(cutoff)
    Z, U = Poly.z(), Poly.u()
    # inverse of (z, u) -> (z*, u*):  z = Z - g(z, u + iF),  u = U - Re f(z, u + iF)
    z, u = Z, U
    for _ in range(2 * cutoff + 2):
        Fz = F.compose(z, z.conjugate(), u, cutoff)
        w = u + Fz.scale(RationalComplex(0, 1))
        z_next = Z - _compose_holo(T.g, z, w, cutoff)
        u_next = U - _compose_holo(T.f, z, w, cutoff).real_part()
        if z_next == z and u_next == u:
            break
        z, u = z_next, u_next
    else:
        raise TransformError("formal inverse did not stabilise; map is not normalised")
    zs, us, rhs = _graph_images(F, T, Z, U, cutoff)
    F_star = rhs.compose(z, z.conjugate(), u, cutoff)
    # exact residual check of the defining identity
    residual = F_star.compose(zs, zs.conjugate(), us, cutoff) - rhs
    if residual:
        raise TransformError(f"transform residual is nonzero ({len(residual)} terms)")
    if not F_star.is_real():
        raise TransformError("transformed polynomial lost reality")
    return F_star


def compose(T1: HoloMap, T2: HoloMap, cutoff: int | None = None) -> HoloMap:
    """The map T1 after T2."""
    cutoff = min(T1.cutoff, T2.cutoff) if cutoff is None else cutoff
    z1 = Poly.z() + T2.g
    w1 = Poly.u() + T2.f
    g = T2.g + _compose_holo(T1.g, z1, w1, cutoff)
    f = T2.f + _compose_holo(T1.f, z1, w1, cutoff)
    return HoloMap(g, f, cutoff)


def inverse(T: HoloMap, cutoff: int | None = None) -> HoloMap:
    """Formal inverse of T through `cutoff`."""
    cutoff = T.cutoff if cutoff is None else cutoff
    Z, W = Poly.z(), Poly.u()
    z, w = Z, W
    for _ in range(2 * cutoff + 2):
        z_next = Z - _compose_holo(T.g, z, w, cutoff)
        w_next = W - _compose_holo(T.f, z, w, cutoff)
        if z_next == z and w_next == w:
            break
        z, w = z_next, w_next
    else:
        raise TransformError("formal inverse did not stabilise")
    return HoloMap(z - Z, w - W, cutoff)


# ---------------------------------------------------------------------------
# Shifts


def apply_shift(P: Poly, S: ShiftMap, k: int, mu) -> Poly:
    """Substitute z -> z + sum delta_m u^m and keep terms of weight <= 1."""
    mu = Fraction(mu)
    shifted = P.substitute(S.as_poly())
    return shifted.filter(lambda key: weight(key, k, mu) <= 1)


def decompose_delta(T: HoloMap, k: int, mu) -> ShiftMap:
    """Shift coefficients cancelling the pure-w part of g up to order N.

    With S the shift z -> z + sum delta_m w^m, the g of ``S after T`` has
    pure-w coefficient ``alpha_j + sum_m delta_m [w^j](w + f(0, w))^m`` at
    order j; the recursion sets these to zero for j = 1..N.
    """
    N = shift_length(k, mu)
    fw = Poly.u() + T.f.filter(lambda key: key[0] == 0)
    powers = [Poly.const(1)]
    for _ in range(N):
        powers.append(powers[-1].mul(fw, N))
    delta: list[RationalComplex] = []
    for j in range(1, N + 1):
        acc = -T.alpha(j)
        for m, d in enumerate(delta, start=1):
            acc = acc - d * powers[m].coef(0, 0, j)
        delta.append(acc)
    return ShiftMap(tuple(delta))


# ---------------------------------------------------------------------------
# Text form


def parse_holomap(text: str, cutoff: int = DEFAULT_CUTOFF) -> HoloMap:
    """Parse ``g = ...; f = ...`` (either part optional) into a HoloMap."""
    parts = {"g": Poly(), "f": Poly()}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, sep, expr = chunk.partition("=")
        name = name.strip()
        if not sep or name not in parts:
            raise TransformError(f"expected 'g = ...' or 'f = ...', got {chunk!r}")
        parts[name] = parse(expr, holomorphic=True)
    return HoloMap(parts["g"], parts["f"], cutoff)
