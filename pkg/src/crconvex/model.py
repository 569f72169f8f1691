"""Type, nontangential weight and generalized model of a prepared defining function.

Input polynomials F describe ``v = F(z, zbar, u)`` in prepared coordinates:
the u-free part starts with z-harmonic terms only, up to the first even
degree k that carries a non-harmonic monomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Poly, Triple, weight
from .errors import ModelError


def _is_mixed(key: Triple) -> bool:
    return key[0] >= 1 and key[1] >= 1


@dataclass(frozen=True)
class WeightVector:
    """Weights (1/k, mu) of z and u."""

    lam1: Fraction
    lam2: Fraction

    def __post_init__(self):
        if self.lam1 <= 0 or self.lam1.numerator != 1:
            raise ValueError("first weight must be 1/n for a positive integer n")
        if self.lam2 < 0:
            raise ValueError("second weight must be nonnegative")
        if self.lam2 > 0 and self.integer_pair() is None:
            raise ValueError(f"({self.lam1}, {self.lam2}) is not a weight vector")

    @classmethod
    def from_type(cls, k: int, mu: Fraction) -> "WeightVector":
        return cls(Fraction(1, k), Fraction(mu))

    @property
    def k(self) -> int:
        return self.lam1.denominator

    @property
    def mu(self) -> Fraction:
        return self.lam2

    def integer_pair(self) -> tuple[int, int] | None:
        """Integers (k1, k2), k2 > 0, with k1*lam1 + k2*lam2 = 1 (smallest k2)."""
        k = self.k
        if self.lam2 == 0:
            return (k, 1)
        for k2 in range(1, self.lam2.denominator * k + 1):
            k1 = (1 - k2 * self.lam2) * k
            if k1.denominator == 1:
                return (int(k1), k2)
        return None

    def weight(self, key: Triple) -> Fraction:
        return weight(key, self.k, self.lam2)


@dataclass(frozen=True)
class ModelReport:
    type_k: int
    mu: Fraction
    model: Poly
    standard_model: Poly
    residual_terms: Poly
    # z-harmonic monomials of weight < 1; removable by a coordinate change
    removable_terms: Poly = field(default_factory=Poly)
    warnings: tuple[str, ...] = ()

    @property
    def weight_vector(self) -> WeightVector:
        return WeightVector.from_type(self.type_k, self.mu)

    @property
    def weight_pair(self) -> tuple[int, int]:
        return self.weight_vector.integer_pair()


def compute_type(F: Poly) -> int:
    """Degree of the lowest u-free component of F containing a mixed monomial."""
    degrees = sorted({a + b for (a, b, l) in F.terms if l == 0 and a and b})
    if not degrees:
        raise ModelError(
            "no non-harmonic u-free term: the point is of infinite type for this input class"
        )
    k = degrees[0]
    if k % 2:
        raise ModelError(
            f"lowest non-harmonic u-free degree is {k}, which is odd; a pseudoconvex "
            "point has even type"
        )
    if k < 2:
        raise ModelError("type must be at least 2")
    return k


def compute_weight(F: Poly, k: int) -> Fraction:
    """Smallest u-weight keeping every mixed monomial at weight >= 1.

    Candidates come from mixed monomials z^a zbar^b u^l with l >= 1 and
    a + b < k, each giving (1 - (a+b)/k) / l.  z-harmonic monomials are
    treated as removable and contribute nothing.
    """
    mu = Fraction(0)
    for (a, b, l) in F.terms:
        if a and b and l and a + b < k:
            mu = max(mu, (1 - Fraction(a + b, k)) / l)
    return mu


def generalized_model(F: Poly, k: int | None = None, mu: Fraction | None = None) -> ModelReport:
    """Split F into its weight-one model, higher-weight residual and removable part."""
    if k is None:
        k = compute_type(F)
    if mu is None:
        mu = compute_weight(F, k)
    standard = F.filter(lambda key: key[2] == 0 and key[0] + key[1] == k)
    if standard.filter(_is_mixed).is_constant():
        raise ModelError("standard model has no non-harmonic term")
    model_terms, residual, removable = {}, {}, {}
    for key, c in F.terms.items():
        if mu == 0:
            # mixed monomials all have a + b >= k here, by the choice of k and mu
            if key[2] == 0 and key[0] + key[1] == k:
                model_terms[key] = c
            elif not _is_mixed(key) and key[0] + key[1] < k:
                removable[key] = c
            else:
                residual[key] = c
            continue
        w = weight(key, k, mu)
        if w == 1:
            model_terms[key] = c
        elif w > 1:
            residual[key] = c
        elif _is_mixed(key):
            raise ModelError(
                f"non-harmonic monomial {key} has weight {w} < 1: input is not in adapted "
                "coordinates (pre-transform it)"
            )
        else:
            removable[key] = c
    warnings = []
    if any(key[2] > 0 for key in removable):
        warnings.append(
            "z-harmonic monomials of weight < 1 involving u are present; they are treated as "
            "removable, which assumes the shift that removes them does not create new "
            "mixed terms of weight < 1"
        )
    model = Poly(model_terms)
    if mu == 0:
        model = standard
    return ModelReport(
        type_k=k,
        mu=mu,
        model=model,
        standard_model=standard,
        residual_terms=Poly(residual),
        removable_terms=Poly(removable),
        warnings=tuple(warnings),
    )


def analyze_model(F: Poly) -> ModelReport:
    k = compute_type(F)
    return generalized_model(F, k, compute_weight(F, k))


def is_weighted_homogeneous(P: Poly, k: int, mu: Fraction, w: Fraction = Fraction(1)) -> bool:
    return all(weight(key, k, mu) == w for key in P.terms)


# ---------------------------------------------------------------------------
# Kohn-Nirenberg invariants


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Square root of a nonnegative rational if it is rational."""
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


@dataclass(frozen=True)
class InvariantSet:
    """a0 and the invariants kappa_j = |a_j| / a0 for even 0 < j < k."""

    k: int
    a0: Fraction
    kappa_sq: dict[int, Fraction]
    a: dict[int, complex] = field(default_factory=dict)

    @property
    def kappa(self) -> dict[int, float]:
        return {j: math.sqrt(v) for j, v in self.kappa_sq.items()}

    def kappa_exact(self, j: int) -> Fraction | None:
        return exact_sqrt(self.kappa_sq[j])

    def nonzero(self) -> list[int]:
        return [j for j, v in self.kappa_sq.items() if v]


def kn_invariants(P1: Poly) -> InvariantSet:
    if any(l for (_, _, l) in P1.terms):
        raise ModelError("standard model must be u-free")
    degrees = {a + b for (a, b, _) in P1.terms}
    if len(degrees) != 1:
        raise ModelError("standard model must be homogeneous")
    (k,) = degrees
    if k % 2:
        raise ModelError("standard model has odd degree")
    diag = P1.coef(k // 2, k // 2, 0)
    if diag.im:
        raise ModelError("diagonal coefficient is not real")
    a0 = diag.re
    if a0 <= 0:
        raise ModelError(f"a0 = {a0} is not positive: model not pseudoconvex-normalizable")
    kappa_sq, a = {}, {}
    for j in range(2, k - 1, 2):
        aj = P1.coef((k + j) // 2, (k - j) // 2, 0) * 2
        kappa_sq[j] = aj.abs2() / (a0 * a0)
        a[j] = complex(aj)
    return InvariantSet(k=k, a0=a0, kappa_sq=kappa_sq, a=a)
