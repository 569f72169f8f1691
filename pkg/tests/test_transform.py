from fractions import Fraction

import numpy as np
import pytest

from crconvex.algebra import Poly, RationalComplex, hessian_z
from crconvex.errors import TransformError
from crconvex.model import analyze_model
from crconvex.parser import parse
from crconvex.transform import (
    HoloMap,
    ShiftMap,
    apply_holomorphic,
    apply_shift,
    compose,
    decompose_delta,
    inverse,
    parse_holomap,
    shift_length,
)

I = RationalComplex(0, 1)
M_A = "|z|^8 + (|z|^6 + {a}*|z|^2 Re(z^4))*u^2"


def weight_at_most_one(P, k, mu):
    return P.filter(lambda key: Fraction(key[0] + key[1], k) + key[2] * mu <= 1)


class TestHoloMap:
    def test_normalisation_enforced(self):
        for g, f in [("1", "0"), ("z", "0"), ("0", "z"), ("0", "w"), ("0", "2 + w^2")]:
            with pytest.raises(TransformError):
                parse_holomap(f"g = {g}; f = {f}")

    def test_parse_and_coefficients(self):
        T = parse_holomap("g = 2 w + z w; f = (1 + i) w^2 + z^2", cutoff=6)
        assert T.alpha(1) == 2 and T.epsilon(2) == RationalComplex(1, 1)
        assert T.g_coeffs == {(0, 1): 2, (1, 1): 1}
        assert T.f_coeffs[(2, 0)] == 1
        assert parse_holomap(str(T), cutoff=6) == T

    def test_truncation(self):
        T = HoloMap(Poly.u() ** 7, Poly(), cutoff=5)
        assert not T.g


class TestApplyHolomorphic:
    def test_identity(self):
        F = parse(M_A.format(a=1) + " + |z|^2 u^8")
        assert apply_holomorphic(F, HoloMap.identity(12)) == F.truncate(12)

    def test_normalising_quadratic_adds_u_squared(self):
        F = parse(M_A.format(a=1))
        m = analyze_model(F)
        T = HoloMap(Poly(), Poly.u() ** 2 * I, cutoff=10)
        F_star = apply_holomorphic(F, T)
        low = weight_at_most_one(F_star, m.type_k, m.mu)
        assert low == m.model + Poly.u() ** 2
        assert F_star.coef(0, 0, 2) == 1

    def test_rejects_bad_input(self):
        with pytest.raises(TransformError):
            apply_holomorphic(parse("u + |z|^2"), HoloMap.identity())

    def test_inverse_round_trip(self):
        F = parse("|z|^2 + Re(z^2 zbar) u + u^2 |z|^2 + Re(z^3)")
        g = Poly.monomial(0, 0, 2, RationalComplex(1, -1)) + Poly.monomial(1, 0, 1, 2)
        f = Poly.monomial(0, 0, 2, RationalComplex(0, 1)) + Poly.monomial(2, 0, 0, -1)
        T = HoloMap(g, f, cutoff=5)
        back = apply_holomorphic(apply_holomorphic(F, T), inverse(T))
        assert back.truncate(4) == F.truncate(4)

    def test_inverse_is_two_sided(self):
        T = parse_holomap("g = w^2 + z w; f = i w^2 + z^2 w", cutoff=6)
        Ti = inverse(T)
        assert compose(T, Ti) == HoloMap.identity(6)
        assert compose(Ti, T) == HoloMap.identity(6)

    def test_composition_property(self):
        F = parse("|z|^2 + Re(z^2) u + u^2")
        T1 = parse_holomap("g = w^2; f = i w^2", cutoff=5)
        T2 = parse_holomap("g = z w; f = z^2 + w^3", cutoff=5)
        lhs = apply_holomorphic(F, compose(T1, T2))
        rhs = apply_holomorphic(apply_holomorphic(F, T2), T1)
        assert lhs.truncate(3) == rhs.truncate(3)

    def test_reality_preserved(self):
        F = parse("|z|^4 + Re((1 + 2 i) z^3 zbar) + u^2 + Re(z) u^2")
        T = parse_holomap("g = (1 - i) w^2 + z w; f = (2 + i) w^2 + i z^2 + z w", cutoff=6)
        F_star = apply_holomorphic(F, T)
        assert F_star.is_real()


class TestShifts:
    def test_shift_length(self):
        assert shift_length(8, Fraction(1, 8)) == 1
        assert shift_length(8, Fraction(1, 40)) == 5
        with pytest.raises(TransformError):
            shift_length(8, 0)

    def test_zero_shift(self):
        P = parse(M_A.format(a=1))
        assert apply_shift(P, ShiftMap((0,)), 8, Fraction(1, 8)) == P

    def test_expansion_example(self):
        got = apply_shift(Poly.abs_z(2), ShiftMap((RationalComplex(1),)), 2, Fraction(1, 2))
        assert got == parse("|z|^2 + 2 u Re(z) + u^2")

    def test_hessian_is_transported(self):
        # z -> z + sum delta_m u^m only shifts the argument of the z-Hessian
        k, mu = 4, Fraction(1, 12)
        P = parse("|z|^4 + Re(z^4)/3 + |z|^2 u^6 + Re(z^2) u^6 + u^12")
        S = ShiftMap((RationalComplex(1, 2), RationalComplex(-1, 0), RationalComplex(0, 3)))
        Q = apply_shift(P, S, k, mu)
        assert Q == P.substitute(S.as_poly())
        for a, b in (("z", "z"), ("z", "zbar")):
            assert Q.diff(a).diff(b) == P.diff(a).diff(b).substitute(S.as_poly())
        rng = np.random.default_rng(8)
        d = S.as_poly()
        for _ in range(20):
            z = complex(*rng.uniform(-1, 1, 2))
            u = float(rng.uniform(-1, 1))
            zeta = np.exp(1j * rng.uniform(0, np.pi))
            shift = sum(complex(c) * u**l for (_, _, l), c in d.terms.items())
            assert hessian_z(Q, z, u, zeta) == pytest.approx(hessian_z(P, z + shift, u, zeta),
                                                             rel=1e-9, abs=1e-12)


class TestDecomposeDelta:
    def test_single_alpha(self):
        T = HoloMap(Poly.u().scale(2), Poly(), cutoff=6)
        assert decompose_delta(T, 8, Fraction(1, 8)).delta == (RationalComplex(-2),)

    def test_zero(self):
        T = parse_holomap("g = z w; f = w^2", cutoff=6)
        assert decompose_delta(T, 4, Fraction(1, 12)).delta == (0, 0, 0)

    def test_two_step_example(self):
        T = parse_holomap("g = w; f = w^2", cutoff=6)
        S = decompose_delta(T, 4, Fraction(1, 8))
        assert S.delta == (-1, 1)
        G = compose(S.to_holomap(6), T)
        assert G.alpha(1) == 0 and G.alpha(2) == 0

    def test_mu_zero_rejected(self):
        with pytest.raises(TransformError):
            decompose_delta(HoloMap.identity(), 4, 0)

    @pytest.mark.parametrize("seed", range(6))
    def test_composed_g_is_superhomogeneous(self, seed):
        rng = np.random.default_rng(seed)
        k, mu = 4, Fraction(1, 4 * int(rng.integers(2, 5)))
        N = shift_length(k, mu)
        cutoff = N + 2

        def c():
            return RationalComplex(Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))),
                                   Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))))

        g = Poly({(0, 0, j): c() for j in range(1, cutoff + 1)}) + Poly.monomial(1, 0, 1, c())
        f = Poly({(0, 0, j): c() for j in range(2, cutoff + 1)}) + Poly.monomial(2, 0, 0, c())
        T = HoloMap(g, f, cutoff)
        S = decompose_delta(T, k, mu)
        assert len(S.delta) == N
        G = compose(S.to_holomap(cutoff), T)
        assert all(G.alpha(j) == 0 for j in range(1, N + 1))
