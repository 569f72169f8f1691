import math
from fractions import Fraction

import numpy as np
import pytest

from crconvex import convexity as cx
from crconvex.algebra import Poly, RationalComplex, hessian_z
from crconvex.model import analyze_model, kn_invariants
from crconvex.parser import parse

from .oracles import poly_value, two_term_min, two_term_threshold

KN = "|z|^8 + (15/7)*|z|^2*Re(z^6)"
M_A = "|z|^8 + (|z|^6 + {a}*|z|^2 Re(z^4))*u^2 + |z|^2*u^8"


def search(text, **kw):
    m = analyze_model(parse(text))
    return m, cx.certificate_search(m.model, m.type_k, m.mu, cx.SearchConfig(**kw))


class TestThresholds:
    def test_exact_values(self):
        assert cx.gamma_threshold(6, 4) == Fraction(3, 5)
        assert cx.gamma_threshold(8, 6) == Fraction(2, 7)
        assert cx.gamma_squared(4, 2) == Fraction(8, 9)

    def test_branches_agree_where_both_apply(self):
        # l^2 = 3k - 2 happens at (k, l) = (6, 4)
        k, l = 6, 4
        other = math.sqrt((4 * k - l * l - 4) * k * k / ((4 * k - 4) * (k * k - l * l)))
        assert other == pytest.approx(0.6)

    @pytest.mark.parametrize("k,l", [(4, 2), (6, 4), (8, 2), (10, 8)])
    def test_against_independent_oracle(self, k, l):
        assert float(cx.gamma_threshold(k, l)) == pytest.approx(two_term_threshold(k, l), abs=1e-3)

    def test_threshold_is_sharp(self):
        g = float(cx.gamma_threshold(8, 6))
        assert two_term_min(8, 6, g * 0.98, n=2000) > 0
        assert two_term_min(8, 6, g * 1.02, n=2000) < 0

    def test_brute_force_matches_formula(self):
        assert cx.brute_force_threshold(6, 4) == pytest.approx(0.6, abs=1e-3)

    def test_invalid_pairs(self):
        for k, l in [(6, 3), (6, 6), (5, 2), (6, 0)]:
            with pytest.raises(ValueError):
                cx.gamma_threshold(k, l)


class TestClassification:
    def test_kn_classify(self):
        assert cx.kn_classify(6, 4, Fraction(1, 2)) is cx.KNClass.CONVEX
        assert cx.kn_classify(6, 4, Fraction(3, 5)) is cx.KNClass.CONVEX
        assert cx.kn_classify(6, 4, 1) is cx.KNClass.NONCONVEXIFIABLE
        assert cx.kn_classify(8, 4, 1) is cx.KNClass.NONCONVEX_MODEL
        assert cx.kn_classify(8, 6, Fraction(15, 7)) is cx.KNClass.NONCONVEXIFIABLE

    def test_screens_on_kn(self):
        inv = kn_invariants(parse(KN))
        res = cx.screen_necessary(inv)
        assert not res.passed and res.j == 6
        assert not cx.screen_sufficient(inv)
        assert cx.two_term_parameter(inv) == (6, Fraction(15, 7))

    def test_screens_on_convex_model(self):
        inv = kn_invariants(parse("|z|^8 + (1/10)*|z|^2*Re(z^6) + (1/10)*|z|^4 Re(z^4)"))
        assert cx.screen_sufficient(inv)
        assert cx.screen_necessary(inv).passed
        assert cx.two_term_parameter(inv) is None

    def test_screen_examples(self):
        inv = kn_invariants(parse("|z|^6 + (1/10)*|z|^2*Re(z^4)"))
        assert cx.sufficient_sum(inv) == pytest.approx(1 / 6)
        assert cx.screen_sufficient(inv)
        inv = kn_invariants(parse("|z|^6 + (13/10)*|z|^4*Re(z^2)"))
        assert cx.screen_necessary(inv).passed
        assert cx.screen_necessary(kn_invariants(Poly.abs_z(8))).passed

    def test_necessary_uses_doubled_bound_for_small_j(self):
        # j = 2 <= k/2 = 3 is allowed up to twice gamma
        k = 6
        g = float(cx.gamma_threshold(k, 2))
        inv = kn_invariants(parse(f"|z|^6 + {Fraction(3, 2)}*|z|^4*Re(z^2)"))
        assert 1.5 > g
        assert cx.screen_necessary(inv).passed


class TestHarmonicCorrections:
    def test_pairs(self):
        assert cx.harmonic_pairs(8, Fraction(0)) == [(8, 0)]
        assert cx.harmonic_pairs(8, Fraction(1, 8)) == [(8 - l, l) for l in range(9)]
        assert cx.harmonic_pairs(6, Fraction(1, 4)) == [(6, 0), (3, 2), (0, 4)]

    def test_correction_is_real_harmonic_weight_one(self):
        h = cx.HarmonicCorrection(4, Fraction(1, 4), {(4, 0): 1 + 2j, (2, 2): -0.5j, (0, 4): 3})
        p = h.to_poly()
        assert p.is_real() and p.is_z_harmonic()
        assert all(a + b + l == 4 for a, b, l in p.terms)

    def test_min_on_circle_for_abs_power(self):
        # D2 min of |z|^k on the unit circle is 2((k/2)^2 - (k/2)(k/2 - 1)) = k
        for k in (4, 6, 8):
            value, sample = cx.min_hessian_on_sphere(Poly.abs_z(k), domain="circle")
            assert value == pytest.approx(k)

    def test_sphere_domain_sees_pole_degeneracy(self):
        value, sample = cx.min_hessian_on_sphere(Poly.abs_z(4), domain="sphere")
        assert value == pytest.approx(0, abs=1e-12)
        assert abs(sample.z) < 1e-6 and abs(abs(sample.u) - 1) < 1e-6
        value, _ = cx.min_hessian_on_sphere(Poly.abs_z(2), domain="sphere")
        assert value == pytest.approx(2)
        value, _ = cx.min_hessian_on_sphere(parse(KN), domain="circle")
        assert value < 0

    def test_harmonic_correction_changes_only_the_zz_part(self):
        P = parse("|z|^4 + Re(z^3 zbar) + |z|^2 u^2")
        h = cx.HarmonicCorrection(4, Fraction(1, 4), {(4, 0): 0.3 - 1j, (2, 2): 2j}).to_poly()
        hzz = h.diff("z").diff("z")
        rng = np.random.default_rng(4)
        for _ in range(20):
            z, u = complex(*rng.uniform(-1, 1, 2)), float(rng.uniform(-1, 1))
            zeta = np.exp(1j * rng.uniform(0, np.pi))
            want = 2 * (poly_value(hzz.terms, z, u) * zeta**2).real
            assert hessian_z(P + h, z, u, zeta) - hessian_z(P, z, u, zeta) == \
                pytest.approx(want, abs=1e-12)

    def test_sphere_sample_validation(self):
        with pytest.raises(ValueError):
            cx.SphereSample(0.5, 0.5, 1)


class TestCertificateSearch:
    def test_mu_zero_certificate(self):
        _, v = search("|z|^4")
        assert v.kind is cx.VerdictKind.CERTIFICATE
        assert v.margin == pytest.approx(4)

    def test_certificate_with_nontrivial_correction(self):
        _, v = search("|z|^4 + Re(z^4) + |z|^2 u^2")
        assert v.kind is cx.VerdictKind.CERTIFICATE
        assert v.margin == pytest.approx(2, abs=1e-5)
        assert abs(v.h.alpha[(4, 0)] + 1) < 0.5

    def test_certificate_reverified_on_finer_grid(self):
        m, v = search("|z|^4 + 3*Re(z^4) + |z|^2 u^2 + Re(z^2 u^2)", grid=(128, 128))
        assert v.kind is cx.VerdictKind.CERTIFICATE
        value, _ = cx.min_hessian_on_sphere(m.model, v.h, "sphere", grid=(512, 512))
        assert value > v.margin / 2

    def test_kn_refutation(self):
        _, v = search(KN)
        assert v.kind is cx.VerdictKind.REFUTATION
        assert v.upper_bound < -1

    def test_ma_refutation(self):
        _, v = search(M_A.format(a=1))
        assert v.kind is cx.VerdictKind.REFUTATION
        assert v.upper_bound < -1e-7

    def test_ma_half_is_not_refuted(self):
        _, v = search(M_A.format(a="1/2"))
        assert v.kind is not cx.VerdictKind.REFUTATION

    @pytest.mark.parametrize("text", [
        "|z|^4 + Re(z^4) + |z|^2 u^2",
        M_A.format(a=1),
        "|z|^6 + |z|^2 Re(z^2) u^2 + 2 |z|^2 u^2 + Re(z^3 u^2)",
    ])
    def test_lp_value_monotone_nonincreasing(self, text):
        _, v = search(text)
        for (r0, a), (r1, b) in zip(v.lp_history, v.lp_history[1:]):
            # each solve relaxes the rhs by at most 1e-10 of the shifted rhs scale
            if r0 == r1:
                assert b <= a + 1e-6 * max(1.0, abs(a))

    def test_refutation_is_sound_on_strictly_convexifiable_models(self):
        # P = |z|^4 + |z|^2 u^2 - h for a harmonic h: h itself is a certificate
        rng = np.random.default_rng(3)
        for _ in range(3):
            a, b = (Fraction(x).limit_denominator(50) for x in rng.normal(size=2) * 0.7)
            h = Poly.monomial(4, 0, 0, RationalComplex(a, b) / 2)
            P = parse("|z|^4 + |z|^2 u^2") + h + h.conjugate()
            m = analyze_model(P)
            v = cx.certificate_search(m.model, m.type_k, m.mu)
            assert v.kind is cx.VerdictKind.CERTIFICATE

    def test_non_model_input_rejected(self):
        with pytest.raises(Exception):
            cx.certificate_search(parse("|z|^4 + u^2"), 4, Fraction(1, 4) + 1)
