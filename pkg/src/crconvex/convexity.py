"""Convexifiability: closed-form thresholds, invariant screens and the max-min search.

The max-min problem is

    max over h in H  of  min over S2 x S1  of  D2_z(P + h)(z, u; zeta)

where H is the space of real, z-harmonic, weight-one polynomials
``Re(sum alpha_m z^m u^l)``.  The inner form is affine in the real and
imaginary parts of the alpha_m, so cutting planes reduce the outer problem
to a sequence of small LPs whose values bound the max-min from above.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import Poly, PowerTable, ZDerivatives
from .errors import ConvergenceError, ModelError
from .lp import simplex_max
from .model import InvariantSet, is_weighted_homogeneous
from .sphere import grid_minimize

# ---------------------------------------------------------------------------
# Closed-form thresholds


def _check_pair(k: int, l: int):
    if k % 2 or l % 2 or not 0 < l < k:
        raise ValueError(f"need even 0 < l < k, got k={k}, l={l}")


def gamma_squared(k: int, l: int) -> Fraction:
    """Exact square of the convexity threshold for |z|^k + a|z|^(k-l) Re z^l."""
    _check_pair(k, l)
    if l * l >= 3 * k - 2:
        return Fraction(k, l * l - k) ** 2
    return Fraction((4 * k - l * l - 4) * k * k, (4 * k - 4) * (k * k - l * l))


def gamma_threshold(k: int, l: int):
    """Largest a for which |z|^k + a|z|^(k-l) Re z^l is convex.

    Exact `Fraction` on the branch l^2 >= 3k - 2, float otherwise.
    """
    _check_pair(k, l)
    if l * l >= 3 * k - 2:
        g = Fraction(k, l * l - k)
        if l * l == 3 * k - 2:
            other = math.sqrt((4 * k - l * l - 4) * k * k / ((4 * k - 4) * (k * k - l * l)))
            if abs(other - float(g)) > 1e-12:
                raise ArithmeticError(f"threshold branches disagree at k={k}, l={l}")
        return g
    return math.sqrt(gamma_squared(k, l))


class KNClass(str, enum.Enum):
    CONVEX = "Convex"
    NONCONVEX_MODEL = "NonconvexModel"
    NONCONVEXIFIABLE = "NonconvexifiableCertified"


def _le_gamma(a, k: int, l: int, factor: int = 1) -> bool:
    """a <= factor * gamma, exactly when a is rational."""
    if isinstance(a, (int, Fraction)):
        return Fraction(a) ** 2 <= factor * factor * gamma_squared(k, l)
    return a <= factor * float(gamma_threshold(k, l))


def kn_classify(k: int, l: int, a) -> KNClass:
    _check_pair(k, l)
    if a < 0:
        raise ValueError("a must be nonnegative")
    if _le_gamma(a, k, l):
        return KNClass.CONVEX
    if k % l:
        return KNClass.NONCONVEXIFIABLE
    return KNClass.NONCONVEX_MODEL


def two_term_parameter(inv: InvariantSet):
    """(l, a) when the standard model is |z|^k + a|z|^(k-l) Re(z^l) up to rotation."""
    nz = inv.nonzero()
    if len(nz) != 1:
        return None
    l = nz[0]
    exact = inv.kappa_exact(l)
    return l, (exact if exact is not None else inv.kappa[l])


def sufficient_sum(inv: InvariantSet) -> float:
    return sum(inv.kappa[j] / float(gamma_threshold(inv.k, j)) for j in inv.kappa)


def screen_sufficient(inv: InvariantSet) -> bool:
    """Strict test sum_j kappa_j / gamma_jk < 1."""
    return sufficient_sum(inv) < 1


@dataclass(frozen=True)
class ScreenResult:
    passed: bool
    j: int | None = None
    bound: float | None = None

    def __str__(self):
        return "Pass" if self.passed else f"Fail(j={self.j}, bound={self.bound:.6g})"


def screen_necessary(inv: InvariantSet) -> ScreenResult:
    """First even j with kappa_j above gamma_jk (j > k/2) or 2*gamma_jk (j <= k/2)."""
    k = inv.k
    for j in sorted(inv.kappa_sq):
        factor = 1 if 2 * j > k else 2
        if inv.kappa_sq[j] > factor * factor * gamma_squared(k, j):
            return ScreenResult(False, j, factor * float(gamma_threshold(k, j)))
    return ScreenResult(True)


# ---------------------------------------------------------------------------
# Harmonic corrections and the sphere minimum


def harmonic_pairs(k: int, mu: Fraction) -> list[tuple[int, int]]:
    """All (m, l) with m/k + mu*l = 1, m, l >= 0."""
    if mu == 0:
        return [(k, 0)]
    pairs = []
    l = 0
    while mu * l <= 1:
        m = k * (1 - mu * l)
        if m.denominator == 1:
            pairs.append((int(m), l))
        l += 1
    return sorted(pairs, reverse=True)


@dataclass(frozen=True)
class HarmonicCorrection:
    """h(z, u) = Re(sum alpha_m z^m u^l) over the weight-one pairs (m, l)."""

    k: int
    mu: Fraction
    alpha: dict[tuple[int, int], complex] = field(default_factory=dict)

    @classmethod
    def zero(cls, k: int, mu: Fraction) -> "HarmonicCorrection":
        return cls(k, Fraction(mu), {p: 0j for p in harmonic_pairs(k, mu)})

    def active_pairs(self) -> list[tuple[int, int]]:
        """Pairs whose term has a nonzero z-Hessian (m >= 2)."""
        return [p for p in harmonic_pairs(self.k, self.mu) if p[0] >= 2]

    def to_poly(self) -> Poly:
        terms = {}
        for (m, l), a in self.alpha.items():
            if a == 0:
                continue
            c = complex(a) / 2
            if m == 0:
                terms[(0, 0, l)] = Fraction(complex(a).real)
                continue
            terms[(m, 0, l)] = c
            terms[(0, m, l)] = c.conjugate()
        return Poly(terms)

    def hzz(self, powers: PowerTable, shape) -> np.ndarray:
        out = np.zeros(shape, dtype=complex)
        for (m, l), a in self.alpha.items():
            if m >= 2 and a != 0:
                out += a * (m * (m - 1) / 2) * powers.z(m - 2)[m - 2] * powers.u(l)[l]
        return out

    def to_json(self):
        return [
            {"m": m, "l": l, "re": float(np.real(a)), "im": float(np.imag(a))}
            for (m, l), a in sorted(self.alpha.items(), reverse=True)
        ]


@dataclass(frozen=True)
class SphereSample:
    z: complex
    u: float
    zeta: complex

    def __post_init__(self):
        r = abs(self.z) ** 2 + self.u**2
        if abs(r - 1) > 1e-12 and not (self.u == 0 and abs(abs(self.z) - 1) <= 1e-12):
            raise ValueError("sample is not on the unit sphere")
        if abs(abs(self.zeta) - 1) > 1e-12:
            raise ValueError("direction is not a unit vector")


def sphere_points(params: np.ndarray, domain: str):
    if domain == "circle":
        theta = params[:, 0]
        return np.exp(1j * theta), np.zeros_like(theta)
    theta, phi = params[:, 0], params[:, 1]
    return np.sin(phi) * np.exp(1j * theta), np.cos(phi)


def sphere_axes(domain: str, grid: tuple[int, int]):
    n_theta, n_phi = grid
    theta = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    if domain == "circle":
        return [theta]
    return [theta, np.linspace(0.0, np.pi, n_phi)]


class HessianObjective:
    """min over unit zeta of D2_z(P + h) as a function of sphere parameters."""

    def __init__(self, P: Poly, h: HarmonicCorrection | None, domain: str):
        self.derivs = ZDerivatives(P)
        self.h = h
        self.domain = domain

    def point_values(self, z, u):
        powers = PowerTable(z, u)
        pzz, pzzb = self.derivs(z, u, powers)
        if self.h is not None:
            pzz = pzz + self.h.hzz(powers, pzz.shape)
        value = 2.0 * (pzzb - np.abs(pzz))
        zeta = np.exp(0.5j * (np.pi - np.angle(pzz)))
        return value, zeta

    def __call__(self, params):
        z, u = sphere_points(np.asarray(params, dtype=float), self.domain)
        return self.point_values(z, u)[0]

    def sample(self, params) -> tuple[float, SphereSample]:
        z, u = sphere_points(np.atleast_2d(params), self.domain)
        value, zeta = self.point_values(z, u)
        return float(value[0]), SphereSample(complex(z[0]), float(u[0]), complex(zeta[0]))


def min_hessian_on_sphere(P: Poly, h: HarmonicCorrection | None = None, domain: str = "sphere",
                          grid: tuple[int, int] = (256, 256), n_starts: int = 32,
                          _full: bool = False):
    """Global minimum of D2_z(P + h) over S2 x S1 (or the unit circle x S1).

    The minimum over unit directions is taken in closed form,
    ``2 * (P_zzbar - |P_zz|)``, so only (theta, phi) is searched.
    """
    objective = HessianObjective(P, h, domain)
    gm = grid_minimize(objective, sphere_axes(domain, grid), n_starts=n_starts)
    value, sample = objective.sample(gm.params)
    if _full:
        return value, sample, gm, objective
    return value, sample


# ---------------------------------------------------------------------------
# Cutting planes


class VerdictKind(str, enum.Enum):
    CERTIFICATE = "Certificate"
    REFUTATION = "Refutation"
    BORDERLINE = "Borderline"


@dataclass
class ConvexityVerdict:
    kind: VerdictKind
    h: HarmonicCorrection | None
    margin: float | None
    upper_bound: float | None
    samples_used: int
    tolerance: float
    domain: str = "sphere"
    best_lower: float | None = None
    argmin: SphereSample | None = None
    box: float | None = None
    iterations: int = 0
    lp_history: list[tuple[float, float]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self):
        return {
            "kind": self.kind.value,
            "margin": self.margin,
            "upper_bound": self.upper_bound,
            "best_lower": self.best_lower,
            "samples_used": self.samples_used,
            "tolerance": self.tolerance,
            "domain": self.domain,
            "iterations": self.iterations,
            "box": self.box,
            "h": self.h.to_json() if self.h is not None else None,
            "diagnostics": list(self.diagnostics),
        }


@dataclass
class SearchConfig:
    grid: tuple[int, int] = (256, 256)
    tol: float = 1e-7
    max_cuts: int = 2000
    box: float = 64.0
    eps_gap: float = 1e-6
    n_starts: int = 32
    cuts_per_iter: int = 8
    max_box_doublings: int = 20


class _CutSet:
    """Cuts t <= b + a . x with x = (Re alpha, Im alpha) over active pairs."""

    def __init__(self, P: Poly, pairs, domain):
        self.derivs = ZDerivatives(P)
        self.pairs = pairs
        self.domain = domain
        self.rows: list[np.ndarray] = []
        self.rhs: list[float] = []
        self._seen: set[tuple] = set()

    def add(self, z, u, zeta):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        u = np.atleast_1d(np.asarray(u, dtype=float))
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        powers = PowerTable(z, u)
        pzz, pzzb = self.derivs(z, u, powers)
        zeta2 = zeta**2
        b = 2.0 * np.real(pzz * zeta2) + 2.0 * pzzb
        cols = []
        for m, l in self.pairs:
            c = m * (m - 1) * powers.z(m - 2)[m - 2] * powers.u(l)[l] * zeta2
            cols.append(np.real(c))
            cols.append(-np.imag(c))
        a = np.stack(cols, axis=1) if cols else np.zeros((len(z), 0))
        for row, rhs in zip(a, b):
            key = tuple(np.round(np.concatenate([row, [rhs]]), 9))
            if key in self._seen:
                continue
            self._seen.add(key)
            self.rows.append(row)
            self.rhs.append(rhs)

    def __len__(self):
        return len(self.rhs)

    def solve(self, lo, hi):
        """max t s.t. t <= b_c + a_c . x and lo <= x <= hi (componentwise).

        Returns (t, x, touching) where `touching` flags x on the bounds.
        """
        A = np.array(self.rows).reshape(len(self.rows), -1)
        b = np.array(self.rhs)
        n = A.shape[1]
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
        # x = lo + width*y with 0 <= y <= 1; t = s - M with M making every rhs positive
        shifted = b + A @ lo
        width = hi - lo
        scaled = A * width
        M = max(0.0, float(np.max(np.abs(scaled).sum(axis=1) - shifted))) + 1.0
        rows = np.zeros((len(b) + n, n + 1))
        rows[: len(b), 0] = 1.0
        rows[: len(b), 1:] = -scaled
        rows[len(b):, 1:] = np.eye(n)
        rhs = np.concatenate([shifted + M, np.ones(n)])
        c = np.zeros(n + 1)
        c[0] = 1.0
        res = simplex_max(c, rows, np.maximum(rhs, 0.0))
        x = lo + width * res.x[1:]
        t = res.x[0] - M
        slack = 1e-9 * np.maximum(1.0, np.abs(width))
        touching = bool(n and np.any((x - lo <= slack) | (hi - x <= slack)))
        return t, x, touching


def _seed_cuts(cuts: _CutSet, domain: str):
    psis = np.exp(1j * np.linspace(0, np.pi, 4, endpoint=False))
    if domain == "circle":
        thetas = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        z = np.repeat(np.exp(1j * thetas), len(psis))
        cuts.add(z, np.zeros(len(z)), np.tile(psis, len(thetas)))
        return
    # poles
    for u0 in (1.0, -1.0):
        cuts.add(np.zeros(len(psis)), np.full(len(psis), u0), psis)
    thetas = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    z = np.repeat(np.exp(1j * thetas), len(psis))
    cuts.add(z, np.zeros(len(z)), np.tile(psis, len(thetas)))
    th = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    ph = np.linspace(0, np.pi, 9)[1:-1]
    T, PH, PS = np.meshgrid(th, ph, psis, indexing="ij")
    cuts.add((np.sin(PH) * np.exp(1j * T)).ravel(), np.cos(PH).ravel(), PS.ravel())


def _correction(k, mu, pairs, x) -> HarmonicCorrection:
    alpha = {p: 0j for p in harmonic_pairs(k, mu)}
    for i, p in enumerate(pairs):
        alpha[p] = complex(x[2 * i], x[2 * i + 1])
    return HarmonicCorrection(k, Fraction(mu), alpha)


def certificate_search(P: Poly, k: int, mu: Fraction, config: SearchConfig | None = None
                       ) -> ConvexityVerdict:
    """Cutting-plane solution of the max-min problem over harmonic corrections.

    Each round solves two LPs over the current cuts: one over the full
    coefficient box, whose value bounds the max-min from above, and one over
    a trust region around the best correction found so far, which proposes
    the next correction.  The sphere minimum at each proposal is a lower
    bound and supplies new cuts.

    Returns a Certificate when some h makes D2_z(P + h) exceed the tolerance
    on the whole domain, a Refutation when the upper bound is below
    -tolerance, and Borderline otherwise.
    """
    cfg = config or SearchConfig()
    mu = Fraction(mu)
    if mu != 0 and not is_weighted_homogeneous(P, k, mu):
        raise ModelError("certificate search needs a weight-one model polynomial")
    domain = "circle" if mu == 0 else "sphere"
    pairs = HarmonicCorrection.zero(k, mu).active_pairs()
    n = 2 * len(pairs)
    cuts = _CutSet(P, pairs, domain)
    _seed_cuts(cuts, domain)
    R = cfg.box
    history: list[tuple[float, float]] = []
    diagnostics: list[str] = []

    def probe(x):
        h = _correction(k, mu, pairs, x)
        value, sample, gm, objective = min_hessian_on_sphere(
            P, h, domain, cfg.grid, cfg.n_starts, _full=True)
        return h, value, sample, gm, objective

    def add_cuts(gm, objective, level):
        new = []
        for val, params in gm.candidates:
            if val >= level - 1e-12 or len(new) >= cfg.cuts_per_iter:
                break
            if any(np.allclose(params, q, atol=1e-6) for q in new):
                continue
            new.append(params)
        if new:
            z, u = sphere_points(np.array(new), domain)
            _, zeta = objective.point_values(z, u)
            cuts.add(z, u, zeta)
        return len(new)

    center = np.zeros(n)
    best_h, best_lower, best_sample, gm0, obj0 = probe(center)
    add_cuts(gm0, obj0, math.inf if n else best_lower)
    radius = 1.0
    upper = math.inf
    refuted = False
    doublings = 0
    added = 0
    it = 0
    while True:
        it += 1
        upper, x_glob, touching = cuts.solve(-R, R)
        history.append((R, upper))
        gap_closed = upper - best_lower < cfg.eps_gap * max(1.0, abs(upper))
        if (upper < -cfg.tol or gap_closed) and touching:
            if doublings >= cfg.max_box_doublings:
                raise ConvergenceError(
                    f"LP optimum stays on the coefficient box up to R={R:g}: cuts do not "
                    "bound the harmonic correction")
            R *= 2
            doublings += 1
            diagnostics.append(f"box doubled to {R:g} at iteration {it}")
            continue
        if upper < -cfg.tol:
            refuted = True
            break
        if gap_closed or n == 0:
            break
        if added >= cfg.max_cuts:
            diagnostics.append(f"stopped after {added} cuts with gap {upper - best_lower:.3g}")
            break
        # global proposal: drives the upper bound down
        _, val_g, smp_g, gm_g, obj_g = probe(x_glob)
        new = add_cuts(gm_g, obj_g, upper)
        if val_g > best_lower:
            best_h, best_lower, best_sample, center = _correction(k, mu, pairs, x_glob), val_g, smp_g, x_glob
        # trust-region proposal: drives the lower bound up
        lo = np.maximum(center - radius, -R)
        hi = np.minimum(center + radius, R)
        model_val, x_tr, _ = cuts.solve(lo, hi)
        h_tr, val_tr, smp_tr, gm_tr, obj_tr = probe(x_tr)
        new += add_cuts(gm_tr, obj_tr, model_val)
        if val_tr > best_lower + 0.1 * max(model_val - best_lower, 0.0) and val_tr > best_lower:
            best_h, best_lower, best_sample, center = h_tr, val_tr, smp_tr, x_tr
            radius = min(2 * radius, R)
        else:
            radius = max(0.5 * radius, 1e-6)
        added += new
        if not new:
            diagnostics.append("no violated cut found; LP value is not improvable on this grid")
            break

    kind = VerdictKind.BORDERLINE
    margin = None
    if refuted:
        kind = VerdictKind.REFUTATION
    elif best_lower > cfg.tol:
        kind = VerdictKind.CERTIFICATE
        margin = best_lower
    return ConvexityVerdict(
        kind=kind,
        h=best_h,
        margin=margin,
        upper_bound=upper,
        samples_used=len(cuts),
        tolerance=cfg.tol,
        domain=domain,
        best_lower=best_lower,
        argmin=best_sample,
        box=R,
        iterations=it,
        lp_history=history,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Independent oracle for the closed-form threshold


def two_term_poly(k: int, l: int, a) -> Poly:
    """|z|^k + a |z|^(k-l) Re(z^l)."""
    a = Fraction(a)
    half = a / 2
    return Poly({
        (k // 2, k // 2, 0): 1,
        ((k + l) // 2, (k - l) // 2, 0): half,
        ((k - l) // 2, (k + l) // 2, 0): half,
    })


def brute_force_threshold(k: int, l: int, tol: float = 1e-4, grid: int = 1024) -> float:
    """Bisection on a in [0, 4] of 'min over |z| = 1 and unit zeta of D2_z >= 0'."""
    _check_pair(k, l)
    base = ZDerivatives(Poly.abs_z(k))
    mixed = ZDerivatives(two_term_poly(k, l, 1) - Poly.abs_z(k))
    axes = [np.linspace(0.0, 2 * np.pi, grid, endpoint=False)]

    def min_value(a: float) -> float:
        def objective(params):
            z = np.exp(1j * params[:, 0])
            u = np.zeros(len(z))
            powers = PowerTable(z, u)
            p0, q0 = base(z, u, powers)
            p1, q1 = mixed(z, u, powers)
            return 2.0 * ((q0 + a * q1) - np.abs(p0 + a * p1))

        return grid_minimize(objective, axes, n_starts=8, min_step=1e-12).value

    lo, hi = 0.0, 4.0
    if min_value(hi) >= 0:
        return hi
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if min_value(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
