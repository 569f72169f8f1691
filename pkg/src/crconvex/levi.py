"""Pseudoconvexity of graphs ``v = F(z, zbar, u)``.

The Levi form is normalised so that it equals ``F_zzbar`` for u-free F:

    L = F_zzbar (1 + F_u^2) + F_uu |F_z|^2 - 2 Re(F_zu (F_u + i) F_zbar)

This is four times the Levi form of ``rho = F - v`` on the complex tangent
vector ``rho_w d/dz - rho_z d/dw``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .algebra import CompiledPoly, Poly, PowerTable
from .sphere import evaluate_chunked, grid_minimize, tensor_grid

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class LeviSample:
    z: complex
    u: float
    levi_value: float

    @property
    def point(self) -> tuple[complex, float]:
        return self.z, self.u


class LeviEvaluator:
    """Compiled derivatives of F for vectorised Levi-form evaluation."""

    def __init__(self, F: Poly):
        if not F.is_real():
            raise ValueError("Levi form needs a real defining polynomial")
        self.F = F
        self.fz = CompiledPoly(F.diff("z"))
        self.fu = CompiledPoly(F.diff("u"))
        self.fzzb = CompiledPoly(F.diff("z").diff("zbar"))
        self.fuu = CompiledPoly(F.diff("u").diff("u"))
        self.fzu = CompiledPoly(F.diff("z").diff("u"))

    def __call__(self, z, u) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        u = np.asarray(u, dtype=float)
        powers = PowerTable(z, u)
        fz = self.fz(z, u, powers)
        fu = self.fu(z, u, powers).real
        fzzb = self.fzzb(z, u, powers).real
        fuu = self.fuu(z, u, powers).real
        fzu = self.fzu(z, u, powers)
        cross = np.real(fzu * (fu + 1j) * np.conj(fz))
        return fzzb * (1.0 + fu**2) + fuu * np.abs(fz) ** 2 - 2.0 * cross


def levi_form(F: Poly, z, u) -> float:
    """Levi form of ``v = F`` at the graph point over (z, u)."""
    return float(LeviEvaluator(F)(complex(z), float(u)))


# ---------------------------------------------------------------------------
# Leading-order criterion for weighted models


class PseudoconvexityKind(str, enum.Enum):
    PSEUDOCONVEX = "Pseudoconvex"
    DEGENERATE = "Degenerate"
    FAILS = "Fails"


@dataclass(frozen=True)
class ModelPseudoconvexity:
    kind: PseudoconvexityKind
    # minimum of Delta P / |z|^d over the unit sphere (circle when mu = 0)
    min_value: float
    blowup_degree: int
    witness: LeviSample | None = None

    def to_json(self):
        out = {"kind": self.kind.value, "min_value": self.min_value,
               "blowup_degree": self.blowup_degree}
        if self.witness is not None:
            w = self.witness
            out["witness"] = {"z": [w.z.real, w.z.imag], "u": w.u, "laplacian": w.levi_value}
        return out


class _BlownUpLaplacian:
    """Delta P / |z|^d in polar coordinates z = r e^{i theta}.

    d is the lowest z-degree a + b in Delta P, so the quotient is a
    polynomial in (r, e^{i theta}, u) and stays finite on the u-axis.
    """

    def __init__(self, P: Poly):
        lap = P.laplacian_z()
        self.lap = lap
        keys = list(lap.terms)
        self.d = min((a + b for a, b, _ in keys), default=0)
        self.keys = np.array(keys, dtype=int).reshape(-1, 3)
        self.coefs = np.array([complex(c) for c in lap.terms.values()])

    def __call__(self, r, theta, u):
        out = np.zeros(np.broadcast(r, theta, u).shape, dtype=complex)
        for (a, b, l), c in zip(self.keys, self.coefs):
            out += c * r ** (a + b - self.d) * np.exp(1j * (a - b) * theta) * u**l
        return out.real


def model_pseudoconvexity(P: Poly, mu=None, tol: float = DEFAULT_TOL,
                          grid: tuple[int, int] = (256, 256)) -> ModelPseudoconvexity:
    """Sign of ``Delta P`` away from the u-axis for a weight-one model P.

    By weighted homogeneity the sign of Delta P on the unit sphere decides it
    everywhere.  Dividing by the largest power of |z| that Delta P contains
    keeps models that vanish along z = 0 from looking degenerate.  With
    ``mu == 0`` (or a u-free P) the search runs over the unit circle.
    """
    blown = _BlownUpLaplacian(P)
    if not blown.lap:
        return ModelPseudoconvexity(PseudoconvexityKind.DEGENERATE, 0.0, 0)
    u_free = all(l == 0 for _, _, l in P.terms) or mu == 0
    n_theta, n_phi = grid
    theta_axis = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    if u_free:
        def objective(params):
            return blown(1.0, params[:, 0], 0.0)
        axes = [theta_axis]
    else:
        def objective(params):
            phi = params[:, 1]
            return blown(np.abs(np.sin(phi)), params[:, 0], np.cos(phi))
        axes = [theta_axis, np.linspace(0.0, np.pi, n_phi)]
    gm = grid_minimize(objective, axes)
    value = gm.value
    if value > tol:
        return ModelPseudoconvexity(PseudoconvexityKind.PSEUDOCONVEX, value, blown.d)
    if value >= -tol:
        return ModelPseudoconvexity(PseudoconvexityKind.DEGENERATE, value, blown.d)
    return ModelPseudoconvexity(PseudoconvexityKind.FAILS, value, blown.d,
                                _laplacian_witness(blown, gm.params, u_free))


def _laplacian_witness(blown: _BlownUpLaplacian, params, u_free: bool) -> LeviSample:
    """A point off the u-axis where Delta P itself is negative."""
    theta = params[0]
    phi = 0.5 * np.pi if u_free else params[1]
    # move off the axis if the minimum sits on it; the quotient is continuous
    for _ in range(60):
        r = abs(np.sin(phi))
        if r > 1e-8 and blown(r, theta, np.cos(phi)) < 0:
            break
        phi = phi + 1e-3 if np.cos(phi) > 0 else phi - 1e-3
    z = complex(np.sin(phi) * np.exp(1j * theta))
    u = 0.0 if u_free else float(np.cos(phi))
    value = float(np.real(CompiledPoly(blown.lap)(z, u)))
    return LeviSample(z, u, value)


# ---------------------------------------------------------------------------
# Direct scan of the full Levi form


class ScanKind(str, enum.Enum):
    ALL_NONNEGATIVE = "AllNonnegative"
    WITNESS = "Witness"


@dataclass(frozen=True)
class ScanResult:
    kind: ScanKind
    samples: int
    min_value: float
    witness: LeviSample | None = None

    def to_json(self):
        out = {"kind": self.kind.value, "samples": self.samples, "min_value": self.min_value}
        if self.witness is not None:
            w = self.witness
            out["witness"] = {"z": [w.z.real, w.z.imag], "u": w.u, "value": w.levi_value}
        return out


def scan_points(radius: float, grid: tuple[int, int, int] = (64, 256, 64)):
    """Polar grid (|z|, arg z, u) restricted to the closed ball of `radius`."""
    n_r, n_theta, n_u = grid
    rs = np.linspace(0.0, radius, n_r)
    thetas = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    us = np.linspace(-radius, radius, n_u)
    params = tensor_grid([rs, thetas, us])
    params = params[params[:, 0] ** 2 + params[:, 2] ** 2 <= radius**2 * (1 + 1e-12)]
    return params[:, 0] * np.exp(1j * params[:, 1]), params[:, 2]


def pseudoconvexity_scan(F: Poly, radius: float = 0.1,
                         grid: tuple[int, int, int] = (64, 256, 64),
                         tol: float = DEFAULT_TOL) -> ScanResult:
    """Evaluate the Levi form on a grid in the ball; report the first negative sample."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    z, u = scan_points(radius, grid)
    ev = LeviEvaluator(F)
    values = evaluate_chunked(lambda p: ev(p[:, 0], p[:, 1].real),
                              np.stack([z, u.astype(complex)], axis=1))
    bad = np.flatnonzero(values < -tol)
    min_value = float(values.min())
    if bad.size:
        i = bad[0]
        return ScanResult(ScanKind.WITNESS, len(values), min_value,
                          LeviSample(complex(z[i]), float(u[i]), float(values[i])))
    return ScanResult(ScanKind.ALL_NONNEGATIVE, len(values), min_value)
