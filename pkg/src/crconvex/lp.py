"""Dense simplex with Bland's rule, for small LPs with a feasible origin.

The method works on the inequality form ``G x <= h`` directly: a vertex is
described by n active constraints, so the basis matrix is only n x n even
when there are thousands of cuts.  Each pivot factors the basis afresh from
the original data, so round-off does not accumulate in a tableau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
TIE_TOL = 1e-12


class Unbounded(ConvergenceError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    pivots: int
    # dual multipliers of the rows of A (nonnegative at the optimum)
    duals: np.ndarray | None = None


def simplex_max(c, A, b, max_pivots: int = 100_000, perturb: float = 1e-10) -> LPResult:
    """Maximise ``c @ x`` subject to ``A @ x <= b`` and ``x >= 0``.

    Requires ``b >= 0`` so that the origin is a feasible vertex.  Bland's rule
    picks the lowest-index active constraint with a negative multiplier to
    release.  The entering constraint attains the minimum ratio; near-ties go
    to the largest pivot, then the lowest index.

    Degenerate vertices are avoided by raising each b_i by a seeded random
    amount below ``perturb * max(1, max|b|)``.  This only relaxes the
    constraints, so the returned value never underestimates the exact optimum.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("simplex_max needs b >= 0 (origin must be feasible)")
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if perturb:
        rng = np.random.default_rng(m * 7919 + n)
        b = b + rng.uniform(0.1, 1.0, m) * perturb * scale
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    row_norm = np.linalg.norm(G, axis=1)
    row_norm[row_norm == 0] = 1.0
    cscale = max(1.0, float(np.abs(c).max(initial=0.0)))
    active = np.arange(m, m + n)
    x = np.zeros(n)
    pivots = 0
    while True:
        B = G[active]
        lam = np.linalg.solve(B.T, c)
        release = np.flatnonzero(lam < -PIVOT_TOL * cscale)
        if release.size == 0:
            break
        # Bland: lowest constraint index among the candidates
        pos = release[np.argmin(active[release])]
        e = np.zeros(n)
        e[pos] = -1.0
        d = np.linalg.solve(B, e)
        Gd = G @ d
        inactive = np.ones(m + n, dtype=bool)
        inactive[active] = False
        ok = np.flatnonzero(inactive & (Gd > PIVOT_TOL * row_norm * np.linalg.norm(d)))
        if ok.size == 0:
            raise Unbounded("LP is unbounded")
        ratio = np.maximum(h[ok] - G[ok] @ x, 0.0) / Gd[ok]
        theta = ratio.min()
        cand = ok[ratio <= theta + TIE_TOL * max(1.0, theta)]
        rel = Gd[cand] / row_norm[cand]
        cand = cand[rel >= rel.max() * (1 - 1e-9)]
        enter = cand.min()
        active[pos] = enter
        # step along the edge rather than re-solving for the vertex, so the
        # objective never decreases even when round-off leaves x slightly off it
        x = x + theta * d
        pivots += 1
        if pivots > max_pivots:
            raise ConvergenceError("simplex exceeded the pivot limit")
    if np.any(G @ x > h + FEAS_TOL * scale * row_norm * max(1.0, float(np.abs(x).max()))):
        raise ConvergenceError("simplex lost primal feasibility")
    duals = np.zeros(m + n)
    duals[active] = lam
    return LPResult(x=np.maximum(x, 0.0), value=float(c @ x), pivots=pivots, duals=duals[:m])
