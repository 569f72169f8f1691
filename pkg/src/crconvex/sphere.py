"""Deterministic global minimisation over small parameter boxes.

A coarse tensor grid is evaluated in one vectorised pass (chunked, optionally
threaded); the best cells seed a batched compass search.  Objectives take an
``(n, d)`` array of parameters and return ``n`` values.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

CHUNK = 1 << 16


def worker_count() -> int:
    cap = os.environ.get("KN_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def evaluate_chunked(objective, params: np.ndarray) -> np.ndarray:
    """Apply `objective` to rows of `params` in chunks, in parallel if allowed."""
    n = len(params)
    if n <= CHUNK:
        return np.asarray(objective(params))
    chunks = [params[i : i + CHUNK] for i in range(0, n, CHUNK)]
    workers = worker_count()
    if workers == 1:
        parts = [objective(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(objective, chunks))
    return np.concatenate(parts)


def tensor_grid(axes: list[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass
class GridMinimum:
    value: float
    params: np.ndarray
    # refined local minima, best first: (value, params) pairs
    candidates: list[tuple[float, np.ndarray]]


def compass_refine(objective, starts: np.ndarray, step: np.ndarray, min_step: float = 1e-10,
                   max_rounds: int = 2000):
    """Batched compass search from each row of `starts`."""
    x = np.array(starts, dtype=float)
    n, d = x.shape
    fx = np.asarray(objective(x), dtype=float)
    h = np.tile(np.asarray(step, dtype=float), (n, 1))
    moves = np.concatenate([np.eye(d), -np.eye(d)])
    for _ in range(max_rounds):
        active = h.max(axis=1) > min_step
        if not active.any():
            break
        trial = x[:, None, :] + moves[None, :, :] * h[:, None, :]
        ft = np.asarray(objective(trial.reshape(-1, d)), dtype=float).reshape(n, 2 * d)
        best = ft.argmin(axis=1)
        fbest = ft[np.arange(n), best]
        improve = (fbest < fx) & active
        x[improve] = trial[improve, best[improve]]
        fx[improve] = fbest[improve]
        shrink = ~improve & active
        h[shrink] *= 0.5
    return x, fx


def grid_minimize(objective, axes: list[np.ndarray], n_starts: int = 32,
                  min_step: float = 1e-10) -> GridMinimum:
    params = tensor_grid(axes)
    values = evaluate_chunked(objective, params)
    n_starts = min(n_starts, len(values))
    order = np.argsort(values, kind="stable")[:n_starts]
    spacing = np.array([
        (ax[1] - ax[0]) if len(ax) > 1 else 0.0 for ax in axes
    ])
    x, fx = compass_refine(objective, params[order], spacing, min_step=min_step)
    # keep the grid value if refinement could not beat it (it never gets worse)
    rank = np.argsort(fx, kind="stable")
    candidates = [(float(fx[i]), x[i].copy()) for i in rank]
    return GridMinimum(value=candidates[0][0], params=candidates[0][1], candidates=candidates)
