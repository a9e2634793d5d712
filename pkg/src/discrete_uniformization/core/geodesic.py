"""
Geodesic distances on conformally flat tori ``g = exp(2 phi) (dx^2 + dy^2)``.

A geodesic from ``p`` to ``q`` is approximated by a polyline whose nodes are
pushed perpendicular to the chord ``q - p``. Its length
``sum exp(phi(midpoint)) |segment|`` is minimized by Newton's method; the
Hessian is tridiagonal, so all pairs of a batch are relaxed together in one
banded solve. Lengths at m and 2m segments are Richardson-extrapolated,
doubling m until the extrapolations agree.
"""

import logging
import math
from functools import partial

import numpy as np
from pydantic import BaseModel
from scipy.linalg import solve_banded

from discrete_uniformization.core.constants import GEODESIC_BATCH
from discrete_uniformization.core.errors import GeodesicSolverFailed
from discrete_uniformization.core.models import GeodesicSolverOptions
from discrete_uniformization.workers.pool import parallel_map

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# the eight non-trivial lattice translates, then the identity
_TRANSLATES = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)], dtype=float)


class ConformalTorus(BaseModel):
    """
    Unit-square torus with conformal factor
    ``phi = offset + alpha (cos 2 pi x + sin 2 pi y) + beta cos 2 pi (x + y)``.
    """
    alpha: float = 0.0
    beta: float = 0.0
    offset: float = 0.0

    @property
    def is_constant(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0

    @property
    def phi_min(self) -> float:
        """Lower bound of phi."""
        return self.offset - 2.0 * abs(self.alpha) - abs(self.beta)

    def phi(self, p: np.ndarray) -> np.ndarray:
        x, y = p[..., 0], p[..., 1]
        return (
            self.offset
            + self.alpha * (np.cos(TWO_PI * x) + np.sin(TWO_PI * y))
            + self.beta * np.cos(TWO_PI * (x + y))
        )

    def grad(self, p: np.ndarray) -> np.ndarray:
        x, y = p[..., 0], p[..., 1]
        mixed = -TWO_PI * self.beta * np.sin(TWO_PI * (x + y))
        gx = -TWO_PI * self.alpha * np.sin(TWO_PI * x) + mixed
        gy = TWO_PI * self.alpha * np.cos(TWO_PI * y) + mixed
        return np.stack([gx, gy], axis=-1)

    def hessian(self, p: np.ndarray) -> np.ndarray:
        x, y = p[..., 0], p[..., 1]
        k = TWO_PI ** 2
        mixed = -k * self.beta * np.cos(TWO_PI * (x + y))
        hxx = -k * self.alpha * np.cos(TWO_PI * x) + mixed
        hyy = -k * self.alpha * np.sin(TWO_PI * y) + mixed
        return np.stack([np.stack([hxx, mixed], -1), np.stack([mixed, hyy], -1)], -2)

    def uniformizing_factor(self, p: np.ndarray) -> np.ndarray:
        """
        Exact factor ``u_bar`` with ``exp(2 u_bar) g`` the unit-area flat torus.

        ``exp(2 u_bar) g = exp(-2c) (dx^2 + dy^2)`` has area ``exp(-2c)``, so c = 0.
        """
        return -self.phi(p)

    def label(self) -> str:
        return f"torus:amp={self.alpha!r},beta={self.beta!r},offset={self.offset!r}"


class _Polyline:
    """Batch of polylines from ``p`` along chords ``c`` with perpendicular offsets."""

    def __init__(self, torus: ConformalTorus, p: np.ndarray, c: np.ndarray, m: int):
        self.torus = torus
        self.p = p
        self.c = c
        self.m = m
        chord = np.linalg.norm(c, axis=1)
        self.chord = chord
        self.nu = np.stack([-c[:, 1], c[:, 0]], axis=1) / chord[:, None]
        self.h = chord / m

    def _segments(self, s: np.ndarray):
        """Midpoints, offset steps and segment lengths for offsets ``s`` (P, m + 1)."""
        frac = (np.arange(self.m) + 0.5) / self.m
        sigma = 0.5 * (s[:, 1:] + s[:, :-1])
        delta = s[:, 1:] - s[:, :-1]
        mid = (
            self.p[:, None, :]
            + frac[None, :, None] * self.c[:, None, :]
            + sigma[..., None] * self.nu[:, None, :]
        )
        ell = np.sqrt(self.h[:, None] ** 2 + delta ** 2)
        return mid, delta, ell

    def length(self, s: np.ndarray) -> np.ndarray:
        mid, _, ell = self._segments(s)
        return (np.exp(self.torus.phi(mid)) * ell).sum(axis=1)

    def newton_step(self, s: np.ndarray) -> np.ndarray:
        """Newton update for the interior offsets of every polyline."""
        mid, delta, ell = self._segments(s)
        g = np.exp(self.torus.phi(mid))
        d_nu = np.einsum("pki,pi->pk", self.torus.grad(mid), self.nu)
        h_nu = np.einsum("pkij,pi,pj->pk", self.torus.hessian(mid), self.nu, self.nu)
        h2 = self.h[:, None] ** 2

        f_s = g * d_nu * ell
        f_d = g * delta / ell
        f_ss = g * (d_nu ** 2 + h_nu) * ell
        f_sd = g * d_nu * delta / ell
        f_dd = g * h2 / ell ** 3

        # node k in 1..m-1 sits between segments k-1 and k
        grad = (0.5 * f_s[:, 1:] - f_d[:, 1:]) + (0.5 * f_s[:, :-1] + f_d[:, :-1])
        diag = (0.25 * f_ss[:, 1:] - f_sd[:, 1:] + f_dd[:, 1:]) + (
            0.25 * f_ss[:, :-1] + f_sd[:, :-1] + f_dd[:, :-1]
        )
        off = 0.25 * f_ss[:, 1:-1] - f_dd[:, 1:-1]

        P, n = grad.shape
        upper = np.zeros((P, n))
        lower = np.zeros((P, n))
        upper[:, 1:] = off
        lower[:, :-1] = off
        ab = np.stack([upper.ravel(), diag.ravel(), lower.ravel()])
        step = solve_banded((1, 1), ab, -grad.ravel())
        return step.reshape(P, n)


def _relax(
    torus: ConformalTorus,
    p: np.ndarray,
    c: np.ndarray,
    m: int,
    opts: GeodesicSolverOptions,
    s0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Minimize polyline lengths at m segments; returns (lengths, offsets)."""
    line = _Polyline(torus, p, c, m)
    s = np.zeros((len(p), m + 1)) if s0 is None else s0.copy()
    if torus.is_constant or m < 2:
        return line.length(s), s

    scale = float(line.chord.max())
    for iteration in range(opts.max_relaxation_iterations):
        step = line.newton_step(s)
        if not np.all(np.isfinite(step)):
            raise GeodesicSolverFailed(f"relaxation produced a non-finite step at m = {m}")
        s[:, 1:-1] += step
        if float(np.max(np.abs(step))) <= opts.tolerance * scale:
            return line.length(s), s

    raise GeodesicSolverFailed(
        f"relaxation did not converge in {opts.max_relaxation_iterations} iterations at m = {m}"
    )


def _refine(s: np.ndarray) -> np.ndarray:
    """Offsets at 2m segments by linear interpolation."""
    P, n = s.shape
    out = np.empty((P, 2 * n - 1))
    out[:, ::2] = s
    out[:, 1::2] = 0.5 * (s[:, 1:] + s[:, :-1])
    return out


def polyline_lengths(
    torus: ConformalTorus, p: np.ndarray, c: np.ndarray, m: int, opts: GeodesicSolverOptions
) -> np.ndarray:
    """Relaxed polyline length at a fixed segment count (no extrapolation)."""
    return _relax(torus, np.atleast_2d(p), np.atleast_2d(c), m, opts)[0]


def _extrapolated(
    torus: ConformalTorus, p: np.ndarray, c: np.ndarray, opts: GeodesicSolverOptions
) -> np.ndarray:
    m = opts.segments
    L_m, s = _relax(torus, p, c, m, opts)
    previous = None
    while 2 * m <= opts.max_segments:
        L_2m, s = _relax(torus, p, c, 2 * m, opts, _refine(s))
        richardson = (4.0 * L_2m - L_m) / 3.0
        if previous is not None and np.all(np.abs(richardson - previous) <= opts.refine_tol * richardson):
            logger.debug(f"Geodesic batch of {len(p)} converged at {2 * m} segments")
            return richardson
        if torus.is_constant:
            return richardson
        previous, L_m, m = richardson, L_2m, 2 * m

    raise GeodesicSolverFailed(
        f"lengths did not settle to {opts.refine_tol:g} relative within {opts.max_segments} segments"
    )


def _batch(torus: ConformalTorus, opts: GeodesicSolverOptions, chunk: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    return _extrapolated(torus, chunk[0], chunk[1], opts)


def chord_lengths(
    torus: ConformalTorus,
    p: np.ndarray,
    c: np.ndarray,
    opts: GeodesicSolverOptions | None = None,
    num_workers: int | None = None,
) -> np.ndarray:
    """
    Length of the shortest path homotopic to each straight chord ``p -> p + c``.

    Pairs are processed in fixed-size batches on the worker pool, so results do
    not depend on the thread count.
    """
    opts = opts or GeodesicSolverOptions()
    p = np.atleast_2d(np.asarray(p, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if len(p) == 0:
        return np.zeros(0)
    chunks = [(p[i:i + GEODESIC_BATCH], c[i:i + GEODESIC_BATCH]) for i in range(0, len(p), GEODESIC_BATCH)]
    results = parallel_map(partial(_batch, torus, opts), chunks, num_workers)
    return np.concatenate(results)


def geodesic_distances(
    torus: ConformalTorus,
    p: np.ndarray,
    c: np.ndarray,
    opts: GeodesicSolverOptions | None = None,
    num_workers: int | None = None,
) -> np.ndarray:
    """
    Distances on the torus from ``p`` to ``p + c``, minimized over the nine
    nearest lattice translates of the target.

    A translate is solved only when ``exp(min phi) |chord|`` undercuts the
    current best distance.
    """
    opts = opts or GeodesicSolverOptions()
    p = np.atleast_2d(np.asarray(p, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    best = chord_lengths(torus, p, c, opts, num_workers)

    lower = math.exp(torus.phi_min)
    for shift in _TRANSLATES:
        moved = c + shift
        candidate = lower * np.linalg.norm(moved, axis=1) < best
        if not np.any(candidate):
            continue
        idx = np.flatnonzero(candidate)
        lengths = chord_lengths(torus, p[idx], moved[idx], opts, num_workers)
        best[idx] = np.minimum(best[idx], lengths)
    return best
