"""Tests for geodesic distances on conformally flat tori."""

import math

import numpy as np
import pytest
from scipy.optimize import minimize

from discrete_uniformization.core.geodesic import (
    ConformalTorus,
    chord_lengths,
    geodesic_distances,
    polyline_lengths,
)
from discrete_uniformization.core.models import GeodesicSolverOptions
from discrete_uniformization.core.surfaces import scaled_pairs, verify_cubic_estimate

BUMPY = ConformalTorus(alpha=0.05, beta=0.03)
P = np.array([0.1, 0.2])
C = np.array([0.3, 0.1])


def reference_polyline_length(t: ConformalTorus, p: np.ndarray, c: np.ndarray, m: int) -> float:
    """Minimize the polyline length directly with BFGS over the interior offsets."""
    chord = np.linalg.norm(c)
    nu = np.array([-c[1], c[0]]) / chord
    h = chord / m
    frac = (np.arange(m) + 0.5) / m

    def length(interior):
        s = np.concatenate([[0.0], interior, [0.0]])
        mid = p + frac[:, None] * c + 0.5 * (s[1:] + s[:-1])[:, None] * nu
        return float(np.sum(np.exp(t.phi(mid)) * np.hypot(h, np.diff(s))))

    result = minimize(length, np.zeros(m - 1), method="BFGS", options={"gtol": 1e-12})
    return float(result.fun)


class TestConformalTorus:
    """Test the analytic conformal factor."""

    def test_gradient(self):
        p = np.array([0.3, 0.7])
        h = 1e-6
        fd = [
            (BUMPY.phi(p + h * e) - BUMPY.phi(p - h * e)) / (2 * h)
            for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        ]
        assert BUMPY.grad(p) == pytest.approx(fd, abs=1e-8)

    def test_hessian(self):
        p = np.array([0.3, 0.7])
        h = 1e-6
        cols = [
            (BUMPY.grad(p + h * e) - BUMPY.grad(p - h * e)) / (2 * h)
            for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        ]
        assert BUMPY.hessian(p) == pytest.approx(np.stack(cols, axis=1), abs=1e-6)

    def test_phi_min_is_lower_bound(self):
        g = np.stack(np.meshgrid(np.linspace(0, 1, 41), np.linspace(0, 1, 41)), axis=-1)
        assert BUMPY.phi(g).min() >= BUMPY.phi_min

    def test_uniformizing_factor(self):
        p = np.array([[0.1, 0.2], [0.5, 0.5]])
        assert BUMPY.uniformizing_factor(p) == pytest.approx(-BUMPY.phi(p))

    def test_periodic(self):
        p = np.array([0.3, 0.7])
        assert BUMPY.phi(p + np.array([1.0, -1.0])) == pytest.approx(BUMPY.phi(p), abs=1e-14)


class TestPolyline:
    """Test the relaxed polyline against a generic optimizer."""

    @pytest.mark.parametrize("m", [8, 16])
    def test_matches_bfgs(self, m):
        ours = polyline_lengths(BUMPY, P, C, m, GeodesicSolverOptions())[0]
        assert ours == pytest.approx(reference_polyline_length(BUMPY, P, C, m), rel=1e-10)

    def test_second_order_in_segments(self):
        opts = GeodesicSolverOptions()
        limit = chord_lengths(BUMPY, P, C, opts)[0]
        errors = [abs(polyline_lengths(BUMPY, P, C, m, opts)[0] - limit) for m in (16, 32, 64)]
        assert errors[0] / errors[1] > 3.5
        assert errors[1] / errors[2] > 3.5


class TestDistances:
    """Test extrapolated chord lengths and torus distances."""

    def test_flat_is_scaled_chord(self):
        t = ConformalTorus(offset=0.2)
        c = np.array([[0.3, 0.4], [0.1, 0.0]])
        got = chord_lengths(t, np.zeros((2, 2)), c)
        assert got == pytest.approx(math.exp(0.2) * np.array([0.5, 0.1]), rel=1e-12)

    def test_bounds(self):
        d = chord_lengths(BUMPY, P, C)[0]
        chord = float(np.linalg.norm(C))
        assert math.exp(BUMPY.phi_min) * chord <= d
        phi_max = BUMPY.offset + 2 * abs(BUMPY.alpha) + abs(BUMPY.beta)
        assert d <= math.exp(phi_max) * chord

    def test_symmetric(self):
        forward = chord_lengths(BUMPY, P, C)[0]
        backward = chord_lengths(BUMPY, P + C, -C)[0]
        assert forward == pytest.approx(backward, rel=1e-9)

    def test_wraps_around(self):
        t = ConformalTorus()
        d = geodesic_distances(t, np.array([[0.05, 0.5]]), np.array([[0.9, 0.0]]))
        assert d[0] == pytest.approx(0.1, rel=1e-12)

    def test_empty(self):
        assert chord_lengths(BUMPY, np.zeros((0, 2)), np.zeros((0, 2))).shape == (0,)

    def test_thread_count_does_not_change_results(self, rng):
        t = ConformalTorus(alpha=0.02)
        p = rng.uniform(0, 1, size=(2100, 2))
        c = np.stack([rng.uniform(0.02, 0.05, size=2100), rng.uniform(-0.03, 0.03, size=2100)], axis=1)
        one = chord_lengths(t, p, c, num_workers=1)
        four = chord_lengths(t, p, c, num_workers=4)
        assert np.array_equal(one, four)


class TestCubicEstimate:
    """Test the cubic deviation between conformal and flat distances."""

    def test_scaled_pairs(self):
        x, y = scaled_pairs((0.5, 0.5), (3.0, 4.0), [0.1, 0.2])
        assert np.linalg.norm(y - x, axis=1) == pytest.approx([0.1, 0.2])
        assert 0.5 * (x + y) == pytest.approx(np.full((2, 2), 0.5))

    def test_ratio_bounded(self):
        pairs = scaled_pairs((0.3, 0.2), (1.0, 0.5), [0.2, 0.1, 0.05, 0.025])
        report = verify_cubic_estimate(BUMPY, pairs)
        assert len(report.ratios) == 4
        assert report.max_ratio < 50.0
        assert report.deviations[-1] < report.deviations[0]

    def test_deviation_is_cubic(self):
        distances = [2.0 ** -k for k in range(3, 8)]
        pairs = scaled_pairs((0.5, 0.75), (1.0, 0.5), distances)
        report = verify_cubic_estimate(ConformalTorus(alpha=0.05), pairs)
        assert len(report.halving_ratios) == 4
        assert max(report.ratios) <= 3.0 * min(report.ratios)
        assert all(5.0 <= r <= 12.0 for r in report.halving_ratios)

    def test_flat_torus_exact(self):
        pairs = scaled_pairs((0.3, 0.2), (1.0, 0.0), [0.2, 0.1])
        report = verify_cubic_estimate(ConformalTorus(offset=0.3), pairs)
        assert report.max_ratio < 1e-10
