"""Tests for the worker pool."""

import pytest

from discrete_uniformization.workers.pool import WorkerPool, parallel_map


def _square(x):
    return x * x


def _fail_on_three(x):
    if x == 3:
        raise ArithmeticError("three")
    return x


class TestWorkerPool:
    """Test ordered parallel maps."""

    @pytest.mark.parametrize("workers", [1, 4])
    def test_order_preserved(self, workers):
        assert parallel_map(_square, range(50), workers) == [x * x for x in range(50)]

    def test_exception_reraised(self):
        with pytest.raises(ArithmeticError, match="three"):
            parallel_map(_fail_on_three, range(8), 3)

    def test_reused_pool(self):
        with WorkerPool(2) as pool:
            assert pool.map(_square, [1, 2, 3]) == [1, 4, 9]
            assert pool.map(_square, [4, 5]) == [16, 25]
        assert pool.workers == []

    def test_default_from_settings(self, monkeypatch):
        monkeypatch.setenv("DU_THREADS", "3")
        assert WorkerPool().num_workers == 3

    def test_empty(self):
        assert parallel_map(_square, [], 4) == []
