"""
Thread pool for independent batches.
"""

from discrete_uniformization.workers.pool import WorkerPool, parallel_map

__all__ = [
    "WorkerPool",
    "parallel_map",
]
