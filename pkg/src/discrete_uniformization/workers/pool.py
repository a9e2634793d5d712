"""
In-memory worker pool for independent numerical batches.

Jobs run on daemon threads fed from a queue; results are collected by job id
so the caller gets them back in submission order.
"""

import logging
import queue
import threading
import uuid
from typing import Any, Callable, Iterable

from discrete_uniformization.core.config import get_settings

logger = logging.getLogger(__name__)


class WorkerPool:
    """Fixed-size pool of worker threads."""

    def __init__(self, num_workers: int | None = None):
        """
        Initialize the pool.

        Args:
            num_workers: Number of worker threads (defaults to DU_THREADS)
        """
        self.num_workers = max(1, num_workers or get_settings().threads)
        self.queue: queue.Queue = queue.Queue()
        self.workers: list[threading.Thread] = []
        self.results: dict[str, Any] = {}
        self.errors: dict[str, BaseException] = {}
        self._lock = threading.Lock()
        self.running = False

    def __enter__(self) -> "WorkerPool":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    def start(self):
        """Start worker threads."""
        if self.running:
            return

        self.running = True
        for i in range(self.num_workers):
            worker = threading.Thread(target=self._worker, args=(i,), daemon=True)
            worker.start()
            self.workers.append(worker)
        logger.debug(f"Started {self.num_workers} worker threads")

    def stop(self):
        """Stop worker threads."""
        self.running = False
        for _ in self.workers:
            self.queue.put(None)  # stop signal
        for worker in self.workers:
            worker.join(timeout=5)
        self.workers.clear()
        logger.debug("Stopped all worker threads")

    def submit(self, func: Callable, *args, job_id: str | None = None, **kwargs) -> str:
        """
        Submit a job.

        Args:
            func: Function to execute
            *args: Positional arguments for func
            job_id: Optional job ID (generated if not provided)
            **kwargs: Keyword arguments for func

        Returns:
            Job ID
        """
        if job_id is None:
            job_id = str(uuid.uuid4())
        self.queue.put({"id": job_id, "func": func, "args": args, "kwargs": kwargs})
        return job_id

    def map(self, func: Callable, items: Iterable) -> list:
        """
        Run ``func`` on each item and return results in input order.

        Raises:
            Exception: The exception of the first failing item, re-raised as is
        """
        items = list(items)
        if self.num_workers == 1 or len(items) <= 1:
            return [func(item) for item in items]

        started_here = not self.running
        if started_here:
            self.start()
        try:
            ids = [self.submit(func, item) for item in items]
            self.queue.join()
            for job_id in ids:
                if job_id in self.errors:
                    raise self.errors.pop(job_id)
            return [self.results.pop(job_id) for job_id in ids]
        finally:
            if started_here:
                self.stop()

    def _worker(self, worker_id: int):
        """Worker thread that processes jobs from the queue."""
        while self.running:
            try:
                job = self.queue.get(timeout=1)
            except queue.Empty:
                continue

            if job is None:
                self.queue.task_done()
                break

            try:
                result = job["func"](*job["args"], **job["kwargs"])
                with self._lock:
                    self.results[job["id"]] = result
            except Exception as e:
                logger.warning(f"Worker {worker_id}: job {job['id']} failed: {e}")
                with self._lock:
                    self.errors[job["id"]] = e
            finally:
                self.queue.task_done()


def parallel_map(func: Callable, items: Iterable, num_workers: int | None = None) -> list:
    """Map over items on a short-lived pool, preserving order."""
    return WorkerPool(num_workers).map(func, items)
