"""Tests for thread-pool helpers."""

import threading
from unittest.mock import patch

from phase_space_tomography.utils.parallel import max_workers, parallel_map


class TestMaxWorkers:
    """TOMO_THREADS parsing."""

    def test_reads_env(self, monkeypatch):
        monkeypatch.setenv("TOMO_THREADS", "3")
        assert max_workers() == 3

    def test_floor_is_one(self, monkeypatch):
        monkeypatch.setenv("TOMO_THREADS", "0")
        assert max_workers() == 1

    def test_invalid_value_falls_back_to_cpu_count(self, monkeypatch):
        monkeypatch.setenv("TOMO_THREADS", "many")
        with patch("phase_space_tomography.utils.parallel.os.cpu_count", return_value=6):
            assert max_workers() == 6


class TestParallelMap:
    """Ordering and the serial path."""

    def test_preserves_order(self, monkeypatch):
        monkeypatch.setenv("TOMO_THREADS", "4")
        assert parallel_map(lambda k: k * k, list(range(20))) == [k * k for k in range(20)]

    def test_single_worker_runs_inline(self, monkeypatch):
        monkeypatch.setenv("TOMO_THREADS", "1")
        seen = parallel_map(lambda _: threading.get_ident(), [0, 1, 2])
        assert set(seen) == {threading.get_ident()}

    def test_empty_input(self):
        assert parallel_map(lambda k: k, []) == []
