"""
Tests for the shared memo tables
"""
import threading
import time

import pytest

from memo_table import MemoTable


class TestMemoTable:
    @pytest.fixture
    def table(self):
        return MemoTable("test")

    def test_singleton_per_name(self):
        """Test that named tables are process-wide singletons."""
        t1 = MemoTable.get_instance("shared-test")
        t2 = MemoTable.get_instance("shared-test")
        assert t1 is t2
        assert MemoTable.get_instance("other-test") is not t1

    def test_get_or_insert_computes_once(self, table):
        calls = []
        assert table.get_or_insert("k", lambda: calls.append(1) or 42) == 42
        assert table.get_or_insert("k", lambda: calls.append(1) or 0) == 42
        assert len(calls) == 1
        status = table.get_status()
        assert status["hits"] == 1
        assert status["misses"] == 1
        assert status["size"] == 1

    def test_concurrent_callers_share_one_computation(self, table):
        calls = []
        results = []

        def slow():
            calls.append(1)
            time.sleep(0.05)
            return "value"

        threads = [threading.Thread(target=lambda: results.append(table.get_or_insert("k", slow)))
                   for _ in range(8)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert results == ["value"] * 8
        assert len(calls) == 1

    def test_errors_propagate_and_do_not_stick(self, table):
        """Test that a failed computation leaves the key free for a retry."""
        def boom():
            raise ValueError("bad value")

        with pytest.raises(ValueError, match="bad value"):
            table.get_or_insert("k", boom)
        assert table.get_or_insert("k", lambda: 1) == 1

    def test_retry_after_failure_serves_its_own_value(self, table):
        """Test that a waiter on a retried key gets the retry's value, not the earlier failure."""
        def boom():
            raise ValueError("bad value")

        with pytest.raises(ValueError, match="bad value"):
            table.get_or_insert("k", boom)

        started = threading.Event()
        release = threading.Event()
        results = {}

        def owner_compute():
            started.set()
            release.wait(5)
            return 42

        def call(name, compute):
            try:
                results[name] = table.get_or_insert("k", compute)
            except ValueError as e:
                results[name] = e

        owner = threading.Thread(target=call, args=("owner", owner_compute))
        owner.start()
        assert started.wait(5)
        waiter = threading.Thread(target=call, args=("waiter", lambda: 0))
        waiter.start()
        time.sleep(0.05)
        release.set()
        owner.join()
        waiter.join()
        assert results == {"owner": 42, "waiter": 42}

    def test_clear_after_failure_leaves_nothing_behind(self, table):
        def boom():
            raise ValueError("bad value")

        with pytest.raises(ValueError):
            table.get_or_insert("k", boom)
        table.clear()
        assert table.get_status() == {"name": "test", "size": 0, "hits": 0, "misses": 0, "pending": 0}
        assert table.get_or_insert("k", lambda: 5) == 5


    def test_put_keeps_first_value(self, table):
        table.put("k", 1)
        table.put("k", 2)
        assert table.peek("k") == 1
        assert table.peek("missing", "default") == "default"

    def test_clear(self, table):
        table.put("k", 1)
        table.clear()
        assert len(table) == 0
        assert table.get_status()["hits"] == 0
