import logging
import threading
from typing import Any, Callable, Dict, Hashable, Optional

logger = logging.getLogger("bethe")


class _Attempt:
    """One in-flight computation of a key and its failure, if any."""
    __slots__ = ("done", "error")

    def __init__(self):
        self.done = threading.Event()
        self.error: Optional[BaseException] = None


class MemoTable:
    """
    Lock-protected memo with exactly-once insertion.

    The first caller of a key computes the value; concurrent callers of the
    same key wait for it instead of computing it again. Named tables are
    shared process-wide through get_instance().
    """
    _instances: Dict[str, "MemoTable"] = {}
    _registry_lock = threading.Lock()

    def __init__(self, name: str = "anonymous"):
        self.name = name
        self._lock = threading.Lock()
        self._values: Dict[Hashable, Any] = {}
        self._pending: Dict[Hashable, _Attempt] = {}
        self.hits = 0
        self.misses = 0

    @classmethod
    def get_instance(cls, name: str) -> "MemoTable":
        """Get the shared table for a name."""
        if name not in cls._instances:
            with cls._registry_lock:
                if name not in cls._instances:
                    cls._instances[name] = cls(name)
        return cls._instances[name]

    def get_or_insert(self, key: Hashable, compute: Callable[[], Any]) -> Any:
        while True:
            with self._lock:
                if key in self._values:
                    self.hits += 1
                    return self._values[key]
                attempt = self._pending.get(key)
                if attempt is None:
                    attempt = _Attempt()
                    self._pending[key] = attempt
                    self.misses += 1
                    owner = True
                else:
                    owner = False
            if not owner:
                # A failure belongs to the attempt it ended; a later attempt starts clean.
                attempt.done.wait()
                if attempt.error is not None:
                    raise attempt.error
                continue
            try:
                value = compute()
            except BaseException as e:
                attempt.error = e
                with self._lock:
                    del self._pending[key]
                attempt.done.set()
                logger.debug(f"Memo {self.name}: computation of {key!r} failed: {e}")
                raise
            with self._lock:
                self._values[key] = value
                del self._pending[key]
            attempt.done.set()
            return value

    def peek(self, key: Hashable, default=None):
        with self._lock:
            return self._values.get(key, default)

    def put(self, key: Hashable, value: Any):
        """Store a value unless the key is already present."""
        with self._lock:
            self._values.setdefault(key, value)

    def clear(self):
        with self._lock:
            self._values.clear()
            self.hits = 0
            self.misses = 0

    def __len__(self):
        return len(self._values)

    def get_status(self) -> Dict[str, Any]:
        """Get memo statistics for logging and reports."""
        with self._lock:
            return {
                "name": self.name,
                "size": len(self._values),
                "hits": self.hits,
                "misses": self.misses,
                "pending": len(self._pending),
            }
