import hashlib
import json
import threading
from collections import OrderedDict
from typing import Any, Callable

import structlog

from diracsim.metrics import CACHE_HITS, CACHE_MISSES

logger = structlog.get_logger(__name__)


def build_cache_key(**parts) -> str:
    payload = json.dumps(parts, sort_keys=True, default=str)
    digest = hashlib.sha256(payload.encode()).hexdigest()

    return f"ref:{digest}"


class ReferenceCache:
    """In-process store of reference solutions.

    Each key has its own lock, so concurrent cells that need the same
    reference wait for one computation instead of repeating it. At most
    ``max_entries`` references are kept; the least recently used goes first.
    """

    def __init__(self, max_entries: int = 8):
        if max_entries < 1:
            raise ValueError("max_entries must be at least 1")
        self.max_entries = max_entries
        self._values: OrderedDict[str, Any] = OrderedDict()
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def __len__(self) -> int:
        with self._guard:
            return len(self._values)

    def __contains__(self, key: str) -> bool:
        with self._guard:
            return key in self._values

    def _lookup(self, key: str) -> tuple[bool, Any]:
        # caller holds the guard
        if key not in self._values:
            return False, None
        self._values.move_to_end(key)
        CACHE_HITS.inc()
        logger.debug("reference_cache_hit", key=key)
        return True, self._values[key]

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        with self._guard:
            found, value = self._lookup(key)
            if found:
                return value
            lock = self._locks.setdefault(key, threading.Lock())

        with lock:
            with self._guard:
                found, value = self._lookup(key)
                if found:
                    return value
            CACHE_MISSES.inc()
            value = compute()
            with self._guard:
                self._values[key] = value
                self._values.move_to_end(key)
                while len(self._values) > self.max_entries:
                    evicted, _ = self._values.popitem(last=False)
                    self._locks.pop(evicted, None)
                    logger.debug("reference_cache_evicted", key=evicted)
            return value

    def clear(self):
        with self._guard:
            self._values.clear()
            self._locks.clear()


reference_cache = ReferenceCache()
