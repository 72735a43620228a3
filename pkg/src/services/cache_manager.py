#!/usr/bin/env python3
"""
Result cache for pure numerical computations
LRU eviction with a size limit; entries never expire because every cached
value is a pure function of its key.
"""

import threading
import logging
from collections import OrderedDict
from typing import Any, Callable, Dict, Hashable, Optional

logger = logging.getLogger('hdkg.cache')


class ResultCache:
    """
    Thread-safe LRU cache with:
    - size limit (LRU eviction)
    - hit / miss / eviction statistics
    """

    def __init__(self, name: str, max_size: int = 64):
        self.name = name
        self.max_size = max_size

        self._cache: "OrderedDict[Hashable, Any]" = OrderedDict()
        self._lock = threading.RLock()

        self._stats = {
            'hits': 0,
            'misses': 0,
            'evictions': 0,
            'total_sets': 0,
        }

        logger.debug(
            f"Result cache '{self.name}' initialized\n"
            f"   └─ Max size: {self.max_size} entries"
        )

    def get(self, key: Hashable) -> Optional[Any]:
        """
        Get a value from the cache

        Returns:
            Value or None if not present
        """
        with self._lock:
            if key not in self._cache:
                self._stats['misses'] += 1
                return None

            self._cache.move_to_end(key)
            self._stats['hits'] += 1
            return self._cache[key]

    def set(self, key: Hashable, value: Any) -> None:
        """Store a value, evicting the least recently used entries if full"""
        with self._lock:
            self._cache[key] = value
            self._cache.move_to_end(key)
            self._stats['total_sets'] += 1
            self._enforce_size_limit()

    def get_or_compute(self, key: Hashable, compute: Callable[[], Any]) -> Any:
        """
        Return the cached value for key, computing and storing it on a miss

        The computation runs outside the lock; two threads racing on the same
        key both compute and the later one wins.
        """
        value = self.get(key)
        if value is not None:
            return value
        value = compute()
        self.set(key, value)
        return value

    def clear(self) -> None:
        """Drop every entry"""
        with self._lock:
            old_size = len(self._cache)
            self._cache.clear()
            logger.debug(f"Cache '{self.name}' CLEARED: removed {old_size} entries")

    def _enforce_size_limit(self) -> None:
        while len(self._cache) > self.max_size:
            oldest_key = next(iter(self._cache))
            logger.debug(f"LRU EVICTION in '{self.name}': removing {oldest_key!r}")
            del self._cache[oldest_key]
            self._stats['evictions'] += 1

    def get_stats(self) -> Dict[str, Any]:
        """Cache statistics"""
        with self._lock:
            total_requests = self._stats['hits'] + self._stats['misses']
            hit_ratio = self._stats['hits'] / total_requests if total_requests > 0 else 0.0
            return {
                'current_size': len(self._cache),
                'max_size': self.max_size,
                'hits': self._stats['hits'],
                'misses': self._stats['misses'],
                'hit_ratio': hit_ratio,
                'evictions': self._stats['evictions'],
                'total_sets': self._stats['total_sets'],
            }

    def __contains__(self, key: Hashable) -> bool:
        with self._lock:
            return key in self._cache

    def __len__(self) -> int:
        with self._lock:
            return len(self._cache)
