"""
Shared caches of the workbench.

Every cache is an LRU guarded by its own lock, so callers running under the
worker pool see each entry built exactly once.
"""
from threading import RLock
import logging

from cachetools import LRUCache

from src.config import settings

logger = logging.getLogger(__name__)

# Character groups by modulus: generators, discrete-log tables, value tables
character_group_cache: LRUCache = LRUCache(maxsize=128)
character_group_lock = RLock()

# Ramanujan tau tables keyed by m_max
tau_cache: LRUCache = LRUCache(maxsize=settings.COEF_CACHE_SIZE)
tau_lock = RLock()

# Gauss-Legendre nodes and weights keyed by order
legendre_cache: LRUCache = LRUCache(maxsize=64)
legendre_lock = RLock()

# Smallest prime factors up to a bound, keyed by bound
sieve_cache: LRUCache = LRUCache(maxsize=4)
sieve_lock = RLock()

_CACHES = {
    "character_group_cache": character_group_cache,
    "tau_cache": tau_cache,
    "legendre_cache": legendre_cache,
    "sieve_cache": sieve_cache,
}


def invalidate_caches() -> None:
    """
    Clears every shared cache. Tests use it to measure cold paths.
    """
    for cache in _CACHES.values():
        cache.clear()
    logger.info("Shared caches invalidated")


def get_cache_stats() -> dict:
    return {
        name: {
            "current_size": len(cache),
            "max_size": cache.maxsize,
            "items": [str(key) for key in list(cache.keys())[:10]],
        }
        for name, cache in _CACHES.items()
    }
