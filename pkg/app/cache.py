"""Scenario report cache: Redis when QMASK_REDIS_URL is set, process memory otherwise."""

import hashlib
import json
import logging
import time
from datetime import datetime, timezone
from typing import Any

from .config import settings

logger = logging.getLogger(__name__)

try:
    import redis.asyncio as redis

    REDIS_AVAILABLE = True
except ImportError:
    redis = None
    REDIS_AVAILABLE = False
    logger.warning("[CACHE] redis package missing, reports cached in memory only")

KEY_PREFIX = "qmask:"
STAMP_FIELD = "_cached_at"

_redis_client: Any = None

# key -> (report, expires_at)
_memory_cache: dict[str, tuple[dict, float]] = {}


def report_key(kind: str, name: str, params: dict[str, Any]) -> str:
    """Stable cache key for a report kind, scenario name and parameter set."""
    payload = json.dumps(params, sort_keys=True, default=str)
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
    return f"{KEY_PREFIX}{kind}:{name}:{digest}"


def _unstamped(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != STAMP_FIELD}


def _memory_lookup(key: str) -> dict | None:
    entry = _memory_cache.get(key)
    if entry is None:
        return None
    report, expires_at = entry
    if time.time() >= expires_at:
        _memory_cache.pop(key, None)
        logger.debug(f"[CACHE] expired in memory: {key}")
        return None
    return report


def _sweep_expired(now: float) -> int:
    expired = [k for k, (_, expires_at) in _memory_cache.items() if now >= expires_at]
    for k in expired:
        del _memory_cache[k]
    if expired:
        logger.debug(f"[CACHE] swept {len(expired)} expired report(s) from memory")
    return len(expired)


async def get_redis() -> Any | None:
    """Lazily connect to Redis.

    Returns:
        The shared client, or None when Redis is not configured or unreachable
    """
    global _redis_client

    if not (REDIS_AVAILABLE and settings.redis_url):
        return None
    if _redis_client is not None:
        return _redis_client

    client = redis.from_url(settings.redis_url, encoding="utf-8", decode_responses=True)
    try:
        await client.ping()
    except Exception as e:
        logger.warning(f"[CACHE] Redis unreachable at {settings.redis_url}: {e}")
        return None
    logger.info(f"[CACHE] connected to Redis at {settings.redis_url}")
    _redis_client = client
    return _redis_client


async def get_cached(key: str) -> dict | None:
    """Fetch a cached report, Redis first.

    Args:
        key: Key from report_key()

    Returns:
        The report without its timestamp, or None on a miss
    """
    client = await get_redis()
    if client is not None:
        try:
            raw = await client.get(key)
        except Exception as e:
            logger.warning(f"[CACHE] Redis read failed for {key}: {e}")
            raw = None
        if raw:
            logger.debug(f"[CACHE] HIT redis {key}")
            return _unstamped(json.loads(raw))

    report = _memory_lookup(key)
    if report is not None:
        logger.debug(f"[CACHE] HIT memory {key}")
        return _unstamped(report)

    logger.debug(f"[CACHE] MISS {key}")
    return None


async def set_cached(key: str, value: dict, ttl: int | None = None) -> bool:
    """Store a report in memory and, when configured, in Redis.

    Args:
        key: Key from report_key()
        value: JSON-serializable report
        ttl: Seconds to keep it (default settings.cache_ttl_report)
    """
    ttl = ttl or settings.cache_ttl_report
    stamped = {**value, STAMP_FIELD: datetime.now(timezone.utc).isoformat()}

    now = time.time()
    _sweep_expired(now)
    _memory_cache[key] = (stamped, now + ttl)

    client = await get_redis()
    if client is not None:
        try:
            await client.setex(key, ttl, json.dumps(stamped, default=str))
        except Exception as e:
            logger.warning(f"[CACHE] Redis write failed for {key}: {e}")

    logger.debug(f"[CACHE] SET {key} ttl={ttl}s")
    return True


async def _redis_report_keys(client: Any) -> list[str]:
    return list(await client.keys(f"{KEY_PREFIX}*") or [])


async def clear_report_cache() -> int:
    """Drop every cached report.

    Returns:
        Number of keys removed across Redis and memory
    """
    removed = 0
    client = await get_redis()
    if client is not None:
        try:
            keys = await _redis_report_keys(client)
            removed += await client.delete(*keys) if keys else 0
        except Exception as e:
            logger.warning(f"[CACHE] Redis clear failed: {e}")

    stale = [k for k in _memory_cache if k.startswith(KEY_PREFIX)]
    for k in stale:
        _memory_cache.pop(k)
    removed += len(stale)

    logger.info(f"[CACHE] cleared {removed} report(s)")
    return removed


async def get_cache_status() -> dict[str, Any]:
    """Redis connection state and key counts for /health."""
    status = {"redis": "disabled", "redis_keys": 0, "memory_keys": len(_memory_cache)}
    if not settings.redis_url:
        return status

    status["redis"] = "disconnected"
    client = await get_redis()
    if client is not None:
        try:
            status["redis_keys"] = len(await _redis_report_keys(client))
            status["redis"] = "connected"
        except Exception as e:
            logger.warning(f"[CACHE] Redis status failed: {e}")
    return status
