"""Tests for the report cache (memory fallback)."""

import time

from app import cache
from app.cache import clear_report_cache, get_cache_status, get_cached, report_key, set_cached


class TestReportKey:
    """Tests for cache keys."""

    def test_order_independent(self):
        """Parameter order does not change the key."""
        assert report_key("scenario", "ghz", {"a": 1, "b": 2}) == report_key("scenario", "ghz", {"b": 2, "a": 1})

    def test_distinct(self):
        """Different parameters or names give different keys."""
        base = report_key("scenario", "ghz", {"seed": 0})
        assert base != report_key("scenario", "ghz", {"seed": 1})
        assert base != report_key("scenario", "orthogonal", {"seed": 0})
        assert base.startswith("qmask:scenario:ghz:")


class TestMemoryCache:
    """Tests for get/set/clear without Redis."""

    async def test_set_then_get(self):
        """Stored reports come back without the timestamp."""
        await set_cached("qmask:test", {"masked": True})
        assert await get_cached("qmask:test") == {"masked": True}

    async def test_miss(self):
        """Unknown keys return None."""
        assert await get_cached("qmask:absent") is None

    async def test_expired(self):
        """Expired entries are dropped."""
        cache._memory_cache["qmask:old"] = ({"masked": True}, time.time() - 1)
        assert await get_cached("qmask:old") is None
        assert "qmask:old" not in cache._memory_cache

    async def test_set_sweeps_expired(self):
        """Writing any key drops expired entries that were never read again."""
        for i in range(50):
            cache._memory_cache[f"qmask:stale{i}"] = ({"masked": True}, time.time() - 1)
        await set_cached("qmask:fresh", {"masked": False})
        assert list(cache._memory_cache) == ["qmask:fresh"]

    async def test_set_keeps_live_entries(self):
        """Unexpired entries survive the sweep."""
        await set_cached("qmask:a", {"x": 1}, ttl=600)
        await set_cached("qmask:b", {"x": 2}, ttl=600)
        assert await get_cached("qmask:a") == {"x": 1}

    async def test_clear(self):
        """Clearing removes every qmask key."""
        await set_cached("qmask:a", {"x": 1})
        await set_cached("qmask:b", {"x": 2})
        assert await clear_report_cache() == 2
        assert await get_cached("qmask:a") is None

    async def test_status(self):
        """Redis is disabled without a URL; memory keys are counted."""
        await set_cached("qmask:a", {"x": 1})
        status = await get_cache_status()
        assert status["redis"] == "disabled"
        assert status["memory_keys"] == 1
