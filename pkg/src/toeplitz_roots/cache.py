"""
On-disk cache of root constructions.

A construction is keyed by the SHA-256 of its canonical problem document
(symbol plus options). Entries are JSON files under the XDG cache directory
and are valid only for the package version and cache format that wrote them.

Usage:
    cache = ResultCache()
    doc = cache.load(problem.to_dict())
    if doc is None:
        doc = result_to_dict(construct_root(problem))
        cache.save(problem.to_dict(), doc)
"""

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger(__name__)

CACHE_DIR_NAME = "toeplitz-roots"


def get_cache_dir() -> Path:
    """
    XDG-compliant cache directory, created on demand.

    Uses ``$XDG_CACHE_HOME/toeplitz-roots`` and falls back to
    ``~/.cache/toeplitz-roots``.
    """
    cache_home = os.environ.get("XDG_CACHE_HOME")
    base = Path(cache_home) if cache_home else Path.home() / ".cache"
    cache_dir = base / CACHE_DIR_NAME
    cache_dir.mkdir(parents=True, exist_ok=True)
    return cache_dir


def problem_key(problem_doc: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON of a problem document."""
    canonical = json.dumps(problem_doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _package_version() -> str:
    from . import __version__
    return __version__


@dataclass(frozen=True)
class CacheConfig:
    """Configuration for result caching behavior."""
    max_age_days: int = 7  # Maximum entry age before invalidation
    cache_version: str = "1.0"  # Cache format version


class ResultCache:
    """
    Cache of RootResult documents, one JSON file per problem.

    Entries record the cache format version, the package version and a
    timestamp; any mismatch or an expired entry is treated as a miss.
    """

    def __init__(
        self,
        cache_dir: Optional[Path] = None,
        config: Optional[CacheConfig] = None,
        version_getter: Callable[[], str] = _package_version,
    ):
        self.config = config or CacheConfig()
        self.version_getter = version_getter
        self._cache_dir = Path(cache_dir) if cache_dir is not None else get_cache_dir()

    @property
    def cache_dir(self) -> Path:
        return self._cache_dir

    def path_for(self, problem_doc: Dict[str, Any]) -> Path:
        return self._cache_dir / f"{problem_key(problem_doc)}.json"

    def load(self, problem_doc: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        """
        Cached result document for a problem.

        Returns:
            The result document, or None if absent or invalid
        """
        path = self.path_for(problem_doc)
        if not path.exists():
            logger.debug(f"No cached result at {path.name}")
            return None

        try:
            entry = json.loads(path.read_text())
        except json.JSONDecodeError:
            logger.warning(f"Corrupt cache file {path}, removing")
            path.unlink(missing_ok=True)
            return None

        if entry.get("cache_version") != self.config.cache_version:
            logger.debug(f"Cache format mismatch for {path.name}")
            return None

        cached_version = entry.get("version", "unknown")
        current_version = self.version_getter()
        if cached_version != current_version:
            logger.info(
                f"toeplitz-roots version changed ({cached_version} → {current_version}) - "
                f"cached result invalid"
            )
            return None

        age_days = (time.time() - entry.get("timestamp", 0)) / (24 * 3600)
        if age_days > self.config.max_age_days:
            logger.debug(f"Cached result {path.name} is {age_days:.1f} days old - recomputing")
            return None

        if entry.get("problem") != json.loads(json.dumps(problem_doc)) or "result" not in entry:
            logger.warning(f"Cache entry {path.name} does not match its problem, removing")
            path.unlink(missing_ok=True)
            return None

        logger.info(f"✅ Loaded cached result {path.name[:12]}")
        return entry["result"]

    def save(self, problem_doc: Dict[str, Any], result_doc: Dict[str, Any]) -> Optional[Path]:
        """Store a result document; failures to write are logged, not raised."""
        entry = {
            "cache_version": self.config.cache_version,
            "version": self.version_getter(),
            "timestamp": time.time(),
            "problem": problem_doc,
            "result": result_doc,
        }
        path = self.path_for(problem_doc)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(entry, sort_keys=True))
        except OSError as e:
            logger.warning(f"Failed to save cached result {path}: {e}")
            return None
        logger.info(f"💾 Cached result {path.name[:12]}")
        return path

    def clear(self) -> int:
        """Remove every cached result; returns how many were removed."""
        removed = 0
        for path in self._cache_dir.glob("*.json"):
            path.unlink()
            removed += 1
        if removed:
            logger.info(f"🧹 Cleared {removed} cached results")
        return removed
