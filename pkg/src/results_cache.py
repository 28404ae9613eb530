"""
Results Cache - append-only JSON-lines store of computed invariant reports
"""

import asyncio
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from models import InvariantReport, SheafInvariantsError


CacheKey = Tuple[str, int, str, str]


class ResultsCache:
    """Reports keyed by (space, j, canonical class digest, truncation settings)"""

    def __init__(self, config: Dict):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.enabled = bool(config.get("enabled", False))
        self.path = config.get("path", "data/invariants.jsonl")
        self._entries: Dict[CacheKey, Dict[str, Any]] = {}
        self._lock = asyncio.Lock()
        self.hits = 0
        self.misses = 0

    async def initialize(self):
        """Create the cache directory and load existing entries"""
        if not self.enabled:
            return
        try:
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
            if os.path.exists(self.path):
                with open(self.path, "r", encoding="utf-8") as f:
                    for line_no, line in enumerate(f, 1):
                        line = line.strip()
                        if not line:
                            continue
                        try:
                            record = json.loads(line)
                            self._entries[self._key_of(record)] = record
                        except (ValueError, KeyError) as e:
                            self.logger.warning(f"Skipping corrupt cache line {line_no} in {self.path}: {e}")
            self.logger.info(f"Results cache opened: {self.path} ({len(self._entries)} entries)")

        except OSError as e:
            self.logger.error(f"Error opening results cache: {e}")
            raise SheafInvariantsError(f"cannot open results cache {self.path}: {e}")

    @staticmethod
    def _key_of(record: Dict[str, Any]) -> CacheKey:
        return (record["space"], int(record["j"]), record["digest"], record["settings"])

    @staticmethod
    def make_key(space: str, j: int, digest: str, settings_key: str) -> CacheKey:
        return (space, j, digest, settings_key)

    def get_report(self, key: CacheKey) -> Optional[InvariantReport]:
        if not self.enabled:
            return None
        record = self._entries.get(key)
        if record is None:
            self.misses += 1
            return None
        self.hits += 1
        return InvariantReport.from_dict(dict(record["report"], digest=record["digest"]))

    async def save_report(self, key: CacheKey, report: InvariantReport, claim: str = "",
                          seed: Optional[int] = None):
        """Append one report; a key already present is not written twice"""
        if not self.enabled:
            return
        async with self._lock:
            if key in self._entries:
                return
            space, j, digest, settings_key = key
            record = {
                "space": space,
                "j": j,
                "digest": digest,
                "settings": settings_key,
                "claim": claim,
                "seed": seed,
                "report": report.to_dict(),
            }
            try:
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(record, sort_keys=True) + "\n")
                self._entries[key] = record

            except OSError as e:
                self.logger.error(f"Error saving report to cache: {e}")
                raise

    async def get_cache_info(self) -> Dict[str, Any]:
        file_size = os.path.getsize(self.path) if self.enabled and os.path.exists(self.path) else 0
        return {
            "enabled": self.enabled,
            "cache_path": self.path,
            "file_size_bytes": file_size,
            "entries": len(self._entries),
            "hits": self.hits,
            "misses": self.misses,
        }

    async def close(self):
        if self.enabled:
            self.logger.info(f"Results cache closed ({self.hits} hits, {self.misses} misses)")
