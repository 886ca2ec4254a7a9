"""On-disk cache of JSON results, keyed and validated by SHA-256.

Each entry stores the request it answers and a digest of its payload. An
entry whose request does not match, or whose payload no longer hashes to
the stored digest, is treated as a miss and overwritten.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

ENV_VAR = "WREATHGEN_CACHE_DIR"
FORMAT = 1


def default_dir() -> Path:
    if os.environ.get(ENV_VAR):
        return Path(os.environ[ENV_VAR])
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "wreathgen"


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical(obj).encode()).hexdigest()


@dataclass
class Cache:
    root: Path
    hits: int = 0
    misses: int = 0

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, request: dict):
        key = digest({"format": FORMAT, "request": request})
        try:
            entry = json.loads(self._path(key).read_text())
        except (OSError, ValueError):
            self.misses += 1
            return None
        if entry.get("request") != request or entry.get("sha256") != digest(entry.get("payload")):
            self.misses += 1
            return None
        self.hits += 1
        return entry["payload"]

    def put(self, request: dict, payload) -> None:
        key = digest({"format": FORMAT, "request": request})
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {"format": FORMAT, "request": request, "sha256": digest(payload), "payload": payload}
        # write then rename, so readers never see half an entry
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(canonical(entry))
        os.replace(tmp, path)

    def cached(self, request: dict, compute):
        hit = self.get(request)
        if hit is not None:
            return hit
        payload = compute()
        self.put(request, payload)
        return payload


class NoCache:
    hits = misses = 0

    def cached(self, request: dict, compute):
        return compute()
