"""Local response cache for the scholarly-graph API.

One JSON document per (paper id, request kind), stored under a
content-addressed path so arbitrary ids never escape into filenames.
Writes are atomic (temp file + rename) and serialized through a lock;
reads need no lock.  A corrupt entry is treated as a miss and evicted.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path


class ResponseCache:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, kind: str, key: str) -> Path:
        digest = hashlib.sha256(f"{kind}:{key}".encode("utf-8")).hexdigest()
        return self.root / kind / digest[:2] / f"{digest}.json"

    def get(self, kind: str, key: str):
        """Return the cached payload, or None on a miss.

        A file that exists but does not parse is evicted and reported
        as a miss.
        """
        path = self._path(kind, key)
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return None
        except (json.JSONDecodeError, UnicodeDecodeError, OSError):
            try:
                path.unlink()
            except OSError:
                pass
            return None

    def put(self, kind: str, key: str, payload) -> None:
        """Store ``payload`` (any JSON-serializable value); last write wins."""
        path = self._path(kind, key)
        data = json.dumps(payload, ensure_ascii=False, sort_keys=True)
        with self._write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(data)
                os.replace(tmp, path)
            except BaseException:
                try:
                    os.unlink(tmp)
                except OSError:
                    pass
                raise

    def has(self, kind: str, key: str) -> bool:
        return self._path(kind, key).exists()
