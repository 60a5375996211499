"""Small shared helpers: stable seeding, hashing, atomic file writes."""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np


def stable_seed(*parts) -> int:
    """Platform-independent 64-bit seed derived from the given parts."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stable_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(stable_seed(*parts))


def params_fingerprint(params: dict[str, np.ndarray]) -> bytes:
    """32-byte digest of a named parameter set (order-independent)."""
    h = hashlib.sha256()
    for name in sorted(params):
        arr = np.ascontiguousarray(params[name], dtype="<f4")
        h.update(name.encode("utf-8"))
        h.update(str(arr.shape).encode("ascii"))
        h.update(arr.tobytes())
    return h.digest()


def atomic_write_bytes(path, blob: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def worker_count(default: int = 1) -> int:
    """Worker cap from HALLUX_THREADS (>=1)."""
    raw = os.environ.get("HALLUX_THREADS", "")
    try:
        return max(1, int(raw)) if raw else default
    except ValueError:
        return default
