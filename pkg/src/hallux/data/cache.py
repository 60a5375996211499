"""Persisted per-sample feature vectors for frozen-target training.

File layout (HLXC): magic, version, producing-model fingerprint (32 bytes),
feature dim, entry count, an index of (id, offset, length) records sorted
by id, then concatenated HLXT tensor blobs.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import CacheError, StaleCacheError
from ..tensor_core.tensor import Tensor
from ..util import atomic_write_bytes, worker_count

CACHE_MAGIC = b"HLXC"
CACHE_VERSION = 1


class FeatureCache:
    """Map sample_id -> feature vector, tied to a producing-model fingerprint."""

    def __init__(self, features: dict[str, np.ndarray], fingerprint: bytes,
                 dim: int | None = None):
        if len(fingerprint) != 32:
            raise CacheError("fingerprint must be 32 bytes")
        self.features = {k: np.asarray(v, dtype=np.float32) for k, v in features.items()}
        for sid, v in self.features.items():
            if v.ndim != 1:
                raise CacheError(f"feature for '{sid}' is not a vector: {v.shape}")
        dims = {v.shape[0] for v in self.features.values()}
        if len(dims) > 1:
            raise CacheError(f"mixed feature dims in cache: {sorted(dims)}")
        if dims:
            dim = dims.pop()
        if dim is None:
            raise CacheError("empty cache needs an explicit feature dim")
        self.dim = int(dim)
        self.fingerprint = bytes(fingerprint)

    def __len__(self) -> int:
        return len(self.features)

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self.features

    def verify_fingerprint(self, fingerprint: bytes) -> None:
        if bytes(fingerprint) != self.fingerprint:
            raise StaleCacheError(
                "cache fingerprint does not match the frozen model; rebuild the cache"
            )

    def lookup(self, sample_id: str) -> np.ndarray:
        if sample_id not in self.features:
            raise CacheError(f"sample id '{sample_id}' not in cache")
        return self.features[sample_id]

    def matrix(self, ids: list[str]) -> np.ndarray:
        return np.stack([self.lookup(i) for i in ids]) if ids else np.zeros((0, self.dim), np.float32)

    # -- file I/O ---------------------------------------------------------------

    def to_bytes(self) -> bytes:
        index = bytearray()
        payload = bytearray()
        for sid in sorted(self.features):
            blob = Tensor(self.features[sid]).to_bytes()
            sid_b = sid.encode("utf-8")
            index += struct.pack("<H", len(sid_b)) + sid_b
            index += struct.pack("<QQ", len(payload), len(blob))
            payload += blob
        head = CACHE_MAGIC + struct.pack("<H", CACHE_VERSION) + self.fingerprint
        head += struct.pack("<II", self.dim, len(self.features))
        return bytes(head + index + payload)

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        atomic_write_bytes(path, self.to_bytes())
        return path

    @classmethod
    def read(cls, path) -> "FeatureCache":
        blob = Path(path).read_bytes()
        if blob[:4] != CACHE_MAGIC:
            raise CacheError(f"not a feature cache file: {path}")
        (version,) = struct.unpack_from("<H", blob, 4)
        if version != CACHE_VERSION:
            raise CacheError(f"unsupported cache version {version}")
        fingerprint = blob[6:38]
        dim, count = struct.unpack_from("<II", blob, 38)
        offset = 46
        entries = []
        for _ in range(count):
            (sid_len,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            sid = blob[offset : offset + sid_len].decode("utf-8")
            offset += sid_len
            start, length = struct.unpack_from("<QQ", blob, offset)
            offset += 16
            entries.append((sid, start, length))
        features = {}
        for sid, start, length in entries:
            t = Tensor.from_bytes(blob[offset + start : offset + start + length])
            features[sid] = t.data
        return cls(features, fingerprint, dim=dim)


def cache_features(extractor, manifest, ids: list[str], out_path=None) -> FeatureCache:
    """One feature vector per id from a frozen extractor; optionally persisted.

    The extractor provides required_modalities, feature_dim, fingerprint(),
    and feature_vector(sample_id).
    """
    missing = [
        sid for sid in ids
        if any(not manifest.sample(sid).has(m) for m in extractor.required_modalities)
    ]
    if missing:
        raise CacheError(
            f"{len(missing)} ids lack a required modality "
            f"({'/'.join(extractor.required_modalities)}): {missing[:10]}"
        )
    workers = worker_count()
    if workers > 1 and len(ids) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(extractor.feature_vector, ids))
    else:
        vectors = [extractor.feature_vector(sid) for sid in ids]
    cache = FeatureCache(dict(zip(ids, vectors)), extractor.fingerprint(),
                         dim=extractor.feature_dim)
    if out_path is not None:
        cache.write(out_path)
    return cache


def cache_lookup(cache: FeatureCache, sample_id: str,
                 fingerprint: bytes | None = None) -> Tensor:
    """Stored feature vector; verifies the fingerprint when given."""
    if fingerprint is not None:
        cache.verify_fingerprint(fingerprint)
    return Tensor(cache.lookup(sample_id))
