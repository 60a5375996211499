"""Dataset manifests: one JSON document listing samples and their
per-modality payloads (HLXT tensors or CSV time series, or in-memory
arrays for generated datasets)."""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..encoding import SignalWindow
from ..errors import ManifestError
from ..tensor_core.tensor import HLXT_MAGIC, Tensor
from ..util import atomic_write_bytes, canonical_json

MODALITIES = ("inertial", "skeleton", "video")


@dataclass
class MultimodalSample:
    """One clip's synchronized raw signals plus label and subject id."""

    sample_id: str
    subject: int
    action_class: int
    trial: int
    payloads: dict[str, object] = field(default_factory=dict)

    def has(self, modality: str) -> bool:
        return modality in self.payloads


@dataclass
class DatasetManifest:
    name: str
    num_classes: int
    modalities: dict[str, dict]
    samples: list[MultimodalSample]
    root: Path | None = None

    def __post_init__(self):
        self._by_id = {s.sample_id: s for s in self.samples}

    def ids(self) -> list[str]:
        return [s.sample_id for s in self.samples]

    def subjects(self) -> list[int]:
        return sorted({s.subject for s in self.samples})

    def sample(self, sample_id: str) -> MultimodalSample:
        if sample_id not in self._by_id:
            raise ManifestError(f"unknown sample id '{sample_id}'")
        return self._by_id[sample_id]

    def inertial_channel_names(self) -> list[str]:
        return list(self.modalities.get("inertial", {}).get("channels", []))

    # -- payload loading -----------------------------------------------------

    def load_payload(self, sample_id: str, modality: str):
        """SignalWindow for inertial/skeleton, (T, H, W, 3) array for video."""
        s = self.sample(sample_id)
        if modality not in s.payloads:
            raise ManifestError(f"sample '{sample_id}' has no {modality} payload")
        raw = s.payloads[modality]
        if isinstance(raw, str):
            raw = self._read_payload_file(raw)
        arr = np.asarray(raw, dtype=np.float32)
        if modality == "video":
            if arr.ndim != 4 or arr.shape[3] != 3:
                raise ManifestError(
                    f"sample '{sample_id}': video payload must be (T,H,W,3), "
                    f"got {arr.shape}"
                )
            return arr
        if modality == "skeleton":
            if arr.ndim == 3:
                arr = arr.reshape(arr.shape[0], -1)
            joints = int(self.modalities.get("skeleton", {}).get("joints", arr.shape[1] // 3))
            names = [f"j{j:02d}_{ax}" for j in range(joints) for ax in "xyz"]
            if arr.shape[1] != len(names):
                raise ManifestError(
                    f"sample '{sample_id}': skeleton payload has {arr.shape[1]} "
                    f"columns, expected {len(names)}"
                )
            return SignalWindow(names, arr)
        names = self.inertial_channel_names()
        if not names:
            names = [f"c{i}" for i in range(arr.shape[1])]
        if arr.ndim != 2 or arr.shape[1] != len(names):
            raise ManifestError(
                f"sample '{sample_id}': inertial payload shape {arr.shape} does "
                f"not match {len(names)} channels"
            )
        return SignalWindow(names, arr)

    def _read_payload_file(self, rel: str) -> np.ndarray:
        if self.root is None:
            raise ManifestError(f"manifest has no root directory for path '{rel}'")
        path = Path(self.root) / rel
        if path.suffix == ".hlxt":
            return Tensor.load(path).data
        if path.suffix == ".csv":
            return np.loadtxt(path, delimiter=",", dtype=np.float32, ndmin=2)
        raise ManifestError(f"unsupported payload format '{path.suffix}' ({rel})")

    # -- persistence -----------------------------------------------------------

    def to_dict(self) -> dict:
        samples = []
        for s in self.samples:
            payloads = {}
            for mod, raw in s.payloads.items():
                if not isinstance(raw, str):
                    raise ManifestError(
                        f"sample '{s.sample_id}': in-memory payloads must be "
                        "persisted with save() before serializing"
                    )
                payloads[mod] = raw
            samples.append({
                "sample_id": s.sample_id,
                "subject": s.subject,
                "action_class": s.action_class,
                "trial": s.trial,
                "payloads": payloads,
            })
        return {
            "name": self.name,
            "num_classes": self.num_classes,
            "modalities": self.modalities,
            "samples": samples,
        }

    def save(self, out_dir) -> Path:
        """Write manifest.json plus HLXT payload files for in-memory data."""
        out_dir = Path(out_dir)
        (out_dir / "payloads").mkdir(parents=True, exist_ok=True)
        persisted = []
        for s in self.samples:
            payloads = {}
            for mod, raw in s.payloads.items():
                if isinstance(raw, str):
                    payloads[mod] = raw
                    continue
                rel = f"payloads/{s.sample_id}_{mod}.hlxt"
                atomic_write_bytes(out_dir / rel, Tensor(raw).to_bytes())
                payloads[mod] = rel
            persisted.append(MultimodalSample(
                s.sample_id, s.subject, s.action_class, s.trial, payloads))
        saved = DatasetManifest(self.name, self.num_classes, self.modalities,
                                persisted, root=out_dir)
        atomic_write_bytes(out_dir / "manifest.json",
                           canonical_json(saved.to_dict()).encode("utf-8"))
        return out_dir / "manifest.json"


def _payload_columns(root: Path, rel: str) -> int | None:
    """Channel count from a payload file header, without a full read."""
    path = root / rel
    if path.suffix == ".csv":
        with open(path, "r", encoding="utf-8") as f:
            first = f.readline().strip()
        return len(first.split(",")) if first else 0
    if path.suffix == ".hlxt":
        with open(path, "rb") as f:
            head = f.read(8)
            if head[:4] != HLXT_MAGIC:
                raise ManifestError(f"payload '{rel}' is not an HLXT file")
            ndim = head[7]
            shape = struct.unpack(f"<{ndim}Q", f.read(8 * ndim))
        if len(shape) == 2:
            return int(shape[1])
        return None  # video or (T, J, 3) skeleton: no flat channel axis
    raise ManifestError(f"unsupported payload format '{path.suffix}' ({rel})")


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest.json file."""
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestError(f"manifest does not parse: {e}") from e
    for key in ("num_classes", "modalities", "samples"):
        if key not in doc:
            raise ManifestError(f"manifest missing required key '{key}'")
    if not doc["samples"]:
        raise ManifestError("manifest lists no samples")
    root = path.parent
    samples = []
    seen = set()
    for row in doc["samples"]:
        sid = row.get("sample_id")
        if not sid:
            raise ManifestError("sample without sample_id")
        if sid in seen:
            raise ManifestError(f"duplicate sample_id '{sid}'")
        seen.add(sid)
        cls = int(row["action_class"])
        if not 0 <= cls < int(doc["num_classes"]):
            raise ManifestError(
                f"sample '{sid}': action_class {cls} outside "
                f"[0, {doc['num_classes']})"
            )
        payloads = dict(row.get("payloads", {}))
        if "inertial" not in payloads:
            raise ManifestError(f"sample '{sid}' is missing the inertial modality")
        for mod, rel in payloads.items():
            if mod not in MODALITIES:
                raise ManifestError(f"sample '{sid}': unknown modality '{mod}'")
            if not (root / rel).exists():
                raise ManifestError(f"sample '{sid}': payload file missing: {rel}")
        samples.append(MultimodalSample(
            sid, int(row["subject"]), cls, int(row.get("trial", 0)), payloads))
    manifest = DatasetManifest(
        doc.get("name", path.parent.name), int(doc["num_classes"]),
        dict(doc["modalities"]), samples, root=root)
    _check_channel_consistency(manifest)
    return manifest


def _check_channel_consistency(manifest: DatasetManifest) -> None:
    expected = len(manifest.inertial_channel_names()) or None
    for s in manifest.samples:
        rel = s.payloads.get("inertial")
        if not isinstance(rel, str):
            continue
        cols = _payload_columns(Path(manifest.root), rel)
        if cols is None:
            continue
        if expected is None:
            expected = cols
        elif cols != expected:
            raise ManifestError(
                f"sample '{s.sample_id}': inertial payload has {cols} channels, "
                f"expected {expected}"
            )
