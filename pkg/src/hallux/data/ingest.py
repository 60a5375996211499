"""Build a manifest from per-sample CSV exports (UTD-MHAD-style naming).

Expects files named a<action>_s<subject>_t<trial>_inertial.csv and optional
companions *_skeleton.csv / *_video.hlxt in one directory. Action numbers in
filenames are 1-based; stored action_class is 0-based.
"""
from __future__ import annotations

import re
from pathlib import Path

from ..errors import ManifestError
from ..util import atomic_write_bytes, canonical_json
from .manifest import DatasetManifest, MultimodalSample, load_manifest

_NAME = re.compile(r"^a(\d+)_s(\d+)_t(\d+)_inertial\.csv$")


def ingest_csv_directory(src_dir, out_path=None, channels=None,
                         joints: int | None = None,
                         name: str = "ingested") -> DatasetManifest:
    src = Path(src_dir)
    if not src.is_dir():
        raise ManifestError(f"ingest source is not a directory: {src}")
    samples = []
    max_class = -1
    for path in sorted(src.iterdir()):
        m = _NAME.match(path.name)
        if not m:
            continue
        action, subject, trial = (int(g) for g in m.groups())
        stem = f"a{action}_s{subject}_t{trial}"
        payloads = {"inertial": path.name}
        skel = src / f"{stem}_skeleton.csv"
        if skel.exists():
            payloads["skeleton"] = skel.name
        video = src / f"{stem}_video.hlxt"
        if video.exists():
            payloads["video"] = video.name
        samples.append(MultimodalSample(stem, subject, action - 1, trial, payloads))
        max_class = max(max_class, action - 1)
    if not samples:
        raise ManifestError(f"no a*_s*_t*_inertial.csv files found under {src}")

    if channels is None:
        with open(src / samples[0].payloads["inertial"], "r", encoding="utf-8") as f:
            cols = len(f.readline().strip().split(","))
        sensors = ["acc", "gyr", "mag", "s3", "s4", "s5"]
        channels = [f"{sensors[c // 3]}_{'xyz'[c % 3]}" for c in range(cols)]
    modalities: dict[str, dict] = {"inertial": {"channels": list(channels)}}
    if any("skeleton" in s.payloads for s in samples):
        if joints is None:
            first = next(s for s in samples if "skeleton" in s.payloads)
            with open(src / first.payloads["skeleton"], "r", encoding="utf-8") as f:
                joints = len(f.readline().strip().split(",")) // 3
        modalities["skeleton"] = {"joints": int(joints)}
    if any("video" in s.payloads for s in samples):
        modalities["video"] = {}

    manifest = DatasetManifest(name, max_class + 1, modalities, samples, root=src)
    if out_path is not None:
        atomic_write_bytes(Path(out_path),
                           canonical_json(manifest.to_dict()).encode("utf-8"))
        return load_manifest(out_path)
    return manifest
