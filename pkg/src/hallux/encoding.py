"""Convert raw inertial windows, skeleton sequences, and video clips into
fixed-size network inputs.

Inertial channels are stacked row-wise in an arrangement where every
channel pair is adjacent at least once, then resized into a single-channel
"activity image". Skeleton joints are stacked in native order. Video clips
are cropped/padded to a fixed frame count, aspect-preserving resized, and
cropped. All functions are pure and deterministic given the rng.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EncodingError

# Arrangement used for two 3-axis sensors (accelerometer + gyroscope),
# 0-based. Covers all 15 unordered channel pairs.
SIX_CHANNEL_SEQUENCE = (
    0, 1, 2, 3, 4, 5,
    0, 2, 4, 1, 3, 5,
    0, 3, 1, 4, 2, 5,
    0, 4, 1, 5,
    0, 5,
)


@dataclass
class SignalWindow:
    """C named 1-D series of equal length, stored as a (length, C) array."""

    channel_names: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise EncodingError(f"window values must be 2-D, got {self.values.shape}")
        if self.values.shape[0] < 1:
            raise EncodingError("window must contain at least one sample")
        if len(self.channel_names) != self.values.shape[1]:
            raise EncodingError(
                f"{len(self.channel_names)} channel names for "
                f"{self.values.shape[1]} columns"
            )

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def num_channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ChannelArrangement:
    sequence: tuple[int, ...]
    num_channels: int

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.sequence)

    def covers_all_pairs(self) -> bool:
        seen = set()
        for a, b in zip(self.sequence, self.sequence[1:]):
            seen.add(frozenset((a, b)))
        want = {
            frozenset((i, j))
            for i in range(self.num_channels)
            for j in range(i + 1, self.num_channels)
        }
        return want <= seen


def build_channel_sequence(num_channels: int) -> ChannelArrangement:
    """Arrangement where every unordered channel pair appears adjacent.

    The 6-channel case uses the canonical two-sensor sequence; other
    counts use a deterministic greedy walk.
    """
    if num_channels < 2:
        raise EncodingError("channel arrangement needs at least 2 channels")
    if num_channels == 6:
        return ChannelArrangement(SIX_CHANNEL_SEQUENCE, 6)
    remaining = {
        (i, j) for i in range(num_channels) for j in range(i + 1, num_channels)
    }
    seq = [0]
    while remaining:
        cur = seq[-1]
        nxt = None
        for cand in range(num_channels):
            if cand != cur and (min(cur, cand), max(cur, cand)) in remaining:
                nxt = cand
                break
        if nxt is None:
            # restart the walk at the smallest uncovered pair
            a, b = min(remaining)
            seq.extend((a, b))
            remaining.discard((min(cur, a), max(cur, a)))
            remaining.discard((a, b))
            continue
        seq.append(nxt)
        remaining.discard((min(cur, nxt), max(cur, nxt)))
    return ChannelArrangement(tuple(seq), num_channels)


def _crop_or_pad_indices(length: int, target_len: int, rng) -> np.ndarray:
    """Index plan: contiguous random crop, or first/last repetition with a
    random balance when the input is too short."""
    if length >= target_len:
        start = int(rng.integers(0, length - target_len, endpoint=True))
        return np.arange(start, start + target_len)
    deficit = target_len - length
    p = int(rng.integers(0, deficit, endpoint=True))
    return np.concatenate([
        np.zeros(p, dtype=np.int64),
        np.arange(length),
        np.full(deficit - p, length - 1, dtype=np.int64),
    ])


def crop_or_pad_window(window: SignalWindow, target_len: int, rng) -> SignalWindow:
    if target_len < 1:
        raise EncodingError("target length must be >= 1")
    idx = _crop_or_pad_indices(window.length, target_len, rng)
    return SignalWindow(window.channel_names, window.values[idx])


def _sensor_groups(names: list[str]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, name in enumerate(names):
        key = name.rsplit("_", 1)[0] if "_" in name else name
        groups.setdefault(key, []).append(i)
    return groups


def normalize_pm1(window: SignalWindow, per_sensor: bool = True) -> SignalWindow:
    """Map each sensor group (or the whole window) onto [-1, +1].

    The group minimum maps to -1 and the maximum to +1; a constant group
    maps to 0.
    """
    out = np.empty_like(window.values)
    if per_sensor:
        groups = list(_sensor_groups(window.channel_names).values())
    else:
        groups = [list(range(window.num_channels))]
    for cols in groups:
        block = window.values[:, cols]
        lo = float(block.min())
        hi = float(block.max())
        if hi > lo:
            out[:, cols] = -1.0 + 2.0 * (block - lo) / (hi - lo)
        else:
            out[:, cols] = 0.0
    return SignalWindow(window.channel_names, out)


def bilinear_resize(image: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Half-pixel-center bilinear resize of (H, W) or (H, W, C) arrays.

    Exact identity (same array values) when the size is unchanged.
    """
    h, w = image.shape[:2]
    oh, ow = out_hw
    if oh < 1 or ow < 1:
        raise EncodingError(f"invalid resize target {out_hw}")
    if (h, w) == (oh, ow):
        return image.astype(np.float32, copy=True)
    ys = (np.arange(oh, dtype=np.float64) + 0.5) * (h / oh) - 0.5
    xs = (np.arange(ow, dtype=np.float64) + 0.5) * (w / ow) - 0.5
    y0 = np.clip(np.floor(ys), 0, h - 1).astype(np.int64)
    x0 = np.clip(np.floor(xs), 0, w - 1).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = np.clip(ys - y0, 0.0, 1.0).astype(np.float32)
    fx = np.clip(xs - x0, 0.0, 1.0).astype(np.float32)
    img = image.astype(np.float32, copy=False)
    channelled = img.ndim == 3
    if not channelled:
        img = img[:, :, None]
    wy = fy[:, None, None]
    wx = fx[None, :, None]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    out = top * (1 - wy) + bot * wy
    return out if channelled else out[:, :, 0]


def inertial_to_image(window: SignalWindow, arrangement: ChannelArrangement,
                      out_hw: tuple[int, int]) -> np.ndarray:
    """Stack channels row-wise in arrangement order and resize; (H, W, 1)."""
    if max(arrangement.sequence) >= window.num_channels:
        raise EncodingError(
            f"arrangement index {max(arrangement.sequence)} out of range for "
            f"{window.num_channels} channels"
        )
    rows = window.values.T[list(arrangement.sequence)]
    return bilinear_resize(rows, out_hw)[:, :, None]


def skeleton_to_image(joints: SignalWindow, out_hw: tuple[int, int]) -> np.ndarray:
    """Joint coordinates as rows in native order, time as columns; (H, W, 1)."""
    return bilinear_resize(joints.values.T, out_hw)[:, :, None]


def video_clip_preprocess(frames: np.ndarray, train_mode: bool, rng,
                          clip_len: int = 64, resize_short: int = 256,
                          crop: int = 224) -> np.ndarray:
    """Fixed-length clip: frame crop/pad, aspect-preserving resize of the
    shorter side, then random (train) or center crop; (clip_len, crop, crop, 3)."""
    frames = np.asarray(frames, dtype=np.float32)
    if frames.ndim != 4 or frames.shape[3] != 3:
        raise EncodingError(f"video input must be (T, H, W, 3), got {frames.shape}")
    idx = _crop_or_pad_indices(frames.shape[0], clip_len, rng)
    clip = frames[idx]
    t, h, w, _ = clip.shape
    if h <= w:
        nh, nw = resize_short, max(resize_short, round(w * resize_short / h))
    else:
        nh, nw = max(resize_short, round(h * resize_short / w)), resize_short
    if nh < crop or nw < crop:
        raise EncodingError(f"crop {crop} larger than resized frame ({nh},{nw})")
    if (nh, nw) != (h, w):
        clip = np.stack([bilinear_resize(f, (nh, nw)) for f in clip])
    if train_mode:
        top = int(rng.integers(0, nh - crop, endpoint=True))
        left = int(rng.integers(0, nw - crop, endpoint=True))
    else:
        top, left = (nh - crop) // 2, (nw - crop) // 2
    return clip[:, top : top + crop, left : left + crop, :]


# -- per-modality encoders, used by the training/eval pipelines --------------

@dataclass
class EncoderSettings:
    """Sizes for the raw-signal -> network-input encoders."""

    image_hw: tuple[int, int] = (224, 224)
    inertial_window: int = 217
    skeleton_window: int = 64
    video_clip: int = 64
    video_resize_short: int = 256
    video_crop: int = 224
    per_sensor_norm: bool = True

    def input_shape(self, modality: str) -> tuple[int, int, int]:
        if modality == "video":
            return (self.video_crop, self.video_crop, 3)
        return (self.image_hw[0], self.image_hw[1], 1)


def encode_inertial(window: SignalWindow, settings: EncoderSettings, rng) -> np.ndarray:
    window = crop_or_pad_window(window, settings.inertial_window, rng)
    window = normalize_pm1(window, per_sensor=settings.per_sensor_norm)
    arrangement = build_channel_sequence(window.num_channels)
    return inertial_to_image(window, arrangement, settings.image_hw)


def encode_skeleton(window: SignalWindow, settings: EncoderSettings, rng) -> np.ndarray:
    window = crop_or_pad_window(window, settings.skeleton_window, rng)
    window = normalize_pm1(window, per_sensor=False)
    return skeleton_to_image(window, settings.image_hw)


def encode_video(frames: np.ndarray, settings: EncoderSettings, rng,
                 train_mode: bool = False) -> np.ndarray:
    clip = video_clip_preprocess(
        frames, train_mode, rng,
        clip_len=settings.video_clip,
        resize_short=settings.video_resize_short,
        crop=settings.video_crop,
    )
    # 2-D backbones consume the temporally averaged clip
    return clip.mean(axis=0)


def encode_modality(payload, modality: str, settings: EncoderSettings, rng,
                    train_mode: bool = False) -> np.ndarray:
    if modality == "inertial":
        return encode_inertial(payload, settings, rng)
    if modality == "skeleton":
        return encode_skeleton(payload, settings, rng)
    if modality == "video":
        return encode_video(payload, settings, rng, train_mode)
    raise EncodingError(f"unknown modality '{modality}'")
