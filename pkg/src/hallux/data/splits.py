"""Train/test split protocols over a dataset manifest."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import SplitError
from .manifest import DatasetManifest

KINDS = ("original", "loso", "class-subset", "custom")


@dataclass(frozen=True)
class SplitSpec:
    """Protocol parameters; class ids are 0-based.

    original      odd-numbered subjects train, even-numbered test
    loso          one held-out subject tests, the rest train
    class-subset  original subject split restricted to [class_lo, class_hi]
    custom        explicit subject lists
    """

    kind: str
    held_out_subject: int | None = None
    class_lo: int | None = None
    class_hi: int | None = None
    train_subjects: tuple[int, ...] | None = None
    test_subjects: tuple[int, ...] | None = None


def make_split(manifest: DatasetManifest, spec: SplitSpec) -> tuple[list[str], list[str]]:
    """Deterministic (train ids, test ids) in manifest order."""
    if spec.kind not in KINDS:
        raise SplitError(f"unknown split kind '{spec.kind}'")
    subjects = set(manifest.subjects())

    def in_class_range(s):
        if spec.class_lo is None and spec.class_hi is None:
            return True
        lo = spec.class_lo if spec.class_lo is not None else 0
        hi = spec.class_hi if spec.class_hi is not None else manifest.num_classes - 1
        return lo <= s.action_class <= hi

    if spec.kind in ("original", "class-subset"):
        is_train = lambda s: s.subject % 2 == 1
    elif spec.kind == "loso":
        if spec.held_out_subject is None:
            raise SplitError("loso split needs held_out_subject")
        if spec.held_out_subject not in subjects:
            raise SplitError(
                f"held-out subject {spec.held_out_subject} absent from manifest "
                f"(subjects: {sorted(subjects)})"
            )
        is_train = lambda s: s.subject != spec.held_out_subject
    else:
        train_set = set(spec.train_subjects or ())
        test_set = set(spec.test_subjects or ())
        if not train_set or not test_set:
            raise SplitError("custom split needs train_subjects and test_subjects")
        if train_set & test_set:
            raise SplitError(f"custom split subjects overlap: {sorted(train_set & test_set)}")
        missing = (train_set | test_set) - subjects
        if missing:
            raise SplitError(f"custom split names absent subjects: {sorted(missing)}")
        is_train = lambda s: s.subject in train_set

    train, test = [], []
    for s in manifest.samples:
        if not in_class_range(s):
            continue
        if spec.kind == "custom" and s.subject not in (set(spec.train_subjects) | set(spec.test_subjects)):
            continue
        (train if is_train(s) else test).append(s.sample_id)
    if not train or not test:
        raise SplitError(
            f"split '{spec.kind}' produced an empty side "
            f"(train={len(train)}, test={len(test)})"
        )
    return train, test
