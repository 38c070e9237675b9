"""Labeled click collections and their JSON wire format.

Seeds file / request schema: JSON array of {"coords": [...], "label": "fg"|"bg"}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import IoError, ValidationError


class SeedLabel(str, Enum):
    FOREGROUND = "fg"
    BACKGROUND = "bg"


@dataclass(frozen=True)
class SeedSet:
    """Non-duplicated grid indices sharing one label."""

    points: tuple[tuple[int, ...], ...]
    label: SeedLabel

    def __post_init__(self):
        pts = tuple(tuple(int(c) for c in p) for p in self.points)
        if len(set(pts)) != len(pts):
            raise ValidationError("duplicate seed indices")
        ranks = {len(p) for p in pts}
        if len(ranks) > 1:
            raise ValidationError("seed points have mixed ranks")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def is_empty(self) -> bool:
        return not self.points

    def check_within(self, dims: tuple[int, ...]) -> None:
        for p in self.points:
            if len(p) != len(dims):
                raise ValidationError(f"seed {p} rank does not match dims {dims}")
            if any(not (0 <= c < d) for c, d in zip(p, dims)):
                raise ValidationError(f"seed {p} out of bounds for dims {dims}")

    def flat_indices(self, dims: tuple[int, ...]) -> np.ndarray:
        self.check_within(dims)
        return np.array(
            [int(np.ravel_multi_index(p, dims)) for p in self.points], dtype=np.int64
        )

    def union(self, other: "SeedSet") -> "SeedSet":
        if other.label != self.label:
            raise ValidationError("cannot union seed sets with different labels")
        merged = list(dict.fromkeys(self.points + other.points))
        return SeedSet(tuple(merged), self.label)


def empty_seeds(label: SeedLabel) -> SeedSet:
    return SeedSet((), label)


def seeds_to_json(*seed_sets: SeedSet) -> str:
    entries = [
        {"coords": list(p), "label": ss.label.value} for ss in seed_sets for p in ss.points
    ]
    return json.dumps(entries, indent=2)


def seeds_from_obj(obj) -> tuple[SeedSet, SeedSet]:
    """Parse the JSON seeds schema into a (foreground, background) pair."""
    if not isinstance(obj, list):
        raise ValidationError("seeds JSON must be an array")
    fg, bg = [], []
    for entry in obj:
        if not isinstance(entry, dict) or "coords" not in entry or "label" not in entry:
            raise ValidationError(f"malformed seed entry: {entry!r}")
        coords = tuple(int(c) for c in entry["coords"])
        if entry["label"] == SeedLabel.FOREGROUND.value:
            fg.append(coords)
        elif entry["label"] == SeedLabel.BACKGROUND.value:
            bg.append(coords)
        else:
            raise ValidationError(f"unknown seed label {entry['label']!r}")
    return (
        SeedSet(tuple(dict.fromkeys(fg)), SeedLabel.FOREGROUND),
        SeedSet(tuple(dict.fromkeys(bg)), SeedLabel.BACKGROUND),
    )


def load_seeds(path) -> tuple[SeedSet, SeedSet]:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IoError(f"invalid seeds JSON in {path}: {exc}") from exc
    return seeds_from_obj(obj)
