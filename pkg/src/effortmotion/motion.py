"""Motion sequences, anatomical grouping, and the JSON file formats.

Positions are world-space joint coordinates in meters, shaped [T, N_j, 3].
The default skeleton is the 22-joint SMPL-style layout used by common
mocap-derived corpora; regions follow the seven-part anatomical split
(root, legs, spine, arms, head).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MotionParseError, ValidationError

DEFAULT_FPS = 20
N_JOINTS = 22

# 22-joint layout: 0 pelvis, 1/2 L/R hip, 3 spine1, 4/5 L/R knee, 6 spine2,
# 7/8 L/R ankle, 9 spine3, 10/11 L/R foot, 12 neck, 13/14 L/R collar,
# 15 head, 16/17 L/R shoulder, 18/19 L/R elbow, 20/21 L/R wrist.
DEFAULT_REGIONS = (
    ("root", (0,)),
    ("left_lower", (1, 4, 7, 10)),
    ("right_lower", (2, 5, 8, 11)),
    ("spine", (3, 6, 9)),
    ("left_upper", (13, 16, 18, 20)),
    ("right_upper", (14, 17, 19, 21)),
    ("head", (12, 15)),
)


@dataclass(frozen=True)
class MotionSequence:
    """Immutable [T, N_j, 3] joint-position trajectory at a fixed frame rate."""

    positions: np.ndarray
    fps: int = DEFAULT_FPS
    label: str | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 3 or pos.shape[2] != 3:
            raise ValidationError(f"positions must be [T, N_j, 3], got {pos.shape}")
        if pos.shape[0] < 2:
            raise ValidationError(f"motion needs at least 2 frames, got {pos.shape[0]}")
        if not np.all(np.isfinite(pos)):
            raise ValidationError("positions contain NaN or Inf")
        if not (isinstance(self.fps, (int, np.integer)) and self.fps > 0):
            raise ValidationError(f"fps must be a positive integer, got {self.fps!r}")
        pos = pos.copy()
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "fps", int(self.fps))

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]

    @property
    def n_joints(self) -> int:
        return self.positions.shape[1]

    def with_positions(self, positions: np.ndarray) -> "MotionSequence":
        return MotionSequence(positions, fps=self.fps, label=self.label)


@dataclass(frozen=True)
class GroupMap:
    """Ordered, disjoint, covering assignment of joints to named regions.

    The region index is meaningful and persisted: effort metrics, identity
    embeddings, and latents all use this ordering.
    """

    names: tuple[str, ...]
    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.names) != len(self.groups):
            raise ValidationError("names and groups must have equal length")
        if len(set(self.names)) != len(self.names):
            raise ValidationError("region names must be unique")
        names = tuple(str(n) for n in self.names)
        groups = tuple(tuple(int(j) for j in g) for g in self.groups)
        seen: set[int] = set()
        for name, g in zip(names, groups):
            if not g:
                raise ValidationError(f"region {name!r} is empty")
            if any(j < 0 for j in g):
                raise ValidationError(f"region {name!r} has a negative joint index")
            if seen & set(g):
                raise ValidationError(f"region {name!r} overlaps another region")
            seen |= set(g)
        n = max(seen) + 1
        if seen != set(range(n)):
            raise ValidationError("regions must cover joints 0..N_j-1 without gaps")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "groups", groups)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_joints(self) -> int:
        return sum(len(g) for g in self.groups)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(
                f"unknown region {name!r}; available: {', '.join(self.names)}"
            ) from None

    def permuted(self, order: "list[int] | np.ndarray") -> "GroupMap":
        order = [int(i) for i in order]
        if sorted(order) != list(range(self.n_groups)):
            raise ValidationError("order must be a permutation of region indices")
        return GroupMap(
            tuple(self.names[i] for i in order),
            tuple(self.groups[i] for i in order),
        )

    def to_json_dict(self) -> dict:
        return {
            "groups": [
                {"name": n, "joints": list(g)} for n, g in zip(self.names, self.groups)
            ]
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "GroupMap":
        try:
            entries = obj["groups"]
            names = tuple(e["name"] for e in entries)
            groups = tuple(tuple(e["joints"]) for e in entries)
        except (KeyError, TypeError) as exc:
            raise MotionParseError(f"malformed group map: {exc}") from exc
        return GroupMap(names, groups)


def default_group_map() -> GroupMap:
    """The 7-region map over the 22-joint default skeleton."""
    return GroupMap(
        tuple(n for n, _ in DEFAULT_REGIONS),
        tuple(g for _, g in DEFAULT_REGIONS),
    )


def load_group_map(path: str | Path) -> GroupMap:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MotionParseError(f"{path}: invalid JSON: {exc}") from exc
    return GroupMap.from_json_dict(obj)


def save_group_map(gmap: GroupMap, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(gmap.to_json_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class PromptVocabulary:
    """Fixed set of action prompts with dense integer ids.

    The trailing (implicit) id ``null_id`` addresses the learned
    unconditional embedding used for classifier-free guidance.
    """

    entries: tuple[str, ...]
    categories: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        entries = tuple(str(e) for e in self.entries)
        if len(set(entries)) != len(entries):
            raise ValidationError("vocabulary entries must be unique")
        if not entries:
            raise ValidationError("vocabulary must not be empty")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def null_id(self) -> int:
        return len(self.entries)

    def id_of(self, prompt: str) -> int:
        from .errors import VocabularyError

        try:
            return self.entries.index(prompt)
        except ValueError:
            raise VocabularyError(
                f"unknown prompt {prompt!r}; vocabulary: {', '.join(self.entries)}"
            ) from None


# Action prompts grouped by the dominant body area they exercise.
ACTION_CATEGORIES = {
    "lunges": "lower",
    "walks": "lower",
    "runs": "lower",
    "kicks": "lower",
    "waves": "upper",
    "waves an arm": "upper",
    "punches": "upper",
    "throws ball": "upper",
    "swings arms": "upper",
    "shakes arms": "upper",
    "squats": "full",
    "dances": "full",
    "jumps": "full",
    "bends over": "full",
}


def default_vocabulary() -> PromptVocabulary:
    """The 14-action prompt set used throughout training and evaluation."""
    return PromptVocabulary(tuple(ACTION_CATEGORIES), dict(ACTION_CATEGORIES))


def load_motion(path: str | Path) -> MotionSequence:
    """Read a Motion JSON file and return a validated sequence."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MotionParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MotionParseError(f"{path}: expected a JSON object")
    missing = {"fps", "n_joints", "frames"} - obj.keys()
    if missing:
        raise MotionParseError(f"{path}: missing fields {sorted(missing)}")
    frames = np.asarray(obj["frames"], dtype=np.float64)
    if frames.ndim != 3 or frames.shape[1] != obj["n_joints"] or frames.shape[2] != 3:
        raise ValidationError(
            f"{path}: frames shape {frames.shape} does not match n_joints={obj['n_joints']}"
        )
    return MotionSequence(frames, fps=obj["fps"], label=obj.get("label"))


def save_motion(motion: MotionSequence, path: str | Path) -> None:
    """Write Motion JSON; coordinates round-trip bit-exactly through load_motion."""
    obj = {
        "fps": motion.fps,
        "n_joints": motion.n_joints,
        "frames": motion.positions.tolist(),
        "label": motion.label,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")
