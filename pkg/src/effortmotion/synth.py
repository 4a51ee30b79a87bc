"""Synthetic motion corpus with analytically controlled effort.

Each action animates a fixed subset of anatomical regions with per-joint
sinusoidal offsets from a canonical rest pose. Amplitude, the rest pose, and
the unit sinusoid offsets are all snapped to a dyadic grid (2^-13 m) so that
positions and frame-to-frame displacements are exact float64 lattice values;
doubling the amplitude then doubles every effort metric *exactly*, which the
test suite relies on.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .effort import effort_metrics, metrics_to_json_dict
from .errors import ValidationError
from .motion import (
    DEFAULT_FPS,
    GroupMap,
    MotionSequence,
    PromptVocabulary,
    default_group_map,
    default_vocabulary,
    save_motion,
)

_GRID = 8192.0  # 2**13; products of two grid values stay exact in float64

# Regions each action animates; everything else stays at the rest pose.
ACTION_REGIONS: dict[str, tuple[str, ...]] = {
    "lunges": ("root", "left_lower", "right_lower", "spine"),
    "walks": ("root", "left_lower", "right_lower"),
    "runs": ("root", "left_lower", "right_lower", "spine"),
    "kicks": ("right_lower",),
    "waves": ("right_upper",),
    "waves an arm": ("left_upper",),
    "punches": ("right_upper",),
    "throws ball": ("right_upper", "spine"),
    "swings arms": ("left_upper", "right_upper"),
    "shakes arms": ("left_upper", "right_upper"),
    "squats": ("root", "left_lower", "right_lower", "spine", "left_upper", "right_upper", "head"),
    "dances": ("root", "left_lower", "right_lower", "spine", "left_upper", "right_upper", "head"),
    "jumps": ("root", "left_lower", "right_lower", "spine", "left_upper", "right_upper", "head"),
    "bends over": ("spine", "head"),
}

# Amplitude (m) and frequency (Hz) of a "normal effort" rendition.
CANONICAL_AMPLITUDE = 0.04
CANONICAL_FREQUENCY = 1.0

_REST_POSE_RAW = np.array(
    [
        [0.00, 0.95, 0.00],   # 0 pelvis
        [0.10, 0.90, 0.00],   # 1 L hip
        [-0.10, 0.90, 0.00],  # 2 R hip
        [0.00, 1.08, 0.00],   # 3 spine1
        [0.11, 0.50, 0.00],   # 4 L knee
        [-0.11, 0.50, 0.00],  # 5 R knee
        [0.00, 1.21, 0.00],   # 6 spine2
        [0.12, 0.10, 0.00],   # 7 L ankle
        [-0.12, 0.10, 0.00],  # 8 R ankle
        [0.00, 1.34, 0.00],   # 9 spine3
        [0.13, 0.02, 0.12],   # 10 L foot
        [-0.13, 0.02, 0.12],  # 11 R foot
        [0.00, 1.45, 0.00],   # 12 neck
        [0.08, 1.40, 0.00],   # 13 L collar
        [-0.08, 1.40, 0.00],  # 14 R collar
        [0.00, 1.58, 0.00],   # 15 head
        [0.20, 1.40, 0.00],   # 16 L shoulder
        [-0.20, 1.40, 0.00],  # 17 R shoulder
        [0.46, 1.40, 0.00],   # 18 L elbow
        [-0.46, 1.40, 0.00],  # 19 R elbow
        [0.72, 1.40, 0.00],   # 20 L wrist
        [-0.72, 1.40, 0.00],  # 21 R wrist
    ],
    dtype=np.float64,
)


def _snap(x: np.ndarray | float) -> np.ndarray | float:
    return np.round(np.asarray(x, dtype=np.float64) * _GRID) / _GRID


def rest_pose() -> np.ndarray:
    """Canonical 22-joint standing pose on the dyadic grid, [22, 3] meters."""
    return _snap(_REST_POSE_RAW)


def synth_motion(
    action_id: int,
    amplitude: float,
    frequency: float,
    n_frames: int,
    seed: int,
    fps: int = DEFAULT_FPS,
    vocab: PromptVocabulary | None = None,
    group_map: GroupMap | None = None,
) -> MotionSequence:
    """Deterministic sinusoidal motion for one action.

    Active regions (per ``ACTION_REGIONS``) oscillate around the rest pose
    with per-joint random unit directions and phases drawn from ``seed``.
    Both peak and collective change of active regions are exactly linear in
    ``amplitude``.
    """
    vocab = vocab or default_vocabulary()
    group_map = group_map or default_group_map()
    if not 0 <= action_id < len(vocab):
        raise ValidationError(f"action_id {action_id} outside vocabulary of {len(vocab)}")
    if amplitude < 0:
        raise ValidationError("amplitude must be >= 0")
    if frequency <= 0:
        raise ValidationError("frequency must be > 0")
    if n_frames < 4:
        raise ValidationError("n_frames must be >= 4")

    prompt = vocab.entries[action_id]
    active = ACTION_REGIONS.get(prompt, group_map.names)
    rng = np.random.default_rng(np.random.SeedSequence([int(action_id), int(seed)]))

    n_joints = group_map.n_joints
    base = rest_pose()[:n_joints]
    amp = float(_snap(amplitude))

    # Per-joint unit direction and phase for every joint; only active regions
    # are applied. Drawing all of them keeps the stream layout independent of
    # the active set.
    dirs = rng.standard_normal((n_joints, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=n_joints)

    t = np.arange(n_frames, dtype=np.float64)
    omega = 2.0 * math.pi * frequency / fps
    positions = np.repeat(base[None, :, :], n_frames, axis=0)
    active_idx = [group_map.index_of(name) for name in active]
    for g in active_idx:
        for j in group_map.groups[g]:
            wave = np.sin(omega * t + phases[j])  # [T]
            unit_offset = _snap(wave[:, None] * dirs[j][None, :])  # [T, 3] on grid
            positions[:, j, :] = base[j][None, :] + amp * unit_offset
    return MotionSequence(positions, fps=fps, label=prompt)


def generate_corpus(
    out_dir: str | Path,
    actions: list[str],
    per_action: int,
    n_frames: int,
    seed: int,
    fps: int = DEFAULT_FPS,
    amplitude_range: tuple[float, float] = (0.6, 1.4),
    frequency_range: tuple[float, float] = (0.9, 1.1),
    vocab: PromptVocabulary | None = None,
    group_map: GroupMap | None = None,
) -> Path:
    """Write a corpus of synthetic motions plus metric sidecars and a manifest.

    Amplitude/frequency multipliers are spread deterministically over the
    given ranges so every action covers a band of effort levels. Returns the
    manifest path (JSON lines, one record per file).
    """
    vocab = vocab or default_vocabulary()
    group_map = group_map or default_group_map()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if per_action < 1:
        raise ValidationError("per_action must be >= 1")

    records = []
    for action in actions:
        action_id = vocab.id_of(action)
        slug = action.replace(" ", "_")
        for i in range(per_action):
            u = i / max(per_action - 1, 1)
            amp = CANONICAL_AMPLITUDE * (
                amplitude_range[0] + u * (amplitude_range[1] - amplitude_range[0])
            )
            seq_rng = np.random.default_rng(
                np.random.SeedSequence([int(seed), action_id, i, 7])
            )
            freq = CANONICAL_FREQUENCY * seq_rng.uniform(*frequency_range)
            sample_seed = int(seq_rng.integers(0, 2**31))
            motion = synth_motion(
                action_id, amp, freq, n_frames, sample_seed,
                fps=fps, vocab=vocab, group_map=group_map,
            )
            name = f"{slug}_{i:03d}.json"
            path = out_dir / name
            save_motion(motion, path)
            metrics = effort_metrics(motion, group_map)
            sidecar = out_dir / f"{slug}_{i:03d}.metrics.json"
            with open(sidecar, "w", encoding="utf-8") as fh:
                json.dump(metrics_to_json_dict(metrics), fh)
                fh.write("\n")
            records.append(
                {
                    "src": name,
                    "transform": "original",
                    "param": 0,
                    "out": name,
                    "metrics": metrics_to_json_dict(metrics),
                }
            )

    manifest = out_dir / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec))
            fh.write("\n")
    return manifest
