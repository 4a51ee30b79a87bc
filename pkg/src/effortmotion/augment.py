"""Pacing augmentation: frame removal (faster) and interpolation (slower).

Both transforms keep the frame rate fixed, so removing frames compresses an
action into a shorter playback window (higher effort) while inserting
interpolated frames stretches it (lower effort). On straight-line segments
peak change scales by exactly (k+1) resp. 1/(m+1) and collective change is
preserved by telescoping.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .effort import effort_metrics, metrics_to_json_dict
from .errors import ValidationError
from .motion import GroupMap, MotionSequence, default_group_map, load_motion, save_motion

MAX_SKIP = 2
MAX_INSERT = 2


def speed_up(motion: MotionSequence, k: int, max_k: int = MAX_SKIP) -> MotionSequence:
    """Drop k consecutive frames after every kept frame (keeps 0, k+1, 2(k+1), ...)."""
    if not 1 <= k <= max_k:
        raise ValidationError(f"k must be in [1, {max_k}], got {k}")
    kept = motion.positions[:: k + 1]
    if kept.shape[0] < 2:
        raise ValidationError(
            f"sequence of {motion.n_frames} frames too short for k={k}"
        )
    return motion.with_positions(kept)


def slow_down(motion: MotionSequence, m: int, max_m: int = MAX_INSERT) -> MotionSequence:
    """Insert m linearly interpolated frames between each consecutive pair."""
    if not 1 <= m <= max_m:
        raise ValidationError(f"m must be in [1, {max_m}], got {m}")
    pos = motion.positions
    starts = pos[:-1]  # [T-1, N, 3]
    deltas = pos[1:] - starts
    weights = np.array([i / (m + 1) for i in range(m + 1)])  # 0 first: keeps originals exact
    expanded = starts[:, None] + deltas[:, None] * weights[None, :, None, None]
    out = np.concatenate([expanded.reshape(-1, pos.shape[1], 3), pos[-1:]], axis=0)
    return motion.with_positions(out)


def augment_corpus(
    in_dir: str | Path,
    out_dir: str | Path,
    ks: "set[int] | list[int]" = (1,),
    ms: "set[int] | list[int]" = (1,),
    group_map: GroupMap | None = None,
    report_stream=None,
) -> Path:
    """Copy originals and write all k/m variants, each with a metrics sidecar.

    Emits ``manifest.jsonl`` in out_dir with one provenance record per output
    file. Malformed inputs are skipped and reported on ``report_stream``
    (stderr by default). Returns the manifest path.
    """
    group_map = group_map or default_group_map()
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    report_stream = report_stream if report_stream is not None else sys.stderr
    if not in_dir.is_dir():
        raise FileNotFoundError(f"input directory {in_dir} does not exist")
    out_dir.mkdir(parents=True, exist_ok=True)

    records = []
    inputs = sorted(p for p in in_dir.glob("*.json") if not p.name.endswith(".metrics.json"))
    inputs = [p for p in inputs if p.name != "manifest.jsonl"]
    for path in inputs:
        try:
            motion = load_motion(path)
        except ValidationError as exc:
            print(f"skipping {path}: {exc}", file=report_stream)
            continue
        variants = [("original", 0, motion)]
        for k in sorted(set(ks)):
            try:
                variants.append(("speedup", k, speed_up(motion, k)))
            except ValidationError as exc:
                print(f"skipping speedup k={k} for {path}: {exc}", file=report_stream)
        for m in sorted(set(ms)):
            variants.append(("slowdown", m, slow_down(motion, m)))
        for transform, param, variant in variants:
            stem = path.stem if transform == "original" else f"{path.stem}__{transform}_{param}"
            out_path = out_dir / f"{stem}.json"
            save_motion(variant, out_path)
            metrics = effort_metrics(variant, group_map)
            with open(out_dir / f"{stem}.metrics.json", "w", encoding="utf-8") as fh:
                json.dump(metrics_to_json_dict(metrics), fh)
                fh.write("\n")
            records.append(
                {
                    "src": str(path),
                    "transform": transform,
                    "param": param,
                    "out": out_path.name,
                    "metrics": metrics_to_json_dict(metrics),
                }
            )

    manifest = out_dir / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec))
            fh.write("\n")
    return manifest
