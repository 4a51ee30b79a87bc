"""Region-wise effort metrics computed from joint trajectories.

Two numbers per anatomical region form the conditioning signal for
generation: *peak change* (max over frames of the region-mean per-frame
joint displacement, meters/frame — a pacing proxy) and *collective change*
(the sum of the same signal over all frames, meters — a motion-amount
proxy). Collective change is reported raw and therefore grows with clip
length; callers comparing across lengths must account for that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .motion import GroupMap, MotionSequence, default_group_map

N_METRICS = 2
PEAK, COLLECTIVE = 0, 1

# Per-region (peak, collective) statistics of normal-paced reference motion
# at 20 fps; used to seed inference-time scaling.
BASELINE_TABLE = (
    ("root", 0.010, 1.256),
    ("left_lower", 0.015, 1.279),
    ("right_lower", 0.015, 1.279),
    ("spine", 0.010, 1.252),
    ("left_upper", 0.014, 1.293),
    ("right_upper", 0.014, 1.295),
    ("head", 0.012, 1.262),
)


@dataclass(frozen=True)
class EffortMetrics:
    """Per-region (peak, collective) pairs; values[g] = (peak_g, collective_g)."""

    regions: tuple[str, ...]
    values: np.ndarray  # [N_g, 2]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != N_METRICS:
            raise ValidationError(f"values must be [N_g, 2], got {vals.shape}")
        if vals.shape[0] != len(self.regions):
            raise ValidationError("region names and value rows disagree")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("metric values must be finite")
        if np.any(vals < 0):
            raise ValidationError("metric values must be >= 0")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "values", vals)

    @property
    def peak(self) -> np.ndarray:
        return self.values[:, PEAK]

    @property
    def collective(self) -> np.ndarray:
        return self.values[:, COLLECTIVE]

    @property
    def n_regions(self) -> int:
        return len(self.regions)


def joint_diffs(motion: MotionSequence) -> np.ndarray:
    """Euclidean displacement of each joint between consecutive frames, [T-1, N_j]."""
    pos = motion.positions
    return np.linalg.norm(pos[1:] - pos[:-1], axis=2)


def group_diffs(diffs: np.ndarray, group_map: GroupMap) -> np.ndarray:
    """Mean per-frame displacement over each region's joints, [T-1, N_g]."""
    diffs = np.asarray(diffs, dtype=np.float64)
    if diffs.ndim != 2:
        raise ValidationError(f"diffs must be [T-1, N_j], got shape {diffs.shape}")
    if diffs.shape[1] != group_map.n_joints:
        raise ValidationError(
            f"diffs cover {diffs.shape[1]} joints but group map has {group_map.n_joints}"
        )
    out = np.empty((diffs.shape[0], group_map.n_groups), dtype=np.float64)
    for g, joints in enumerate(group_map.groups):
        out[:, g] = diffs[:, list(joints)].mean(axis=1)
    return out


def effort_metrics(motion: MotionSequence, group_map: GroupMap | None = None) -> EffortMetrics:
    """Peak and collective change per region; the conditioning signal."""
    group_map = group_map or default_group_map()
    if motion.n_joints != group_map.n_joints:
        raise ValidationError(
            f"motion has {motion.n_joints} joints but group map expects {group_map.n_joints}"
        )
    per_group = group_diffs(joint_diffs(motion), group_map)
    values = np.stack([per_group.max(axis=0), per_group.sum(axis=0)], axis=1)
    return EffortMetrics(group_map.names, values)


def baseline_metrics() -> EffortMetrics:
    """Stored normal-effort constants used to seed inference scaling."""
    return EffortMetrics(
        tuple(name for name, _, _ in BASELINE_TABLE),
        np.array([[p, c] for _, p, c in BASELINE_TABLE]),
    )


def scale_metrics(
    base: EffortMetrics,
    multiplier: float,
    regions: "list[str] | tuple[str, ...] | None" = None,
) -> EffortMetrics:
    """Multiply selected regions' rows (all regions when unspecified)."""
    if multiplier < 0:
        raise ValidationError("multiplier must be >= 0")
    values = base.values.copy()
    if regions is None:
        values *= multiplier
    else:
        for name in regions:
            if name not in base.regions:
                raise ValidationError(
                    f"unknown region {name!r}; available: {', '.join(base.regions)}"
                )
            values[base.regions.index(name)] *= multiplier
    return EffortMetrics(base.regions, values)


def set_metrics(
    base: EffortMetrics, overrides: dict[str, tuple[float, float]]
) -> EffortMetrics:
    """Directly assign (peak, collective) pairs for the named regions."""
    values = base.values.copy()
    for name, pair in overrides.items():
        if name not in base.regions:
            raise ValidationError(
                f"unknown region {name!r}; available: {', '.join(base.regions)}"
            )
        if len(pair) != N_METRICS:
            raise ValidationError(f"override for {name!r} must be (peak, collective)")
        values[base.regions.index(name)] = pair
    return EffortMetrics(base.regions, values)


def metrics_to_json_dict(m: EffortMetrics) -> dict:
    return {
        "regions": list(m.regions),
        "peak": m.peak.tolist(),
        "collective": m.collective.tolist(),
    }


def metrics_from_json_dict(obj: dict) -> EffortMetrics:
    try:
        regions = tuple(obj["regions"])
        values = np.stack(
            [np.asarray(obj["peak"], dtype=np.float64),
             np.asarray(obj["collective"], dtype=np.float64)],
            axis=1,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed metrics JSON: {exc}") from exc
    return EffortMetrics(regions, values)
