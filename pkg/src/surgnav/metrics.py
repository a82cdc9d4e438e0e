"""Post-placement accuracy metrics and paired nonparametric statistics.

Computes the spatial placement metrics from a fitted catheter line, collapses
per-user trials to medians, and runs an exact Wilcoxon signed-rank test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Line3, angle_between_deg
from .guidance import TrajectoryPlan

CONDITION_TOOL_TRACKING = "tool_tracking"
CONDITION_IN_SITU = "in_situ"


@dataclass(frozen=True)
class PlacementResult:
    """Outcome of one catheter placement as recovered from post-op imaging."""

    fitted_line: Line3
    tip: np.ndarray
    skin_intersection: np.ndarray
    bone_intersection: np.ndarray

    def __post_init__(self):
        for name in ("tip", "skin_intersection", "bone_intersection"):
            v = np.asarray(getattr(self, name), dtype=np.float64).reshape(3)
            object.__setattr__(self, name, v)
        offset = self.tip - self.fitted_line.origin
        lateral = offset - (offset @ self.fitted_line.direction) * self.fitted_line.direction
        if np.linalg.norm(lateral) > 0.5:
            raise ValueError("tip must lie on the fitted line (within 0.5 mm)")


@dataclass(frozen=True)
class MetricsReport:
    entry_offset: float
    skin_entry_offset: float
    angular_deviation: float
    target_tip_error: float
    target_depth_error: float
    signed_depth_error: float
    target_radial_error: float
    marking_time: float | None = None
    insertion_time: float | None = None


def placement_metrics(plan: TrajectoryPlan, result: PlacementResult,
                      marking_time: float | None = None,
                      insertion_time: float | None = None) -> MetricsReport:
    """All spatial accuracy metrics for one placement.

    Entry offset is measured at the bone (inner) intersection; the skin-level
    offset is reported as an auxiliary value. Signed depth is positive when
    the tip ends up too deep.
    """
    d = plan.direction
    entry_offset = float(np.linalg.norm(plan.bone_entry - result.bone_intersection))
    skin_entry_offset = float(np.linalg.norm(plan.skin_entry - result.skin_intersection))
    angle = angle_between_deg(result.fitted_line.direction, d)
    angular_deviation = min(angle, 180.0 - angle)  # line direction sign is conventional
    tip_vec = result.tip - plan.target
    target_tip_error = float(np.linalg.norm(tip_vec))
    signed_depth_error = float(tip_vec @ d)
    target_radial_error = float(np.linalg.norm(tip_vec - signed_depth_error * d))
    return MetricsReport(
        entry_offset=entry_offset,
        skin_entry_offset=skin_entry_offset,
        angular_deviation=angular_deviation,
        target_tip_error=target_tip_error,
        target_depth_error=abs(signed_depth_error),
        signed_depth_error=signed_depth_error,
        target_radial_error=target_radial_error,
        marking_time=marking_time,
        insertion_time=insertion_time,
    )


@dataclass(frozen=True)
class PairedSample:
    user: str
    condition: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("values must be non-empty")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


def collapse_medians(trials: list[PairedSample]) -> list[tuple[str, float, float]]:
    """Collapse per-user trials to one (tool-tracking, in-situ) median pair each."""
    by_user: dict[str, dict[str, list[float]]] = {}
    for sample in trials:
        if sample.condition not in (CONDITION_TOOL_TRACKING, CONDITION_IN_SITU):
            raise ValueError(f"unknown condition: {sample.condition!r}")
        by_user.setdefault(sample.user, {}).setdefault(sample.condition, []).extend(sample.values)
    out = []
    for user in sorted(by_user):
        conditions = by_user[user]
        if set(conditions) != {CONDITION_TOOL_TRACKING, CONDITION_IN_SITU}:
            raise ValueError(f"user {user!r} is missing a condition")
        out.append((user,
                    float(np.median(conditions[CONDITION_TOOL_TRACKING])),
                    float(np.median(conditions[CONDITION_IN_SITU]))))
    return out


def _signed_rank_distribution(ranks2: np.ndarray) -> np.ndarray:
    """Counts of assignments per positive-rank-sum, ranks scaled to integers.

    Polynomial product over (1 + x^r); index k holds the number of the 2^m
    sign assignments whose positive ranks sum to k (in half-rank units).
    """
    total = int(ranks2.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in ranks2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(pairs: list[tuple[float, float]],
                         exact_limit: int = 25) -> tuple[float, float]:
    """Two-sided Wilcoxon signed-rank test on paired values.

    Zero differences are dropped; tied absolute differences get average
    ranks. Up to `exact_limit` nonzero differences the p-value is exact over
    all 2^m sign assignments (as extreme = |W+ - m(m+1)/4| at least as large
    as observed); beyond that the normal approximation is used. Returns
    (W = min(W+, W-), p). All-zero differences give (0, 1.0).
    """
    diffs = np.array([float(a) - float(b) for a, b in pairs])
    diffs = diffs[diffs != 0.0]
    m = len(diffs)
    if m == 0:
        return 0.0, 1.0
    from scipy.stats import rankdata

    ranks = rankdata(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())
    statistic = min(w_plus, w_minus)
    if m <= exact_limit:
        ranks2 = np.round(2 * ranks).astype(np.int64)  # average ranks are half-integers
        counts = _signed_rank_distribution(ranks2)
        total2 = int(ranks2.sum())
        # counts[k] is the number of assignments with W+ = k/2; the
        # distribution is centered on total2/4. Compare integer deviations.
        obs_dev = abs(int(round(4 * w_plus)) - total2)
        devs = np.abs(2 * np.arange(len(counts)) - total2)
        extreme = int(sum(c for c, dv in zip(counts, devs) if dv >= obs_dev))
        return statistic, extreme / (2 ** m)
    # Normal approximation with tie correction, no continuity correction.
    mean = m * (m + 1) / 4.0
    _, tie_counts = np.unique(np.abs(diffs), return_counts=True)
    tie_term = float(((tie_counts ** 3 - tie_counts) / 48.0).sum())
    var = m * (m + 1) * (2 * m + 1) / 24.0 - tie_term
    z = (w_plus - mean) / math.sqrt(var)
    from scipy.stats import norm

    return statistic, float(2 * norm.sf(abs(z)))
