"""Pointwise max-over-scales outlier test and the p-value map.

For every scale-1 position the test statistic is the max of absolute
aggregated values over all scales that provide a value there; positions
whose statistic strictly exceeds the family-wise threshold are flagged.
The p-value map is a separate, deliberately marginal layer: each valid
(scale, time) cell carries its own two-sided normal p-value for display,
while flagging always uses the family-wise threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .fgn import TimeSeries, as_series
from .pyramid import Pyramid, ScaleConfig, build_nowa, build_swa
from .thresholds import ThresholdResult

__all__ = [
    "DetectionConfig",
    "DetectionResult",
    "Interval",
    "standardize",
    "detect",
    "expand_levels",
    "pvalue_map",
    "flags_to_intervals",
]


@dataclass(frozen=True)
class DetectionConfig:
    """Everything the detector needs besides the data."""

    scale_config: ScaleConfig
    threshold: ThresholdResult
    method: str = "nowa"  # "nowa" | "swa"
    standardization: str = "none"  # "none" | "sample" | "provided"
    mean: float | None = None
    std: float | None = None

    def __post_init__(self) -> None:
        if self.method not in ("nowa", "swa"):
            raise ValueError(f"method must be 'nowa' or 'swa', got {self.method!r}")
        if self.standardization not in ("none", "sample", "provided"):
            raise ValueError(f"unknown standardization {self.standardization!r}")
        if self.standardization == "provided" and (self.mean is None or self.std is None):
            raise ValueError("provided standardization needs mean and std")


@dataclass
class DetectionResult:
    """Per-position statistics, the flag set, and the p-value map.

    ``flags`` are absolute (origin-based) scale-1 indices, sorted;
    ``argmax_scale[j]`` is the scale achieving the max at ``flags[j]``.
    ``pvalues`` is a ``(num_scales, n)`` matrix in scale-1 time coordinates
    with NaN marking cells where a scale has no value.
    """

    statistic: np.ndarray
    flags: np.ndarray
    argmax_scale: np.ndarray
    pvalues: np.ndarray | None
    threshold: ThresholdResult
    method: str
    origin_index: int = 1


@dataclass(frozen=True)
class Interval:
    """Half-open flagged region ``[start, end)`` with its dominant scale."""

    start: int
    end: int
    peak_scale: int


def standardize(series, mode: str = "sample", mean: float | None = None, std: float | None = None):
    """Affinely map the series to (nominally) zero mean and unit variance.

    ``mode='sample'`` uses the series' own moments and rejects constant
    input; ``mode='provided'`` applies caller statistics, e.g. moments
    estimated from a training segment; ``mode='none'`` is the identity.
    Returns ``(standardized_series, mean, std)``.
    """
    ts = as_series(series)
    if mode == "none":
        return ts, 0.0, 1.0
    if len(ts) == 0:
        raise ValueError("series must be non-empty")
    if mode == "sample":
        mean = float(ts.values.mean())
        std = float(ts.values.std(ddof=1)) if len(ts) > 1 else 0.0
        if std <= 0.0:
            raise ValueError("cannot standardize a constant series by its sample moments")
    elif mode == "provided":
        if mean is None or std is None:
            raise ValueError("provided standardization needs mean and std")
        if std <= 0.0:
            raise ValueError("std must be positive")
    else:
        raise ValueError(f"unknown standardization mode {mode!r}")
    values = (ts.values - mean) / std
    return TimeSeries(values, ts.origin_index), float(mean), float(std)


def expand_levels(pyramid: Pyramid) -> np.ndarray:
    """Levels expanded onto scale-1 time coordinates as a (M, n) matrix.

    Row ``k-1`` holds the scale-``k`` value covering each position: the
    covering complete block (non-overlapping layout) or the backward window
    ending there (sliding layout).  NaN marks positions without a value.
    """
    config = pyramid.config
    out = np.full((config.num_scales, pyramid.n), np.nan)
    for k in range(1, config.num_scales + 1):
        level = pyramid.levels[k - 1]
        window = config.window(k)
        if pyramid.method == "nowa":
            out[k - 1, : len(level) * window] = np.repeat(level, window)
        else:
            out[k - 1, window - 1 :] = level
    return out


def pvalue_map(pyramid: Pyramid) -> np.ndarray:
    """Marginal two-sided p-values ``2(1 - Phi(|Y_k|))`` per valid cell.

    Same (M, n) layout as :func:`expand_levels`; invalid cells stay NaN —
    they are absent, never zero.
    """
    expanded = expand_levels(pyramid)
    with np.errstate(invalid="ignore"):
        return 2.0 * ndtr(-np.abs(expanded))


def detect(series, config: DetectionConfig, compute_pvalues: bool = True) -> DetectionResult:
    """Run the max-over-scales test at every position of ``series``.

    A position is flagged iff its statistic strictly exceeds the threshold;
    ties do not reject.  Near boundaries fewer scales are available and the
    max runs over those present (using the full-family threshold there is
    conservative).
    """
    ts, _, _ = standardize(series, config.standardization, config.mean, config.std)
    build = build_nowa if config.method == "nowa" else build_swa
    pyramid = build(ts, config.scale_config)
    expanded = expand_levels(pyramid)
    magnitudes = np.abs(expanded)
    statistic = np.nanmax(magnitudes, axis=0)
    flagged = np.nonzero(statistic > config.threshold.value)[0]
    argmax_scale = np.nanargmax(magnitudes[:, flagged], axis=0) + 1 if len(flagged) else np.array([], dtype=int)
    return DetectionResult(
        statistic=statistic,
        flags=flagged + ts.origin_index,
        argmax_scale=np.asarray(argmax_scale, dtype=int),
        pvalues=pvalue_map(pyramid) if compute_pvalues else None,
        threshold=config.threshold,
        method=config.method,
        origin_index=ts.origin_index,
    )


def flags_to_intervals(result: DetectionResult, gap_tolerance: int = 0) -> list[Interval]:
    """Merge flagged indices into half-open intervals.

    Consecutive flags separated by at most ``gap_tolerance`` unflagged
    positions join the same interval.  ``peak_scale`` is the most frequent
    argmax scale inside the interval (smallest scale on ties).
    """
    if gap_tolerance < 0:
        raise ValueError("gap_tolerance must be >= 0")
    if len(result.flags) == 0:
        return []
    intervals: list[Interval] = []
    run_start = 0
    flags = result.flags
    for j in range(1, len(flags) + 1):
        if j == len(flags) or flags[j] - flags[j - 1] - 1 > gap_tolerance:
            scales = result.argmax_scale[run_start:j]
            peak = int(np.bincount(scales).argmax())
            intervals.append(Interval(int(flags[run_start]), int(flags[j - 1]) + 1, peak))
            run_start = j
    return intervals
