"""Multiscale aggregation pyramids over a scale-1 series.

Scale ``k`` aggregates windows of ``L_k = base**(k-1)`` consecutive samples,
normalized by ``L_k**hurst`` so that a pure background series with matching
Hurst parameter keeps a standard-normal marginal at every scale.

Two window layouts are supported:

* ``nowa`` — non-overlapping window aggregation: disjoint blocks, block ``j``
  at scale ``k`` covering scale-1 positions ``(j-1)*L_k + 1 .. j*L_k``; a
  trailing partial block is dropped.
* ``swa`` — sliding window aggregation: the backward window of length
  ``L_k`` ending at position ``i``, defined for ``i >= L_k``.  Sliding
  aggregation uses only up-to-now samples, so it also runs one sample at a
  time via :class:`StreamState`.

Both builders aggregate level ``k`` from the level ``k-1`` sums with the
earliest chunk added first, which makes the two layouts agree bit-for-bit at
positions that are multiples of the largest window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fgn import TimeSeries, as_series

__all__ = [
    "ScaleConfig",
    "Pyramid",
    "StreamState",
    "build_nowa",
    "build_swa",
    "column_at",
]


@dataclass(frozen=True)
class ScaleConfig:
    """Aggregation geometry: base, number of scales, normalization exponent.

    The normalization exponent is the Hurst parameter used in the weights
    ``1/L_k**hurst``.  It may deliberately differ from the data's true Hurst
    parameter (useful for sensitivity experiments); matching them is what
    yields unit variance at every scale.  ``hurst = 1`` (plain averaging) is
    allowed here even though it is degenerate as a model parameter.
    """

    base: int = 2
    num_scales: int = 15
    hurst: float = 0.5

    def __post_init__(self) -> None:
        if int(self.base) != self.base or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base}")
        if int(self.num_scales) != self.num_scales or self.num_scales < 1:
            raise ValueError(f"num_scales must be an integer >= 1, got {self.num_scales}")
        if not 0.0 < self.hurst <= 1.0:
            raise ValueError(f"hurst must be in (0, 1], got {self.hurst}")

    def window(self, scale: int) -> int:
        """Window length ``L_k = base**(k-1)`` at 1-based scale ``k``."""
        if not 1 <= scale <= self.num_scales:
            raise ValueError(f"scale must be in 1..{self.num_scales}, got {scale}")
        return self.base ** (scale - 1)

    @property
    def max_window(self) -> int:
        return self.base ** (self.num_scales - 1)


@dataclass
class Pyramid:
    """The multiscale series: one array per scale plus its layout tag.

    ``levels[k-1]`` holds scale ``k``.  For ``nowa`` the array has
    ``n // L_k`` complete blocks; for ``swa`` it has ``n - L_k + 1`` entries,
    entry ``0`` being the window ending at scale-1 position ``L_k``.  In both
    layouts the first entry's window ends at position ``L_k``
    (``start_indices[k-1]``), and level 1 is the input itself.
    """

    method: str
    config: ScaleConfig
    levels: list[np.ndarray]
    n: int
    origin_index: int = 1
    start_indices: list[int] = field(init=False)

    def __post_init__(self) -> None:
        self.start_indices = [self.config.window(k) for k in range(1, self.config.num_scales + 1)]


def _check_length(x: np.ndarray, config: ScaleConfig) -> None:
    if len(x) < config.max_window:
        raise ValueError(
            f"series of length {len(x)} is shorter than the largest window "
            f"{config.max_window} (base {config.base}, {config.num_scales} scales)"
        )


def _normalizers(config: ScaleConfig) -> list[float]:
    return [float(config.window(k)) ** config.hurst for k in range(1, config.num_scales + 1)]


def build_nowa(series, config: ScaleConfig) -> Pyramid:
    """Non-overlapping aggregation pyramid of ``series``.

    Scale-``k`` block ``j`` equals the sum of scale-1 samples at positions
    ``(j-1)*L_k + 1 .. j*L_k`` divided by ``L_k**hurst``; the trailing
    partial block is dropped rather than padded.
    """
    ts = as_series(series)
    x = ts.values
    _check_length(x, config)
    b = config.base
    sums = [x]
    for _ in range(config.num_scales - 1):
        prev = sums[-1]
        nblocks = len(prev) // b
        cur = prev[0 : nblocks * b : b].copy()
        for r in range(1, b):
            cur += prev[r : nblocks * b : b]
        sums.append(cur)
    levels = [s if norm == 1.0 else s / norm for s, norm in zip(sums, _normalizers(config))]
    return Pyramid("nowa", config, levels, len(x), ts.origin_index)


def build_swa(series, config: ScaleConfig) -> Pyramid:
    """Sliding aggregation pyramid of ``series``.

    Scale-``k`` entry at position ``i >= L_k`` equals the sum of the
    ``L_k`` samples ending at ``i`` divided by ``L_k**hurst``.
    """
    ts = as_series(series)
    x = ts.values
    _check_length(x, config)
    b = config.base
    n = len(x)
    sums = [x]
    for k in range(2, config.num_scales + 1):
        prev = sums[-1]
        sub = config.window(k - 1)
        m = n - config.window(k) + 1
        # Window of b*sub samples = b chained sub-windows, earliest first.
        cur = prev[0:m].copy()
        for r in range(b - 2, -1, -1):
            i0 = (b - 1 - r) * sub
            cur += prev[i0 : i0 + m]
        sums.append(cur)
    levels = [s if norm == 1.0 else s / norm for s, norm in zip(sums, _normalizers(config))]
    return Pyramid("swa", config, levels, n, ts.origin_index)


def column_at(pyramid: Pyramid, t: int) -> list[tuple[int, float]]:
    """All (scale, value) pairs whose window provides a value at position ``t``.

    ``t`` is the 1-based scale-1 position.  For non-overlapping layout this
    is the covering block at each scale, included only when the block is
    complete; for sliding layout it is the window ending at ``t``, included
    only once ``t >= L_k``.  Scales without a valid value are omitted.
    """
    if not 1 <= t <= pyramid.n:
        raise ValueError(f"t must be in 1..{pyramid.n}, got {t}")
    out: list[tuple[int, float]] = []
    for k in range(1, pyramid.config.num_scales + 1):
        level = pyramid.levels[k - 1]
        window = pyramid.config.window(k)
        if pyramid.method == "nowa":
            block = (t + window - 1) // window
            if block <= len(level):
                out.append((k, float(level[block - 1])))
        else:
            if t >= window:
                out.append((k, float(level[t - window])))
    return out


class StreamState:
    """One-sample-at-a-time sliding aggregation over all scales.

    Keeps a ring buffer of the last ``max_window`` raw samples and one
    running sum per scale; each push costs O(num_scales).  Running sums are
    recomputed from the ring buffer every ``recompute_every`` pushes to keep
    accumulated floating-point drift below ~1e-9 over arbitrarily long runs.
    """

    def __init__(self, config: ScaleConfig, recompute_every: int = 1 << 20):
        if recompute_every < 1:
            raise ValueError("recompute_every must be >= 1")
        self.config = config
        self.samples_seen = 0
        self._windows = np.array([config.window(k) for k in range(1, config.num_scales + 1)])
        self._normalizers = np.array(_normalizers(config))
        self._ring = np.zeros(config.max_window)
        self._pos = 0
        self._sums = np.zeros(config.num_scales)
        self._recompute_every = recompute_every

    def push(self, sample: float) -> list[tuple[int, float]]:
        """Ingest one sample; return the (scale, value) column ending here.

        The returned column matches what :func:`column_at` on a sliding
        pyramid of the full history would give: scale ``k`` appears once at
        least ``L_k`` samples have been seen.
        """
        sample = float(sample)
        size = len(self._ring)
        full = self.samples_seen >= self._windows
        leaving_idx = (self._pos - self._windows[full]) % size
        self._sums += sample
        self._sums[full] -= self._ring[leaving_idx]
        self._ring[self._pos] = sample
        self._pos = (self._pos + 1) % size
        self.samples_seen += 1
        if self.samples_seen % self._recompute_every == 0:
            self._recompute_sums()
        warm = self._windows <= self.samples_seen
        values = self._sums[warm] / self._normalizers[warm]
        scales = np.nonzero(warm)[0] + 1
        return [(int(k), float(v)) for k, v in zip(scales, values)]

    def _recompute_sums(self) -> None:
        # Chronological view of the ring: oldest retained sample first.
        size = len(self._ring)
        history = self._ring[(self._pos + np.arange(size)) % size]
        for i, window in enumerate(self._windows):
            if self.samples_seen >= window:
                self._sums[i] = history[size - window :].sum()
