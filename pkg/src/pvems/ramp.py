"""Ramp-rate math: the per-minute ramp definition, the moving-average
battery command, violation detection, and the offline analyses (bucket
histogram over a long series, controlled-ramp counts across candidate
averaging windows).

Two distinct evaluation paths exist on purpose: the offline histogram
uses raw 1-minute differences, while the dispatch loop evaluates
consecutive samples of the window-averaged signal (normalised to %/min).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum

import numpy as np

from .timeseries import PowerSeries

__all__ = [
    "RampConfig",
    "RampHistogram",
    "ramp_rate",
    "ma_command",
    "violates",
    "ramp_histogram",
    "window_sweep",
    "moving_average",
    "count_violation_events",
]


@dataclass(frozen=True)
class RampConfig:
    """Nameplate, ramp limit and control timing.

    ``window_s`` is the averaging window of the smoothing command;
    ``tick_s`` the control cycle.
    """

    nameplate_w: float = 6_740.0
    limit_pct_per_min: float = 10.0
    window_s: float = 20.0
    tick_s: float = 2.0

    def __post_init__(self) -> None:
        if self.nameplate_w <= 0:
            raise ValueError("nameplate_w must be positive")
        if self.limit_pct_per_min <= 0:
            raise ValueError("limit_pct_per_min must be positive")
        if self.tick_s <= 0:
            raise ValueError("tick_s must be positive")
        n = self.window_s / self.tick_s
        if self.window_s <= 0 or abs(n - round(n)) > 1e-9 or round(n) < 1:
            raise ValueError(f"window_s ({self.window_s}) must be a positive "
                             f"multiple of tick_s ({self.tick_s})")

    @property
    def window_samples(self) -> int:
        return int(round(self.window_s / self.tick_s))

    @property
    def tick_minutes(self) -> float:
        return self.tick_s / 60.0


def ramp_rate(p_now_w: float, p_prev_w: float, cfg: RampConfig,
              dt_min: float = 1.0) -> float:
    """Signed ramp rate in percent of nameplate per minute."""
    if dt_min <= 0:
        raise ValueError(f"dt_min must be positive, got {dt_min}")
    return (p_now_w - p_prev_w) / cfg.nameplate_w / dt_min * 100.0


def violates(rr_pct_per_min: float, cfg: RampConfig) -> bool:
    """True when the magnitude reaches the configured limit (inclusive)."""
    return abs(rr_pct_per_min) >= cfg.limit_pct_per_min


def ma_command(pv_window, p_now_w: float, cfg: RampConfig) -> float:
    """Battery command that pins the net PV output to its recent average.

    ``pv_window`` holds the last ``window_samples`` PV readings
    including the current one.  The command is charge-positive: PV above
    its average charges the excess into the battery, PV below discharges
    the shortfall.  An underfilled window (warm-up) commands nothing.
    """
    window = list(pv_window)
    if len(window) < cfg.window_samples:
        return 0.0
    if len(window) > cfg.window_samples:
        raise ValueError(f"window holds {len(window)} samples, expected "
                         f"{cfg.window_samples}")
    return p_now_w - fsum(window) / len(window)


@dataclass(frozen=True)
class RampHistogram:
    """Counts of 1-minute ramps per magnitude bucket.

    The buckets deliberately overlap (>=5 contains >=10 and so on);
    ramps are bucketed by absolute value.
    """

    below_5: int
    ge_5: int
    ge_10: int
    gt_10: int
    ge_50: int
    total_minutes: int

    def percentages(self) -> dict[str, float]:
        t = self.total_minutes
        return {
            "<5": 100.0 * self.below_5 / t,
            ">=5": 100.0 * self.ge_5 / t,
            ">=10": 100.0 * self.ge_10 / t,
            ">10": 100.0 * self.gt_10 / t,
            ">=50": 100.0 * self.ge_50 / t,
        }


def ramp_histogram(series: PowerSeries, cfg: RampConfig) -> RampHistogram:
    """Bucket the 1-minute ramps of a power series by absolute magnitude."""
    spm = 60.0 / series.step_s
    if abs(spm - round(spm)) > 1e-9:
        raise ValueError(f"series step ({series.step_s} s) must divide 60 s")
    spm = int(round(spm))
    marks = series.values[::spm]
    if len(marks) < 2:
        raise ValueError("series shorter than one minute")
    rr = np.abs(np.diff(marks)) / cfg.nameplate_w * 100.0
    return RampHistogram(
        below_5=int(np.count_nonzero(rr < 5.0)),
        ge_5=int(np.count_nonzero(rr >= 5.0)),
        ge_10=int(np.count_nonzero(rr >= 10.0)),
        gt_10=int(np.count_nonzero(rr > 10.0)),
        ge_50=int(np.count_nonzero(rr >= 50.0)),
        total_minutes=len(rr),
    )


def moving_average(values: np.ndarray, n: int) -> np.ndarray:
    """Trailing mean over ``n`` samples; the first ``n - 1`` outputs are NaN."""
    if n < 1:
        raise ValueError("window must span at least one sample")
    out = np.full(len(values), np.nan)
    if len(values) >= n:
        csum = np.cumsum(np.insert(values, 0, 0.0))
        out[n - 1:] = (csum[n:] - csum[:-n]) / n
    return out


def count_violation_events(flags: np.ndarray) -> int:
    """Number of maximal runs of consecutive True flags."""
    flags = np.asarray(flags, dtype=bool)
    if flags.size == 0:
        return 0
    starts = flags & ~np.concatenate(([False], flags[:-1]))
    return int(np.count_nonzero(starts))


def window_sweep(series: PowerSeries, cfg: RampConfig,
                 windows_s: list[float]) -> list[tuple[float, int]]:
    """Controlled-ramp counts of the pure smoothing filter per window.

    For each candidate window the filter is replayed against the series
    with no battery limits: violations are detected on consecutive
    samples of the averaged signal, and with unlimited execution every
    detected ramp event is neutralised, so the count equals the number
    of detected events.  Wider windows smooth harder and detect fewer.
    """
    results: list[tuple[float, int]] = []
    for w in windows_s:
        n = w / series.step_s
        if w <= 0 or abs(n - round(n)) > 1e-9:
            raise ValueError(f"window {w} s is not a multiple of the series "
                             f"step ({series.step_s} s)")
        n = int(round(n))
        avg = moving_average(series.values, n)
        rr = np.diff(avg) / cfg.nameplate_w / (series.step_s / 60.0) * 100.0
        fires = np.abs(rr) >= cfg.limit_pct_per_min
        fires &= ~np.isnan(rr)
        results.append((w, count_violation_events(fires)))
    return results
