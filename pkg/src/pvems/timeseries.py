"""Uniform power-vs-time series: CSV ingestion, resampling and alignment.

PV and load profiles arrive with different sampling (2 s PV logging vs
15 min average load data) and must be brought onto one uniform grid before
simulation.  Everything here is a pure function over immutable series.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "PowerSeries",
    "ResampleMethod",
    "ResamplePolicy",
    "ProfileError",
    "load_power_csv",
    "resample",
    "align",
    "trapezoid_energy_wh",
    "format_utc",
    "write_power_csv",
]


class ProfileError(ValueError):
    """Raised for malformed or inconsistent power profiles."""


class ResampleMethod(str, Enum):
    HOLD = "hold"      # zero-order hold
    LINEAR = "linear"  # linear interpolation


@dataclass(frozen=True)
class ResamplePolicy:
    """How to fill a finer grid from coarser samples.

    ``gap_limit_s`` bounds the source spacing we are willing to bridge;
    resampling across larger gaps is refused rather than invented.
    """

    method: ResampleMethod = ResampleMethod.HOLD
    gap_limit_s: float = 3600.0


@dataclass(frozen=True)
class PowerSeries:
    """Uniformly sampled power signal in watts.

    Sample ``i`` is taken at ``start + i * step_s``.  ``start`` is an
    aware UTC datetime; values are finite floats.
    """

    start: datetime
    step_s: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.start.tzinfo is None:
            object.__setattr__(self, "start", self.start.replace(tzinfo=timezone.utc))
        if self.step_s <= 0:
            raise ProfileError(f"step must be positive, got {self.step_s}")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ProfileError("a series needs at least one sample")
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise ProfileError(f"non-finite power value at sample {bad}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> datetime:
        """Timestamp of the last sample."""
        return self.start + timedelta(seconds=self.step_s * (len(self.values) - 1))

    @property
    def start_epoch(self) -> float:
        return self.start.timestamp()

    def timestamps(self) -> list[datetime]:
        return [self.start + timedelta(seconds=i * self.step_s) for i in range(len(self))]

    def scaled(self, factor: float) -> "PowerSeries":
        return PowerSeries(self.start, self.step_s, self.values * factor)


def _parse_timestamp(text: str) -> datetime:
    """ISO-8601 UTC or integer epoch seconds -> aware UTC datetime."""
    text = text.strip()
    if text.lstrip("+-").isdigit():
        return datetime.fromtimestamp(int(text), tz=timezone.utc)
    iso = text.replace("Z", "+00:00") if text.endswith("Z") else text
    dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def load_power_csv(
    path: Union[str, Path],
    expected_unit: str = "W",
    column: Union[str, None] = None,
) -> PowerSeries:
    """Load a ``timestamp,power`` CSV into a validated PowerSeries.

    The header row is optional.  Timestamps are ISO-8601 UTC or integer
    epoch seconds and must be strictly increasing on a uniform grid.
    ``expected_unit`` is ``"W"`` or ``"kW"``; kW inputs are converted
    to watts.  When the file has a header, ``column`` selects a named
    power column (defaults to the second column), which lets wide trace
    CSVs round-trip through this loader.
    """
    if expected_unit not in ("W", "kW"):
        raise ProfileError(f"expected_unit must be 'W' or 'kW', got {expected_unit!r}")
    scale = 1000.0 if expected_unit == "kW" else 1.0

    path = Path(path)
    if not path.exists():
        raise ProfileError(f"profile file not found: {path}")

    timestamps: list[datetime] = []
    powers: list[float] = []
    power_idx = 1
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first_data_line = 1
        rows = list(reader)
        if not rows:
            raise ProfileError(f"{path}: empty file")
        header = rows[0]
        has_header = False
        if header:
            try:
                _parse_timestamp(header[0])
            except ValueError:
                has_header = True
        if has_header:
            first_data_line = 2
            if column is not None:
                if column not in header:
                    raise ProfileError(f"{path}: column {column!r} not in header {header}")
                power_idx = header.index(column)
            rows = rows[1:]
        elif column is not None:
            raise ProfileError(f"{path}: column selection requires a header row")

        for offset, row in enumerate(rows):
            lineno = first_data_line + offset
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= power_idx:
                raise ProfileError(f"{path}: line {lineno}: expected at least "
                                   f"{power_idx + 1} columns, got {len(row)}")
            try:
                ts = _parse_timestamp(row[0])
            except ValueError as exc:
                raise ProfileError(f"{path}: line {lineno}: bad timestamp {row[0]!r}: {exc}") from None
            try:
                p = float(row[power_idx])
            except ValueError:
                raise ProfileError(f"{path}: line {lineno}: bad power value {row[power_idx]!r}") from None
            if not math.isfinite(p):
                raise ProfileError(f"{path}: line {lineno}: non-finite power value")
            timestamps.append(ts)
            powers.append(p * scale)

    if not timestamps:
        raise ProfileError(f"{path}: empty file")
    if len(timestamps) < 2:
        raise ProfileError(f"{path}: need at least two rows to infer the sampling step")

    step = (timestamps[1] - timestamps[0]).total_seconds()
    if step <= 0:
        raise ProfileError(f"{path}: line {first_data_line + 1}: timestamps not strictly increasing")
    for i in range(1, len(timestamps)):
        dt = (timestamps[i] - timestamps[i - 1]).total_seconds()
        if dt <= 0:
            raise ProfileError(f"{path}: line {first_data_line + i}: timestamps not strictly increasing")
        if abs(dt - step) > 1e-6:
            raise ProfileError(f"{path}: line {first_data_line + i}: irregular step "
                               f"({dt} s, expected {step} s)")

    return PowerSeries(timestamps[0], step, np.array(powers))


def resample(series: PowerSeries, target_step_s: float,
             policy: ResamplePolicy = ResamplePolicy()) -> PowerSeries:
    """Resample onto a grid of ``target_step_s`` covering the same span.

    ``hold`` repeats the most recent source sample; ``linear``
    interpolates between neighbours.  Refuses to bridge source spacing
    wider than the policy's gap limit.
    """
    if target_step_s <= 0:
        raise ProfileError(f"target step must be positive, got {target_step_s}")
    if policy.gap_limit_s < target_step_s:
        raise ProfileError(f"gap_limit ({policy.gap_limit_s} s) must be >= "
                           f"target step ({target_step_s} s)")
    if len(series) > 1 and series.step_s > policy.gap_limit_s:
        raise ProfileError(f"source spacing {series.step_s} s exceeds gap limit "
                           f"{policy.gap_limit_s} s")

    if target_step_s == series.step_s:
        return series

    span = series.step_s * (len(series) - 1)
    n_out = int(math.floor(span / target_step_s + 1e-9)) + 1
    t_out = np.arange(n_out) * target_step_s
    values = _sample_at(series, t_out, policy.method)
    return PowerSeries(series.start, target_step_s, values)


def _sample_at(series: PowerSeries, t_rel: np.ndarray, method: ResampleMethod) -> np.ndarray:
    """Evaluate the series at times relative to its own start (seconds)."""
    if method is ResampleMethod.HOLD:
        idx = np.floor(t_rel / series.step_s + 1e-9).astype(int)
        idx = np.clip(idx, 0, len(series) - 1)
        return series.values[idx]
    t_src = np.arange(len(series)) * series.step_s
    return np.interp(t_rel, t_src, series.values)


def align(a: PowerSeries, b: PowerSeries,
          policy: ResamplePolicy = ResamplePolicy()) -> tuple[PowerSeries, PowerSeries]:
    """Put two series onto one grid: the finer step, overlapping span only.

    The coarser series is resampled (hold by default); non-overlapping
    ends are truncated.  Raises when the spans do not overlap.
    """
    fine, coarse = (a, b) if a.step_s <= b.step_s else (b, a)
    step = fine.step_s

    t0 = max(a.start_epoch, b.start_epoch)
    t1 = min(a.end.timestamp(), b.end.timestamp())
    if t0 > t1 + 1e-9:
        raise ProfileError("series do not overlap in time")

    # Snap the common window onto the finer series' grid.
    k0 = int(math.ceil((t0 - fine.start_epoch) / step - 1e-9))
    k1 = int(math.floor((t1 - fine.start_epoch) / step + 1e-9))
    if k1 < k0:
        raise ProfileError("series do not overlap in time")
    start = fine.start + timedelta(seconds=k0 * step)
    n = k1 - k0 + 1

    fine_out = PowerSeries(start, step, fine.values[k0:k1 + 1])

    if len(coarse) > 1 and coarse.step_s > policy.gap_limit_s:
        raise ProfileError(f"source spacing {coarse.step_s} s exceeds gap limit "
                           f"{policy.gap_limit_s} s")
    t_rel = start.timestamp() - coarse.start_epoch + np.arange(n) * step
    coarse_out = PowerSeries(start, step, _sample_at(coarse, t_rel, policy.method))

    return (fine_out, coarse_out) if a.step_s <= b.step_s else (coarse_out, fine_out)


def trapezoid_energy_wh(series: PowerSeries) -> float:
    """Trapezoidal integral of the series in watt-hours."""
    if len(series) < 2:
        return 0.0
    return float(np.trapezoid(series.values, dx=series.step_s)) / 3600.0


def format_utc(dt: datetime) -> str:
    """ISO-8601 with a Z suffix, seconds resolution when possible."""
    dt = dt.astimezone(timezone.utc)
    text = dt.isoformat()
    return text.replace("+00:00", "Z")


def write_power_csv(series: PowerSeries, path: Union[str, Path],
                    header: bool = True) -> None:
    """Write ``timestamp,power`` rows that load_power_csv reads back losslessly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["timestamp", "power"])
        ts = series.start
        delta = timedelta(seconds=series.step_s)
        for value in series.values:
            writer.writerow([format_utc(ts), repr(float(value))])
            ts += delta
