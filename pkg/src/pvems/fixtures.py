"""Deterministic synthetic fixture corpus.

Real high-frequency PV logs are not redistributable, so the test suite
and the quickstart run on synthetic profiles that reproduce the shapes
the strategies care about: a winter week of heavily fluctuating PV
(full-nameplate square modulation, ten limit-violating minute ramps per
day), a smooth violation-free day, a two-level weekday load, and
forecast files in the provider's wire format.
"""

from __future__ import annotations

import json
from datetime import date as Date
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .timeseries import PowerSeries, write_power_csv

__all__ = [
    "WEEK_START",
    "fluctuating_week_pv",
    "smooth_day_pv",
    "block_load",
    "constant_load",
    "forecast_payload",
    "write_fixture_corpus",
]

WEEK_START = datetime(2018, 1, 1, tzinfo=timezone.utc)

PV_HIGH_W = 6_740.0           # matches the default ramp nameplate
PV_MID_W = 3_000.0

# Piecewise-constant PV level changes, as (second of day, new level).
# Full-nameplate swings are split into two unequal steps (3000 W and
# 3740 W) 30 s apart and placed inside a single minute, so every swing
# is one +/-100 %/min minute ramp while each individual step stays
# within reach of a 5 kW battery; the unequal split keeps the averaged
# per-tick ramp off the exact detection threshold for round window
# lengths.  Per day: sunrise swing, four midday dropout clusters (down
# 10 min, back up), sunset swing -> ten violating minute ramps.
_DAY_LEVEL_EVENTS: list[tuple[int, float]] = []
_DAY_LEVEL_EVENTS += [(8 * 3600 + 10, PV_MID_W), (8 * 3600 + 40, PV_HIGH_W)]
for _t0 in (8 * 3600 + 120, 10 * 3600, 12 * 3600, 14 * 3600):
    _DAY_LEVEL_EVENTS += [
        (_t0 + 10, PV_MID_W), (_t0 + 40, 0.0),
        (_t0 + 610, PV_MID_W), (_t0 + 640, PV_HIGH_W),
    ]
_DAY_LEVEL_EVENTS += [(16 * 3600 + 10, PV_MID_W), (16 * 3600 + 40, 0.0)]

VIOLATING_MINUTE_RAMPS_PER_DAY = 10


def fluctuating_week_pv(start: datetime = WEEK_START, days: int = 7,
                        tick_s: float = 2.0) -> PowerSeries:
    """Square-modulated PV week with ten +/-100 %/min ramps per day."""
    ticks_per_day = int(round(86400 / tick_s))
    day = np.zeros(ticks_per_day)
    level = 0.0
    prev_idx = 0
    for second, new_level in _DAY_LEVEL_EVENTS:
        idx = int(round(second / tick_s))
        day[prev_idx:idx] = level
        level = new_level
        prev_idx = idx
    day[prev_idx:] = level
    return PowerSeries(start, tick_s, np.tile(day, days))


def smooth_day_pv(start: datetime = WEEK_START, tick_s: float = 2.0,
                  peak_w: float = 3_000.0) -> PowerSeries:
    """One violation-free day: a sin^2 bell between 06:00 and 18:00."""
    t = np.arange(int(round(86400 / tick_s))) * tick_s
    phase = (t - 6 * 3600.0) / (12 * 3600.0)
    values = np.where((phase >= 0) & (phase <= 1),
                      peak_w * np.sin(np.pi * phase) ** 2, 0.0)
    return PowerSeries(start, tick_s, values)


def block_load(start: datetime = WEEK_START, days: int = 7,
               step_s: float = 900.0, day_w: float = 5_000.0,
               night_w: float = 800.0) -> PowerSeries:
    """Two-level load: ``day_w`` from 05:00 to 22:00, ``night_w`` otherwise.

    One extra closing mark covers midnight of the last day, so aligning
    against a finer PV series keeps the PV span intact.
    """
    marks_per_day = int(round(86400 / step_s))
    seconds = np.arange(marks_per_day * days + 1) * step_s % 86400
    values = np.where((seconds >= 5 * 3600) & (seconds < 22 * 3600), day_w, night_w)
    return PowerSeries(start, step_s, values)


def constant_load(start: datetime = WEEK_START, days: int = 1,
                  step_s: float = 900.0, power_w: float = 500.0) -> PowerSeries:
    marks = int(round(86400 / step_s)) * days + 1
    return PowerSeries(start, step_s, np.full(marks, power_w))


def forecast_payload(region_id: int, first_date: Date,
                     weather_ids: list[int]) -> dict:
    """Daily-forecast document in the provider's wire format."""
    return {
        "owner": "synthetic",
        "country": "PT",
        "globalIdLocal": region_id,
        "dataUpdate": f"{first_date.isoformat()}T00:31:00",
        "data": [
            {
                "forecastDate": (first_date + timedelta(days=i)).isoformat(),
                "idWeatherType": wid,
            }
            for i, wid in enumerate(weather_ids)
        ],
    }


DEFAULT_REGION_ID = 1105800


def default_config(fixture_dir: str = ".", out_dir: str = "out") -> dict:
    """A ready-to-run simulation config pointing at the bundled corpus."""
    return {
        "pv_path": f"{fixture_dir}/pv_week.csv",
        "load_path": f"{fixture_dir}/load_week.csv",
        "pv_unit": "W",
        "load_unit": "W",
        "load_scale_w": 1.0,
        "load_resample": "hold",
        "strategy": "SCM_RR_WF",
        "initial_soc": 0.35,
        "battery": {
            "energy_capacity_wh": 60000.0,
            "power_nominal_w": 5000.0,
            "soc_min": 0.20,
            "soc_max": 0.70,
            "eta_acdc": 0.88,
            "standby_power_w": 30.0,
            "derate_band": 0.05,
        },
        "ramp": {
            "nameplate_w": 6740.0,
            "limit_pct_per_min": 10.0,
            "window_s": 20.0,
            "tick_s": 2.0,
        },
        "ems": {
            "night_charge_power_w": 2700.0,
            "soc_target": 0.50,
            "charge_start_time": "01:30",
            "utc_offset_h": 0.0,
            "pv_day_threshold": 0.01,
        },
        "forecast": {
            "mode": "fixture",
            "fixture_path": f"{fixture_dir}/forecast_mixed.json",
            "region_id": DEFAULT_REGION_ID,
            "charge_ids": [4, 5, 14, 16, 17, 18],
            "unknown_behavior": "no_charge",
            "retries": 2,
            "timeout_s": 10.0,
        },
        "outputs": {
            "trace_csv": f"{out_dir}/trace.csv",
            "kpi_json": f"{out_dir}/kpi.json",
            "histogram_csv": f"{out_dir}/histogram.csv",
        },
    }


def write_fixture_corpus(out_dir) -> dict[str, Path]:
    """Write the full synthetic corpus; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    first_date = WEEK_START.date()

    paths = {
        "pv_week": out / "pv_week.csv",
        "load_week": out / "load_week.csv",
        "pv_smooth_day": out / "pv_smooth_day.csv",
        "load_smooth_day": out / "load_smooth_day.csv",
        "forecast_cloudy": out / "forecast_cloudy.json",
        "forecast_clear": out / "forecast_clear.json",
        "forecast_mixed": out / "forecast_mixed.json",
        "config": out / "config_week.json",
    }

    write_power_csv(fluctuating_week_pv(), paths["pv_week"])
    write_power_csv(block_load(), paths["load_week"])
    write_power_csv(smooth_day_pv(), paths["pv_smooth_day"])
    write_power_csv(constant_load(), paths["load_smooth_day"])

    # Cloudy (4) triggers the night charge, clear sky (1) does not;
    # the mixed week charges on days 2-5 only.
    forecasts = {
        "forecast_cloudy": [4] * 8,
        "forecast_clear": [1] * 8,
        "forecast_mixed": [1, 4, 4, 4, 4, 1, 1, 1],
    }
    for name, ids in forecasts.items():
        payload = forecast_payload(DEFAULT_REGION_ID, first_date, ids)
        paths[name].write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")

    paths["config"].write_text(
        json.dumps(default_config(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    return paths
