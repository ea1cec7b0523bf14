"""Per-tick dispatch strategies for the PV + battery system.

Three strategies share one deterministic tick loop:

* self-consumption only: battery absorbs PV surplus, covers deficit;
* + ramp control: when the averaged PV signal ramps past the limit, the
  battery absorbs/injects the deviation from the moving average instead;
* + forecast charging: on nights before overcast days the battery is
  charged from the grid to a target SOC so the ramp control has
  headroom.

Priority per tick is night charge, then ramp control, then
self-consumption.  Every tick emits one DispatchRecord obeying the AC
power balance ``pv + grid = load + battery + standby``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from datetime import date as Date
from datetime import datetime, time, timedelta
from enum import Enum
from math import fsum
from typing import Optional, Protocol

from . import battery as bat
from .battery import BatteryParams, BatteryState
from .forecast import ChargeDecisionPolicy, ForecastDay, should_night_charge
from .ramp import RampConfig, ma_command, ramp_rate, violates
from .timeseries import PowerSeries

__all__ = [
    "StrategyKind",
    "DispatchMode",
    "EmsConfig",
    "DispatchRecord",
    "scm_dispatch",
    "rr_dispatch",
    "night_charge_tick",
    "simulate",
]

log = logging.getLogger(__name__)


class StrategyKind(str, Enum):
    SCM = "SCM"
    SCM_RR = "SCM_RR"
    SCM_RR_WF = "SCM_RR_WF"

    @property
    def has_ramp_control(self) -> bool:
        return self is not StrategyKind.SCM

    @property
    def has_forecast_charging(self) -> bool:
        return self is StrategyKind.SCM_RR_WF


class DispatchMode(str, Enum):
    SCM = "scm"
    RAMP_CONTROL = "ramp_control"
    NIGHT_CHARGE = "night_charge"
    IDLE = "idle"


@dataclass(frozen=True)
class EmsConfig:
    """Strategy selection plus the scheduling constants of the dispatcher.

    Local schedule points (the night-charge start) are mapped to the
    internal UTC clock through a fixed ``utc_offset_h``.  Night charging
    ends for the day once the averaged PV exceeds ``pv_day_threshold``
    of nameplate.
    """

    strategy: StrategyKind = StrategyKind.SCM
    ramp: RampConfig = RampConfig()
    night_charge_power_w: float = 2_700.0
    soc_target: float = 0.50
    charge_start_time: time = time(1, 30)
    utc_offset_h: float = 0.0
    pv_day_threshold: float = 0.01

    def __post_init__(self) -> None:
        if self.night_charge_power_w <= 0:
            raise ValueError("night_charge_power_w must be positive")
        if not 0.0 < self.soc_target < 1.0:
            raise ValueError(f"soc_target must be in (0, 1), got {self.soc_target}")
        if not 0.0 <= self.pv_day_threshold < 1.0:
            raise ValueError("pv_day_threshold must be a fraction of nameplate")

    def validate_against(self, params: BatteryParams) -> None:
        if not params.soc_min < self.soc_target < params.soc_max:
            raise ValueError(f"soc_target {self.soc_target} outside the battery "
                             f"window [{params.soc_min}, {params.soc_max}]")
        if self.night_charge_power_w > params.power_nominal_w:
            raise ValueError(f"night_charge_power_w {self.night_charge_power_w} "
                             f"exceeds battery nominal {params.power_nominal_w}")


@dataclass(slots=True)
class DispatchRecord:
    """One tick of the simulation.

    Battery powers are charge-positive; grid power is import-positive.
    ``p_batt_cmd`` is what the strategy asked for, ``p_batt_actual``
    what the battery executed after its SOC and power limits.
    """

    timestamp: datetime
    p_pv: float
    p_load: float
    p_batt_cmd: float
    p_batt_actual: float
    p_grid: float
    soc: float
    mode: DispatchMode
    rr_pct_per_min: float
    rr_violated: bool


class ForecastSource(Protocol):
    def forecast_for(self, date: Date) -> ForecastDay: ...


def scm_dispatch(p_pv: float, p_load: float, params: BatteryParams,
                 state: BatteryState) -> tuple[float, float]:
    """Self-consumption step: store the surplus, cover the deficit.

    Returns the battery command (already limited to the available
    power) and the resulting grid power including the standby draw.
    """
    surplus = p_pv - p_load
    if surplus > 0:
        cmd = min(surplus, bat.available_charge_power(params, state))
    elif surplus < 0:
        cmd = -min(-surplus, bat.available_discharge_power(params, state))
    else:
        cmd = 0.0
    grid = p_load + cmd + params.standby_power_w - p_pv
    return cmd, grid


def rr_dispatch(pv_window, s_prev: Optional[float], p_pv: float, p_load: float,
                params: BatteryParams, state: BatteryState,
                cfg: RampConfig) -> tuple[float, float, DispatchMode, float]:
    """Ramp-control step: smooth the PV output when its averaged signal
    ramps past the limit, otherwise fall through to self-consumption.

    ``pv_window`` holds the most recent raw PV samples (current one
    last); ``s_prev`` is the previous tick's window average, ``None``
    during warm-up.  The returned command on a violating tick is the
    raw moving-average compensation; the battery clamps it on
    execution.  Returns (command, grid, mode, ramp rate in %/min).
    """
    window = list(pv_window)
    if len(window) < cfg.window_samples or s_prev is None:
        cmd, grid = scm_dispatch(p_pv, p_load, params, state)
        mode = DispatchMode.IDLE if cmd == 0.0 else DispatchMode.SCM
        return cmd, grid, mode, 0.0

    s_now = fsum(window) / len(window)
    rr = ramp_rate(s_now, s_prev, cfg, cfg.tick_minutes)
    if violates(rr, cfg):
        cmd = ma_command(window, p_pv, cfg)
        grid = p_load + cmd + params.standby_power_w - p_pv
        return cmd, grid, DispatchMode.RAMP_CONTROL, rr

    cmd, grid = scm_dispatch(p_pv, p_load, params, state)
    mode = DispatchMode.IDLE if cmd == 0.0 else DispatchMode.SCM
    return cmd, grid, mode, rr


def night_charge_tick(local_time: time, soc: float, decision: bool,
                      cfg: EmsConfig, params: BatteryParams,
                      pv_day_started: bool = False) -> Optional[float]:
    """Grid-sourced charge command for the small hours, or ``None``.

    Charging runs from ``charge_start_time`` until the SOC target is
    reached or the PV day begins, and only when the forecast decision
    asked for it.
    """
    if not decision or pv_day_started:
        return None
    if local_time < cfg.charge_start_time:
        return None
    if soc >= cfg.soc_target:
        return None
    return cfg.night_charge_power_w


def simulate(pv: PowerSeries, load: PowerSeries, cfg: EmsConfig,
             params: BatteryParams,
             forecast_source: Optional[ForecastSource] = None,
             policy: Optional[ChargeDecisionPolicy] = None,
             initial_soc: float = 0.35) -> list[DispatchRecord]:
    """Run one strategy over aligned PV and load profiles.

    Inputs must share start, step and length, with the step equal to
    the control tick.  The loop is single-threaded and replay
    deterministic; forecast decisions are resolved once per simulated
    day at the charge start time (a missing or failing source defaults
    to no charge with a logged warning).
    """
    if (pv.start != load.start or pv.step_s != load.step_s
            or len(pv) != len(load)):
        raise ValueError("pv and load profiles are not aligned "
                         f"(start {pv.start}/{load.start}, step {pv.step_s}/"
                         f"{load.step_s}, len {len(pv)}/{len(load)})")
    if abs(pv.step_s - cfg.ramp.tick_s) > 1e-9:
        raise ValueError(f"profiles sampled at {pv.step_s} s but the control "
                         f"tick is {cfg.ramp.tick_s} s")
    cfg.validate_against(params)
    if not params.soc_min <= initial_soc <= params.soc_max:
        raise ValueError(f"initial_soc {initial_soc} outside the battery "
                         f"window [{params.soc_min}, {params.soc_max}]")
    if policy is None:
        policy = ChargeDecisionPolicy()

    tick_s = cfg.ramp.tick_s
    tick = timedelta(seconds=tick_s)
    local_offset = timedelta(hours=cfg.utc_offset_h)
    n_window = cfg.ramp.window_samples
    pv_day_level = cfg.pv_day_threshold * cfg.ramp.nameplate_w

    state = BatteryState(soc=initial_soc)
    window: deque[float] = deque(maxlen=n_window)
    s_prev: Optional[float] = None
    decisions: dict[Date, bool] = {}
    day_started: set[Date] = set()
    night_done: set[Date] = set()  # target reached; one charge segment per night
    warned_no_source = False

    records: list[DispatchRecord] = []
    timestamp = pv.start
    pv_values = pv.values
    load_values = load.values

    for k in range(len(pv_values)):
        p_pv = float(pv_values[k])
        p_load = float(load_values[k])
        local_dt = timestamp + local_offset
        local_date = local_dt.date()

        window.append(p_pv)
        s_now = fsum(window) / n_window if len(window) == n_window else None

        if s_now is not None and s_now > pv_day_level:
            day_started.add(local_date)

        rr = 0.0
        violated = False
        if s_now is not None and s_prev is not None:
            rr = ramp_rate(s_now, s_prev, cfg.ramp, cfg.ramp.tick_minutes)
            violated = violates(rr, cfg.ramp)

        cmd: Optional[float] = None
        mode = DispatchMode.SCM
        if cfg.strategy.has_forecast_charging:
            if local_dt.time() >= cfg.charge_start_time and local_date not in decisions:
                decisions[local_date] = _resolve_decision(
                    forecast_source, policy, local_date, warned_no_source)
                warned_no_source = warned_no_source or forecast_source is None
            decision = (decisions.get(local_date, False)
                        and local_date not in night_done)
            night_cmd = night_charge_tick(local_dt.time(), state.soc, decision,
                                          cfg, params,
                                          pv_day_started=local_date in day_started)
            if (decision and local_dt.time() >= cfg.charge_start_time
                    and state.soc >= cfg.soc_target):
                night_done.add(local_date)  # one charge segment per night
            elif night_cmd is not None:
                cmd = night_cmd
                mode = DispatchMode.NIGHT_CHARGE

        if cmd is None and cfg.strategy.has_ramp_control and violated:
            cmd = ma_command(window, p_pv, cfg.ramp)
            mode = DispatchMode.RAMP_CONTROL

        if cmd is None:
            cmd, _ = scm_dispatch(p_pv, p_load, params, state)
            mode = DispatchMode.IDLE if cmd == 0.0 else DispatchMode.SCM

        state, actual = bat.step(params, state, cmd, tick_s)
        grid = p_load + actual + params.standby_power_w - p_pv

        records.append(DispatchRecord(
            timestamp=timestamp,
            p_pv=p_pv,
            p_load=p_load,
            p_batt_cmd=cmd,
            p_batt_actual=actual,
            p_grid=grid,
            soc=state.soc,
            mode=mode,
            rr_pct_per_min=rr,
            rr_violated=violated,
        ))

        s_prev = s_now
        timestamp = timestamp + tick

    return records


def _resolve_decision(source: Optional[ForecastSource],
                      policy: ChargeDecisionPolicy, date: Date,
                      already_warned: bool) -> bool:
    if source is None:
        if not already_warned:
            log.warning("no forecast source configured; defaulting to no "
                        "night charge")
        return False
    try:
        day = source.forecast_for(date)
    except Exception as exc:
        log.warning("forecast for %s unavailable (%s); defaulting to no "
                    "night charge", date, exc)
        return False
    return should_night_charge(day, policy)
