"""Energy/efficiency model of a flow battery behind an AC/DC converter.

Coulomb-counting on the DC side with a symmetric conversion efficiency
per direction, a hard SOC operating window and a linear power taper near
each SOC limit.  Pump and stack electrochemistry are out of scope: the
dispatch logic only needs SOC and the power actually available.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

__all__ = [
    "BatteryParams",
    "BatteryMode",
    "BatteryState",
    "available_charge_power",
    "available_discharge_power",
    "step",
]


class BatteryMode(str, Enum):
    IDLE = "idle"
    CHARGING = "charging"
    DISCHARGING = "discharging"


@dataclass(frozen=True)
class BatteryParams:
    """Nameplate, efficiency and SOC-window parameters.

    ``derate_band`` is the SOC width (as a fraction of full capacity)
    over which available power tapers linearly to zero approaching
    either limit.
    """

    energy_capacity_wh: float = 60_000.0
    power_nominal_w: float = 5_000.0
    soc_min: float = 0.20
    soc_max: float = 0.70
    eta_acdc: float = 0.88
    standby_power_w: float = 30.0
    derate_band: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.soc_min < self.soc_max <= 1.0:
            raise ValueError(f"need 0 <= soc_min < soc_max <= 1, got "
                             f"[{self.soc_min}, {self.soc_max}]")
        if not 0.0 < self.eta_acdc <= 1.0:
            raise ValueError(f"eta_acdc must be in (0, 1], got {self.eta_acdc}")
        if self.energy_capacity_wh <= 0:
            raise ValueError("energy_capacity_wh must be positive")
        if self.power_nominal_w <= 0:
            raise ValueError("power_nominal_w must be positive")
        if self.standby_power_w < 0:
            raise ValueError("standby_power_w must be non-negative")
        if not 0.0 <= self.derate_band < (self.soc_max - self.soc_min) / 2:
            raise ValueError(f"derate_band must be in [0, {(self.soc_max - self.soc_min) / 2}), "
                             f"got {self.derate_band}")


@dataclass(frozen=True)
class BatteryState:
    """State of charge (fraction of capacity) and current operating mode."""

    soc: float
    mode: BatteryMode = BatteryMode.IDLE

    def clamped(self, params: BatteryParams) -> "BatteryState":
        return replace(self, soc=min(max(self.soc, params.soc_min), params.soc_max))


def available_charge_power(params: BatteryParams, state: BatteryState) -> float:
    """AC watts the battery can currently absorb (>= 0).

    Full nominal power away from the limits, tapering linearly to zero
    over ``derate_band`` below ``soc_max``.
    """
    headroom = params.soc_max - state.soc
    if headroom <= 0:
        return 0.0
    if params.derate_band > 0 and headroom < params.derate_band:
        return params.power_nominal_w * headroom / params.derate_band
    return params.power_nominal_w


def available_discharge_power(params: BatteryParams, state: BatteryState) -> float:
    """AC watts the battery can currently deliver (>= 0); mirrors the charge taper."""
    headroom = state.soc - params.soc_min
    if headroom <= 0:
        return 0.0
    if params.derate_band > 0 and headroom < params.derate_band:
        return params.power_nominal_w * headroom / params.derate_band
    return params.power_nominal_w


def step(params: BatteryParams, state: BatteryState, ac_command_w: float,
         dt_s: float) -> tuple[BatteryState, float]:
    """Advance the battery by ``dt_s`` seconds under a signed AC command.

    Positive commands request charging, negative discharging.  The
    executed power is clamped to the SOC-tapered availability and, on
    the final partial step, reduced so the SOC never leaves its window.
    Conversion losses apply per direction; the constant standby draw is
    accounted on the AC bus by the caller, not here.

    Returns the new state and the signed AC power actually executed.
    """
    if dt_s <= 0:
        raise ValueError(f"dt must be positive, got {dt_s}")

    ac_actual = min(max(ac_command_w, -available_discharge_power(params, state)),
                    available_charge_power(params, state))

    soc = state.soc
    hours = dt_s / 3600.0
    if ac_actual > 0:
        stored_wh = ac_actual * params.eta_acdc * hours
        room_wh = (params.soc_max - soc) * params.energy_capacity_wh
        if stored_wh > room_wh:
            stored_wh = room_wh
            ac_actual = stored_wh / (params.eta_acdc * hours)
        soc += stored_wh / params.energy_capacity_wh
    elif ac_actual < 0:
        drawn_wh = (-ac_actual / params.eta_acdc) * hours
        avail_wh = (soc - params.soc_min) * params.energy_capacity_wh
        if drawn_wh > avail_wh:
            drawn_wh = avail_wh
            ac_actual = -drawn_wh * params.eta_acdc / hours
        soc -= drawn_wh / params.energy_capacity_wh

    soc = min(max(soc, params.soc_min), params.soc_max)
    if ac_actual > 0:
        mode = BatteryMode.CHARGING
    elif ac_actual < 0:
        mode = BatteryMode.DISCHARGING
    else:
        mode = BatteryMode.IDLE
    return BatteryState(soc=soc, mode=mode), ac_actual
