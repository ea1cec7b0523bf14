"""Follow one simulated night of forecast-driven battery charging.

At 01:30 local the dispatcher looks up the day's weather-type forecast.
An overcast code starts a constant 2700 W grid-sourced charge that runs
until the battery reaches the 50 % SOC target (or daylight arrives); a
clear-sky code leaves the night untouched.  The printout shows the SOC
trajectory around the charge window for both forecasts.
"""

import json
import tempfile
from datetime import timedelta
from pathlib import Path

from pvems.battery import BatteryParams
from pvems.ems import DispatchMode, EmsConfig, StrategyKind, simulate
from pvems.fixtures import (DEFAULT_REGION_ID, WEEK_START, constant_load,
                            forecast_payload, smooth_day_pv)
from pvems.forecast import FixtureForecastSource
from pvems.ramp import RampConfig
from pvems.timeseries import align

params = BatteryParams()
cfg = EmsConfig(strategy=StrategyKind.SCM_RR_WF, ramp=RampConfig())
pv, load = align(smooth_day_pv(), constant_load())


def run_night(weather_id, label):
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "forecast.json"
        path.write_text(json.dumps(
            forecast_payload(DEFAULT_REGION_ID, WEEK_START.date(),
                             [weather_id] * 3)))
        source = FixtureForecastSource(path, DEFAULT_REGION_ID)
        trace = simulate(pv, load, cfg, params, forecast_source=source,
                         initial_soc=0.45)

    night = [r for r in trace if r.mode is DispatchMode.NIGHT_CHARGE]
    print(f"\n--- forecast: {label} ---")
    if not night:
        print("no night charging")
    else:
        first, last = night[0], night[-1]
        energy_wh = sum(r.p_batt_actual for r in night) * cfg.ramp.tick_s / 3600
        print(f"charging {first.timestamp.time()} -> {last.timestamp.time()} "
              f"at {first.p_batt_actual:.0f} W ({energy_wh:.0f} Wh from grid)")

    # SOC every 30 minutes through the night
    t0 = trace[0].timestamp
    print("time   soc     mode")
    for r in trace:
        minutes = (r.timestamp - t0) // timedelta(minutes=1)
        if minutes % 30 == 0 and minutes <= 6 * 60 and r.timestamp.second == 0:
            print(f"{r.timestamp.strftime('%H:%M')}  {r.soc:.4f}  {r.mode.value}")


run_night(4, "cloudy: charge expected")
run_night(1, "clear sky: no action expected")
