"""Command-line front end: run simulations, ramp analyses and strategy
comparisons from a JSON config file, and emit traces, histograms and
KPI reports.

Subcommands: ``simulate``, ``ramp-analyze``, ``compare``,
``forecast-check``.  ``--seed-fixtures DIR`` writes the bundled
synthetic corpus (profiles, forecasts and a ready-to-run config).
All outputs are deterministic: identical config and fixtures produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import date as Date
from datetime import datetime, time, timedelta
from pathlib import Path
from typing import Optional, Sequence

from . import fixtures
from .battery import BatteryParams
from .ems import DispatchRecord, EmsConfig, StrategyKind, simulate
from .forecast import (ChargeDecisionPolicy, FixtureForecastSource,
                       ForecastError, LiveForecastSource, should_night_charge)
from .kpi import KPI_NAMES, KpiReport, accumulate, compute_kpis
from .ramp import RampConfig, ramp_histogram, window_sweep
from .timeseries import (PowerSeries, ProfileError, ResampleMethod,
                         ResamplePolicy, align, format_utc, load_power_csv,
                         resample)

log = logging.getLogger(__name__)

ENDPOINT_ENV_VAR = "PVEMS_FORECAST_ENDPOINT"

TRACE_COLUMNS = ["timestamp", "p_pv", "p_load", "p_batt_cmd", "p_batt_actual",
                 "p_grid", "soc", "mode", "rr", "rr_violated"]


class CliError(RuntimeError):
    pass


@dataclass
class ForecastConfig:
    mode: str = "fixture"                 # "fixture" | "live"
    fixture_path: Optional[Path] = None
    endpoint_base: Optional[str] = None
    region_id: int = 0
    charge_ids: frozenset[int] = field(default_factory=lambda: ChargeDecisionPolicy().charge_ids)
    unknown_behavior: str = "no_charge"
    retries: int = 2
    timeout_s: float = 10.0

    def policy(self) -> ChargeDecisionPolicy:
        return ChargeDecisionPolicy(charge_ids=self.charge_ids,
                                    unknown_behavior=self.unknown_behavior)

    def source(self):
        if self.mode == "fixture":
            if self.fixture_path is None:
                raise CliError("forecast.mode is 'fixture' but no fixture_path given")
            return FixtureForecastSource(self.fixture_path, self.region_id)
        if self.mode == "live":
            endpoint = os.environ.get(ENDPOINT_ENV_VAR) or self.endpoint_base
            if not endpoint:
                raise CliError("forecast.mode is 'live' but no endpoint_base "
                               f"given (or {ENDPOINT_ENV_VAR} set)")
            return LiveForecastSource(endpoint, self.region_id,
                                      retries=self.retries,
                                      timeout_s=self.timeout_s)
        raise CliError(f"unknown forecast mode {self.mode!r}")


@dataclass
class RunConfig:
    pv_path: Path
    load_path: Path
    pv_unit: str = "W"
    load_unit: str = "W"
    load_scale_w: float = 1.0
    load_resample: str = "hold"
    strategy: StrategyKind = StrategyKind.SCM_RR_WF
    initial_soc: float = 0.35
    battery: BatteryParams = field(default_factory=BatteryParams)
    ramp: RampConfig = field(default_factory=RampConfig)
    ems: EmsConfig = field(default_factory=EmsConfig)
    forecast: Optional[ForecastConfig] = None
    outputs: dict[str, Path] = field(default_factory=dict)


def _parse_clock(text: str) -> time:
    try:
        hh, mm = text.split(":")
        return time(int(hh), int(mm))
    except ValueError:
        raise CliError(f"bad clock time {text!r}, expected HH:MM") from None


def load_config(path: Path, strategy_override: Optional[str] = None,
                out_dir: Optional[Path] = None) -> RunConfig:
    """Read a JSON run config; relative paths resolve against the file."""
    path = Path(path)
    if not path.exists():
        raise CliError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}") from None
    base = path.parent

    def respath(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    try:
        battery = BatteryParams(**doc.get("battery", {}))
        ramp = RampConfig(**doc.get("ramp", {}))
        strategy = StrategyKind(strategy_override or doc.get("strategy", "SCM_RR_WF"))
        ems_doc = dict(doc.get("ems", {}))
        if "charge_start_time" in ems_doc:
            ems_doc["charge_start_time"] = _parse_clock(ems_doc["charge_start_time"])
        ems = EmsConfig(strategy=strategy, ramp=ramp, **ems_doc)
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from None

    forecast = None
    if "forecast" in doc and doc["forecast"]:
        f = doc["forecast"]
        try:
            forecast = ForecastConfig(
                mode=f.get("mode", "fixture"),
                fixture_path=respath(f["fixture_path"]) if f.get("fixture_path") else None,
                endpoint_base=f.get("endpoint_base"),
                region_id=int(f.get("region_id", 0)),
                charge_ids=frozenset(f.get("charge_ids",
                                           sorted(ChargeDecisionPolicy().charge_ids))),
                unknown_behavior=f.get("unknown_behavior", "no_charge"),
                retries=int(f.get("retries", 2)),
                timeout_s=float(f.get("timeout_s", 10.0)),
            )
            forecast.policy()  # validate ids now
        except (KeyError, ValueError) as exc:
            raise CliError(f"{path}: forecast section: {exc}") from None

    outputs_doc = doc.get("outputs", {})
    outputs = {name: respath(p) for name, p in outputs_doc.items()}
    if out_dir is not None:
        outputs = {name: Path(out_dir) / Path(p).name for name, p in outputs.items()}
    default_dir = Path(out_dir) if out_dir else base / "out"
    for name, filename in (("trace_csv", "trace.csv"), ("kpi_json", "kpi.json"),
                           ("histogram_csv", "histogram.csv")):
        outputs.setdefault(name, default_dir / filename)

    if "pv_path" not in doc or "load_path" not in doc:
        raise CliError(f"{path}: pv_path and load_path are required")

    return RunConfig(
        pv_path=respath(doc["pv_path"]),
        load_path=respath(doc["load_path"]),
        pv_unit=doc.get("pv_unit", "W"),
        load_unit=doc.get("load_unit", "W"),
        load_scale_w=float(doc.get("load_scale_w", 1.0)),
        load_resample=doc.get("load_resample", "hold"),
        strategy=strategy,
        initial_soc=float(doc.get("initial_soc", 0.35)),
        battery=battery,
        ramp=ramp,
        ems=ems,
        forecast=forecast,
        outputs=outputs,
    )


def load_profiles(config: RunConfig) -> tuple[PowerSeries, PowerSeries]:
    """Ingest, scale and align the PV and load profiles onto the tick grid."""
    pv = load_power_csv(config.pv_path, expected_unit=config.pv_unit)
    load = load_power_csv(config.load_path, expected_unit=config.load_unit)
    if config.load_scale_w != 1.0:
        load = load.scaled(config.load_scale_w)

    tick = config.ramp.tick_s
    method = ResampleMethod(config.load_resample)
    gap = max(3600.0, pv.step_s, load.step_s)
    if pv.step_s != tick:
        pv = resample(pv, tick, ResamplePolicy(ResampleMethod.HOLD, gap))
    pv_a, load_a = align(pv, load, ResamplePolicy(method, gap))
    return pv_a, load_a


def _resolve_forecast(config: RunConfig):
    """Source + policy for the run; warns when the section is unused."""
    if not config.strategy.has_forecast_charging:
        if config.forecast is not None:
            log.warning("strategy %s does not use forecasts; forecast "
                        "section ignored", config.strategy.value)
        return None, None
    if config.forecast is None:
        log.warning("strategy %s without a forecast section: nights default "
                    "to no charge", config.strategy.value)
        return None, None
    return config.forecast.source(), config.forecast.policy()


def write_trace_csv(trace: Sequence[DispatchRecord], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in trace:
            writer.writerow([
                format_utc(r.timestamp),
                repr(r.p_pv), repr(r.p_load),
                repr(r.p_batt_cmd), repr(r.p_batt_actual), repr(r.p_grid),
                repr(r.soc), r.mode.value, repr(r.rr_pct_per_min),
                "true" if r.rr_violated else "false",
            ])


def write_histogram_csv(series: PowerSeries, cfg: RampConfig, path: Path) -> None:
    hist = ramp_histogram(series, cfg)
    pct = hist.percentages()
    counts = {"<5": hist.below_5, ">=5": hist.ge_5, ">=10": hist.ge_10,
              ">10": hist.gt_10, ">=50": hist.ge_50}
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bucket_pct_per_min", "minutes", "percent_of_total"])
        for bucket in ("<5", ">=5", ">=10", ">10", ">=50"):
            writer.writerow([bucket, counts[bucket], repr(pct[bucket])])
        writer.writerow(["total", hist.total_minutes, repr(100.0)])


def write_kpi_json(report: KpiReport, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json() + "\n", encoding="utf-8")


def print_kpi_summary(report: KpiReport, strategy: str) -> None:
    print(f"strategy: {strategy}")
    t = report.totals
    print(f"  energy (kWh): pv {t.e_pv_generated / 1e3:.2f}  load {t.e_load / 1e3:.2f}  "
          f"grid in {t.e_from_grid / 1e3:.2f} / out {t.e_to_grid / 1e3:.2f}  "
          f"batt in {t.e_to_battery / 1e3:.2f} / out {t.e_from_battery / 1e3:.2f}")
    print(f"  ramps: {t.n_ramps_controlled} controlled of {t.n_ramps_original} violating"
          + ("  (no violations occurred)" if report.crr_no_violations else ""))
    cells = []
    for name, value in report.values_pct().items():
        cells.append(f"{name.upper()} {'--' if value is None else f'{value:.1f}%'}")
    print("  " + "  ".join(cells))


def run_simulation(config: RunConfig) -> KpiReport:
    """Ingest, simulate, and write trace CSV, KPI JSON and ramp histogram."""
    pv, load = load_profiles(config)
    source, policy = _resolve_forecast(config)
    trace = simulate(pv, load, config.ems, config.battery,
                     forecast_source=source, policy=policy,
                     initial_soc=config.initial_soc)
    totals = accumulate(trace, config.ramp.tick_s, config.ramp)
    report = compute_kpis(totals)

    write_trace_csv(trace, config.outputs["trace_csv"])
    write_kpi_json(report, config.outputs["kpi_json"])
    write_histogram_csv(pv, config.ramp, config.outputs["histogram_csv"])
    print_kpi_summary(report, config.strategy.value)
    for name in ("trace_csv", "kpi_json", "histogram_csv"):
        print(f"  wrote {config.outputs[name]}")
    return report


def run_ramp_analysis(pv_path: Path, cfg: RampConfig, windows_s: list[float],
                      out_dir: Path, pv_unit: str = "W") -> None:
    """Write the ramp-bucket histogram and the window-sweep table."""
    if not windows_s:
        print(f"no windows given; defaulting to {{{cfg.window_s:g} s}}")
        windows_s = [cfg.window_s]
    pv = load_power_csv(pv_path, expected_unit=pv_unit)
    out_dir.mkdir(parents=True, exist_ok=True)

    hist_path = out_dir / "histogram.csv"
    write_histogram_csv(pv, cfg, hist_path)

    sweep = window_sweep(pv, cfg, windows_s)
    sweep_path = out_dir / "window_sweep.csv"
    with sweep_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_s", "controlled_ramps"])
        for w, count in sweep:
            writer.writerow([repr(float(w)), count])

    for w, count in sweep:
        print(f"window {w:g} s: {count} controlled ramps")
    print(f"  wrote {hist_path}")
    print(f"  wrote {sweep_path}")


def compare_strategies(config: RunConfig, strategies: list[StrategyKind],
                       out_dir: Path) -> None:
    """Run each strategy on identical inputs; emit a side-by-side table."""
    pv, load = load_profiles(config)
    reports: dict[str, KpiReport] = {}
    for strat in strategies:
        run_cfg = EmsConfig(strategy=strat, ramp=config.ems.ramp,
                            night_charge_power_w=config.ems.night_charge_power_w,
                            soc_target=config.ems.soc_target,
                            charge_start_time=config.ems.charge_start_time,
                            utc_offset_h=config.ems.utc_offset_h,
                            pv_day_threshold=config.ems.pv_day_threshold)
        source, policy = (None, None)
        if strat.has_forecast_charging and config.forecast is not None:
            source, policy = config.forecast.source(), config.forecast.policy()
        trace = simulate(pv, load, run_cfg, config.battery,
                         forecast_source=source, policy=policy,
                         initial_soc=config.initial_soc)
        totals = accumulate(trace, config.ramp.tick_s, config.ramp)
        reports[strat.value] = compute_kpis(totals)

    out_dir.mkdir(parents=True, exist_ok=True)
    table_path = out_dir / "compare.csv"
    names = [s.value for s in strategies]
    with table_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kpi"] + names)
        for kpi in KPI_NAMES:
            row = [kpi.upper()]
            for name in names:
                value = reports[name].values_pct()[kpi]
                row.append("" if value is None else f"{value:.4f}")
            writer.writerow(row)
        writer.writerow(["ramps_original"] + [reports[n].totals.n_ramps_original for n in names])
        writer.writerow(["ramps_controlled"] + [reports[n].totals.n_ramps_controlled for n in names])

    header = "KPI (%)".ljust(18) + "".join(name.rjust(12) for name in names)
    print(header)
    for kpi in KPI_NAMES:
        row = kpi.upper().ljust(18)
        for name in names:
            value = reports[name].values_pct()[kpi]
            row += ("--" if value is None else f"{value:.2f}").rjust(12)
        print(row)
    print(f"  wrote {table_path}")


def forecast_check(config: RunConfig, for_date: Optional[Date]) -> None:
    """Print the night-charge decision for the given (default: next) day."""
    if config.forecast is None:
        raise CliError("config has no forecast section")
    source = config.forecast.source()
    policy = config.forecast.policy()
    target = for_date or (datetime.now().date() + timedelta(days=1))
    day = source.forecast_for(target)
    decision = should_night_charge(day, policy)
    print(f"{target}: weather type {day.weather_type_id} ({day.description}) "
          f"-> {'NIGHT CHARGE' if decision else 'no night charge'}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pvems",
        description="PV + battery dispatch simulator: self-consumption, "
                    "ramp smoothing and forecast-driven night charging.")
    parser.add_argument("--seed-fixtures", metavar="DIR",
                        help="write the bundled synthetic fixture corpus and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p_sim = sub.add_parser("simulate", help="run one strategy, write trace/KPI/histogram")
    p_sim.add_argument("--config", required=True, type=Path)
    p_sim.add_argument("--strategy", choices=[s.value for s in StrategyKind])
    p_sim.add_argument("--out-dir", type=Path)

    p_ramp = sub.add_parser("ramp-analyze", help="ramp histogram and window sweep of a PV profile")
    p_ramp.add_argument("--pv", required=True, type=Path)
    p_ramp.add_argument("--unit", choices=["W", "kW"], default="W")
    p_ramp.add_argument("--config", type=Path, help="optional config supplying the ramp section")
    p_ramp.add_argument("--windows", default="",
                        help="comma-separated window lengths in seconds")
    p_ramp.add_argument("--out-dir", type=Path, default=Path("out"))

    p_cmp = sub.add_parser("compare", help="run several strategies on identical inputs")
    p_cmp.add_argument("--config", required=True, type=Path)
    p_cmp.add_argument("--strategies", default="SCM,SCM_RR,SCM_RR_WF")
    p_cmp.add_argument("--out-dir", type=Path)

    p_fc = sub.add_parser("forecast-check", help="print the night-charge decision for a day")
    p_fc.add_argument("--config", required=True, type=Path)
    p_fc.add_argument("--date", help="YYYY-MM-DD (default: tomorrow)")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.seed_fixtures:
            paths = fixtures.write_fixture_corpus(args.seed_fixtures)
            for name in sorted(paths):
                print(f"wrote {paths[name]}")
            return 0
        if args.command is None:
            parser.print_help()
            return 2
        if args.command == "simulate":
            config = load_config(args.config, strategy_override=args.strategy,
                                 out_dir=args.out_dir)
            run_simulation(config)
        elif args.command == "ramp-analyze":
            if args.config:
                cfg = RampConfig(**json.loads(args.config.read_text()).get("ramp", {}))
            else:
                cfg = RampConfig()
            windows = [float(w) for w in args.windows.split(",") if w.strip()]
            run_ramp_analysis(args.pv, cfg, windows, args.out_dir, pv_unit=args.unit)
        elif args.command == "compare":
            config = load_config(args.config, out_dir=args.out_dir)
            strategies = [StrategyKind(s.strip())
                          for s in args.strategies.split(",") if s.strip()]
            if not strategies:
                raise CliError("no strategies requested")
            out_dir = args.out_dir or config.outputs["trace_csv"].parent
            compare_strategies(config, strategies, out_dir)
        elif args.command == "forecast-check":
            config = load_config(args.config)
            for_date = Date.fromisoformat(args.date) if args.date else None
            forecast_check(config, for_date)
    except (CliError, ProfileError, ForecastError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
