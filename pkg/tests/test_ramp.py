"""Tests for ramp-rate math, the moving-average command and the
offline ramp analyses.  Reference values come from explicit brute-force
loops, kept deliberately separate from the vectorised implementations.
"""

from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvems.ramp import (RampConfig, count_violation_events, ma_command,
                        moving_average, ramp_histogram, ramp_rate, violates,
                        window_sweep)
from pvems.timeseries import PowerSeries

T0 = datetime(2018, 1, 1, tzinfo=timezone.utc)
CFG = RampConfig()


def brute_force_ma_command(window, p_now):
    """Plain-loop reference for the moving-average command."""
    total = 0.0
    for v in window:
        total += v
    return p_now - total / len(window)


def brute_force_sweep_count(values, step_s, n, cfg):
    """Plain-loop reference for one window of the sweep."""
    events = 0
    in_event = False
    prev_avg = None
    thresh = cfg.limit_pct_per_min / 100.0 * cfg.nameplate_w * step_s / 60.0
    for k in range(len(values)):
        if k >= n - 1:
            avg = sum(values[k - n + 1:k + 1]) / n
            if prev_avg is not None and abs(avg - prev_avg) >= thresh:
                if not in_event:
                    events += 1
                    in_event = True
            else:
                in_event = False
            prev_avg = avg
        else:
            in_event = False
    return events


class TestRampRate:
    def test_no_change_is_zero(self):
        assert ramp_rate(1_000.0, 1_000.0, CFG) == 0.0

    def test_ten_percent_per_minute(self):
        assert ramp_rate(4_044.0, 3_370.0, CFG, 1.0) == pytest.approx(10.0)

    def test_full_nameplate_drop(self):
        assert ramp_rate(0.0, 6_740.0, CFG, 1.0) == pytest.approx(-100.0)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            ramp_rate(1.0, 2.0, CFG, 0.0)

    @given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
    @settings(max_examples=100, deadline=None)
    def test_antisymmetric(self, a, b):
        assert ramp_rate(a, b, CFG) == pytest.approx(-ramp_rate(b, a, CFG))

    def test_scales_inversely_with_nameplate(self):
        small = RampConfig(nameplate_w=3_370.0)
        assert ramp_rate(100.0, 0.0, small) == pytest.approx(
            2 * ramp_rate(100.0, 0.0, CFG))


class TestViolates:
    def test_at_limit_violates(self):
        assert violates(10.0, CFG)

    def test_just_below_does_not(self):
        assert not violates(9.99, CFG)

    def test_symmetric(self):
        assert violates(-12.0, CFG)


class TestMaCommand:
    def test_constant_window_commands_nothing(self):
        assert ma_command([1_000.0] * 10, 1_000.0, CFG) == 0.0

    def test_pv_above_average_charges(self):
        cmd = ma_command([1_000.0] * 9 + [2_000.0], 2_000.0, CFG)
        assert cmd == pytest.approx(900.0)

    def test_pv_below_average_discharges(self):
        cmd = ma_command([2_000.0] * 9 + [1_000.0], 1_000.0, CFG)
        assert cmd == pytest.approx(-900.0)

    def test_underfilled_window_commands_nothing(self):
        assert ma_command([500.0] * 3, 500.0, CFG) == 0.0

    def test_overfilled_window_rejected(self):
        with pytest.raises(ValueError, match="window"):
            ma_command([1.0] * 11, 1.0, CFG)

    @given(st.lists(st.floats(0, 10_000), min_size=10, max_size=10),
           st.floats(0, 10_000))
    @settings(max_examples=300, deadline=None)
    def test_matches_brute_force(self, window, p_now):
        impl = ma_command(window, p_now, CFG)
        ref = brute_force_ma_command(window, p_now)
        scale = max(1.0, abs(p_now), max(abs(v) for v in window))
        assert abs(impl - ref) <= 1e-12 * scale


class TestRampHistogram:
    def test_constant_series_all_below_5(self):
        s = PowerSeries(T0, 2.0, np.full(3_000, 4_000.0))
        hist = ramp_histogram(s, CFG)
        assert hist.below_5 == hist.total_minutes
        assert hist.ge_5 == hist.ge_10 == hist.gt_10 == hist.ge_50 == 0
        assert hist.percentages()["<5"] == 100.0

    def test_square_wave_every_minute_is_full_ramp(self):
        # toggles 0 <-> nameplate each minute: every minute is +/-100 %/min
        minutes = 20
        values = np.repeat([0.0, 6_740.0] * (minutes // 2), 30)
        s = PowerSeries(T0, 2.0, values)
        hist = ramp_histogram(s, CFG)
        assert hist.ge_50 == hist.total_minutes
        assert hist.ge_5 == hist.ge_10 == hist.gt_10 == hist.total_minutes
        assert hist.below_5 == 0

    def test_too_short(self):
        s = PowerSeries(T0, 2.0, np.full(10, 1.0))
        with pytest.raises(ValueError, match="minute"):
            ramp_histogram(s, CFG)

    def test_step_must_divide_minute(self):
        s = PowerSeries(T0, 7.0, np.zeros(100))
        with pytest.raises(ValueError, match="divide"):
            ramp_histogram(s, CFG)

    def test_buckets_overlap_consistently(self):
        rng = np.random.default_rng(11)
        s = PowerSeries(T0, 2.0, rng.uniform(0, 6_740, 9_000))
        hist = ramp_histogram(s, CFG)
        assert hist.ge_50 <= hist.gt_10 <= hist.ge_10 <= hist.ge_5
        assert hist.below_5 + hist.ge_5 == hist.total_minutes


class TestWindowSweep:
    def test_constant_series_controls_nothing(self):
        s = PowerSeries(T0, 2.0, np.full(2_000, 3_000.0))
        assert window_sweep(s, CFG, [2.0, 20.0, 60.0]) == [(2.0, 0), (20.0, 0), (60.0, 0)]

    def test_identical_windows_identical_counts(self):
        rng = np.random.default_rng(5)
        s = PowerSeries(T0, 2.0, rng.uniform(0, 6_740, 3_000))
        out = window_sweep(s, CFG, [20.0, 20.0])
        assert out[0][1] == out[1][1]

    def test_matches_brute_force_on_step_fixture(self):
        values = np.full(1_200, 1_000.0)
        values[300:600] = 5_000.0   # step up then back down
        values[900:] = 2_500.0
        s = PowerSeries(T0, 2.0, values)
        for w in (2.0, 20.0, 60.0, 120.0):
            (_, impl), = window_sweep(s, CFG, [w])
            ref = brute_force_sweep_count(list(values), 2.0, int(w / 2), CFG)
            assert impl == ref, f"window {w}"

    def test_rejects_non_multiple_window(self):
        s = PowerSeries(T0, 2.0, np.zeros(100))
        with pytest.raises(ValueError, match="multiple"):
            window_sweep(s, CFG, [3.0])


class TestSmoothingProperty:
    def test_full_execution_pins_output_to_moving_average(self):
        # executing the command every tick makes the net PV output the
        # running average, whose worst 1-minute ramp never exceeds the
        # raw signal's
        rng = np.random.default_rng(17)
        values = np.repeat(rng.uniform(0, 6_740, 300), 15)  # blocky PV
        n = CFG.window_samples

        output = []
        for k in range(n - 1, len(values)):
            window = values[k - n + 1:k + 1]
            cmd = ma_command(window, float(values[k]), CFG)
            output.append(values[k] - cmd)
        output = np.array(output)

        expected = moving_average(values, n)[n - 1:]
        assert np.allclose(output, expected, atol=1e-9)

        per_min = 30  # 2 s ticks
        raw_worst = np.max(np.abs(values[per_min:] - values[:-per_min]))
        out_worst = np.max(np.abs(output[per_min:] - output[:-per_min]))
        assert out_worst <= raw_worst + 1e-9


class TestHelpers:
    def test_moving_average_warmup_is_nan(self):
        out = moving_average(np.array([1.0, 2.0, 3.0, 4.0]), 2)
        assert np.isnan(out[0])
        assert list(out[1:]) == [1.5, 2.5, 3.5]

    def test_count_events(self):
        flags = np.array([0, 1, 1, 0, 1, 0, 0, 1, 1, 1], dtype=bool)
        assert count_violation_events(flags) == 3
        assert count_violation_events(np.array([], dtype=bool)) == 0
        assert count_violation_events(np.array([True])) == 1
