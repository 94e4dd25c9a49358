"""Stress formula points, edge-triggered alerts, jerk, heading, staleness."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from firewatch.vitals import (
    AlertKind,
    Liveness,
    Readings,
    Thresholds,
    compute_stress,
    detect_jerk,
    evaluate,
    heading_from_yaw,
    staleness,
)

TH = Thresholds()


class TestComputeStress:
    # (hr, spo2, body) -> (hr_comp, spo2_comp, temp_comp); totals are the sums.
    POINTS = [
        ((100, 95.0, 38.0), (0.0, 0.0, 0.0)),     # every ramp start
        ((80, 99.0, 36.5), (0.0, 0.0, 0.0)),      # everything below the ramps
        ((150, 85.0, 40.0), (40.0, 30.0, 30.0)),  # every ramp end
        ((200, 80.0, 41.0), (40.0, 30.0, 30.0)),  # clamped past the ends
        ((125, 95.0, 38.0), (20.0, 0.0, 0.0)),    # HR midpoint
        ((100, 90.0, 38.0), (0.0, 15.0, 0.0)),    # SpO2 midpoint
        ((100, 95.0, 39.0), (0.0, 0.0, 15.0)),    # body midpoint
        ((112.5, 95.0, 38.0), (10.0, 0.0, 0.0)),  # HR quarter point
        ((100, 92.5, 38.0), (0.0, 7.5, 0.0)),     # SpO2 quarter point
        ((100, 95.0, 38.5), (0.0, 0.0, 7.5)),     # body quarter point
        ((150, 96.0, 37.0), (40.0, 0.0, 0.0)),    # high HR alone
        ((125, 90.0, 39.0), (20.0, 15.0, 15.0)),  # all midpoints together
    ]

    @pytest.mark.parametrize("inputs,expected", POINTS)
    def test_hand_computed_points(self, inputs, expected):
        got = compute_stress(*inputs, TH)
        assert got.hr_component == pytest.approx(expected[0], abs=1e-12)
        assert got.spo2_component == pytest.approx(expected[1], abs=1e-12)
        assert got.temp_component == pytest.approx(expected[2], abs=1e-12)
        assert got.total == pytest.approx(sum(expected), abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 300), st.floats(0, 100), st.floats(20, 45))
    def test_total_bounded(self, hr, spo2, body):
        got = compute_stress(hr, spo2, body, TH)
        assert 0.0 <= got.total <= 100.0
        assert got.total == pytest.approx(
            got.hr_component + got.spo2_component + got.temp_component, abs=1e-9
        )

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 299), st.floats(0, 100), st.floats(20, 45), st.floats(0.01, 10))
    def test_monotone_in_hr_and_body(self, hr, spo2, body, delta):
        lo = compute_stress(hr, spo2, body, TH)
        assert compute_stress(hr + delta, spo2, body, TH).total >= lo.total
        assert compute_stress(hr, spo2, body + delta, TH).total >= lo.total
        if spo2 - delta >= 0:
            assert compute_stress(hr, spo2 - delta, body, TH).total >= lo.total


def scan_events(values, kind, *, reading_key):
    """Brute-force edge-trigger oracle: replay the sample stream one by one."""
    active = frozenset()
    out = []
    for i, value in enumerate(values):
        events, active = evaluate(active, Readings(**{reading_key: value}), TH, unit=1, at=float(i))
        out.extend((e.kind, e.at, e.value) for e in events if e.kind is kind)
    return out


class TestEvaluate:
    def run_sequence(self, key, values):
        active = frozenset()
        events = []
        for i, value in enumerate(values):
            got, active = evaluate(active, Readings(**{key: value}), TH, unit=7, at=float(i))
            events.extend(got)
        return events, active

    def test_high_hr_fires_once_on_crossing(self):
        events, _ = self.run_sequence("hr_bpm", [148, 150, 151])
        assert [(e.kind, e.at) for e in events] == [(AlertKind.HIGH_HR, 1.0)]

    def test_high_hr_not_at_149(self):
        events, _ = self.run_sequence("hr_bpm", [149])
        assert events == []

    def test_constant_violation_fires_once(self):
        events, _ = self.run_sequence("hr_bpm", [160] * 100)
        assert len(events) == 1

    def test_hysteresis_clears_below_149(self):
        # 150 fires; 149.5 sits inside the hysteresis band (still active);
        # 148 clears; 151 re-fires.
        events, _ = self.run_sequence("hr_bpm", [150, 149.5, 151, 148, 151])
        assert [e.at for e in events] == [0.0, 4.0]

    def test_low_spo2_fires_below_95(self):
        events, _ = self.run_sequence("spo2_pct", [95.0, 94.0])
        assert [(e.kind, e.at) for e in events] == [(AlertKind.LOW_SPO2, 1.0)]

    def test_body_warn_and_crit_are_independent(self):
        events, active = self.run_sequence("body_c", [39.5])
        assert [e.kind for e in events] == [AlertKind.BODY_TEMP_WARN]
        events, active2 = self.run_sequence("body_c", [39.5, 40.1])
        assert [e.kind for e in events] == [AlertKind.BODY_TEMP_WARN, AlertKind.BODY_TEMP_CRIT]
        assert AlertKind.BODY_TEMP_WARN in active2 and AlertKind.BODY_TEMP_CRIT in active2

    def test_warn_fires_exactly_at_threshold(self):
        events, _ = self.run_sequence("body_c", [38.0])
        assert [e.kind for e in events] == [AlertKind.BODY_TEMP_WARN]
        events, _ = self.run_sequence("body_c", [40.0])
        assert {e.kind for e in events} == {AlertKind.BODY_TEMP_WARN, AlertKind.BODY_TEMP_CRIT}

    def test_ambient_thresholds(self):
        events, _ = self.run_sequence("ambient_c", [59.0, 60.0, 119.5, 120.0])
        assert [e.kind for e in events] == [AlertKind.AMBIENT_WARN, AlertKind.AMBIENT_CRIT]

    def test_absent_reading_keeps_state(self):
        active = frozenset({AlertKind.HIGH_HR})
        events, new_active = evaluate(active, Readings(body_c=36.5), TH, unit=1, at=0.0)
        assert AlertKind.HIGH_HR in new_active
        assert events == []

    def test_alternation_against_oracle(self):
        rng = random.Random(31)
        for _ in range(50):
            values = [rng.uniform(120, 180) for _ in range(60)]
            events = scan_events(values, AlertKind.HIGH_HR, reading_key="hr_bpm")
            # oracle: explicit state walk with the documented rule
            expected = []
            on = False
            for i, v in enumerate(values):
                if not on and v >= 150:
                    on = True
                    expected.append((AlertKind.HIGH_HR, float(i), v))
                elif on and v < 149:
                    on = False
            assert events == expected


class TestJerk:
    def test_rest_is_quiet(self):
        assert not detect_jerk((0.0, 0.0, 0.0), TH)

    def test_single_axis_spike(self):
        assert detect_jerk((35.0, 0.0, 0.0), TH)

    def test_diagonal_spike_just_over(self):
        # |(17,17,17)| = sqrt(3 * 17^2) = 29.44... >= 29.4
        assert math.sqrt(3 * 17.0**2) == pytest.approx(29.44, abs=0.01)
        assert detect_jerk((17.0, 17.0, 17.0), TH)

    def test_rotation_invariance(self):
        rng = random.Random(5)
        for _ in range(100):
            v = [rng.uniform(-40, 40) for _ in range(3)]
            a, b = rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)
            # rotate around z then x; magnitude is preserved
            x1 = v[0] * math.cos(a) - v[1] * math.sin(a)
            y1 = v[0] * math.sin(a) + v[1] * math.cos(a)
            z1 = v[2]
            rotated = (x1, y1 * math.cos(b) - z1 * math.sin(b), y1 * math.sin(b) + z1 * math.cos(b))
            assert detect_jerk(v, TH) == detect_jerk(rotated, TH)


class TestHeading:
    @pytest.mark.parametrize("yaw,expected", [(0.0, 0.0), (450.0, 90.0), (-90.0, 270.0), (359.9, 359.9)])
    def test_examples(self, yaw, expected):
        assert heading_from_yaw(yaw) == pytest.approx(expected)

    def test_periodic(self):
        rng = random.Random(8)
        for _ in range(100):
            yaw = rng.uniform(-1000, 1000)
            k = rng.randint(-3, 3)
            assert heading_from_yaw(yaw) == pytest.approx(heading_from_yaw(yaw + 360 * k), abs=1e-6)

    def test_always_in_range(self):
        rng = random.Random(9)
        for _ in range(200):
            h = heading_from_yaw(rng.uniform(-1e6, 1e6))
            assert 0.0 <= h < 360.0


class TestStaleness:
    def test_exactly_at_timeout_is_live(self):
        assert staleness(0.0, 10.0, TH) is Liveness.LIVE

    def test_past_timeout_is_offline(self):
        assert staleness(0.0, 10.001, TH) is Liveness.OFFLINE

    def test_rejects_time_reversal(self):
        with pytest.raises(ValueError):
            staleness(5.0, 4.0, TH)


class TestThresholds:
    def test_defaults(self):
        assert TH.hr_high_bpm == 150.0
        assert TH.spo2_low_pct == 95.0
        assert TH.body_warn_c == 38.0
        assert TH.body_crit_c == 40.0
        assert TH.jerk_accel_ms2 == 29.4
        assert TH.stale_after_s == 10.0

    def test_validation(self):
        with pytest.raises(ValueError):
            Thresholds(hr_ramp_start_bpm=150.0)
        with pytest.raises(ValueError):
            Thresholds(body_warn_c=41.0)

    def test_round_trips_through_dict(self):
        custom = Thresholds(hr_high_bpm=140.0)
        assert Thresholds.from_dict(custom.to_dict()) == custom
        with pytest.raises(ValueError):
            Thresholds.from_dict({"bogus": 1})
