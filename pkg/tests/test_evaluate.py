from __future__ import annotations

import math

import numpy as np
import pytest

from seasonal_cusum.detect import AGGREGATED_COUNTS, EVENT_TIMES, DetectorConfig
from seasonal_cusum.errors import ValidationError
from seasonal_cusum.evaluate import (
    detection_delay,
    exceedance_fraction,
    worst_case_delay,
)
from seasonal_cusum.simulate import ChangeSpec
from seasonal_cusum.timeline import SlotTimeline


def _cfg(rho, m, mode=EVENT_TIMES, reset=True):
    return DetectorConfig(rho=rho, threshold_m=m, direction="increase", mode=mode, reset_on_alarm=reset)


def test_exceedance_trivial_cases():
    assert exceedance_fraction(np.zeros(50), 1.0) == 0.0
    assert exceedance_fraction(np.full(50, 2.5), 2.5) == 1.0  # boundary counts
    assert exceedance_fraction([0.0, 3.0, 0.0, 3.0], 1.0) == 0.5
    with pytest.raises(ValidationError):
        exceedance_fraction([], 1.0)


def test_delay_decreases_with_change_size():
    tl = SlotTimeline.from_rates([5.0] * 40)
    theta = 10.0
    means = []
    for rho in (1.5, 3.0, 10.0):
        stats = detection_delay(tl, ChangeSpec(theta=theta, rho=rho), _cfg(rho, 8.0), replications=150, seed=31)
        assert stats.detect_probability > 0.9
        means.append(stats.mean_delay_events)
    assert means[0] > means[1] > means[2]
    assert means[2] < 15.0  # a huge change is caught within a few events


def test_delay_theta_beyond_horizon():
    tl = SlotTimeline.from_rates([5.0] * 10)
    stats = detection_delay(tl, ChangeSpec(theta=tl.total_time + 5.0, rho=2.0), _cfg(2.0, 5.0), replications=50, seed=1)
    assert stats.detect_probability == 0.0
    assert math.isnan(stats.mean_delay_events)


def test_delay_requires_finite_theta():
    tl = SlotTimeline.from_rates([5.0] * 10)
    with pytest.raises(ValidationError):
        detection_delay(tl, ChangeSpec(), _cfg(2.0, 5.0))


def test_delay_monotone_in_threshold_with_shared_seeds():
    tl = SlotTimeline.from_rates([5.0] * 40)
    change = ChangeSpec(theta=10.0, rho=3.0)
    low = detection_delay(tl, change, _cfg(3.0, 3.0), replications=120, seed=77)
    high = detection_delay(tl, change, _cfg(3.0, 9.0), replications=120, seed=77)
    assert low.detect_probability >= high.detect_probability
    assert low.mean_delay_events <= high.mean_delay_events + 1e-9


def test_delay_counts_standing_alarm_as_zero_without_reset():
    # Pre-change alarms leave the detector in alarm; the change is "caught"
    # with zero additional events.
    tl = SlotTimeline.from_rates([5.0] * 40)
    change = ChangeSpec(theta=150.0, rho=2.0)
    stats = detection_delay(tl, change, _cfg(2.0, 1.5, reset=False), replications=80, seed=5)
    assert stats.detect_probability > 0.9
    assert stats.mean_delay_events < 3.0


def test_delay_aggregated_mode():
    tl = SlotTimeline.from_rates([5.0] * 40)
    change = ChangeSpec(theta=10.0, rho=3.0)
    stats = detection_delay(tl, change, _cfg(3.0, 8.0, mode=AGGREGATED_COUNTS), replications=120, seed=9)
    assert stats.detect_probability > 0.9
    assert stats.mean_delay_events > 0.0


def test_worst_case_single_point_grid():
    tl = SlotTimeline.from_rates([5.0] * 40)
    report = worst_case_delay(tl, rho=2.0, theta_grid=[10.0], config=_cfg(2.0, 6.0), replications=100, seed=3)
    assert report.worst_case_delay_events == report.per_theta[0].mean_delay_events
    assert report.worst_case_max_delay_events == report.per_theta[0].max_delay_events
    assert 0.0 <= report.exceedance_fraction <= 1.0


def test_worst_case_homogeneous_rate_theta_invariant():
    tl = SlotTimeline.from_rates([5.0] * 60)
    report = worst_case_delay(
        tl, rho=2.0, theta_grid=[10.0, 30.0, 50.0], config=_cfg(2.0, 6.0), replications=200, seed=17
    )
    means = [d.mean_delay_events for d in report.per_theta]
    ses = [d.stderr for d in report.per_theta]
    spread = max(means) - min(means)
    assert spread < 6.0 * max(ses)  # no systematic theta effect at constant rate


def test_worst_case_empty_grid():
    tl = SlotTimeline.from_rates([5.0] * 10)
    with pytest.raises(ValidationError):
        worst_case_delay(tl, rho=2.0, theta_grid=[], config=_cfg(2.0, 6.0))


def test_report_serialization(tmp_path):
    from seasonal_cusum.evaluate import write_delay_report_json, write_delay_table_csv

    tl = SlotTimeline.from_rates([5.0] * 30)
    report = worst_case_delay(tl, rho=2.0, theta_grid=[5.0, 15.0], config=_cfg(2.0, 6.0), replications=60, seed=2)
    write_delay_report_json(report, tmp_path / "r.json")
    write_delay_table_csv(report, tmp_path / "r.csv")
    import json

    doc = json.loads((tmp_path / "r.json").read_text())
    assert len(doc["per_theta"]) == 2
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].startswith("theta,")
    assert len(lines) == 3
