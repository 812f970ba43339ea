from __future__ import annotations

import math
import random

import numpy as np
import pytest

from seasonal_cusum.calibrate import (
    CalibrationTarget,
    calibrate_threshold,
    estimate_arl,
    worker_count,
)
from seasonal_cusum.detect import AGGREGATED_COUNTS, EVENT_TIMES, DetectorConfig
from seasonal_cusum.errors import HorizonTooShortError, ValidationError
from seasonal_cusum.timeline import SlotTimeline


def _event_cfg(rho=1.5, m=1.0):
    return DetectorConfig(rho=rho, threshold_m=m, direction="increase", mode=EVENT_TIMES)


def _agg_cfg(rho=1.5, m=1.0):
    return DetectorConfig(rho=rho, threshold_m=m, direction="increase", mode=AGGREGATED_COUNTS)


def test_arl_at_vanishing_threshold_is_exactly_one():
    tl = SlotTimeline.from_rates([4.0] * 10)
    target = CalibrationTarget(pi=5.0, replications=300)
    arl, stderr, censored = estimate_arl(1e-9, tl, _event_cfg(), target, seed=3)
    assert arl == 1.0
    assert stderr == 0.0
    assert censored == 0.0


def _brute_force_arl(lam: float, rho: float, m: float, n_paths: int, max_events: int, seed: int):
    """Independent oracle: sequential event stepping with the stdlib RNG."""
    rnd = random.Random(seed)
    b = (rho - 1.0) / math.log(rho)
    lengths = []
    for _ in range(n_paths):
        v = 0.0
        n = 0
        while n < max_events:
            gap = rnd.expovariate(lam)
            v = max(0.0, v - b * lam * gap)
            v += 1.0
            n += 1
            if v >= m:
                break
        lengths.append(n)
    arr = np.array(lengths, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(n_paths))


def test_arl_matches_independent_oracle():
    lam, rho, m = 3.0, 1.5, 5.0
    tl = SlotTimeline.from_rates([lam] * 40)
    target = CalibrationTarget(pi=50.0, replications=4000)
    arl, stderr, _ = estimate_arl(m, tl, _event_cfg(rho=rho), target, seed=12)
    oracle_arl, oracle_se = _brute_force_arl(lam, rho, m, n_paths=4000, max_events=5000, seed=99)
    combined = math.hypot(stderr, oracle_se)
    assert abs(arl - oracle_arl) < 3.0 * combined


def test_arl_monotone_in_threshold_event_mode():
    tl = SlotTimeline.from_rates([5.0] * 20)
    target = CalibrationTarget(pi=20.0, replications=500)
    values = [estimate_arl(m, tl, _event_cfg(), target, seed=7)[0] for m in (0.5, 1.5, 3.0, 5.0)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_arl_monotone_in_threshold_aggregated_mode():
    tl = SlotTimeline.from_rates([5.0] * 20)
    target = CalibrationTarget(pi=30.0, replications=500)
    values = [estimate_arl(m, tl, _agg_cfg(), target, seed=7)[0] for m in (1.0, 3.0, 6.0)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_aggregated_arl_not_below_event_arl():
    # Coarser observation can only delay the alarm on the same budget.
    tl = SlotTimeline.from_rates([5.0] * 20)
    target = CalibrationTarget(pi=30.0, replications=800)
    m = 3.0
    arl_event, _, _ = estimate_arl(m, tl, _event_cfg(), target, seed=5)
    arl_agg, _, _ = estimate_arl(m, tl, _agg_cfg(), target, seed=5)
    assert arl_agg >= arl_event - 1e-9


def test_estimate_arl_rejects_nonpositive_threshold():
    tl = SlotTimeline.from_rates([5.0])
    with pytest.raises(ValidationError):
        estimate_arl(0.0, tl, _event_cfg(), CalibrationTarget(pi=5, replications=100))


def test_horizon_too_short():
    tl = SlotTimeline.from_rates([1.0, 1.0])
    target = CalibrationTarget(pi=5.0, replications=100, horizon_cap=2.0)
    with pytest.raises(HorizonTooShortError):
        estimate_arl(50.0, tl, _event_cfg(), target, seed=1)


def test_calibrate_pi_one_gives_tiny_threshold():
    tl = SlotTimeline.from_rates([4.0] * 10)
    target = CalibrationTarget(pi=1.0, replications=200)
    result = calibrate_threshold(tl, _event_cfg(), target, seed=2)
    assert result.threshold_m <= 1.0
    assert result.arl_estimate == 1.0


def test_calibrate_meets_budget_and_doubling_pi_raises_m():
    tl = SlotTimeline.from_rates([6.0] * 30)
    cfg = _event_cfg(rho=1.3)
    small = calibrate_threshold(tl, cfg, CalibrationTarget(pi=40.0, replications=1500), seed=10)
    big = calibrate_threshold(tl, cfg, CalibrationTarget(pi=80.0, replications=1500), seed=10)
    assert abs(small.arl_estimate - 40.0) <= 0.02 * 40.0 + 2 * small.arl_stderr
    assert abs(big.arl_estimate - 80.0) <= 0.02 * 80.0 + 2 * big.arl_stderr
    assert big.threshold_m >= small.threshold_m
    assert small.trace  # bisection trace kept for audit


def test_calibrate_reproducible():
    tl = SlotTimeline.from_rates([6.0] * 30)
    cfg = _event_cfg(rho=1.3)
    target = CalibrationTarget(pi=25.0, replications=400)
    a = calibrate_threshold(tl, cfg, target, seed=123)
    b = calibrate_threshold(tl, cfg, target, seed=123)
    assert a.to_dict() == b.to_dict()


def test_calibrate_aggregated_mode_runs():
    # Budget must be coarse relative to the per-slot counts; aggregated ARL
    # moves in lumps of roughly one slot mean.
    tl = SlotTimeline.from_rates([2.0] * 30)
    cfg = _agg_cfg(rho=1.4)
    result = calibrate_threshold(tl, cfg, CalibrationTarget(pi=60.0, replications=600), seed=6)
    assert abs(result.arl_estimate - 60.0) <= 0.02 * 60.0 + 2 * result.arl_stderr


def test_target_validation():
    with pytest.raises(ValidationError):
        CalibrationTarget(pi=0.0)
    with pytest.raises(ValidationError):
        CalibrationTarget(pi=5.0, replications=10)
    with pytest.raises(ValidationError):
        CalibrationTarget(pi=5.0, tolerance_rel=0.9)


def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("SEASONAL_CUSUM_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("SEASONAL_CUSUM_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("SEASONAL_CUSUM_THREADS", "junk")
    assert worker_count() == 1


def test_threaded_curves_match_serial(monkeypatch):
    tl = SlotTimeline.from_rates([6.0] * 10)
    cfg = _event_cfg(rho=1.3)
    target = CalibrationTarget(pi=15.0, replications=200)
    monkeypatch.delenv("SEASONAL_CUSUM_THREADS", raising=False)
    serial = estimate_arl(2.0, tl, cfg, target, seed=44)
    monkeypatch.setenv("SEASONAL_CUSUM_THREADS", "4")
    threaded = estimate_arl(2.0, tl, cfg, target, seed=44)
    assert serial == threaded
