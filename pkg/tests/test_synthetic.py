from __future__ import annotations

from datetime import date

import numpy as np
import pytest

from seasonal_cusum.daycal import MORNING_SLOT_COUNT
from seasonal_cusum.synthetic import (
    abstract_sine_timeline,
    bimodal_weekday_fractions,
    sample_dataset,
    shared_shape_profile,
    synthetic_model,
)


def test_bimodal_shape_halves():
    fractions = np.array(bimodal_weekday_fractions())
    assert fractions.sum() == pytest.approx(1.0)
    assert fractions[:MORNING_SLOT_COUNT].sum() == pytest.approx(0.5)
    assert np.all(fractions > 0)


def test_shared_shape_saturday_is_double():
    profile = shared_shape_profile()
    for sat, wk in zip(profile.saturday_fractions, profile.weekday_fractions):
        assert sat == pytest.approx(2.0 * wk)


def test_sample_dataset_daily_matches_slot_sums(truth_model):
    ds = sample_dataset(truth_model, date(2018, 1, 1), date(2018, 1, 14), seed=2)
    slot_totals: dict[date, int] = {}
    for rec in ds.slots:
        slot_totals[rec.date] = slot_totals.get(rec.date, 0) + rec.count
    for daily in ds.daily:
        assert slot_totals[daily.date] == daily.count
    assert all(not truth_model.meta(d).is_open or d in slot_totals for d in slot_totals)


def test_sample_dataset_skips_closed_days(truth_model):
    ds = sample_dataset(truth_model, date(2018, 1, 1), date(2018, 1, 14), seed=2)
    assert all(r.date.weekday() != 6 for r in ds.daily)


def test_abstract_sine_timeline_scales():
    tl = abstract_sine_timeline(days=3.0, slots_per_day=20, daily_mean=500.0, amplitude=0.4)
    assert len(tl) == 60
    assert tl.total_time == pytest.approx(3.0)
    assert tl.total_mean == pytest.approx(1500.0)
    assert np.all(tl.rates > 0)
    with pytest.raises(ValueError):
        abstract_sine_timeline(amplitude=1.5)


def test_synthetic_model_consistency():
    model = synthetic_model(base_daily=800.0)
    monday = date(2018, 1, 8)
    assert model.daily_mean(monday) == pytest.approx(model.slot_rates(monday).sum())
    assert model.constant_rate == pytest.approx(800.0 / 22)
