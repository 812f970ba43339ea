from __future__ import annotations

from datetime import date

import pytest

from seasonal_cusum.synthetic import sample_dataset, synthetic_model


@pytest.fixture(scope="session")
def truth_model():
    """Ground-truth seasonal model with known coefficients."""
    return synthetic_model(holidays=frozenset({date(2017, 5, 1), date(2017, 8, 15)}))


@pytest.fixture(scope="session")
def train_dataset(truth_model):
    """Twenty-one months of sampled counts; every month level is represented."""
    return sample_dataset(truth_model, date(2016, 1, 4), date(2017, 9, 29), seed=11)
