"""Feature extraction against an independent brute-force oracle."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matbsim.config import PHYSIO_CHANNELS
from matbsim.errors import InsufficientDataError
from matbsim.workload.features import (
    FEATURE_DIM,
    PhysioSample,
    channel_statistics,
    extract_features,
)


def oracle_stats(times, values):
    """Loop-based reference: mean, population variance, average gradient,
    least-squares slope."""
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    dt = (times[-1] - times[0]) / (n - 1)
    grad = sum(values[i + 1] - values[i] for i in range(n - 1)) / (n - 1) / dt
    t_mean = sum(times) / n
    sxx = sum((t - t_mean) ** 2 for t in times)
    sxy = sum((t - t_mean) * (v - mean) for t, v in zip(times, values))
    slope = sxy / sxx if sxx > 0 else 0.0
    return mean, var, grad, slope


def make_window(values, dt=1.0):
    out = []
    for i, v in enumerate(values):
        channels = {name: float(v) for name in PHYSIO_CHANNELS}
        out.append(PhysioSample(t=i * dt, **channels))
    return out


class TestChannelStatistics:
    def test_constant_signal(self):
        t = np.arange(31.0)
        v = np.full(31, 70.0)
        assert channel_statistics(t, v) == (70.0, 0.0, 0.0, 0.0)

    def test_linear_ramp_slope(self):
        t = np.arange(31.0)
        v = 60.0 + 1.0 * t  # 60 -> 90 over 30 s
        mean, var, grad, slope = channel_statistics(t, v)
        assert slope == pytest.approx(1.0, rel=1e-12)
        assert grad == pytest.approx(1.0, rel=1e-12)
        assert mean == pytest.approx(75.0)

    def test_alternating_signal(self):
        # 30 samples at 1 Hz alternating 60/80: mean 70, population var 100
        t = np.arange(30.0)
        v = np.array([60.0, 80.0] * 15)
        mean, var, grad, slope = channel_statistics(t, v)
        assert mean == pytest.approx(70.0)
        assert var == pytest.approx(100.0)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
            min_size=2,
            max_size=80,
        )
    )
    def test_matches_oracle(self, values):
        t = np.arange(len(values), dtype=float)
        got = channel_statistics(t, np.array(values))
        want = oracle_stats(list(t), values)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, rel=1e-9, abs=1e-9)


class TestExtractFeatures:
    def test_shape_and_order(self):
        window = make_window(np.linspace(60, 90, 31))
        feats = extract_features(window, 30.0)
        assert feats.shape == (FEATURE_DIM,)
        # channel 0 statistics occupy the first 4 slots
        assert feats[0] == pytest.approx(75.0)
        assert feats[3] == pytest.approx(1.0)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientDataError):
            extract_features(make_window([70.0]), 30.0)

    def test_wrong_span_rejected(self):
        window = make_window(np.full(11, 70.0))  # spans 10 s
        with pytest.raises(InsufficientDataError):
            extract_features(window, 30.0)

    def test_span_tolerance_one_period(self):
        # 30 samples at 1 Hz span 29 s: accepted for a 30-s epoch
        window = make_window(np.full(30, 70.0))
        feats = extract_features(window, 30.0)
        assert feats[0] == 70.0
