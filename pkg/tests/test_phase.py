"""Tests for FSR heel-strike detection and the online GC% estimator."""

import numpy as np
import pytest

from exogait.errors import TimeWentBackwards
from exogait.phase import (
    DEFAULT_STRIDE_S,
    FsrConfig,
    PhaseState,
    StrikeDetector,
    detect_heel_strikes,
    update_phase,
)


def test_single_burst_emits_at_run_start():
    # Samples 3,4,5 exceed threshold; run start is sample 3 -> t = 0.03 s.
    fsr = np.array([0.0, 0.0, 0.0, 0.8, 0.9, 0.9, 0.9, 0.2, 0.0])
    events = detect_heel_strikes(fsr, 100.0, FsrConfig())
    assert events.tolist() == [0.03]


def test_all_zero_signal_no_events():
    events = detect_heel_strikes(np.zeros(500), 100.0, FsrConfig())
    assert events.size == 0


def test_refractory_suppresses_second_burst():
    # Bursts starting at t = 0.0 and t = 0.2; refractory 0.4 keeps only one.
    fsr = np.zeros(60)
    fsr[0:5] = 0.9
    fsr[20:25] = 0.9
    events = detect_heel_strikes(fsr, 100.0, FsrConfig(refractory=0.4))
    assert events.tolist() == [0.0]


def test_bursts_beyond_refractory_both_emit():
    fsr = np.zeros(120)
    fsr[0:5] = 0.9
    fsr[80:85] = 0.9
    events = detect_heel_strikes(fsr, 100.0, FsrConfig(refractory=0.4))
    assert events.tolist() == [0.0, 0.8]


def test_debounce_rejects_short_runs():
    fsr = np.zeros(50)
    fsr[10:12] = 0.9  # only 2 samples above threshold
    events = detect_heel_strikes(fsr, 100.0, FsrConfig(debounce_samples=3))
    assert events.size == 0


def test_rearm_requires_drop_below_threshold():
    # One long run only ever counts once, however long it lasts.
    fsr = np.full(200, 0.9)
    events = detect_heel_strikes(fsr, 100.0, FsrConfig())
    assert events.tolist() == [0.0]


def test_scaling_above_threshold_preserves_events():
    rng = np.random.default_rng(3)
    fsr = np.zeros(300)
    for start in (10, 120, 230):
        fsr[start : start + 6] = rng.uniform(0.6, 1.0, 6)
    base = detect_heel_strikes(fsr, 100.0, FsrConfig())
    # Scale the above-threshold margin; crossing pattern unchanged.
    scaled = np.where(fsr > 0.5, 0.5 + 2.0 * (fsr - 0.5), fsr)
    assert detect_heel_strikes(scaled, 100.0, FsrConfig()).tolist() == base.tolist()


def test_streaming_detector_matches_batch():
    rng = np.random.default_rng(42)
    for _ in range(20):
        fsr = np.clip(rng.normal(0.0, 0.05, 1000), 0.0, None)
        n_bursts = int(rng.integers(1, 8))
        starts = np.sort(rng.choice(np.arange(0, 950, 10), n_bursts, replace=False))
        for s in starts:
            fsr[s : s + int(rng.integers(3, 12))] += 0.8
        cfg = FsrConfig()
        batch = detect_heel_strikes(fsr, 100.0, cfg).tolist()
        det = StrikeDetector(100.0, cfg)
        streamed = []
        for i, v in enumerate(fsr):
            if det.step(float(v)):
                # The streaming flag lags the run start by debounce-1 samples.
                streamed.append((i - (cfg.debounce_samples - 1)) / 100.0)
        assert streamed == batch


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        FsrConfig(threshold=0.0)
    with pytest.raises(ValueError):
        FsrConfig(refractory=0.0)
    with pytest.raises(ValueError):
        FsrConfig(debounce_samples=0)
    with pytest.raises(ValueError):
        detect_heel_strikes(np.zeros(5), 0.0, FsrConfig())


def test_gc_zero_before_first_strike():
    state = PhaseState()
    state, gc = update_phase(state, 0.5, heel_strike=False)
    assert gc == 0.0


def test_gc_default_stride_midpoint():
    state = PhaseState()
    state, gc = update_phase(state, 0.0, heel_strike=True)
    assert gc == 0.0
    state, gc = update_phase(state, 0.490, heel_strike=False)
    assert gc == pytest.approx(100.0 * 0.490 / DEFAULT_STRIDE_S)
    assert gc == pytest.approx(50.0)


def test_gc_clamps_at_100():
    state = PhaseState()
    state, _ = update_phase(state, 0.0, heel_strike=True)
    state, gc = update_phase(state, 1.2, heel_strike=False)
    assert gc == 100.0


def test_buffer_mean_replaces_default():
    state = PhaseState()
    state, _ = update_phase(state, 0.0, heel_strike=True)
    state, gc = update_phase(state, 1.0, heel_strike=True)
    assert gc == 0.0
    assert state.stride_buffer == (1.0,)
    assert state.expected_stride == 1.0
    state, gc = update_phase(state, 1.5, heel_strike=False)
    assert gc == pytest.approx(50.0)


def test_buffer_keeps_last_three():
    state = PhaseState()
    for t in [0.0, 1.0, 2.1, 3.3, 4.6]:
        state, _ = update_phase(state, t, heel_strike=True)
    assert len(state.stride_buffer) == 3
    assert state.stride_buffer == pytest.approx((1.1, 1.2, 1.3))
    assert state.expected_stride == pytest.approx(1.2)


def test_gc_nondecreasing_between_strikes():
    rng = np.random.default_rng(9)
    state = PhaseState()
    state, _ = update_phase(state, 0.0, heel_strike=True)
    times = np.cumsum(rng.uniform(0.001, 0.02, 300))
    prev = 0.0
    for t in times:
        state, gc = update_phase(state, float(t), heel_strike=False)
        assert 0.0 <= gc <= 100.0
        assert gc >= prev
        prev = gc


def test_time_went_backwards():
    state = PhaseState()
    state, _ = update_phase(state, 1.0, heel_strike=False)
    with pytest.raises(TimeWentBackwards):
        update_phase(state, 0.5, heel_strike=False)


def test_state_validation():
    with pytest.raises(ValueError):
        PhaseState(buffer_size=0)
    with pytest.raises(ValueError):
        PhaseState(default_stride=0.0)
    with pytest.raises(ValueError):
        PhaseState(stride_buffer=(1.0, -0.5))
    with pytest.raises(ValueError):
        PhaseState(stride_buffer=(1.0, 1.0, 1.0, 1.0), buffer_size=3)
