"""Heel-strike detection from an FSR signal and online GC% estimation.

Detection rule: a strike is emitted at the first sample of a run of at
least debounce_samples consecutive samples above threshold, provided the
refractory period has elapsed since the previous emitted strike; the signal
must fall below threshold before the next strike can be considered. The
phase estimator converts elapsed time since the last strike to gait-cycle
percent using the mean of the last few stride durations (a population
default before any stride has been measured).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import TimeWentBackwards

DEFAULT_STRIDE_S = 0.980  # population-average stride duration


@dataclass(frozen=True)
class FsrConfig:
    threshold: float = 0.5  # fraction of full scale
    refractory: float = 0.4  # s
    debounce_samples: int = 3

    def __post_init__(self) -> None:
        if not self.threshold > 0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")
        if not self.refractory > 0:
            raise ValueError(f"refractory must be > 0, got {self.refractory}")
        if self.debounce_samples < 1:
            raise ValueError("debounce_samples must be >= 1")


@dataclass(frozen=True)
class PhaseState:
    """Immutable estimator state; update_phase returns a new one."""

    last_hs_time: float | None = None
    stride_buffer: tuple[float, ...] = ()
    buffer_size: int = 3
    default_stride: float = DEFAULT_STRIDE_S
    last_time: float | None = None

    def __post_init__(self) -> None:
        if self.buffer_size < 1:
            raise ValueError("buffer_size must be >= 1")
        if not self.default_stride > 0:
            raise ValueError("default_stride must be positive")
        if len(self.stride_buffer) > self.buffer_size:
            raise ValueError("stride_buffer longer than buffer_size")
        if any(d <= 0 for d in self.stride_buffer):
            raise ValueError("stride durations must be positive")

    @property
    def expected_stride(self) -> float:
        if self.stride_buffer:
            return sum(self.stride_buffer) / len(self.stride_buffer)
        return self.default_stride


def detect_heel_strikes(
    fsr: np.ndarray, rate: float, cfg: FsrConfig
) -> np.ndarray:
    """Heel-strike times (s) in an FSR series sampled at a fixed rate."""
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    signal = np.asarray(fsr, dtype=float)
    events: list[float] = []
    run_start: int | None = None
    run_len = 0
    decided = False
    last_emit: float | None = None
    for i, v in enumerate(signal):
        if v > cfg.threshold:
            if run_start is None:
                run_start, run_len, decided = i, 1, False
            else:
                run_len += 1
            if not decided and run_len >= cfg.debounce_samples:
                decided = True
                t = run_start / rate
                if last_emit is None or t - last_emit >= cfg.refractory:
                    events.append(t)
                    last_emit = t
        else:
            run_start = None
    return np.asarray(events)


class StrikeDetector:
    """Streaming version of detect_heel_strikes for sample-by-sample use.

    step() returns True on the sample at which a run satisfies the debounce
    rule (so the flag lags the run start by debounce_samples - 1 samples).
    """

    def __init__(self, rate: float, cfg: FsrConfig) -> None:
        if not rate > 0:
            raise ValueError(f"rate must be positive, got {rate}")
        self.rate = rate
        self.cfg = cfg
        self._i = 0
        self._run_start: int | None = None
        self._run_len = 0
        self._decided = False
        self._last_emit: float | None = None

    def step(self, value: float) -> bool:
        fired = False
        if value > self.cfg.threshold:
            if self._run_start is None:
                self._run_start, self._run_len = self._i, 1
                self._decided = False
            else:
                self._run_len += 1
            if not self._decided and self._run_len >= self.cfg.debounce_samples:
                self._decided = True
                t = self._run_start / self.rate
                if (
                    self._last_emit is None
                    or t - self._last_emit >= self.cfg.refractory
                ):
                    self._last_emit = t
                    fired = True
        else:
            self._run_start = None
        self._i += 1
        return fired


def update_phase(
    state: PhaseState, now: float, heel_strike: bool
) -> tuple[PhaseState, float]:
    """Advance the estimator to time `now`; returns (new state, GC%).

    On a heel strike the elapsed stride is pushed into the duration buffer
    and GC% resets to 0. Otherwise GC% is elapsed time over the expected
    stride duration, clamped to [0, 100]; before the first strike it is 0.
    """
    if state.last_time is not None and now < state.last_time:
        raise TimeWentBackwards(
            f"time stepped from {state.last_time} back to {now}"
        )
    if heel_strike:
        buffer = state.stride_buffer
        if state.last_hs_time is not None:
            duration = now - state.last_hs_time
            if duration > 0:
                buffer = (buffer + (duration,))[-state.buffer_size :]
        new = replace(
            state, last_hs_time=now, stride_buffer=buffer, last_time=now
        )
        return new, 0.0
    new = replace(state, last_time=now)
    if state.last_hs_time is None:
        return new, 0.0
    gc = 100.0 * (now - state.last_hs_time) / state.expected_stride
    return new, min(max(gc, 0.0), 100.0)
