"""Four-parameter plantarflexion assistance profile and tension conversion.

The profile is parameterized by three gait-cycle timings (onset, peak, end,
in GC%) and a peak torque in Nm. Each segment is a smoothstep cubic
(3u^2 - 2u^3): zero slope at both segment ends, so the full trajectory is
C1 with flat landings at onset, peak, and end, and its rise/fall midpoints
sit at exactly half the peak.

Torque converts to cable tension through an ankle moment arm. The default
arm is fixed by the device's stated equivalence of 17 kgf of cable tension
to 10 Nm at the ankle: arm = 10 / (17 * 9.80665) m. Whether that
equivalence used standard gravity or 9.81 is not recorded anywhere, so the
constant is overridable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidProfile

G_STANDARD = 9.80665  # m/s^2

DEFAULT_MOMENT_ARM = 10.0 / (17.0 * G_STANDARD)  # 0.059983... m


@dataclass(frozen=True)
class TorqueProfile:
    """Assistance torque trajectory over 0..100 GC%."""

    onset_gc: float
    peak_gc: float
    end_gc: float
    peak_torque: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.onset_gc < self.peak_gc < self.end_gc <= 100.0:
            raise InvalidProfile(
                f"need 0 <= onset < peak < end <= 100, got "
                f"({self.onset_gc}, {self.peak_gc}, {self.end_gc})"
            )
        if self.peak_torque < 0:
            raise InvalidProfile(
                f"peak_torque must be >= 0, got {self.peak_torque}"
            )

    @classmethod
    def from_durations(
        cls, rise: float, peak_gc: float, fall: float, peak_torque: float
    ) -> "TorqueProfile":
        """Build from rise/fall durations around the peak timing.

        Some controllers specify the trajectory as (rise time, peak time,
        fall time); this converts to the absolute form used here:
        onset = peak - rise, end = peak + fall.
        """
        return cls(
            onset_gc=peak_gc - rise,
            peak_gc=peak_gc,
            end_gc=peak_gc + fall,
            peak_torque=peak_torque,
        )


DEFAULT_PROFILE = TorqueProfile(
    onset_gc=23.2, peak_gc=50.4, end_gc=62.7, peak_torque=10.0
)


@dataclass(frozen=True)
class TensionConversion:
    moment_arm: float = DEFAULT_MOMENT_ARM  # m
    g: float = G_STANDARD

    def __post_init__(self) -> None:
        if not self.moment_arm > 0:
            raise InvalidProfile(
                f"moment_arm must be positive, got {self.moment_arm}"
            )


def _smoothstep(u: float) -> float:
    return u * u * (3.0 - 2.0 * u)


def torque_at(profile: TorqueProfile, gc: float) -> float:
    """Assistance torque (Nm) at a gait-cycle percentage.

    Zero outside [onset, end]; smoothstep rise to peak_torque on
    [onset, peak] and smoothstep fall back to zero on [peak, end]. The value
    at peak_gc is exactly peak_torque.
    """
    if not 0.0 <= gc <= 100.0:
        raise ValueError(f"gc must be in [0, 100], got {gc}")
    if gc <= profile.onset_gc or gc >= profile.end_gc:
        return 0.0
    if gc <= profile.peak_gc:
        u = (gc - profile.onset_gc) / (profile.peak_gc - profile.onset_gc)
    else:
        u = (profile.end_gc - gc) / (profile.end_gc - profile.peak_gc)
    return profile.peak_torque * _smoothstep(u)


def torque_to_tension(torque: float, conv: TensionConversion) -> float:
    """Ankle torque (Nm) to cable tension (N)."""
    if torque < 0:
        raise ValueError(f"torque must be >= 0, got {torque}")
    return torque / conv.moment_arm


def tension_to_torque(tension: float, conv: TensionConversion) -> float:
    """Cable tension (N) to ankle torque (Nm)."""
    if tension < 0:
        raise ValueError(f"tension must be >= 0, got {tension}")
    return tension * conv.moment_arm


def reference_tension(
    profile: TorqueProfile, conv: TensionConversion, gc: float
) -> float:
    """Desired cable tension (N) at a gait-cycle percentage."""
    return torque_to_tension(torque_at(profile, gc), conv)
