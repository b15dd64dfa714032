"""Gait-biomechanics toolkit and cable-driven ankle-assistance simulator.

Ingests motion-capture trials (a C3D subset, plus a CSV fallback), cleans
and smooths marker series, segments and time-normalizes gait cycles,
runs equivalence statistics (random-intercept model by REML, TOST with a
Welch standard error), generates assistance torque profiles, estimates
gait phase from FSR heel strikes, and closes a PID + feedforward tension
loop around a simulated Bowden-cable plant.
"""

from . import errors
from .assist import (
    DEFAULT_MOMENT_ARM,
    DEFAULT_PROFILE,
    G_STANDARD,
    TensionConversion,
    TorqueProfile,
    reference_tension,
    tension_to_torque,
    torque_at,
    torque_to_tension,
)
from .c3d import map_event, read_c3d, write_c3d
from .cli import ComplexityInputs, RunConfig, complexity_index, main, run
from .csvio import read_csv_trial, read_events_csv
from .cycles import (
    N_SAMPLES,
    CycleFeatures,
    NormalizedCycle,
    Stride,
    TemporalFeatures,
    cycle_features,
    ensemble,
    normalize_cycle,
    segment_strides,
    temporal_params,
)
from .errors import ExogaitError
from .phase import (
    DEFAULT_STRIDE_S,
    FsrConfig,
    PhaseState,
    StrikeDetector,
    detect_heel_strikes,
    update_phase,
)
from .preprocess import (
    GapFillSpec,
    SmoothingSpec,
    fill_gaps,
    roughness,
    smooth_to_mse,
    smooth_with_lambda,
)
from .simulate import (
    DEFAULT_GAINS,
    CycleSummary,
    PidGains,
    PidState,
    PlantParams,
    PlantState,
    SimResult,
    pid_step,
    plant_step,
    run_simulation,
    tracking_metrics,
)
from .stats import (
    LmeFit,
    StatConfig,
    StrideObservation,
    TostResult,
    fit_lme,
    lme_oracle,
    tost_welch,
    trial_means,
    wald_p,
)
from .trial import (
    AnalogChannel,
    EventKind,
    GaitEvent,
    MarkerTrajectory,
    Side,
    Trial,
    extract_events,
)

__version__ = "0.1.0"

__all__ = [
    "AnalogChannel",
    "ComplexityInputs",
    "CycleFeatures",
    "CycleSummary",
    "DEFAULT_GAINS",
    "DEFAULT_MOMENT_ARM",
    "DEFAULT_PROFILE",
    "DEFAULT_STRIDE_S",
    "EventKind",
    "ExogaitError",
    "FsrConfig",
    "G_STANDARD",
    "GaitEvent",
    "GapFillSpec",
    "LmeFit",
    "MarkerTrajectory",
    "N_SAMPLES",
    "NormalizedCycle",
    "PhaseState",
    "PidGains",
    "PidState",
    "PlantParams",
    "PlantState",
    "RunConfig",
    "SimResult",
    "Side",
    "SmoothingSpec",
    "StatConfig",
    "StrideObservation",
    "Stride",
    "StrikeDetector",
    "TemporalFeatures",
    "TensionConversion",
    "TorqueProfile",
    "TostResult",
    "Trial",
    "complexity_index",
    "cycle_features",
    "detect_heel_strikes",
    "ensemble",
    "errors",
    "extract_events",
    "fill_gaps",
    "fit_lme",
    "lme_oracle",
    "main",
    "map_event",
    "normalize_cycle",
    "pid_step",
    "plant_step",
    "read_c3d",
    "read_csv_trial",
    "read_events_csv",
    "reference_tension",
    "roughness",
    "run",
    "run_simulation",
    "segment_strides",
    "smooth_to_mse",
    "smooth_with_lambda",
    "temporal_params",
    "tension_to_torque",
    "torque_at",
    "torque_to_tension",
    "tost_welch",
    "tracking_metrics",
    "trial_means",
    "update_phase",
    "wald_p",
    "write_c3d",
]
