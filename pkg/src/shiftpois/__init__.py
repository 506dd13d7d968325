"""shiftpois: estimate a 1-periodic Poisson intensity observed through random shifts.

Each of n independent point processes on [0, 1) has intensity lambda(. - tau_i)
where the shifts tau_i are i.i.d. with a known density.  The package provides
the forward model and samplers, Fourier deconvolution with linear spectral
filters, an adaptive wavelet hard-thresholding estimator, a Monte Carlo risk
harness, and likelihood-ratio tools for lower-bound experiments.
"""

__version__ = "0.1.0"

from .fourier import FourierTable
from .model import (
    CosineIntensity,
    PolyDecayIntensity,
    PiecewiseConstantIntensity,
    WaveletBumpIntensity,
    IntensityModel,
    ShiftDensity,
    LaplaceShift,
    SymGammaShift,
    TrajectorySet,
    intensity_from_config,
    shift_from_config,
    ConfigError,
)
from .simulate import (
    SimSeed,
    sample_shifts,
    sample_trajectory,
    sample_dataset,
    write_events_jsonl,
    read_events_jsonl,
)
from .spectral import (
    Filter,
    FourierStats,
    empirical_fourier,
    empirical_char,
    deconvolve,
    linear_estimate,
    linear_risk_exact,
    choose_cutoff,
)
from .threshold import (
    ThresholdParams,
    ThresholdDiagnostics,
    ScheduleError,
    sigma2,
    epsilon,
    k_tilde,
    random_threshold,
    resolution_levels,
    adaptive_estimate,
    clipped_grid,
)
from .bench import (
    mise,
    make_estimator,
    monte_carlo_risk,
    risk_ladder,
    rate_fit,
    theoretical_exponent,
    RiskRow,
    RiskReport,
    RateFit,
)
from .oracle import (
    AssouadSpec,
    assouad_intensity,
    girsanov_log_ratio,
    girsanov_log_ratios,
    change_of_measure_check,
    ChangeOfMeasureResult,
    mass_scale_schedule,
)
