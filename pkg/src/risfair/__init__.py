"""Sum spectral efficiency maximization for RIS-aided multiuser MISO downlinks
with zero-forcing precoding and proportional rate constraints."""

from .channel import ChannelSet, Geometry, PathLossParams, noise_power, place_users, sample_channels
from .harness import ConfigError, ExperimentSpec, run_experiment, summarize
from .poweropt import FairnessSpec, PowerConfig, max_t_bisection
from .phaseopt import PhaseConfig, optimize_phase
from .solver import SolveResult, SolverConfig, baseline_non_ris, baseline_random_phase, solve
from .zf import PhaseShift, ZFRankError, zf_precoder

__version__ = "0.1.0"
