"""Two-phonon cooling of a quadratically coupled optomechanical oscillator.

Scattering-theory phonon transition rates, rate-equation and full master
equation steady states, and the mechanical number statistics built on them.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .fock import HilbertDims
from .kinetics import (KineticGenerator, PhononDistribution, build_generator, evolve,
                       rate_steady_state, steady_distribution, strong_absorption_limit,
                       two_phonon_distribution)
from .lindblad import (CavityRateConvention, DensityOperator, Liouvillian, liouvillian,
                       master_steady_state, phonon_distribution, steady_state)
from .params import SystemParams, WeakDriveWarning, check_stability
from .scattering import RateMatrix, rate_matrix, transition_rate, weak_coupling_rates
from .squeeze import OverlapMatrix, overlap_matrix, squeeze_param
from .statistics import MechStats, mandel_q, mean_phonon, mech_stats, number_fluctuations
from .sweep import SweepConfig, SweepRecord, parse_config, run_sweep, write_csv
