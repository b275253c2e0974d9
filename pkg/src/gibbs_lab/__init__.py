"""Coordinate Gibbs sampler on the unit hypercube for near-diagonal priors.

Simulation and verification toolkit: network spectra, truncated-normal
updates, monotone grand couplings, hitting-time statistics, and exact
rejection oracles, with reproducible counter-based noise streams.
"""

__version__ = "0.1.0"

from .coupling import CoupledEnsemble, coupled_step, make_ensemble, mixing_gap_trajectory, run_coupled, sandwich_run
from .errors import (
    DimensionError,
    DisconnectedError,
    DomainError,
    FeasibilityError,
    GibbsLabError,
    HNotPositiveError,
    IsolatedVertexError,
    OracleError,
    ValidationError,
    ZeroNetworkError,
)
from .gibbs import (
    ChainState,
    NoiseStream,
    SamplerParams,
    StepNoise,
    iter_run,
    make_noise_stream,
    make_sampler_params,
    run,
    step,
)
from .network import (
    Component,
    Network,
    SpectralSummary,
    complete_network,
    connected_components,
    cycle_network,
    dirichlet_energy,
    laplacian_apply,
    load_network,
    one_step_average,
    path_network,
    random_connected_network,
    spectral_summary,
    two_blocks_network,
    weighted_inner,
)
from .truncnorm import TruncatedNormal

__all__ = [name for name in dir() if not name.startswith("_")]
