"""Hybrid analog/digital precoding with realizable RF precoding networks.

Modules
-------
channel
    Clustered mmWave channel model, steering vectors, SVD partition.
rfpn
    Divider / phase-shifter / combiner network matrices and their
    vectorized (Kronecker) description.
precoding
    Optimal, OMP-based ideal hybrid, realistic-network and DFT precoders.
metrics
    Mutual information, direct and decomposed.
harness
    Seeded Monte Carlo sweeps.
cli
    Command-line front end.
"""
from .channel import ArrayGeometry, assemble_channel, sample_paths, svd_partition
from .estimators import HybridPrecoder
from .exceptions import (
    ConfigError,
    InvalidArgumentError,
    RankDeficientChannelError,
    SingularNetworkError,
)
from .harness import RateCurve, SimConfig, derive_seed, run_sweep, run_trial
from .metrics import SnrPoint, mutual_information_decomposed, mutual_information_direct
from .rfpn import NetworkLosses, PhaseConfig

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "assemble_channel",
    "sample_paths",
    "svd_partition",
    "HybridPrecoder",
    "ConfigError",
    "InvalidArgumentError",
    "RankDeficientChannelError",
    "SingularNetworkError",
    "RateCurve",
    "SimConfig",
    "derive_seed",
    "run_sweep",
    "run_trial",
    "SnrPoint",
    "mutual_information_decomposed",
    "mutual_information_direct",
    "NetworkLosses",
    "PhaseConfig",
]
