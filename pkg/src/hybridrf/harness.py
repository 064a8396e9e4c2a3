"""Seeded Monte Carlo engine comparing precoding methods over an SNR grid.

Each trial draws one channel from a private random stream derived from
``(master_seed, trial_index)`` and evaluates every configured method on it.
Trials are independent, so they may run in any order on any number of
worker processes; aggregation is an index-ordered reduction, which makes a
sweep's output bitwise reproducible regardless of parallelism.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import metrics, precoding, rfpn
from .channel import ArrayGeometry, assemble_channel, sample_paths, svd_partition
from .exceptions import InvalidArgumentError, RankDeficientChannelError, SingularNetworkError
from .precoding import (
    DFT_NETWORK,
    IDEAL_HYBRID,
    METHODS,
    OPTIMAL,
    REALISTIC_FC,
    REALISTIC_SA,
)

__all__ = [
    "SimConfig",
    "TrialRecord",
    "RateCurve",
    "derive_seed",
    "run_trial",
    "run_sweep",
    "analytic_label",
]

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_REALISTIC = {REALISTIC_FC: rfpn.FULLY_CONNECTED, REALISTIC_SA: rfpn.SUB_ARRAY}


def derive_seed(master_seed, trial_index):
    """64-bit stream seed for one trial.

    SplitMix64: the counter step ``master + (index + 1) * gamma`` is
    injective in the index (``gamma`` is odd) and the finalizer is a
    bijection on 64-bit words, so distinct indices never collide.
    """
    if trial_index < 0:
        raise InvalidArgumentError("trial_index must be >= 0")
    z = (int(master_seed) + (int(trial_index) + 1) * _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def analytic_label(method, form=metrics.EXACT):
    return f"{method}/analytic-{form}"


def _default_snr_grid():
    return tuple(float(x) for x in range(-10, 51, 5))


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines a sweep.

    ``ns=None`` resolves to ``min(ntrx, nr)``. ``n_clusters=None`` gives each
    ray its own cluster. Geometries default to a square planar array at the
    base station (linear if ``nt`` is not a perfect square) and a linear
    array at the user. ``phase_bits``/``codebook_bits`` of ``None`` mean
    unlimited resolution (codebook bits must be finite).
    """

    nt: int = 256
    nr: int = 16
    ntrx: int = 8
    ns: int | None = None
    l_paths: int = 10
    n_clusters: int | None = None
    angular_spread_deg: float = 10.0
    snr_grid_db: tuple = field(default_factory=_default_snr_grid)
    trials: int = 100
    master_seed: int = 0
    methods: tuple = METHODS
    losses: rfpn.NetworkLosses = rfpn.LOSSLESS
    phase_bits: int | None = 6
    codebook_bits: int = 6
    tx_geometry: ArrayGeometry | None = None
    rx_geometry: ArrayGeometry | None = None
    allow_excess_streams: bool = False
    report_analytic: bool = False

    def __post_init__(self):
        def put(name, value):
            object.__setattr__(self, name, value)

        for name in ("nt", "nr", "ntrx", "l_paths", "trials", "codebook_bits"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer, got {v!r}")
        if self.ntrx > self.nt:
            raise InvalidArgumentError(f"ntrx ({self.ntrx}) must not exceed nt ({self.nt})")
        if self.codebook_bits > 12:
            raise InvalidArgumentError("codebook_bits must be <= 12")
        if self.phase_bits is not None and (
            isinstance(self.phase_bits, bool) or not isinstance(self.phase_bits, int)
            or self.phase_bits < 1
        ):
            raise InvalidArgumentError("phase_bits must be a positive integer or null")
        if not (0 <= int(self.master_seed) <= _MASK64):
            raise InvalidArgumentError("master_seed must be an unsigned 64-bit integer")

        ns = min(self.ntrx, self.nr) if self.ns is None else self.ns
        if isinstance(ns, bool) or not isinstance(ns, (int, np.integer)) or ns < 1:
            raise InvalidArgumentError(f"ns must be a positive integer, got {ns!r}")
        limit = self.nr if self.allow_excess_streams else min(self.ntrx, self.nr)
        if ns > limit:
            raise InvalidArgumentError(
                f"ns={ns} exceeds {limit}; set allow_excess_streams to allow ns up to nr"
            )
        put("ns", int(ns))

        ncl = self.l_paths if self.n_clusters is None else self.n_clusters
        if isinstance(ncl, bool) or not isinstance(ncl, (int, np.integer)) or not 1 <= ncl <= self.l_paths:
            raise InvalidArgumentError("n_clusters must be an integer in [1, l_paths]")
        put("n_clusters", int(ncl))

        spread = float(self.angular_spread_deg)
        if not np.isfinite(spread) or spread < 0:
            raise InvalidArgumentError("angular_spread_deg must be finite and >= 0")

        grid = tuple(float(x) for x in self.snr_grid_db)
        if not grid or not all(np.isfinite(grid)):
            raise InvalidArgumentError("snr_grid_db must be a non-empty list of finite values")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidArgumentError("snr_grid_db must be strictly increasing")
        put("snr_grid_db", grid)

        methods = tuple(self.methods)
        if not methods:
            raise InvalidArgumentError("at least one method is required")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise InvalidArgumentError(f"unknown methods {unknown}; choose from {METHODS}")
        if len(set(methods)) != len(methods):
            raise InvalidArgumentError("methods must not repeat")
        put("methods", methods)
        if REALISTIC_SA in methods and self.nt % self.ntrx:
            raise InvalidArgumentError("realistic-subarray needs ntrx to divide nt")

        tx = self.tx_geometry or ArrayGeometry.square_or_linear(self.nt)
        rx = self.rx_geometry or ArrayGeometry.linear(self.nr)
        if tx.n_elements != self.nt or rx.n_elements != self.nr:
            raise InvalidArgumentError("array geometries must match nt and nr")
        put("tx_geometry", tx)
        put("rx_geometry", rx)

    def curve_labels(self):
        labels = list(self.methods)
        if self.report_analytic:
            for m in self.methods:
                if m in _REALISTIC or m == DFT_NETWORK:
                    labels += [analytic_label(m, metrics.EXACT), analytic_label(m, metrics.UNSQUARED)]
        return labels

    def to_dict(self):
        """JSON-ready mapping; :func:`hybridrf.config.config_from_dict` inverts it."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "losses":
                out["losses"] = {k: float(x) for k, x in asdict(v).items()}
            elif isinstance(v, ArrayGeometry):
                out[f.name] = asdict(v)
            elif isinstance(v, tuple):
                out[f.name] = list(v)
            else:
                out[f.name] = v
        return out


@dataclass
class TrialRecord:
    """Rates (bits/s/Hz) of one trial; ``rates[label]`` is ``None`` on failure."""

    trial_index: int
    rates: dict
    errors: dict


@dataclass
class RateCurve:
    """Aggregated rates of one method over the SNR grid.

    ``samples`` holds the per-trial rates (NaN where the trial failed).
    Means and (population) standard deviations use successful trials only.
    """

    method: str
    snr_db: np.ndarray
    mean_rate: np.ndarray
    std_rate: np.ndarray
    trial_count: np.ndarray
    failed_trials: np.ndarray
    samples: np.ndarray

    @property
    def flagged(self):
        """True when every trial failed at some SNR point."""
        return bool(np.any(self.trial_count == 0))


def _evaluate(method, cfg, channel, svd, ideal):
    h = channel.h_downlink
    allow = cfg.allow_excess_streams
    if method == OPTIMAL:
        return precoding.optimal_precoder(svd), None
    if method == IDEAL_HYBRID:
        return ideal(), None
    if method in _REALISTIC:
        return precoding.realistic_precoder(
            h, ideal().f_rf, _REALISTIC[method], cfg.ns, cfg.phase_bits,
            cfg.losses, allow_rank_deficient=allow,
        )
    return precoding.dft_precoder(h, cfg.ntrx, cfg.ns, allow_rank_deficient=allow)


def run_trial(config, trial_index):
    """Draw one channel and evaluate every configured method at every SNR.

    The channel depends only on ``(config.master_seed, trial_index)`` and the
    channel parameters, never on the method list. Method-level failures
    (rank-deficient effective channels, singular networks) are recorded in
    ``errors`` rather than raised.
    """
    cfg = config
    rng = np.random.default_rng(derive_seed(cfg.master_seed, trial_index))
    paths = sample_paths(cfg.l_paths, np.deg2rad(cfg.angular_spread_deg), rng, cfg.n_clusters)
    channel = assemble_channel(paths, cfg.tx_geometry, cfg.rx_geometry)
    svd = svd_partition(channel, min(cfg.ns, *channel.h_downlink.shape))
    snrs = [metrics.SnrPoint.from_db(x, cfg.ns) for x in cfg.snr_grid_db]

    cache = {}

    def ideal():
        if "ideal" not in cache:
            codebook = precoding.build_codebook(cfg.tx_geometry, cfg.codebook_bits)
            cache["ideal"] = precoding.ideal_hybrid_omp(svd, codebook, cfg.ntrx)
        return cache["ideal"]

    rates, errors = {}, {}
    for method in cfg.methods:
        try:
            precoder, network = _evaluate(method, cfg, channel, svd, ideal)
        except (RankDeficientChannelError, SingularNetworkError) as exc:
            rates[method] = None
            errors[method] = str(exc)
            if cfg.report_analytic and method != OPTIMAL and method != IDEAL_HYBRID:
                for form in (metrics.EXACT, metrics.UNSQUARED):
                    rates[analytic_label(method, form)] = None
                    errors[analytic_label(method, form)] = str(exc)
            continue
        rates[method] = np.array(
            [metrics.mutual_information_direct(channel.h_downlink, precoder, s) for s in snrs]
        )
        if cfg.report_analytic and network is not None:
            p_rf = rfpn.projection_matrix(network)
            for form in (metrics.EXACT, metrics.UNSQUARED):
                rates[analytic_label(method, form)] = np.array([
                    metrics.mutual_information_decomposed(svd.sigma1, svd.v1, p_rf, s, form).total_bits
                    for s in snrs
                ])
    return TrialRecord(trial_index=trial_index, rates=rates, errors=errors)


def _run_trial_star(args):
    return run_trial(*args)


def _aggregate(config, records):
    snr = np.array(config.snr_grid_db)
    curves = []
    for label in config.curve_labels():
        samples = np.full((len(records), snr.size), np.nan)
        for i, rec in enumerate(records):
            r = rec.rates.get(label)
            if r is not None:
                samples[i] = r
        ok = ~np.isnan(samples)
        count = ok.sum(axis=0)
        mean = np.full(snr.size, np.nan)
        std = np.full(snr.size, np.nan)
        for j in range(snr.size):
            col = samples[ok[:, j], j]
            if col.size:
                mean[j] = col.mean()
                std[j] = col.std()
        curves.append(RateCurve(
            method=label, snr_db=snr, mean_rate=mean, std_rate=std,
            trial_count=count, failed_trials=len(records) - count, samples=samples,
        ))
        if curves[-1].flagged:
            logger.warning("every trial failed for %s at some SNR point", label)
    return curves


def run_sweep(config, workers=1):
    """Run ``config.trials`` trials and aggregate them into one curve per method.

    ``workers > 1`` distributes trials over a process pool. The result does
    not depend on ``workers``.
    """
    if workers < 1:
        raise InvalidArgumentError("workers must be >= 1")
    jobs = [(config, i) for i in range(config.trials)]
    if workers == 1:
        records = [run_trial(*job) for job in jobs]
    else:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_star, jobs, chunksize=chunk))
    records.sort(key=lambda r: r.trial_index)
    failures = sum(len(r.errors) for r in records)
    if failures:
        logger.info("%d method evaluations failed across %d trials", failures, len(records))
    return _aggregate(config, records)
