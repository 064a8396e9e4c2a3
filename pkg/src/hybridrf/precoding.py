"""Precoder designs: optimal digital, dictionary-based hybrid, and RFPN-realized hybrids.

Power is accounted at the transceiver (PA) outputs: every design scales its
digital stage to ``||F_BB||_F^2 = Ns``, so any loss inside the analog
network reduces the radiated power.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import qr, solve_triangular

from . import rfpn
from .channel import UPA, ArrayGeometry, steering_matrix
from .exceptions import InvalidArgumentError, RankDeficientChannelError
from .validation import check_full_column_rank, check_int, check_matrix

__all__ = [
    "OPTIMAL",
    "IDEAL_HYBRID",
    "REALISTIC_FC",
    "REALISTIC_SA",
    "DFT_NETWORK",
    "METHODS",
    "Precoder",
    "SteeringCodebook",
    "optimal_precoder",
    "build_codebook",
    "omp_select",
    "ideal_hybrid_omp",
    "baseband_ls",
    "baseband_zf",
    "normalize_power",
    "realistic_precoder",
    "select_dft_columns",
    "dft_precoder",
]

OPTIMAL = "optimal-svd"
IDEAL_HYBRID = "ideal-hybrid"
REALISTIC_FC = "realistic-fully-connected"
REALISTIC_SA = "realistic-subarray"
DFT_NETWORK = "dft-network"
METHODS = (OPTIMAL, IDEAL_HYBRID, REALISTIC_FC, REALISTIC_SA, DFT_NETWORK)


@dataclass(frozen=True, eq=False)
class Precoder:
    """Analog stage ``f_rf`` (Nt x Ntrx) followed by digital stage ``f_bb`` (Ntrx x Ns)."""

    f_rf: np.ndarray
    f_bb: np.ndarray
    label: str

    @property
    def matrix(self):
        return self.f_rf @ self.f_bb

    @property
    def ns(self):
        return self.f_bb.shape[1]


@dataclass(frozen=True, eq=False)
class SteeringCodebook:
    """Dictionary of transmit steering vectors (``atoms`` is Nt x D)."""

    atoms: np.ndarray
    bits: int | None = None
    azimuth: np.ndarray | None = None
    elevation: np.ndarray | None = None

    def __len__(self):
        return self.atoms.shape[1]


def normalize_power(precoder, ns=None, plane="pa"):
    """Scale the digital stage to total power ``ns``.

    ``plane="pa"`` measures power at the transceiver outputs,
    ``||f_bb||_F^2 = ns``; ``plane="antenna"`` measures radiated power,
    ``||f_rf f_bb||_F^2 = ns``.
    """
    ns = precoder.ns if ns is None else check_int(ns, "ns", minimum=1)
    if plane == "pa":
        norm = np.linalg.norm(precoder.f_bb)
    elif plane == "antenna":
        norm = np.linalg.norm(precoder.f_rf @ precoder.f_bb)
    else:
        raise InvalidArgumentError(f"plane must be 'pa' or 'antenna', got {plane!r}")
    if norm == 0 or not np.isfinite(norm):
        raise InvalidArgumentError("cannot normalize a zero or non-finite precoder")
    f_bb = precoder.f_bb * (np.sqrt(ns) / norm)
    return Precoder(precoder.f_rf, f_bb, precoder.label)


def optimal_precoder(svd):
    """Unconstrained precoder ``V1`` behind an identity analog stage."""
    nt = svd.v1.shape[0]
    return normalize_power(Precoder(np.eye(nt, dtype=complex), svd.v1.copy(), OPTIMAL), svd.ns)


def _grid(bits, lo, hi):
    n = 2**bits
    return lo + (hi - lo) * (np.arange(n) + 0.5) / n


@lru_cache(maxsize=16)
def _codebook_cached(geometry, bits):
    # Grids cover the non-redundant part of the angle domain only: other
    # angles alias onto the same responses and would duplicate atoms.
    az = _grid(bits, -np.pi / 2, np.pi / 2)
    if geometry.kind == UPA:
        el = _grid(bits, 0.0, np.pi / 2)
        az, el = (g.ravel() for g in np.meshgrid(az, el, indexing="ij"))
    else:
        el = np.zeros_like(az)
    atoms = steering_matrix(geometry, az, el)
    for a in (atoms, az, el):
        a.setflags(write=False)
    return SteeringCodebook(atoms=atoms, bits=bits, azimuth=az, elevation=el)


def build_codebook(geometry, bits):
    """Steering vectors on a uniform ``bits``-bit angle grid.

    Linear arrays get ``2**bits`` azimuths; planar arrays get the
    ``2**bits x 2**bits`` product of azimuth and elevation grids. Grid points
    are cell midpoints. Results are cached and read-only.
    """
    bits = check_int(bits, "bits", minimum=1, maximum=12)
    return _codebook_cached(geometry, bits)


def _ls_solve(f_rf, target):
    # QR-based least squares; the caller has already checked the rank.
    q, r = qr(f_rf, mode="economic")
    return solve_triangular(r, q.conj().T @ target)


def baseband_ls(f_rf, v1):
    """Least-squares digital stage ``(F_RF^H F_RF)^{-1} F_RF^H V1``."""
    f_rf = check_matrix(f_rf, "f_rf")
    v1 = check_matrix(v1, "v1", shape=(f_rf.shape[0], None))
    check_full_column_rank(f_rf, "f_rf")
    return _ls_solve(f_rf, v1)


def omp_select(v1, atoms, ntrx, tol=1e-12):
    """Greedy choice of ``ntrx`` atom indices approximating ``v1``.

    Each step picks the unused atom maximizing ``sum_s |a^H R[:, s]|^2``
    over the streams of the current residual, then refits the least-squares
    digital stage. If the residual vanishes early, the remaining slots take
    the unused atoms with the highest correlation to ``v1`` itself.
    """
    d = atoms.shape[1]
    ntrx = check_int(ntrx, "ntrx", minimum=1, maximum=d)
    initial = np.sum(np.abs(atoms.conj().T @ v1) ** 2, axis=1)
    chosen = []
    available = np.ones(d, dtype=bool)
    residual = v1
    while len(chosen) < ntrx:
        if np.linalg.norm(residual) < tol:
            for i in np.argsort(-initial, kind="stable"):
                if len(chosen) == ntrx:
                    break
                if available[i]:
                    chosen.append(int(i))
                    available[i] = False
            break
        score = np.sum(np.abs(atoms.conj().T @ residual) ** 2, axis=1)
        score[~available] = -np.inf
        k = int(np.argmax(score))
        chosen.append(k)
        available[k] = False
        f_rf = atoms[:, chosen]
        residual = v1 - f_rf @ _ls_solve(f_rf, v1)
    return np.array(chosen, dtype=int)


def ideal_hybrid_omp(svd, codebook, ntrx, plane="pa"):
    """Hybrid precoder whose analog columns are codebook atoms picked by OMP."""
    idx = omp_select(svd.v1, codebook.atoms, ntrx)
    f_rf = np.array(codebook.atoms[:, idx])
    f_bb = baseband_ls(f_rf, svd.v1)
    return normalize_power(Precoder(f_rf, f_bb, IDEAL_HYBRID), svd.ns, plane)


def baseband_zf(h_eff, ns=None, allow_rank_deficient=False, rtol=1e-10):
    """Zero-forcing digital stage over the effective channel ``h_eff`` (Nr x Ntrx).

    With ``ns == Nr`` this is the pseudo-inverse, so ``h_eff @ result = I``.
    With ``ns < Nr`` the streams are steered onto the ``ns`` dominant
    left-singular directions ``U1`` of ``h_eff``: ``h_eff @ result = U1``,
    i.e. ``U1^H h_eff result = I``. Raises
    :class:`RankDeficientChannelError` if ``h_eff`` has fewer than ``ns``
    significant singular values, unless ``allow_rank_deficient``.
    """
    h_eff = check_matrix(h_eff, "h_eff")
    nr, ntrx = h_eff.shape
    if ns is None:
        ns = min(nr, ntrx)
    ns = check_int(ns, "ns", minimum=1, maximum=nr)
    u, s, vh = np.linalg.svd(h_eff, full_matrices=False)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    if rank < ns and not allow_rank_deficient:
        raise RankDeficientChannelError(
            f"effective channel has rank {rank} < {ns} streams"
        )
    pinv = (vh[:rank].conj().T / s[:rank]) @ u[:, :rank].conj().T
    if ns == nr:
        return pinv
    return pinv @ u[:, :ns]


def realistic_precoder(h_downlink, f_target, variant, ns, resolution_bits=6,
                       losses=rfpn.LOSSLESS, allow_rank_deficient=False):
    """Network fitted to ``f_target`` with a zero-forcing digital stage.

    Returns ``(precoder, network)``.
    """
    h = check_matrix(h_downlink, "h_downlink")
    nt, ntrx = f_target.shape
    phases = rfpn.fit_phases_to_target(f_target, variant, resolution_bits)
    network = rfpn.assemble_network(variant, phases, nt, ntrx, losses)
    f_bb = baseband_zf(h @ network.f_net, ns, allow_rank_deficient)
    label = REALISTIC_FC if variant == rfpn.FULLY_CONNECTED else REALISTIC_SA
    return normalize_power(Precoder(network.f_net, f_bb, label), ns), network


def select_dft_columns(h_downlink, ntrx):
    """Indices of the ``ntrx`` DFT beams carrying the most channel energy."""
    nt = h_downlink.shape[1]
    n = np.arange(nt)
    dft = np.exp(-2j * np.pi * np.outer(n, n) / nt)
    energy = np.sum(np.abs(h_downlink @ dft) ** 2, axis=0)
    return np.sort(np.argsort(-energy, kind="stable")[:ntrx])


def dft_precoder(h_downlink, ntrx, ns, allow_rank_deficient=False):
    h = check_matrix(h_downlink, "h_downlink")
    network = rfpn.dft_network(h.shape[1], ntrx, select_dft_columns(h, ntrx))
    f_bb = baseband_zf(h @ network.f_net, ns, allow_rank_deficient)
    return normalize_power(Precoder(network.f_net, f_bb, DFT_NETWORK), ns), network
