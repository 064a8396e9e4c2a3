"""Microwave models of the analog RF precoding network (RFPN).

A fully-connected network realizes ``F_RF = F_C @ F_PS @ F_D``: ``Ntrx``
balanced dividers feed ``Nt * Ntrx`` phase shifters whose outputs are merged
per antenna by balanced combiners. A sub-array network drops the combiners,
``F_RF = F_PS @ F_D``, and each chain drives a disjoint block of antennas.

Phase shifter ``k * Nt + i`` connects chain ``k`` to antenna ``i``, so the
phase vector of a fully-connected network is the column-major
vectorization of the ``Nt x Ntrx`` phase pattern.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import InvalidArgumentError, SingularNetworkError
from .validation import check_int, check_matrix, check_vector

__all__ = [
    "FULLY_CONNECTED",
    "SUB_ARRAY",
    "NetworkLosses",
    "PhaseConfig",
    "RfpnMatrices",
    "QuantizationSystem",
    "snap_phases",
    "build_divider",
    "build_phase_shifters",
    "build_combiner",
    "assemble_network",
    "fit_phases_to_target",
    "build_quantization_operator",
    "quantization_error",
    "dft_network",
    "projection_matrix",
]

FULLY_CONNECTED = "fully-connected"
SUB_ARRAY = "sub-array"
_VARIANTS = (FULLY_CONNECTED, SUB_ARRAY)

# Largest Ntrx^2 * Nt^2 accepted by build_quantization_operator.
DEFAULT_OPERATOR_BUDGET = 2**26


@dataclass(frozen=True)
class NetworkLosses:
    """Linear power loss factors (>= 1) of dividers, phase shifters, combiners."""

    l_s: float = 1.0
    l_ps: float = 1.0
    l_c: float = 1.0

    def __post_init__(self):
        for name in ("l_s", "l_ps", "l_c"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 1.0:
                raise InvalidArgumentError(f"{name} must be a finite loss factor >= 1, got {v}")

    @classmethod
    def from_db(cls, divider=0.0, phase_shifter=0.0, combiner=0.0):
        return cls(10 ** (divider / 10), 10 ** (phase_shifter / 10), 10 ** (combiner / 10))

    def to_db(self):
        return {
            "divider": 10 * np.log10(self.l_s),
            "phase_shifter": 10 * np.log10(self.l_ps),
            "combiner": 10 * np.log10(self.l_c),
        }


LOSSLESS = NetworkLosses()


def _check_variant(variant):
    if variant not in _VARIANTS:
        raise InvalidArgumentError(
            f"variant must be one of {_VARIANTS}, got {variant!r}"
        )
    return variant


def snap_phases(phases, resolution_bits):
    """Round phases to the nearest multiple of ``2 pi / 2**bits``, wrapped to [-pi, pi).

    ``resolution_bits=None`` only wraps.
    """
    phases = np.asarray(phases, dtype=float)
    if resolution_bits is not None:
        step = 2 * np.pi / 2 ** check_int(resolution_bits, "resolution_bits", minimum=1)
        phases = np.round(phases / step) * step
    return (phases + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True, eq=False)
class PhaseConfig:
    """Phase-shifter settings, snapped to the ``resolution_bits`` grid on creation."""

    phases: np.ndarray
    resolution_bits: int | None = None

    def __post_init__(self):
        p = check_vector(self.phases, "phases")
        object.__setattr__(self, "phases", snap_phases(p, self.resolution_bits))

    def __len__(self):
        return self.phases.size


@dataclass(frozen=True, eq=False)
class RfpnMatrices:
    """Network stages as sparse matrices plus their dense product ``f_net``."""

    f_d: sp.csr_array
    f_ps: sp.csr_array
    f_c: sp.csr_array
    f_net: np.ndarray
    variant: str

    @property
    def nt(self):
        return self.f_net.shape[0]

    @property
    def ntrx(self):
        return self.f_net.shape[1]


def build_divider(variant, nt, ntrx, losses=LOSSLESS):
    """Balanced power-divider matrix.

    Fully connected: ``sqrt(1/(L_s Nt)) * kron(I_Ntrx, 1_Nt)`` of shape
    ``(Nt Ntrx) x Ntrx``. Sub-array: ``sqrt(1/(L_s Nt/Ntrx))`` times a
    block-diagonal ``Nt x Ntrx`` matrix of ``1_{Nt/Ntrx}`` blocks.
    """
    _check_variant(variant)
    ntrx = check_int(ntrx, "ntrx", minimum=1)
    nt = check_int(nt, "nt", minimum=ntrx)
    if variant == FULLY_CONNECTED:
        block = nt
        scale = np.sqrt(1.0 / (losses.l_s * nt))
    else:
        if nt % ntrx:
            raise InvalidArgumentError(f"sub-array needs ntrx | nt, got nt={nt}, ntrx={ntrx}")
        block = nt // ntrx
        scale = np.sqrt(1.0 / (losses.l_s * block))
    ones = sp.csr_array(np.ones((block, 1)))
    return sp.csr_array(sp.kron(sp.eye_array(ntrx), ones) * scale, dtype=complex)


def build_phase_shifters(config, losses=LOSSLESS, size=None):
    """Diagonal phase-shifter matrix ``sqrt(1/L_ps) * diag(exp(j phi))``."""
    phases = config.phases
    if size is not None and phases.size != size:
        raise InvalidArgumentError(f"expected {size} phases, got {phases.size}")
    diag = np.exp(1j * phases) / np.sqrt(losses.l_ps)
    return sp.csr_array(sp.diags_array(diag, format="csr"))


def build_combiner(nt, ntrx, losses=LOSSLESS):
    """Balanced combiner ``sqrt(1/(L_c Ntrx)) * kron(1_Ntrx^T, I_Nt)``."""
    nt = check_int(nt, "nt", minimum=1)
    ntrx = check_int(ntrx, "ntrx", minimum=1)
    scale = np.sqrt(1.0 / (losses.l_c * ntrx))
    ones = sp.csr_array(np.ones((1, ntrx)))
    return sp.csr_array(sp.kron(ones, sp.eye_array(nt)) * scale, dtype=complex)


def assemble_network(variant, phases, nt, ntrx, losses=LOSSLESS):
    """Build every stage and their literal product for a network variant."""
    _check_variant(variant)
    f_d = build_divider(variant, nt, ntrx, losses)
    if variant == FULLY_CONNECTED:
        f_ps = build_phase_shifters(phases, losses, size=nt * ntrx)
        f_c = build_combiner(nt, ntrx, losses)
    else:
        f_ps = build_phase_shifters(phases, losses, size=nt)
        f_c = sp.csr_array(sp.eye_array(nt, dtype=complex))
    f_net = (f_c @ (f_ps @ f_d)).toarray()
    return RfpnMatrices(f_d=f_d, f_ps=f_ps, f_c=f_c, f_net=f_net, variant=variant)


def fit_phases_to_target(f_target, variant, resolution_bits=None):
    """Phase settings that bring a network closest to ``f_target`` in Frobenius norm.

    With the divider and combiner amplitudes fixed, aligning each shifter's
    phase with its target entry is optimal entry by entry. Fully connected:
    one phase per (antenna, chain) pair. Sub-array: antenna ``i`` takes the
    phase of the target entry of the chain that owns it. Zero-modulus target
    entries map to phase 0.
    """
    _check_variant(variant)
    f_target = check_matrix(f_target, "f_target")
    nt, ntrx = f_target.shape
    if variant == FULLY_CONNECTED:
        phases = np.angle(f_target).ravel(order="F")
    else:
        if nt % ntrx:
            raise InvalidArgumentError(f"sub-array needs ntrx | nt, got nt={nt}, ntrx={ntrx}")
        owner = np.arange(nt) // (nt // ntrx)
        phases = np.angle(f_target[np.arange(nt), owner])
    return PhaseConfig(phases, resolution_bits)


@dataclass(frozen=True, eq=False)
class QuantizationSystem:
    """Sparse operator ``P = kron(F_D^T, F_C)`` with ``P @ vec(F_PS) = vec(F_net)``.

    ``sigma_support`` lists where the phase-shifter diagonal sits inside the
    column-major ``vec(F_PS)``.
    """

    p_operator: sp.coo_array
    sigma_support: np.ndarray
    nt: int
    ntrx: int

    def sigma(self, config, losses=LOSSLESS):
        """Long sparse vector ``vec(F_PS)`` for the given phases."""
        n = self.nt * self.ntrx
        if len(config) != n:
            raise InvalidArgumentError(f"expected {n} phases, got {len(config)}")
        out = np.zeros(n * n, dtype=complex)
        out[self.sigma_support] = np.exp(1j * config.phases) / np.sqrt(losses.l_ps)
        return out

    def row_nonzeros(self):
        return np.bincount(self.p_operator.row, minlength=self.p_operator.shape[0])


def build_quantization_operator(nt, ntrx, losses=LOSSLESS, budget=DEFAULT_OPERATOR_BUDGET):
    """Vectorized fully-connected network, ``vec(F_C F_PS F_D) = P sigma``.

    Raises :class:`InvalidArgumentError` when ``(Nt Ntrx)^2`` exceeds ``budget``.
    """
    nt = check_int(nt, "nt", minimum=1)
    ntrx = check_int(ntrx, "ntrx", minimum=1)
    n = nt * ntrx
    if n * n > budget:
        raise InvalidArgumentError(
            f"quantization operator with {n * n} columns exceeds budget {budget}"
        )
    f_d = build_divider(FULLY_CONNECTED, nt, ntrx, losses)
    f_c = build_combiner(nt, ntrx, losses)
    p = sp.kron(f_d.T, f_c, format="coo")
    return QuantizationSystem(
        p_operator=p, sigma_support=np.arange(n) * (n + 1), nt=nt, ntrx=ntrx
    )


def quantization_error(f_target, matrices):
    """Frobenius distance between a target analog precoder and a network."""
    f_net = matrices.f_net if isinstance(matrices, RfpnMatrices) else np.asarray(matrices)
    f_target = check_matrix(f_target, "f_target", shape=f_net.shape)
    return float(np.linalg.norm(f_target - f_net))


def dft_network(nt, ntrx, column_indices):
    """Butler-style network exposing ``ntrx`` columns of the unitary ``Nt``-point DFT.

    Modeled as a column selector (divider), identity phase stage and the full
    DFT as the coupler stage, so ``f_net[:, m] = exp(-j 2 pi n c_m / Nt) / sqrt(Nt)``.
    """
    nt = check_int(nt, "nt", minimum=1)
    ntrx = check_int(ntrx, "ntrx", minimum=1, maximum=nt)
    cols = np.asarray(column_indices, dtype=int).ravel()
    if cols.size != ntrx:
        raise InvalidArgumentError(f"expected {ntrx} column indices, got {cols.size}")
    if np.any(cols < 0) or np.any(cols >= nt):
        raise InvalidArgumentError(f"column indices must lie in [0, {nt})")
    if np.unique(cols).size != cols.size:
        raise InvalidArgumentError("duplicate DFT column index")
    n = np.arange(nt)
    dft = np.exp(-2j * np.pi * np.outer(n, n) / nt) / np.sqrt(nt)
    f_d = sp.csr_array((np.ones(ntrx, dtype=complex), (cols, np.arange(ntrx))), shape=(nt, ntrx))
    f_ps = sp.csr_array(sp.eye_array(nt, dtype=complex))
    f_c = sp.csr_array(dft)
    return RfpnMatrices(f_d=f_d, f_ps=f_ps, f_c=f_c, f_net=dft[:, cols], variant="dft-columns")


def projection_matrix(f_net, rtol=1e-10):
    """Orthogonal projector ``F (F^H F)^{-1} F^H`` onto the network's column space.

    Evaluated as ``Q Q^H`` from the thin SVD, which is the same matrix without
    forming the Gram inverse.
    """
    f = f_net.f_net if isinstance(f_net, RfpnMatrices) else f_net
    f = check_matrix(f, "f_net")
    if f.shape[0] < f.shape[1]:
        raise SingularNetworkError(f"f_net of shape {f.shape} cannot have full column rank")
    q, s, _ = np.linalg.svd(f, full_matrices=False)
    if s[0] == 0 or s[-1] <= rtol * s[0]:
        raise SingularNetworkError(f"f_net of shape {f.shape} is not full column rank")
    p = q @ q.conj().T
    return 0.5 * (p + p.conj().T)
