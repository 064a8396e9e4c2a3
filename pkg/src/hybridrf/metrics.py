"""Mutual information of precoded links and its decomposition.

For a precoder ``F = F_RF F_BB`` with least-squares digital stage,
``F = P_RF V1`` and, dropping the cross terms with the null-space modes,

    I = log2|I + g S1^2| + log2|I - (I + g S1^2)^{-1} g S1^2 (I - M M^H)|

with ``M = V1^H P_RF V1`` and ``g`` the per-stream SNR. The first term is
the unconstrained rate, the second the loss caused by the analog network.
The ``"unsquared"`` form replaces ``I - M M^H`` by ``I - M``.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .validation import check_matrix, check_scalar, check_vector

__all__ = [
    "EXACT",
    "UNSQUARED",
    "SnrPoint",
    "MiBreakdown",
    "logdet_hpd",
    "mutual_information_direct",
    "mutual_information_decomposed",
    "quantization_loss_report",
]

EXACT = "exact"
UNSQUARED = "unsquared"
_LN2 = np.log(2.0)


@dataclass(frozen=True)
class SnrPoint:
    """Linear SNR ``rho / sigma_n^2`` and the per-stream ``gamma_s = snr / Ns``."""

    rho_over_noise: float
    ns: int

    def __post_init__(self):
        check_scalar(self.rho_over_noise, "rho_over_noise", minimum=0.0, strict=True)
        if self.ns < 1:
            raise InvalidArgumentError("ns must be >= 1")

    @property
    def gamma_s(self):
        return self.rho_over_noise / self.ns

    @property
    def snr_db(self):
        return 10 * np.log10(self.rho_over_noise)

    @classmethod
    def from_db(cls, snr_db, ns):
        return cls(10 ** (float(snr_db) / 10), int(ns))


@dataclass(frozen=True)
class MiBreakdown:
    total_bits: float
    ideal_term: float
    loss_term: float


def logdet_hpd(a):
    """Natural log-determinant of a Hermitian positive-definite matrix via Cholesky."""
    a = 0.5 * (a + a.conj().T)
    c = np.linalg.cholesky(a)
    return 2.0 * float(np.sum(np.log(np.real(np.diagonal(c)))))


def _gamma(snr):
    if isinstance(snr, SnrPoint):
        return snr.gamma_s
    return check_scalar(snr, "gamma_s", minimum=0.0)


def mutual_information_direct(h_downlink, precoder, snr):
    """``log2 det(I + gamma_s G G^H)`` in bits/s/Hz with ``G = h F_RF F_BB``.

    ``precoder`` is a :class:`~hybridrf.precoding.Precoder` or an ``Nt x Ns``
    matrix. ``snr`` is an :class:`SnrPoint` or the per-stream SNR directly.
    """
    h = check_matrix(h_downlink, "h_downlink")
    f = precoder.matrix if hasattr(precoder, "matrix") else precoder
    f = check_matrix(f, "precoder", shape=(h.shape[1], None))
    g = h @ f
    gamma = _gamma(snr)
    # Sylvester: det(I + gamma G G^H) = det(I + gamma G^H G); use the smaller side.
    gram = g.conj().T @ g if g.shape[1] <= g.shape[0] else g @ g.conj().T
    a = np.eye(gram.shape[0]) + gamma * gram
    return max(logdet_hpd(a) / _LN2, 0.0)


def _check_projector(p, tol=1e-8):
    scale = max(np.linalg.norm(p), 1.0)
    if np.linalg.norm(p - p.conj().T) > tol * scale:
        raise InvalidArgumentError("p_rf is not Hermitian")
    if np.linalg.norm(p @ p - p) > tol * scale:
        raise InvalidArgumentError("p_rf is not idempotent")


def mutual_information_decomposed(sigma1, v1, p_rf, snr, form=EXACT):
    """Split the rate into the unconstrained term and the network loss term."""
    if form not in (EXACT, UNSQUARED):
        raise InvalidArgumentError(f"form must be {EXACT!r} or {UNSQUARED!r}")
    sigma1 = check_vector(sigma1, "sigma1")
    v1 = check_matrix(v1, "v1", shape=(None, sigma1.size))
    nt = v1.shape[0]
    p_rf = check_matrix(p_rf, "p_rf", shape=(nt, nt))
    _check_projector(p_rf)
    gamma = _gamma(snr)

    s2 = gamma * sigma1**2
    ideal = float(np.sum(np.log1p(s2))) / _LN2
    m = v1.conj().T @ p_rf @ v1
    eye = np.eye(sigma1.size)
    inner = eye - m @ m.conj().T if form == EXACT else eye - m
    a = eye - (s2 / (1.0 + s2))[:, None] * inner
    sign, logabs = np.linalg.slogdet(a)
    if np.real(sign) <= 0:
        raise InvalidArgumentError("loss-term determinant is not positive")
    loss = min(logabs / _LN2, 0.0)
    return MiBreakdown(total_bits=ideal + loss, ideal_term=ideal, loss_term=loss)


def quantization_loss_report(svd, networks, snr_grid_db, form=EXACT):
    """Breakdown for every (network, SNR) pair as a nested list ``[network][snr]``.

    ``networks`` holds :class:`~hybridrf.rfpn.RfpnMatrices` or raw ``Nt x Ntrx``
    matrices.
    """
    from .rfpn import projection_matrix

    rows = []
    for net in networks:
        p = projection_matrix(net)
        rows.append([
            mutual_information_decomposed(
                svd.sigma1, svd.v1, p, SnrPoint.from_db(snr, svd.ns), form
            )
            for snr in snr_grid_db
        ])
    return rows
