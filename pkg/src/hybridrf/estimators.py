"""scikit-learn style wrapper around the precoder designs.

``fit`` takes one downlink channel matrix (Nr x Nt) and designs the
precoder; ``transform`` maps symbol vectors (n_samples x Ns) to transmit
vectors (n_samples x Nt); ``score`` is the achievable rate in bits/s/Hz.
Parameters follow the estimator conventions, so ``get_params`` /
``set_params`` / ``clone`` work as usual.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import metrics, precoding, rfpn
from .channel import ArrayGeometry, svd_partition
from .exceptions import InvalidArgumentError
from .validation import check_matrix

__all__ = ["HybridPrecoder"]


class HybridPrecoder(TransformerMixin, BaseEstimator):
    """Precoder design as an estimator.

    Parameters
    ----------
    method : str
        One of :data:`hybridrf.precoding.METHODS`.
    ntrx : int
        Transceiver chains (ignored by ``"optimal-svd"``).
    n_streams : int or None
        Data streams; ``None`` means ``min(ntrx, Nr)``.
    codebook_bits : int
        Angle-grid resolution of the ideal-hybrid dictionary.
    phase_bits : int or None
        Phase-shifter resolution of the realistic networks.
    tx_geometry : ArrayGeometry or None
        Transmit array; ``None`` picks a square planar array when ``Nt`` is
        a perfect square and a linear array otherwise.
    losses : NetworkLosses
        Component insertion losses of the realistic networks.

    Attributes
    ----------
    precoder_ : Precoder
    f_rf_, f_bb_ : ndarray
    network_ : RfpnMatrices or None
    channel_ : ndarray
    """

    def __init__(self, method=precoding.IDEAL_HYBRID, ntrx=8, n_streams=None,
                 codebook_bits=6, phase_bits=6, tx_geometry=None, losses=rfpn.LOSSLESS):
        self.method = method
        self.ntrx = ntrx
        self.n_streams = n_streams
        self.codebook_bits = codebook_bits
        self.phase_bits = phase_bits
        self.tx_geometry = tx_geometry
        self.losses = losses

    def fit(self, X, y=None):
        """Design the precoder for the channel ``X`` (Nr x Nt complex)."""
        h = check_matrix(X, "X")
        nr, nt = h.shape
        if self.method not in precoding.METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}")
        ns = min(self.ntrx, nr) if self.n_streams is None else self.n_streams
        if not 1 <= ns <= min(self.ntrx, nr, nt):
            raise InvalidArgumentError(f"n_streams must lie in [1, min(ntrx, Nr)], got {ns}")
        geometry = self.tx_geometry or ArrayGeometry.square_or_linear(nt)
        if geometry.n_elements != nt:
            raise InvalidArgumentError("tx_geometry does not match the channel's Nt")

        svd = svd_partition(h, ns)
        network = None
        if self.method == precoding.OPTIMAL:
            pre = precoding.optimal_precoder(svd)
        elif self.method == precoding.DFT_NETWORK:
            pre, network = precoding.dft_precoder(h, self.ntrx, ns)
        else:
            codebook = precoding.build_codebook(geometry, self.codebook_bits)
            pre = precoding.ideal_hybrid_omp(svd, codebook, self.ntrx)
            if self.method != precoding.IDEAL_HYBRID:
                variant = (rfpn.FULLY_CONNECTED if self.method == precoding.REALISTIC_FC
                           else rfpn.SUB_ARRAY)
                pre, network = precoding.realistic_precoder(
                    h, pre.f_rf, variant, ns, self.phase_bits, self.losses
                )
        self.precoder_ = pre
        self.f_rf_ = pre.f_rf
        self.f_bb_ = pre.f_bb
        self.network_ = network
        self.channel_ = h
        self.n_features_in_ = ns
        return self

    def transform(self, X):
        """Map rows of symbols (n_samples x Ns) to antenna signals (n_samples x Nt)."""
        check_is_fitted(self, "precoder_")
        s = np.atleast_2d(np.asarray(X, dtype=complex))
        if s.ndim != 2 or s.shape[1] != self.precoder_.ns:
            raise InvalidArgumentError(f"expected symbols with {self.precoder_.ns} columns")
        return s @ self.precoder_.matrix.T

    def score(self, X=None, y=None, snr_db=10.0):
        """Achievable rate (bits/s/Hz) on ``X``, or on the fitted channel if ``X`` is None."""
        check_is_fitted(self, "precoder_")
        h = self.channel_ if X is None else check_matrix(X, "X")
        snr = metrics.SnrPoint.from_db(snr_db, self.precoder_.ns)
        return metrics.mutual_information_direct(h, self.precoder_, snr)
