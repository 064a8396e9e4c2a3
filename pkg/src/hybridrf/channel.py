"""Narrow-band clustered (Saleh-Valenzuela) channel model.

The downlink channel seen by an ``Nr``-antenna user from an ``Nt``-antenna
base station is

    h = sqrt(Nt * Nr / L) * sum_l alpha_l * a_r(aoa_l) * a_t(aod_l)^H

with unit-norm array steering vectors ``a_r`` and ``a_t``.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError
from .validation import check_int, check_matrix, check_scalar

__all__ = [
    "ArrayGeometry",
    "PathSet",
    "ChannelRealization",
    "ChannelSvd",
    "steering_vector",
    "steering_matrix",
    "sample_paths",
    "assemble_channel",
    "svd_partition",
]

ULA = "uniform-linear"
UPA = "uniform-planar"


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array layout.

    Element ``(m, n)`` of a planar array sits at index ``m * elements_y + n``
    of the flattened response. ``spacing`` is in carrier wavelengths.
    """

    kind: str = ULA
    elements_x: int = 1
    elements_y: int = 1
    spacing: float = 0.5

    def __post_init__(self):
        if self.kind not in (ULA, UPA):
            raise InvalidArgumentError(f"unknown array kind {self.kind!r}")
        check_int(self.elements_x, "elements_x", minimum=1)
        check_int(self.elements_y, "elements_y", minimum=1)
        if self.kind == ULA and self.elements_y != 1:
            raise InvalidArgumentError("a linear array has elements_y == 1")
        check_scalar(self.spacing, "spacing", minimum=0.0, strict=True)

    @property
    def n_elements(self):
        return self.elements_x * self.elements_y

    @classmethod
    def linear(cls, n, spacing=0.5):
        return cls(ULA, n, 1, spacing)

    @classmethod
    def planar(cls, nx, ny, spacing=0.5):
        return cls(UPA, nx, ny, spacing)

    @classmethod
    def square_or_linear(cls, n, spacing=0.5):
        """Square planar array when ``n`` is a perfect square, else linear."""
        side = int(round(np.sqrt(n)))
        if side > 1 and side * side == n:
            return cls.planar(side, side, spacing)
        return cls.linear(n, spacing)


@dataclass(frozen=True, eq=False)
class PathSet:
    """Per-ray complex gains and departure/arrival angles (radians)."""

    gains: np.ndarray
    aod_azimuth: np.ndarray
    aod_elevation: np.ndarray
    aoa_azimuth: np.ndarray
    aoa_elevation: np.ndarray

    def __post_init__(self):
        n = np.shape(self.gains)
        if len(n) != 1 or n[0] < 1:
            raise InvalidArgumentError("a PathSet needs at least one path")
        for name in ("aod_azimuth", "aod_elevation", "aoa_azimuth", "aoa_elevation"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != n or not np.all(np.isfinite(a)):
                raise InvalidArgumentError(f"{name} must be finite with shape {n}")

    def __len__(self):
        return len(self.gains)

    def __eq__(self, other):
        if not isinstance(other, PathSet):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("gains", "aod_azimuth", "aod_elevation", "aoa_azimuth", "aoa_elevation")
        )


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h_downlink: np.ndarray  # Nr x Nt
    source_paths: PathSet

    @property
    def nr(self):
        return self.h_downlink.shape[0]

    @property
    def nt(self):
        return self.h_downlink.shape[1]


@dataclass(frozen=True, eq=False)
class ChannelSvd:
    """SVD ``h = u @ diag(sigma) @ v^H`` split into the ``ns`` leading modes.

    ``v`` holds the right singular vectors of the downlink matrix, so ``v1``
    is the unconstrained optimal precoder.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    ns: int
    v1: np.ndarray = field(init=False)
    sigma1: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "v1", self.v[:, : self.ns])
        object.__setattr__(self, "sigma1", self.sigma[: self.ns])

    @property
    def v2(self):
        return self.v[:, self.ns:]


def _check_angle(x, name):
    x = float(x)
    if not np.isfinite(x):
        raise InvalidArgumentError(f"{name} must be finite, got {x}")
    return x


def steering_vector(geometry, azimuth, elevation=0.0):
    """Unit-norm array response toward ``(azimuth, elevation)``.

    Linear arrays ignore ``elevation``:
    ``a_n = exp(j 2 pi d n sin(az)) / sqrt(N)``. Planar arrays use
    ``a_{m,n} = exp(j 2 pi d (m sin(az) sin(el) + n cos(el))) / sqrt(M N)``.
    """
    az = _check_angle(azimuth, "azimuth")
    el = _check_angle(elevation, "elevation")
    return steering_matrix(geometry, np.array([az]), np.array([el]))[:, 0]


def steering_matrix(geometry, azimuth, elevation):
    """Stack steering vectors for arrays of angles into an ``N x K`` matrix."""
    az = np.atleast_1d(np.asarray(azimuth, dtype=float))
    el = np.atleast_1d(np.asarray(elevation, dtype=float))
    if not (np.all(np.isfinite(az)) and np.all(np.isfinite(el))):
        raise InvalidArgumentError("steering angles must be finite")
    az, el = np.broadcast_arrays(az, el)
    k = 2 * np.pi * geometry.spacing
    m = np.arange(geometry.elements_x)[:, None]
    if geometry.kind == ULA:
        phase = k * m * np.sin(az)[None, :]
    else:
        n = np.arange(geometry.elements_y)[:, None]
        px = k * m * (np.sin(az) * np.sin(el))[None, :]
        py = k * n * np.cos(el)[None, :]
        phase = (px[:, None, :] + py[None, :, :]).reshape(geometry.n_elements, -1)
    return np.exp(1j * phase) / np.sqrt(geometry.n_elements)


def _wrap_azimuth(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def sample_paths(l_count, angular_spread, rng, n_clusters=1):
    """Draw ``l_count`` rays grouped into ``n_clusters`` clusters.

    Gains are standard circularly-symmetric complex normal. For each of the
    four angle types every cluster draws a mean uniformly over the angle
    domain; rays are assigned to clusters in contiguous, near-equal blocks
    and add a Laplacian deviation whose standard deviation is
    ``angular_spread`` (radians). With the default single cluster all rays
    share the means. Azimuths wrap into ``[-pi, pi)``; elevations are
    clipped to ``[-pi/2, pi/2]``.
    """
    l_count = check_int(l_count, "l_count", minimum=1)
    angular_spread = check_scalar(angular_spread, "angular_spread", minimum=0.0)
    scale = angular_spread / np.sqrt(2.0)

    gains = (rng.standard_normal(l_count) + 1j * rng.standard_normal(l_count)) / np.sqrt(2.0)
    n_clusters = check_int(n_clusters, "n_clusters", minimum=1, maximum=l_count)
    az_means = rng.uniform(-np.pi, np.pi, size=(2, n_clusters))
    el_means = rng.uniform(-np.pi / 2, np.pi / 2, size=(2, n_clusters))
    dev = rng.laplace(0.0, scale, size=(4, l_count))
    cluster = np.arange(l_count) * n_clusters // l_count

    return PathSet(
        gains=gains,
        aod_azimuth=_wrap_azimuth(az_means[0, cluster] + dev[0]),
        aod_elevation=np.clip(el_means[0, cluster] + dev[1], -np.pi / 2, np.pi / 2),
        aoa_azimuth=_wrap_azimuth(az_means[1, cluster] + dev[2]),
        aoa_elevation=np.clip(el_means[1, cluster] + dev[3], -np.pi / 2, np.pi / 2),
    )


def assemble_channel(paths, tx, rx):
    """Sum the rank-one ray contributions into an ``Nr x Nt`` downlink matrix."""
    a_t = steering_matrix(tx, paths.aod_azimuth, paths.aod_elevation)
    a_r = steering_matrix(rx, paths.aoa_azimuth, paths.aoa_elevation)
    scale = np.sqrt(tx.n_elements * rx.n_elements / len(paths))
    h = scale * (a_r * paths.gains[None, :]) @ a_t.conj().T
    return ChannelRealization(h_downlink=h, source_paths=paths)


def svd_partition(channel, ns):
    """Full SVD of the downlink matrix with the ``ns`` leading modes split off."""
    h = channel.h_downlink if isinstance(channel, ChannelRealization) else channel
    h = check_matrix(h, "h_downlink")
    ns = check_int(ns, "ns", minimum=1, maximum=min(h.shape))
    u, s, vh = np.linalg.svd(h, full_matrices=True)
    return ChannelSvd(u=u, sigma=s, v=vh.conj().T, ns=ns)
