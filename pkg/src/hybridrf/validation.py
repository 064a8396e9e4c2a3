"""Input validation helpers shared by the estimators and free functions."""
import numbers

import numpy as np

from .exceptions import InvalidArgumentError


def check_matrix(a, name="array", shape=None, dtype=complex):
    """Return ``a`` as a finite 2-D array, optionally checking its shape.

    ``shape`` entries set to ``None`` are not checked.
    """
    arr = np.asarray(a, dtype=dtype)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if shape is not None:
        for axis, (got, want) in enumerate(zip(arr.shape, shape)):
            if want is not None and got != want:
                raise InvalidArgumentError(
                    f"{name} has shape {arr.shape}, expected {shape} (axis {axis})"
                )
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def check_vector(a, name="vector", size=None, dtype=float):
    arr = np.asarray(a, dtype=dtype)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if size is not None and arr.size != size:
        raise InvalidArgumentError(f"{name} has length {arr.size}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def check_int(value, name, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise InvalidArgumentError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise InvalidArgumentError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_scalar(value, name, minimum=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidArgumentError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")
    if minimum is not None:
        if strict and value <= minimum:
            raise InvalidArgumentError(f"{name} must be > {minimum}, got {value}")
        if not strict and value < minimum:
            raise InvalidArgumentError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_full_column_rank(f, name="network", rtol=1e-10):
    """Raise :class:`SingularNetworkError` unless ``f`` has full column rank.

    Rank is judged by the ratio of the smallest to the largest singular value.
    Returns the singular values.
    """
    from .exceptions import SingularNetworkError

    s = np.linalg.svd(f, compute_uv=False)
    if f.shape[0] < f.shape[1] or s.size == 0 or s[0] == 0 or s[-1] <= rtol * s[0]:
        raise SingularNetworkError(f"{name} of shape {f.shape} is not full column rank")
    return s
