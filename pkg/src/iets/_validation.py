"""Input validation helpers.

``sklearn.utils.check_array`` refuses complex data, so channel matrices and
symbol blocks go through these instead.
"""
import numpy as np

from .exceptions import DimensionError


def check_matrix(a, name="a", allow_empty=False):
    """Return ``a`` as a finite 2-D complex128 array."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise DimensionError(f"{name} must be nonempty, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_block(x, width, name="x"):
    """Validate a vector or a block of row vectors of the given width.

    Returns the block as a complex array with at least two dimensions and a
    flag telling whether the caller passed a single 1-D vector.
    """
    arr = np.asarray(x).astype(np.complex128, copy=False)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    if arr.ndim < 2 or arr.shape[-1] != width:
        raise DimensionError(
            f"{name} must have trailing dimension {width}, got shape {np.shape(x)}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr, single


def check_bits(bits, name="bits"):
    """Return ``bits`` as a uint8 array of zeros and ones."""
    arr = np.asarray(bits)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.uint8, copy=False)
