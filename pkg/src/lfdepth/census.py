"""Census transform and Hamming distance between codewords.

A pixel's codeword concatenates the comparison of the pixel against each
window neighbor (raster order, center skipped, first neighbor in the most
significant bit): bit 0 when center <= neighbor, 1 when strictly greater.
Equality therefore contributes a zero bit, and any strictly increasing
intensity remap leaves the field unchanged.
"""
from dataclasses import dataclass

import numpy as np

from lfdepth import _backend, _kernels_py

_CODE_DTYPES = {1: np.uint8, 2: np.uint32, 3: np.uint64}


@dataclass(frozen=True)
class CensusField:
    """Per-pixel codewords of one view; nbits = (2*radius+1)^2 - 1."""

    codes: np.ndarray
    window_radius: int

    @property
    def nbits(self):
        r = self.window_radius
        return (2 * r + 1) ** 2 - 1

    @property
    def height(self):
        return self.codes.shape[0]

    @property
    def width(self):
        return self.codes.shape[1]


def census_transform(img, window_radius=1):
    """Census-transform an 8-bit grayscale image (default 3x3 window)."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {img.shape}")
    if window_radius not in _CODE_DTYPES:
        raise ValueError(f"window_radius must be 1, 2 or 3, got {window_radius}")
    h, w = img.shape
    side = 2 * window_radius + 1
    if h < side or w < side:
        raise ValueError(f"image {w}x{h} smaller than the {side}x{side} census window")
    img = np.ascontiguousarray(img, dtype=np.uint8)
    out = np.empty((h, w), dtype=_CODE_DTYPES[window_radius])
    _backend.kernels().census_codes(img, window_radius, out)
    return CensusField(codes=out, window_radius=window_radius)


def census_lightfield(lf, window_radius=1):
    """Census fields for every view of a LightField, indexed [t][s]."""
    return [
        [census_transform(lf.views[t, s], window_radius) for s in range(lf.grid_cols)]
        for t in range(lf.grid_rows)
    ]


def hamming(a, b):
    """Number of differing bit positions between two equal-width codewords.

    Accepts two CensusFields (widths checked), two integer arrays of the
    same dtype, or two plain ints.
    """
    if isinstance(a, CensusField) or isinstance(b, CensusField):
        if not (isinstance(a, CensusField) and isinstance(b, CensusField)):
            raise TypeError("cannot mix CensusField and raw codewords")
        if a.nbits != b.nbits:
            raise ValueError(f"codeword width mismatch: {a.nbits} vs {b.nbits}")
        return _kernels_py.popcount(a.codes ^ b.codes)
    if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
        return (int(a) ^ int(b)).bit_count()
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype != b.dtype:
        raise ValueError(f"codeword width mismatch: {a.dtype} vs {b.dtype}")
    return _kernels_py.popcount(a ^ b)
