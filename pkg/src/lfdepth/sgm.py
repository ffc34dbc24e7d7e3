"""Semi-global path aggregation and winner-takes-all extraction.

Each direction sweep accumulates, per pixel and hypothesis, the cost plus
the cheapest transition from the predecessor pixel along the path: staying
at the same hypothesis is free, moving by one costs p1, any larger jump
costs p2 on top of the predecessor's minimum. Sweeps run over the full
hypothesis axis, padded entries included, and are summed over all
directions before the per-pixel argmin.
"""
from dataclasses import dataclass, field

import numpy as np

from lfdepth import _backend

DIRECTIONS_8 = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1))
DIRECTIONS_4 = DIRECTIONS_8[:4]

_INT32_MAX = np.iinfo(np.int32).max


@dataclass(frozen=True)
class SgmParams:
    p1: int = 6
    p2: int = 96
    directions: tuple = field(default=DIRECTIONS_8)

    def __post_init__(self):
        if self.p1 < 0 or self.p2 < 0:
            raise ValueError("penalties must be non-negative")
        if self.p2 < self.p1:
            raise ValueError(f"p2 ({self.p2}) must be at least p1 ({self.p1})")
        if not self.directions:
            raise ValueError("at least one traversal direction is required")
        for r in self.directions:
            if r == (0, 0):
                raise ValueError("direction (0, 0) is not a path")


def _check_growth(volume, params):
    # Longest path is bounded by h + w pixels; every step can add at most
    # c_max + p2, so this guards the int32 accumulator.
    h, w = volume.costs.shape[:2]
    worst = (h + w) * (volume.c_max + params.p2 + 1)
    if worst > _INT32_MAX:
        raise OverflowError(
            f"path costs may overflow int32 for {w}x{h} at p2={params.p2}; reduce p2"
        )


def aggregate_path(volume, direction, params):
    """Path cost volume L_r for one traversal direction (du, dv)."""
    du, dv = direction
    if (du, dv) == (0, 0):
        raise ValueError("direction (0, 0) is not a path")
    _check_growth(volume, params)
    out = np.empty_like(volume.costs)
    _backend.kernels().sgm_direction(volume.costs, int(du), int(dv),
                                     int(params.p1), int(params.p2), out)
    return out


def sgm_sum(volume, params):
    """Sum of the path cost volumes over all configured directions (int64)."""
    _check_growth(volume, params)
    total = np.zeros(volume.costs.shape, dtype=np.int64)
    out = np.empty_like(volume.costs)
    for du, dv in params.directions:
        _backend.kernels().sgm_direction(volume.costs, int(du), int(dv),
                                         int(params.p1), int(params.p2), out)
        total += out
    return total


def wta(volume, summed=None):
    """Winner-takes-all disparity map (float32, NaN where unsupported).

    Ties break toward the smaller hypothesis. A pixel is invalid when its
    base cost volume offers no hypothesis below the padding value c_max.
    """
    costs = volume.costs if summed is None else summed
    best = np.argmin(costs, axis=2)
    disp = (volume.d_min + best).astype(np.float32)
    no_support = volume.costs.min(axis=2) >= volume.c_max
    disp[no_support] = np.nan
    return disp
