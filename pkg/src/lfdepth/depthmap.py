"""Disparity-to-depth conversion and target-range filtering.

Depth and disparity maps are float32 arrays; NaN marks invalid pixels.
"""
import numpy as np


def disparity_to_depth(disparity, geometry):
    """Z = focal * max_baseline / d, in meters; d <= 0 or NaN gives NaN."""
    d = np.asarray(disparity, dtype=np.float32)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (geometry.focal_px * geometry.max_baseline_m) / d
    z = np.where(np.isfinite(d) & (d > 0), z, np.nan)
    return z.astype(np.float32)


def range_filter(depth, z_min=0.5, z_max=2.0):
    """Invalidate depths outside [z_min, z_max] (inclusive); others pass through."""
    if z_min >= z_max:
        raise ValueError(f"z_min ({z_min}) must be below z_max ({z_max})")
    z = np.asarray(depth, dtype=np.float32)
    keep = np.isfinite(z) & (z >= z_min) & (z <= z_max)
    return np.where(keep, z, np.float32(np.nan)).astype(np.float32)
