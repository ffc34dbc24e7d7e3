"""Light field container, two-plane parametrization and view correspondence.

Conventions used everywhere in this package: images are numpy arrays indexed
[v, u] with u growing rightward and v downward; view grids are indexed
[t, s] with s the horizontal view axis (paired with u) and t the vertical
one (paired with v). All indices are zero-based.
"""
from dataclasses import dataclass

import numpy as np

#: Default reference view in a 4x4 grid (near-central, keeps view offsets small).
DEFAULT_REF = (1, 1)


@dataclass(frozen=True)
class LightField:
    """An n_rows x n_cols grid of equally sized single-channel views.

    views has shape (n_rows, n_cols, height, width); view (s, t) lives at
    views[t, s].
    """

    views: np.ndarray
    ref_s: int = DEFAULT_REF[0]
    ref_t: int = DEFAULT_REF[1]

    def __post_init__(self):
        if self.views.ndim != 4:
            raise ValueError(f"views must be 4-D (rows, cols, height, width), got {self.views.shape}")
        rows, cols, h, w = self.views.shape
        if h < 1 or w < 1 or rows < 1 or cols < 1:
            raise ValueError(f"empty light field {self.views.shape}")
        if not (0 <= self.ref_s < cols and 0 <= self.ref_t < rows):
            raise ValueError(f"reference ({self.ref_s},{self.ref_t}) outside {rows}x{cols} grid")

    @property
    def grid_rows(self):
        return self.views.shape[0]

    @property
    def grid_cols(self):
        return self.views.shape[1]

    @property
    def height(self):
        return self.views.shape[2]

    @property
    def width(self):
        return self.views.shape[3]

    def view(self, s, t):
        """View image at horizontal index s, vertical index t."""
        return self.views[t, s]

    @property
    def reference(self):
        return self.views[self.ref_t, self.ref_s]


@dataclass(frozen=True)
class CameraGeometry:
    """Intrinsics needed for disparity-to-depth conversion.

    baseline_m is the distance between two adjacent views on one axis;
    axis_span is the number of view intervals between the extreme views on
    one axis (grid size minus one), so baseline_m * axis_span is the
    maximum-distance baseline used in the depth formula.
    """

    focal_px: float
    baseline_m: float
    axis_span: int = 3

    def __post_init__(self):
        if self.focal_px <= 0:
            raise ValueError("focal_px must be positive")
        if self.baseline_m <= 0:
            raise ValueError("baseline_m must be positive")
        if self.axis_span < 1:
            raise ValueError("axis_span must be at least 1")

    @property
    def max_baseline_m(self):
        return self.baseline_m * self.axis_span


def correspond(u, v, ref_s, ref_t, s, t, d):
    """Pixel position in view (s, t) matching reference pixel (u, v) at disparity d.

    Returns real coordinates (u', v'); they may fall outside the image, which
    is the caller's concern.
    """
    return u + (ref_s - s) * d, v + (ref_t - t) * d


def _round_half_away(x):
    return np.trunc(x + np.copysign(0.5, x))


def sample(img, u, v, policy="nearest"):
    """Read img at real coordinates (u, v); None when outside the image.

    nearest rounds half away from zero; bilinear interpolates the 4
    surrounding pixels (exact at grid points).
    """
    h, w = img.shape[:2]
    if policy == "nearest":
        ui = int(_round_half_away(float(u)))
        vi = int(_round_half_away(float(v)))
        if not (0 <= ui < w and 0 <= vi < h):
            return None
        return img[vi, ui]
    if policy == "bilinear":
        if not (0.0 <= u <= w - 1 and 0.0 <= v <= h - 1):
            return None
        u0 = int(np.floor(u))
        v0 = int(np.floor(v))
        u1 = min(u0 + 1, w - 1)
        v1 = min(v0 + 1, h - 1)
        fu = u - u0
        fv = v - v0
        top = (1.0 - fu) * float(img[v0, u0]) + fu * float(img[v0, u1])
        bot = (1.0 - fu) * float(img[v1, u0]) + fu * float(img[v1, u1])
        return (1.0 - fv) * top + fv * bot
    raise ValueError(f"unknown sampling policy {policy!r}")
