"""Rectification by precomputed per-view remap tables.

Calibration estimation happens offline elsewhere; this module only applies
tables: for every rectified pixel the table stores the real-valued source
coordinate to sample (bilinearly) from the raw view. The coordinate pair
(-1, -1) marks pixels with no valid source.
"""
from dataclasses import dataclass

import numpy as np

#: Source coordinate marking an unmapped rectified pixel.
INVALID_COORD = -1.0


@dataclass(frozen=True)
class RemapTable:
    """Per-view X/Y source sampling grids, shape (n_views, height, width).

    Views are ordered row-major over (t, s): view_index = t * grid_cols + s.
    """

    grid_rows: int
    grid_cols: int
    map_x: np.ndarray
    map_y: np.ndarray

    def __post_init__(self):
        if self.map_x.shape != self.map_y.shape or self.map_x.ndim != 3:
            raise ValueError("map_x and map_y must both have shape (n_views, height, width)")
        if self.map_x.shape[0] != self.grid_rows * self.grid_cols:
            raise ValueError(
                f"{self.map_x.shape[0]} map views inconsistent with "
                f"{self.grid_rows}x{self.grid_cols} grid"
            )

    @property
    def n_views(self):
        return self.map_x.shape[0]

    @property
    def height(self):
        return self.map_x.shape[1]

    @property
    def width(self):
        return self.map_x.shape[2]

    def view_index(self, s, t):
        return t * self.grid_cols + s


def identity_remap(width, height, grid_rows=4, grid_cols=4):
    """Table mapping every rectified pixel to itself, for every view."""
    if width <= 0 or height <= 0:
        raise ValueError(f"dimensions must be positive, got {width}x{height}")
    n = grid_rows * grid_cols
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float32), np.arange(height, dtype=np.float32))
    return RemapTable(
        grid_rows=grid_rows,
        grid_cols=grid_cols,
        map_x=np.broadcast_to(xs, (n, height, width)).copy(),
        map_y=np.broadcast_to(ys, (n, height, width)).copy(),
    )


def apply_remap(img, table, view_index):
    """Resample one view through its remap table.

    Returns (rectified, valid): rectified pixels with an invalid or
    out-of-image source coordinate are 0 and flagged False in valid.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D view, got shape {img.shape}")
    if not (0 <= view_index < table.n_views):
        raise ValueError(f"view index {view_index} outside 0..{table.n_views - 1}")
    h, w = img.shape
    mx = table.map_x[view_index].astype(np.float64)
    my = table.map_y[view_index].astype(np.float64)

    valid = (
        np.isfinite(mx)
        & np.isfinite(my)
        & (mx >= 0.0)
        & (mx <= w - 1)
        & (my >= 0.0)
        & (my <= h - 1)
    )
    x = np.where(valid, mx, 0.0)
    y = np.where(valid, my, 0.0)

    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0

    imgf = img.astype(np.float64)
    top = imgf[y0, x0] * (1.0 - fx) + imgf[y0, x1] * fx
    bot = imgf[y1, x0] * (1.0 - fx) + imgf[y1, x1] * fx
    rect = top * (1.0 - fy) + bot * fy
    rect[~valid] = 0.0

    if np.issubdtype(img.dtype, np.floating):
        return rect.astype(img.dtype), valid
    rect = np.floor(rect + 0.5)
    info = np.iinfo(img.dtype)
    return np.clip(rect, info.min, info.max).astype(img.dtype), valid


def rectify_lightfield(views, table):
    """Apply the table to a (rows, cols, h, w) view stack; returns (rectified, valid)."""
    rows, cols = views.shape[:2]
    if rows != table.grid_rows or cols != table.grid_cols:
        raise ValueError(
            f"light field grid {rows}x{cols} does not match table "
            f"{table.grid_rows}x{table.grid_cols}"
        )
    out = np.empty((rows, cols, table.height, table.width), dtype=views.dtype)
    valid = np.empty((rows, cols, table.height, table.width), dtype=bool)
    for t in range(rows):
        for s in range(cols):
            out[t, s], valid[t, s] = apply_remap(views[t, s], table, table.view_index(s, t))
    return out, valid
