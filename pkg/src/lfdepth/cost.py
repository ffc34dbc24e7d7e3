"""Matching cost construction over the light field.

The aggregated cost of a pixel at hypothesis d sums census Hamming distances
between the reference view and every other view at the corresponding
position, skipping views whose correspondence leaves the image and rescaling
the sum by total/valid view count so border pixels are comparable to
interior ones. A coarse pass over the four maximal-offset views on the
reference row and column bounds the per-pixel search range for the full
pass.
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from lfdepth import _backend

#: pairwise_cost marker for pixels whose correspondence leaves the view.
NO_CONTRIBUTION = -1

#: Minimum number of in-bounds views for an aggregated hypothesis to count.
DEFAULT_MIN_VALID_VIEWS = 4

#: Coarse pass keeps hypotheses with as few as this many of its 4 views in
#: bounds, so border pixels still see the maximal-offset evidence.
COARSE_MIN_VALID_VIEWS = 2


@dataclass
class CostVolume:
    """Aggregated costs per pixel per disparity hypothesis.

    costs[v, u, i] is the cost at hypothesis d_min + i; entries outside the
    per-pixel [valid_lo, valid_hi] window (or with too few contributing
    views) hold c_max, one more than any achievable aggregated cost, so they
    can never win. evaluated_triples counts the (pixel, view, hypothesis)
    combinations the construction visited.
    """

    costs: np.ndarray
    d_min: int
    d_max: int
    valid_lo: np.ndarray
    valid_hi: np.ndarray
    c_max: int
    evaluated_triples: int = 0

    @property
    def height(self):
        return self.costs.shape[0]

    @property
    def width(self):
        return self.costs.shape[1]

    @property
    def n_hypotheses(self):
        return self.costs.shape[2]

    def hypotheses(self):
        return np.arange(self.d_min, self.d_max + 1)


@dataclass(frozen=True)
class SearchBounds:
    """Per-pixel inclusive disparity search window [lo, hi]."""

    lo: np.ndarray
    hi: np.ndarray
    lam: int = 0

    def __post_init__(self):
        if self.lo.shape != self.hi.shape:
            raise ValueError("lo/hi shape mismatch")
        if np.any(self.lo > self.hi):
            raise ValueError("lo must not exceed hi")


def _offsets_and_stack(fields, ref_s, ref_t):
    rows = len(fields)
    cols = len(fields[0])
    ref = fields[ref_t][ref_s]
    offsets = []
    stack = []
    for t in range(rows):
        for s in range(cols):
            if s == ref_s and t == ref_t:
                continue
            f = fields[t][s]
            if f.codes.shape != ref.codes.shape or f.nbits != ref.nbits:
                raise ValueError("all views must share size and census width")
            offsets.append((ref_s - s, ref_t - t))
            stack.append(f.codes)
    return ref, np.array(offsets, dtype=np.int64), np.stack(stack)


def c_max_for(nbits, v_total):
    """Fill value exceeding any achievable aggregated cost."""
    return nbits * v_total + 1


def pairwise_cost(ref, view, offset, d):
    """Hamming cost plane of one view against the reference at hypothesis d.

    offset is (ref_s - s, ref_t - t). Pixels whose correspondence leaves the
    view get NO_CONTRIBUTION.
    """
    if ref.codes.shape != view.codes.shape:
        raise ValueError("census fields differ in size")
    if ref.nbits != view.nbits:
        raise ValueError("census fields differ in codeword width")
    h, w = ref.codes.shape
    sx = int(round(offset[0] * d))
    sy = int(round(offset[1] * d))
    out = np.full((h, w), NO_CONTRIBUTION, dtype=np.int32)
    u0, u1 = max(0, -sx), min(w, w - sx)
    v0, v1 = max(0, -sy), min(h, h - sy)
    if u0 < u1 and v0 < v1:
        from lfdepth import _kernels_py

        a = ref.codes[v0:v1, u0:u1]
        b = view.codes[v0 + sy : v1 + sy, u0 + sx : u1 + sx]
        out[v0:v1, u0:u1] = _kernels_py.popcount(a ^ b)
    return out


def aggregate_cost(fields, ref_s, ref_t, d_min, d_max, bounds=None,
                   min_valid_views=DEFAULT_MIN_VALID_VIEWS):
    """Build the aggregated CostVolume over hypotheses d_min..d_max.

    fields is the [t][s] grid of CensusFields; bounds (a SearchBounds)
    restricts the hypotheses evaluated per pixel, everything else is padded
    with c_max.
    """
    if d_min > d_max:
        raise ValueError(f"empty disparity range [{d_min}, {d_max}]")
    ref, offsets, stack = _offsets_and_stack(fields, ref_s, ref_t)
    if len(offsets) == 0:
        raise ValueError("light field needs at least one off-reference view")
    h, w = ref.codes.shape
    v_total = len(offsets)
    min_valid = max(1, min(min_valid_views, v_total))
    c_max = c_max_for(ref.nbits, v_total)

    if bounds is None:
        lo = np.full((h, w), d_min, dtype=np.int32)
        hi = np.full((h, w), d_max, dtype=np.int32)
    else:
        if bounds.lo.shape != (h, w):
            raise ValueError("bounds shape does not match the views")
        lo = np.clip(bounds.lo, d_min, d_max).astype(np.int32)
        hi = np.clip(bounds.hi, d_min, d_max).astype(np.int32)

    ndisp = d_max - d_min + 1
    out = np.empty((h, w, ndisp), dtype=np.int32)
    _backend.kernels().aggregate_hamming(
        np.ascontiguousarray(ref.codes),
        np.ascontiguousarray(stack),
        offsets, int(d_min), int(d_max),
        np.ascontiguousarray(lo), np.ascontiguousarray(hi),
        v_total, min_valid, c_max, out,
    )
    evaluated = int((hi.astype(np.int64) - lo + 1).sum()) * v_total
    return CostVolume(costs=out, d_min=d_min, d_max=d_max, valid_lo=lo, valid_hi=hi,
                      c_max=c_max, evaluated_triples=evaluated)


def cross_views(grid_rows, grid_cols, ref_s, ref_t, mode="extreme"):
    """The four initial-pass views on the reference row and column.

    extreme: the two ends of each axis; when the reference sits at an end,
    the next-farthest view replaces it. adjacent: the immediate neighbors of
    the reference on each axis (inward neighbor at the border).
    """
    if grid_rows < 2 or grid_cols < 2:
        raise ValueError(f"cross views need at least a 2x2 grid, got {grid_rows}x{grid_cols}")

    def axis_picks(ref, size):
        if mode == "adjacent":
            picks = [p for p in (ref - 1, ref + 1) if 0 <= p < size]
            while len(picks) < 2:
                nxt = max(picks, default=ref) + 1 if ref == 0 else min(picks, default=ref) - 1
                picks.append(nxt)
            return sorted(picks)
        if mode != "extreme":
            raise ValueError(f"unknown cross view mode {mode!r}")
        picks = [0, size - 1]
        if ref in picks:
            others = sorted((p for p in range(size) if p != ref and p not in picks),
                            key=lambda p: (-abs(p - ref), p))
            picks[picks.index(ref)] = others[0]
        return sorted(picks)

    row = [(s, ref_t) for s in axis_picks(ref_s, grid_cols)]
    col = [(ref_s, t) for t in axis_picks(ref_t, grid_rows)]
    return row + col


def coarse_disparity(fields, ref_s, ref_t, d_min, d_max, mode="extreme",
                     min_valid_views=COARSE_MIN_VALID_VIEWS):
    """Initial disparity from the four cross-lying views, winner-takes-all.

    Returns (disparity map, cost volume of the coarse pass). The map is
    float32 with NaN where no hypothesis had enough view support.
    """
    from lfdepth import sgm

    rows = len(fields)
    cols = len(fields[0])
    picks = cross_views(rows, cols, ref_s, ref_t, mode=mode)
    ref, offsets, stack = _filtered_offsets(fields, ref_s, ref_t, picks)
    h, w = ref.codes.shape
    v_total = len(offsets)
    min_valid = max(1, min(min_valid_views, v_total))
    c_max = c_max_for(ref.nbits, v_total)
    lo = np.full((h, w), d_min, dtype=np.int32)
    hi = np.full((h, w), d_max, dtype=np.int32)
    out = np.empty((h, w, d_max - d_min + 1), dtype=np.int32)
    _backend.kernels().aggregate_hamming(
        np.ascontiguousarray(ref.codes), np.ascontiguousarray(stack), offsets,
        int(d_min), int(d_max), lo, hi, v_total, min_valid, c_max, out,
    )
    volume = CostVolume(costs=out, d_min=d_min, d_max=d_max, valid_lo=lo, valid_hi=hi,
                        c_max=c_max,
                        evaluated_triples=h * w * (d_max - d_min + 1) * v_total)
    return sgm.wta(volume), volume


def _filtered_offsets(fields, ref_s, ref_t, picks):
    ref = fields[ref_t][ref_s]
    offsets = []
    stack = []
    for s, t in picks:
        if s == ref_s and t == ref_t:
            continue
        f = fields[t][s]
        offsets.append((ref_s - s, ref_t - t))
        stack.append(f.codes)
    return ref, np.array(offsets, dtype=np.int64), np.stack(stack)


def disparity_bounds(coarse, lam, d_min, d_max, window=5):
    """Dilate the coarse map into per-pixel search bounds.

    lo/hi are the window min/max of the coarse map (invalid pixels ignored)
    stretched by lam and clamped to the global range; pixels whose whole
    neighborhood is invalid fall back to the full range.
    """
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd size, got {window}")
    c = np.asarray(coarse, dtype=np.float64)
    invalid = ~np.isfinite(c)
    big = float(d_max) + 1.0
    lo_src = np.where(invalid, big, c)
    hi_src = np.where(invalid, float(d_min) - 1.0, c)
    lo = ndimage.minimum_filter(lo_src, size=window, mode="nearest")
    hi = ndimage.maximum_filter(hi_src, size=window, mode="nearest")
    all_invalid = ndimage.minimum_filter(invalid.astype(np.uint8), size=window,
                                         mode="nearest").astype(bool)
    lo = np.where(all_invalid, d_min, lo - lam)
    hi = np.where(all_invalid, d_max, hi + lam)
    lo = np.clip(lo, d_min, d_max).astype(np.int32)
    hi = np.clip(hi, d_min, d_max).astype(np.int32)
    return SearchBounds(lo=lo, hi=hi, lam=lam)
