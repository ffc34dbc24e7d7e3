"""Pure-numpy kernels: census codes, multi-view cost aggregation, SGM sweeps.

Bit-for-bit reference for the compiled backend. Everything here is integer
arithmetic, so results are identical across platforms and backends.
"""
import numpy as np

_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def popcount(x):
    """Per-element count of set bits, as int32."""
    x = np.asarray(x)
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(x).astype(np.int32)
    flat = np.ascontiguousarray(x).reshape(-1, 1).view(np.uint8)
    return _POP8[flat].sum(axis=1, dtype=np.int32).reshape(x.shape)


def census_codes(img, radius, out):
    """Census codewords for one 8-bit image.

    Neighbors are visited in raster order over the (2r+1)^2 window (center
    skipped), first comparison in the most significant bit; bit set when the
    center is strictly greater. Borders replicate the edge pixel.
    """
    h, w = img.shape
    padded = np.pad(img, radius, mode="edge")
    code = np.zeros((h, w), dtype=np.uint64)
    for j in range(-radius, radius + 1):
        for i in range(-radius, radius + 1):
            if i == 0 and j == 0:
                continue
            nb = padded[radius + j : radius + j + h, radius + i : radius + i + w]
            code = (code << np.uint64(1)) | (img > nb).astype(np.uint64)
    out[...] = code.astype(out.dtype)
    return out


def aggregate_hamming(ref, views, offsets, d_min, d_max, lo, hi, v_total, min_valid, c_max, out):
    """Summed census Hamming cost over all off-reference views.

    For every pixel and hypothesis d in [lo, hi], sums the Hamming distance
    between the reference codeword and each view's codeword at the
    corresponding (integer) position, skipping views whose correspondence
    leaves the image. The sum is rescaled by v_total / n_valid (rounded half
    away from zero); hypotheses outside [lo, hi] or with fewer than
    min_valid contributing views are filled with c_max.
    """
    h, w = ref.shape
    nviews = views.shape[0]
    for di, d in enumerate(range(d_min, d_max + 1)):
        acc = np.zeros((h, w), dtype=np.int64)
        nvalid = np.zeros((h, w), dtype=np.int64)
        for k in range(nviews):
            sx = int(offsets[k, 0]) * d
            sy = int(offsets[k, 1]) * d
            u0, u1 = max(0, -sx), min(w, w - sx)
            v0, v1 = max(0, -sy), min(h, h - sy)
            if u0 >= u1 or v0 >= v1:
                continue
            a = ref[v0:v1, u0:u1]
            b = views[k, v0 + sy : v1 + sy, u0 + sx : u1 + sx]
            acc[v0:v1, u0:u1] += popcount(a ^ b)
            nvalid[v0:v1, u0:u1] += 1
        denom = np.maximum(2 * nvalid, 1)
        scaled = (2 * acc * v_total + nvalid) // denom
        plane = np.where(nvalid >= min_valid, scaled, c_max)
        plane = np.where((lo <= d) & (d <= hi), plane, c_max)
        out[:, :, di] = plane
    return out


def _transition(prev, p1, p2):
    # prev: (n, ndisp) path costs of the predecessor pixels
    best = prev.copy()
    np.minimum(best[:, 1:], prev[:, :-1] + p1, out=best[:, 1:])
    np.minimum(best[:, :-1], prev[:, 1:] + p1, out=best[:, :-1])
    np.minimum(best, prev.min(axis=1, keepdims=True) + p2, out=best)
    return best


def sgm_direction(costs, du, dv, p1, p2, out):
    """One SGM path sweep along direction (du, dv).

    L(p, d) = C(p, d) + min(L(p-r, d), L(p-r, d+-1) + p1, min_t L(p-r, t) + p2);
    pixels without an in-image predecessor copy C. No normalization term is
    subtracted, so values grow along the path.
    """
    h, w, ndisp = costs.shape
    if dv == 0:
        cols = range(w) if du > 0 else range(w - 1, -1, -1)
        for idx, u in enumerate(cols):
            if idx == 0:
                out[:, u] = costs[:, u]
            else:
                out[:, u] = costs[:, u] + _transition(out[:, u - du], p1, p2)
        return out
    rows = range(h) if dv > 0 else range(h - 1, -1, -1)
    for idx, v in enumerate(rows):
        if idx == 0:
            out[v] = costs[v]
            continue
        trans = _transition(out[v - dv], p1, p2)
        if du == 0:
            out[v] = costs[v] + trans
        elif du > 0:
            out[v, :du] = costs[v, :du]
            out[v, du:] = costs[v, du:] + trans[:-du]
        else:
            k = -du
            out[v, w - k :] = costs[v, w - k :]
            out[v, : w - k] = costs[v, : w - k] + trans[k:]
    return out
