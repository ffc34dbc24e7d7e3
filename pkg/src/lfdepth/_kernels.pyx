# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: census codes, multi-view cost aggregation, SGM sweeps.

Same signatures and bit-identical results as lfdepth._kernels_py; this one
walks per-pixel bounds directly, which is where the bounded-search speedup
actually comes from.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef fused code_t:
    cnp.uint8_t
    cnp.uint32_t
    cnp.uint64_t

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #  define LFD_POPCOUNT64(x) __builtin_popcountll((unsigned long long)(x))
    #else
    static int LFD_POPCOUNT64(unsigned long long v) {
        int c = 0;
        while (v) { v &= v - 1; ++c; }
        return c;
    }
    #endif
    """
    int LFD_POPCOUNT64(unsigned long long v) nogil


def census_codes(const cnp.uint8_t[:, ::1] img, int radius, code_t[:, ::1] out):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t u, v, uu, vv
    cdef int i, j
    cdef cnp.uint8_t center
    cdef cnp.uint64_t code
    with nogil:
        for v in range(h):
            for u in range(w):
                center = img[v, u]
                code = 0
                for j in range(-radius, radius + 1):
                    vv = v + j
                    if vv < 0:
                        vv = 0
                    elif vv >= h:
                        vv = h - 1
                    for i in range(-radius, radius + 1):
                        if i == 0 and j == 0:
                            continue
                        uu = u + i
                        if uu < 0:
                            uu = 0
                        elif uu >= w:
                            uu = w - 1
                        code = (code << 1) | (1 if center > img[vv, uu] else 0)
                out[v, u] = <code_t> code
    return np.asarray(out)


def aggregate_hamming(const code_t[:, ::1] ref, const code_t[:, :, ::1] views,
                      const cnp.int64_t[:, ::1] offsets, int d_min, int d_max,
                      const cnp.int32_t[:, ::1] lo, const cnp.int32_t[:, ::1] hi,
                      int v_total, int min_valid, int c_max,
                      cnp.int32_t[:, :, ::1] out):
    cdef Py_ssize_t h = ref.shape[0], w = ref.shape[1], nviews = views.shape[0]
    cdef Py_ssize_t u, v, k, di
    cdef Py_ssize_t ndisp = d_max - d_min + 1
    cdef int d, plo, phi
    cdef long long acc, uu, vv
    cdef int nvalid
    cdef cnp.uint64_t refcode
    with nogil:
        for v in range(h):
            for u in range(w):
                refcode = <cnp.uint64_t> ref[v, u]
                plo = lo[v, u]
                phi = hi[v, u]
                for di in range(ndisp):
                    d = d_min + <int> di
                    if d < plo or d > phi:
                        out[v, u, di] = c_max
                        continue
                    acc = 0
                    nvalid = 0
                    for k in range(nviews):
                        uu = u + offsets[k, 0] * d
                        vv = v + offsets[k, 1] * d
                        if uu < 0 or uu >= w or vv < 0 or vv >= h:
                            continue
                        acc += LFD_POPCOUNT64(refcode ^ (<cnp.uint64_t> views[k, vv, uu]))
                        nvalid += 1
                    if nvalid < min_valid:
                        out[v, u, di] = c_max
                    else:
                        out[v, u, di] = <cnp.int32_t> ((2 * acc * v_total + nvalid) // (2 * nvalid))
    return np.asarray(out)


def sgm_direction(const cnp.int32_t[:, :, ::1] costs, int du, int dv,
                  int p1, int p2, cnp.int32_t[:, :, ::1] out):
    cdef Py_ssize_t h = costs.shape[0], w = costs.shape[1], ndisp = costs.shape[2]
    cdef Py_ssize_t u, v, d, pu, pv
    cdef Py_ssize_t vstart, vstop, vstep, ustart, ustop, ustep
    cdef cnp.int32_t prev_min, best, cand
    if dv >= 0:
        vstart, vstop, vstep = 0, h, 1
    else:
        vstart, vstop, vstep = h - 1, -1, -1
    if du >= 0:
        ustart, ustop, ustep = 0, w, 1
    else:
        ustart, ustop, ustep = w - 1, -1, -1
    with nogil:
        v = vstart
        while v != vstop:
            u = ustart
            while u != ustop:
                pv = v - dv
                pu = u - du
                if pu < 0 or pu >= w or pv < 0 or pv >= h:
                    for d in range(ndisp):
                        out[v, u, d] = costs[v, u, d]
                else:
                    prev_min = out[pv, pu, 0]
                    for d in range(1, ndisp):
                        if out[pv, pu, d] < prev_min:
                            prev_min = out[pv, pu, d]
                    for d in range(ndisp):
                        best = out[pv, pu, d]
                        if d > 0:
                            cand = out[pv, pu, d - 1] + p1
                            if cand < best:
                                best = cand
                        if d < ndisp - 1:
                            cand = out[pv, pu, d + 1] + p1
                            if cand < best:
                                best = cand
                        cand = prev_min + p2
                        if cand < best:
                            best = cand
                        out[v, u, d] = costs[v, u, d] + best
                u += ustep
            v += vstep
    return np.asarray(out)
