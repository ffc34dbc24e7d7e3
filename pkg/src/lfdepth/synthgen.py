"""Synthetic light fields with exact ground-truth disparity.

Scenes are stacks of fronto-parallel textured layers. A layer at disparity d
appears in view (s, t) shifted so that the matching rule maps reference
pixels onto it exactly: view pixel (x, y) shows layer texel
(x - (ref_s - s) * d, y - (ref_t - t) * d). Layers are painted back to
front (larger d occludes smaller), and the ground truth holds the top
visible layer's disparity per reference pixel.

Procedural textures come from a fixed xorshift-multiply integer hash, so
identical specs render bit-identically on any platform.
"""
import re
from dataclasses import dataclass, field

import numpy as np

from lfdepth.core import LightField

_MUL_X = np.uint64(0x9E3779B97F4A7C15)
_MUL_Y = np.uint64(0xC2B2AE3D27D4EB4F)
_MUL_SEED = np.uint64(0xD6E8FEB86659FD93)


def _hash01(ix, iy, seed):
    """Deterministic uniform [0, 1) per integer lattice point."""
    with np.errstate(over="ignore"):
        z = (
            ix.astype(np.uint64) * _MUL_X
            ^ iy.astype(np.uint64) * _MUL_Y
            ^ np.uint64(seed & 0xFFFFFFFFFFFFFFFF) * _MUL_SEED
        )
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _value_noise(ix, iy, cell, seed):
    # Bilinear interpolation of lattice hashes; ix/iy are integer arrays.
    gx, rx = np.divmod(ix, cell)
    gy, ry = np.divmod(iy, cell)
    fx = rx / cell
    fy = ry / cell
    c00 = _hash01(gx, gy, seed)
    c10 = _hash01(gx + 1, gy, seed)
    c01 = _hash01(gx, gy + 1, seed)
    c11 = _hash01(gx + 1, gy + 1, seed)
    top = c00 * (1.0 - fx) + c10 * fx
    bot = c01 * (1.0 - fx) + c11 * fx
    return top * (1.0 - fy) + bot * fy

_OCTAVES_RICH = ((16, 0.45), (5, 0.30))
_WHITE_WEIGHT = 0.25
_OCTAVES_SMOOTH = ((17, 0.55), (7, 0.45))


def noise_texture_at(ix, iy, seed, smooth=False):
    """Texture intensity [0, 255] at integer coordinates (any sign)."""
    ix = np.asarray(ix, dtype=np.int64)
    iy = np.asarray(iy, dtype=np.int64)
    if smooth:
        val = sum(w * _value_noise(ix, iy, c, seed) for c, w in _OCTAVES_SMOOTH)
    else:
        val = sum(w * _value_noise(ix, iy, c, seed) for c, w in _OCTAVES_RICH)
        val = val + _WHITE_WEIGHT * _hash01(ix, iy, seed ^ 0x5EED)
    return 255.0 * val


@dataclass(frozen=True)
class Layer:
    """One fronto-parallel scene plane.

    texture: ("noise", seed), ("smooth", seed) or ("file", image array).
    region: None for full frame, else (x, y, w, h) in reference coordinates.
    """

    texture: tuple
    disparity: float
    region: tuple = None

    def __post_init__(self):
        if self.disparity < 0:
            raise ValueError(f"layer disparity must be >= 0, got {self.disparity}")
        kind = self.texture[0]
        if kind not in ("noise", "smooth", "file"):
            raise ValueError(f"unknown texture kind {kind!r}")
        if self.region is not None:
            x, y, w, h = self.region
            if w <= 0 or h <= 0:
                raise ValueError(f"degenerate layer region {self.region}")


@dataclass(frozen=True)
class SceneSpec:
    layers: tuple
    width: int = 256
    height: int = 256
    grid_rows: int = 4
    grid_cols: int = 4
    ref_s: int = 1
    ref_t: int = 1
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.layers:
            raise ValueError("scene needs at least one layer")
        if self.layers[0].region is not None:
            raise ValueError("the bottom layer must cover the full frame")
        d = [l.disparity for l in self.layers]
        if any(b < a for a, b in zip(d, d[1:])):
            raise ValueError("layers must be ordered nearest-last (non-decreasing disparity)")
        if not (0 <= self.ref_s < self.grid_cols and 0 <= self.ref_t < self.grid_rows):
            raise ValueError("reference view outside the grid")


def _sample_layer(layer, sx, sy):
    """Layer texture at real source coordinates (bilinear between texels)."""
    kind, src = layer.texture[0], layer.texture[1]
    if kind == "file":
        img = np.asarray(src, dtype=np.float64)
        h, w = img.shape

        def at(ix, iy):
            return img[np.clip(iy, 0, h - 1), np.clip(ix, 0, w - 1)]

    else:
        smooth = kind == "smooth"

        def at(ix, iy):
            return noise_texture_at(ix, iy, src, smooth=smooth)

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0
    if not fx.any() and not fy.any():
        return at(x0, y0)
    top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx
    bot = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx
    return top * (1.0 - fy) + bot * fy


def _covers(layer, sx, sy):
    if layer.region is None:
        return np.ones(sx.shape, dtype=bool)
    x, y, w, h = layer.region
    return (sx >= x) & (sx <= x + w - 1) & (sy >= y) & (sy <= y + h - 1)


def _gauss(shape, seed, sigma):
    h, w = shape
    yy, xx = np.meshgrid(np.arange(h, dtype=np.int64), np.arange(w, dtype=np.int64),
                         indexing="ij")
    u1 = _hash01(xx, yy, seed)
    u2 = _hash01(xx, yy, seed ^ 0xA5A5A5A5)
    u1 = np.maximum(u1, 1e-12)
    return sigma * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def render_lightfield(spec):
    """Render all views plus the reference ground-truth disparity map.

    Returns (LightField, float32 ground truth).
    """
    h, w = spec.height, spec.width
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64),
                         indexing="ij")
    views = np.empty((spec.grid_rows, spec.grid_cols, h, w), dtype=np.uint8)
    for t in range(spec.grid_rows):
        for s in range(spec.grid_cols):
            ds = spec.ref_s - s
            dt = spec.ref_t - t
            canvas = np.zeros((h, w), dtype=np.float64)
            for layer in spec.layers:
                sx = xx - ds * layer.disparity
                sy = yy - dt * layer.disparity
                mask = _covers(layer, sx, sy)
                vals = _sample_layer(layer, sx, sy)
                canvas[mask] = vals[mask]
            if spec.noise_sigma > 0:
                canvas += _gauss((h, w), spec.seed ^ (t * 97 + s * 13), spec.noise_sigma)
            views[t, s] = np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8)

    gt = np.zeros((h, w), dtype=np.float32)
    for layer in spec.layers:
        mask = _covers(layer, xx, yy)
        gt[mask] = layer.disparity
    return LightField(views=views, ref_s=spec.ref_s, ref_t=spec.ref_t), gt


def visibility_mask(spec):
    """True where the reference pixel's layer is unoccluded in every view."""
    h, w = spec.height, spec.width
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64),
                         indexing="ij")
    top_idx = np.zeros((h, w), dtype=np.int64)
    for i, layer in enumerate(spec.layers):
        top_idx[_covers(layer, xx, yy)] = i
    d_own = np.array([l.disparity for l in spec.layers])[top_idx]
    visible = np.ones((h, w), dtype=bool)
    for t in range(spec.grid_rows):
        for s in range(spec.grid_cols):
            ds = spec.ref_s - s
            dt = spec.ref_t - t
            for i, layer in enumerate(spec.layers):
                qx = xx + ds * (d_own - layer.disparity)
                qy = yy + dt * (d_own - layer.disparity)
                occludes = (i > top_idx) & _covers(layer, qx, qy)
                visible &= ~occludes
    return visible


def mosaic_from_rgb(rgb, pattern="RGGB"):
    """Drop an RGB image onto a Bayer grid, keeping one channel per site."""
    from lfdepth.preprocess import _SITE_ROLES

    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got shape {rgb.shape}")
    h, w = rgb.shape[:2]
    if h % 2 or w % 2:
        raise ValueError(f"mosaic dimensions must be even, got {w}x{h}")
    if pattern not in _SITE_ROLES:
        raise ValueError(f"unknown Bayer pattern {pattern!r}")
    channel = {"R": 0, "Gr": 1, "Gb": 1, "B": 2}
    out = np.empty((h, w), dtype=rgb.dtype)
    for (rp, cp), role in _SITE_ROLES[pattern].items():
        sl = (slice(rp, None, 2), slice(cp, None, 2))
        out[sl] = rgb[sl + (channel[role],)]
    return out


_LAYER_RE = re.compile(r"(\w+):([^\s]+)")


def parse_scene_spec(text, base_dir=None):
    """Parse the plain-text key=value scene description.

    Recognized keys: grid=RxC, size=WxH, ref=S,T, noise_sigma=F, seed=N and
    one line per layer, bottom first:

        layer = seed:42 d:5 region:full
        layer = file:tex.pgm d:8 region:40,40,120,100
    """
    from pathlib import Path

    from lfdepth.io import read_pgm

    kw = {}
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"scene spec line {lineno}: expected key=value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key != "layer":
            kw[key] = value
            continue
        parts = dict(_LAYER_RE.findall(value))
        if "d" not in parts:
            raise ValueError(f"scene spec line {lineno}: layer needs d:<disparity>")
        if "seed" in parts:
            texture = ("noise", int(parts["seed"]))
        elif "smooth" in parts:
            texture = ("smooth", int(parts["smooth"]))
        elif "file" in parts:
            path = Path(parts["file"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            texture = ("file", read_pgm(path)[0])
        else:
            raise ValueError(f"scene spec line {lineno}: layer needs seed:, smooth: or file:")
        region = parts.get("region", "full")
        if region == "full":
            region_t = None
        else:
            nums = [int(x) for x in region.split(",")]
            if len(nums) != 4:
                raise ValueError(f"scene spec line {lineno}: region must be x,y,w,h or full")
            region_t = tuple(nums)
        layers.append(Layer(texture=texture, disparity=float(parts["d"]), region=region_t))

    spec_kw = {"layers": tuple(layers)}
    if "grid" in kw:
        rows, cols = (int(x) for x in kw["grid"].lower().split("x"))
        spec_kw.update(grid_rows=rows, grid_cols=cols)
    if "size" in kw:
        w, h = (int(x) for x in kw["size"].lower().split("x"))
        spec_kw.update(width=w, height=h)
    if "ref" in kw:
        s, t = (int(x) for x in kw["ref"].split(","))
        spec_kw.update(ref_s=s, ref_t=t)
    if "noise_sigma" in kw:
        spec_kw["noise_sigma"] = float(kw["noise_sigma"])
    if "seed" in kw:
        spec_kw["seed"] = int(kw["seed"])
    return SceneSpec(**spec_kw)
