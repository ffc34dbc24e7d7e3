"""Raw Bayer mosaics to gamma-corrected grayscale views.

Demosaicing is plain bilinear: each missing channel is the mean of the
nearest same-colored mosaic samples (2 or 4 depending on the site). Borders
are mirror-padded (reflect without repeating the edge row) so the stencil
always reads samples of the right color.
"""
import numpy as np

BAYER_PATTERNS = ("RGGB", "BGGR", "GRBG", "GBRG")

# Role of each 2x2 cell position (row parity, col parity). Gr: green pixel
# whose horizontal neighbors are red; Gb: green with blue horizontal neighbors.
_SITE_ROLES = {
    "RGGB": {(0, 0): "R", (0, 1): "Gr", (1, 0): "Gb", (1, 1): "B"},
    "BGGR": {(0, 0): "B", (0, 1): "Gb", (1, 0): "Gr", (1, 1): "R"},
    "GRBG": {(0, 0): "Gr", (0, 1): "R", (1, 0): "B", (1, 1): "Gb"},
    "GBRG": {(0, 0): "Gb", (0, 1): "B", (1, 0): "R", (1, 1): "Gr"},
}


def _round_to_u8(x):
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def debayer(raw, pattern="RGGB"):
    """Bilinear demosaicing of a single-channel mosaic into an (h, w, 3) RGB image."""
    raw = np.asarray(raw)
    if raw.ndim != 2:
        raise ValueError(f"mosaic must be 2-D, got shape {raw.shape}")
    h, w = raw.shape
    if h % 2 or w % 2:
        raise ValueError(f"mosaic dimensions must be even, got {w}x{h}")
    if pattern not in _SITE_ROLES:
        raise ValueError(f"unknown Bayer pattern {pattern!r}")

    p = np.pad(raw.astype(np.float64), 1, mode="reflect")
    center = p[1:-1, 1:-1]
    horiz2 = (p[1:-1, :-2] + p[1:-1, 2:]) / 2.0
    vert2 = (p[:-2, 1:-1] + p[2:, 1:-1]) / 2.0
    cross4 = (p[1:-1, :-2] + p[1:-1, 2:] + p[:-2, 1:-1] + p[2:, 1:-1]) / 4.0
    diag4 = (p[:-2, :-2] + p[:-2, 2:] + p[2:, :-2] + p[2:, 2:]) / 4.0

    # Interpolants per site role: what fills R, G, B at that site.
    plane_of = {
        "R": {"R": center, "G": cross4, "B": diag4},
        "Gr": {"R": horiz2, "G": center, "B": vert2},
        "Gb": {"R": vert2, "G": center, "B": horiz2},
        "B": {"R": diag4, "G": cross4, "B": center},
    }

    rgb = np.empty((h, w, 3), dtype=np.float64)
    for (rp, cp), role in _SITE_ROLES[pattern].items():
        sl = (slice(rp, None, 2), slice(cp, None, 2))
        for ch, name in enumerate("RGB"):
            rgb[sl + (ch,)] = plane_of[role][name][sl]
    return _round_to_u8(rgb)


def _intensity_max(img):
    return 1.0 if np.issubdtype(np.asarray(img).dtype, np.floating) else 255.0


def auto_gamma(img, gamma_min=0.4, gamma_max=2.5):
    """Gamma that maps the image mean to mid-gray, clamped to [gamma_min, gamma_max]."""
    img = np.asarray(img)
    if img.size == 0:
        raise ValueError("cannot pick a gamma for an empty image")
    i_max = _intensity_max(img)
    ratio = float(np.mean(img, dtype=np.float64)) / i_max
    ratio = min(max(ratio, 1.0 / 255.0), 254.0 / 255.0)
    gamma = np.log(0.5) / np.log(ratio)
    return float(min(max(gamma, gamma_min), gamma_max))


def apply_gamma(img, gamma):
    """Power-law intensity correction: out = i_max * (in / i_max) ** gamma."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    img = np.asarray(img)
    i_max = _intensity_max(img)
    out = i_max * np.power(img / i_max, gamma)
    if np.issubdtype(img.dtype, np.floating):
        return out.astype(img.dtype)
    return _round_to_u8(out)


def to_grayscale(rgb):
    """BT.601 luma: 0.299 R + 0.587 G + 0.114 B, rounded half away from zero."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got shape {rgb.shape}")
    luma = rgb[:, :, 0] * 0.299 + rgb[:, :, 1] * 0.587 + rgb[:, :, 2] * 0.114
    if np.issubdtype(rgb.dtype, np.floating):
        return luma
    return _round_to_u8(luma)
