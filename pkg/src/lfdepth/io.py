"""Bit-exact readers and writers: binary PGM, single-channel PFM, remap tables.

PGM (P5) stores the integer views, PFM stores real-valued disparity/depth
maps (NaN marks invalid pixels, rows bottom-to-top, little-endian scale
token -1.0), and remap tables use a small "LFRM" container with per-view
float32 coordinate grids.
"""
import struct

import numpy as np

REMAP_MAGIC = b"LFRM"
REMAP_VERSION = 1


class FormatError(ValueError):
    """Malformed or unsupported image/table file."""


def _read_pnm_tokens(f, count):
    # Whitespace-separated header tokens; '#' starts a comment to end of line.
    tokens = []
    while len(tokens) < count:
        chunk = b""
        ch = f.read(1)
        while ch.isspace():
            ch = f.read(1)
        if ch == b"#":
            while ch not in (b"", b"\n"):
                ch = f.read(1)
            continue
        while ch and not ch.isspace():
            chunk += ch
            ch = f.read(1)
        if not chunk:
            raise FormatError("truncated header")
        tokens.append(chunk)
    return tokens


def write_pgm(path, img):
    """Binary PGM; uint8 or uint16 (16-bit samples are big-endian)."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"PGM stores 2-D grayscale images, got shape {img.shape}")
    if img.dtype == np.uint8:
        maxval, payload = 255, img.tobytes()
    elif img.dtype == np.uint16:
        maxval, payload = 65535, img.astype(">u2").tobytes()
    else:
        raise ValueError(f"PGM supports uint8/uint16, got {img.dtype}")
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        f.write(payload)


def read_pgm(path):
    """Returns (image, maxval); image dtype uint8 or uint16 per maxval."""
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic != b"P5":
            raise FormatError(f"not a binary PGM (magic {magic!r})")
        w, h, maxval = (int(t) for t in _read_pnm_tokens(f, 3))
        if w <= 0 or h <= 0:
            raise FormatError(f"bad PGM dimensions {w}x{h}")
        if maxval < 1 or maxval > 65535:
            raise FormatError(f"bad PGM maxval {maxval}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        payload = f.read(w * h * dtype.itemsize)
        if len(payload) != w * h * dtype.itemsize:
            raise FormatError("truncated PGM payload")
        img = np.frombuffer(payload, dtype=dtype).reshape(h, w)
        if maxval > 255:
            img = img.astype(np.uint16)
        return img.copy(), maxval


def write_pfm(path, data):
    """Single-channel PFM, float32 little-endian, rows bottom-to-top."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError(f"PFM writer stores single-channel maps, got shape {data.shape}")
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path):
    """Returns the float32 map, NaN bits preserved."""
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic == b"PF":
            raise FormatError("color PFM not supported; expected single-channel 'Pf'")
        if magic != b"Pf":
            raise FormatError(f"not a PFM file (magic {magic!r})")
        w, h = (int(t) for t in _read_pnm_tokens(f, 2))
        scale = float(_read_pnm_tokens(f, 1)[0])
        if scale >= 0:
            raise FormatError(
                f"big-endian PFM (scale {scale}) not supported; expected a negative scale"
            )
        payload = f.read(w * h * 4)
        if len(payload) != w * h * 4:
            raise FormatError("truncated PFM payload")
        data = np.frombuffer(payload, dtype="<f4").reshape(h, w)
        return np.flipud(data).astype(np.float32, copy=True)


_REMAP_HEADER = struct.Struct("<4sBHHII")


def write_remap(path, table):
    """LFRM container: header, then per view the X grid then the Y grid."""
    n, m = table.grid_rows, table.grid_cols
    h, w = table.height, table.width
    with open(path, "wb") as f:
        f.write(_REMAP_HEADER.pack(REMAP_MAGIC, REMAP_VERSION, n, m, w, h))
        for k in range(table.n_views):
            f.write(table.map_x[k].astype("<f4").tobytes())
            f.write(table.map_y[k].astype("<f4").tobytes())


def read_remap(path):
    from lfdepth.rectify import RemapTable

    with open(path, "rb") as f:
        header = f.read(_REMAP_HEADER.size)
        if len(header) != _REMAP_HEADER.size:
            raise FormatError("truncated remap header")
        magic, version, n, m, w, h = _REMAP_HEADER.unpack(header)
        if magic != REMAP_MAGIC:
            raise FormatError(f"not a remap table (magic {magic!r})")
        if version != REMAP_VERSION:
            raise FormatError(f"unsupported remap version {version}")
        if n < 1 or m < 1 or w < 1 or h < 1:
            raise FormatError(f"bad remap geometry {n}x{m} views, {w}x{h} px")
        count = n * m
        plane = w * h * 4
        payload = f.read(2 * count * plane + 1)
        if len(payload) != 2 * count * plane:
            raise FormatError(
                f"remap payload size mismatch: expected {2 * count * plane} bytes"
            )
        map_x = np.empty((count, h, w), dtype=np.float32)
        map_y = np.empty((count, h, w), dtype=np.float32)
        for k in range(count):
            off = k * 2 * plane
            map_x[k] = np.frombuffer(payload[off : off + plane], dtype="<f4").reshape(h, w)
            map_y[k] = np.frombuffer(payload[off + plane : off + 2 * plane], dtype="<f4").reshape(h, w)
        return RemapTable(grid_rows=n, grid_cols=m, map_x=map_x, map_y=map_y)


def load_view_grid(directory, grid_rows=4, grid_cols=4):
    """Read view_<t>_<s>.pgm files into a (rows, cols, h, w) uint8 stack."""
    from pathlib import Path

    directory = Path(directory)
    views = None
    for t in range(grid_rows):
        for s in range(grid_cols):
            path = directory / f"view_{t}_{s}.pgm"
            if not path.exists():
                raise FileNotFoundError(f"missing view file {path}")
            img, _ = read_pgm(path)
            if img.dtype != np.uint8:
                raise FormatError(f"{path}: expected an 8-bit view")
            if views is None:
                views = np.empty((grid_rows, grid_cols) + img.shape, dtype=np.uint8)
            elif img.shape != views.shape[2:]:
                raise FormatError(f"{path}: size {img.shape} differs from other views")
            views[t, s] = img
    return views


def save_view_grid(directory, views):
    """Write a (rows, cols, h, w) stack as view_<t>_<s>.pgm files."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows, cols = views.shape[:2]
    for t in range(rows):
        for s in range(cols):
            write_pgm(directory / f"view_{t}_{s}.pgm", views[t, s])
