"""File formats: PGM/PNG images, indexed label maps, float maps, seed lists.

Scalar images travel as 8/16-bit PGM or PNG; two-channel images as a
comma-separated pair of scalar files. Label maps are written as indexed PNG
whose palette index equals the label id (round-trips exactly). Probability
planes use the PFM float format. Seeds are JSON arrays of {x, y, label}.
All writers go through a temp file and rename, so failures leave no partial
output.
"""

from __future__ import annotations

import json
import os

import tempfile
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

__all__ = [
    "LABEL_PALETTE",
    "read_image",
    "read_scalar_image",
    "write_pgm",
    "read_pgm",
    "write_label_png",
    "read_label_png",
    "write_pfm",
    "read_pfm",
    "read_seeds_json",
    "write_seeds_json",
    "render_overlay",
    "atomic_write_bytes",
]

# Fixed 10-color palette; label id indexes into it (and the PNG palette).
LABEL_PALETTE = (
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (250, 190, 212),
)


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via temp file + rename so failures leave no partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# PGM
# ---------------------------------------------------------------------------


def write_pgm(path, image: np.ndarray) -> None:
    """Binary PGM, 8-bit when the data fits, 16-bit (big endian) otherwise."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError("PGM holds a single 2-D plane")
    if img.min() < 0 or not np.allclose(img, np.rint(img)):
        raise ValueError("PGM requires nonnegative integer values")
    img = np.rint(img).astype(np.uint32)
    maxval = max(int(img.max()), 1)
    if maxval > 65535:
        raise ValueError("PGM supports at most 16-bit values")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode()
    payload = img.astype(">u2" if maxval > 255 else "u1").tobytes()
    atomic_write_bytes(path, header + payload)


def _read_pgm_token(fh) -> bytes:
    tok = b""
    while True:
        ch = fh.read(1)
        if not ch:
            raise ValueError("truncated PGM header")
        if ch.isspace():
            if tok:
                return tok
            continue
        if ch == b"#":
            fh.readline()
            continue
        tok += ch


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(2) != b"P5":
            raise ValueError("only binary (P5) PGM is supported")
        w = int(_read_pgm_token(fh))
        h = int(_read_pgm_token(fh))
        maxval = int(_read_pgm_token(fh))
        dtype = ">u2" if maxval > 255 else "u1"
        data = np.frombuffer(fh.read(), dtype=dtype, count=h * w)
    return data.reshape(h, w).astype(np.int64 if maxval > 255 else np.uint8).astype(float)


# ---------------------------------------------------------------------------
# Generic image reading (PGM / PNG, scalar or channel pair)
# ---------------------------------------------------------------------------


def read_scalar_image(path) -> np.ndarray:
    """One grayscale plane as float (PGM, PNG, or PFM by extension)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    if path.suffix.lower() == ".pfm":
        return read_pfm(path)
    with PILImage.open(path) as im:
        if im.mode not in ("L", "I", "I;16", "F"):
            im = im.convert("L")
        return np.asarray(im, dtype=float)


def read_image(spec: str) -> np.ndarray:
    """Image from a path, or a 2-channel image from 'first,second'."""
    parts = [p for p in str(spec).split(",") if p]
    if len(parts) == 1:
        return read_scalar_image(parts[0])
    if len(parts) == 2:
        planes = [read_scalar_image(p) for p in parts]
        if planes[0].shape != planes[1].shape:
            raise ValueError("channel planes differ in shape")
        return np.stack(planes, axis=-1)
    raise ValueError("expected one path or a comma-separated pair")


# ---------------------------------------------------------------------------
# Indexed label PNG
# ---------------------------------------------------------------------------


def _palette_bytes() -> bytes:
    flat = []
    for i in range(256):
        flat.extend(LABEL_PALETTE[i % len(LABEL_PALETTE)])
    return bytes(flat)


def label_png_bytes(labels: np.ndarray) -> bytes:
    lab = np.asarray(labels)
    if lab.min() < 0 or lab.max() > 255:
        raise ValueError("label ids must fit in one palette byte")
    im = PILImage.fromarray(lab.astype(np.uint8), mode="P")
    im.putpalette(_palette_bytes())
    import io

    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return buf.getvalue()


def write_label_png(path, labels: np.ndarray) -> None:
    atomic_write_bytes(path, label_png_bytes(labels))


def read_label_png(path) -> np.ndarray:
    with PILImage.open(path) as im:
        if im.mode != "P":
            raise ValueError("label map must be an indexed PNG")
        return np.asarray(im, dtype=np.int32)


# ---------------------------------------------------------------------------
# PFM float maps
# ---------------------------------------------------------------------------


def pfm_bytes(plane: np.ndarray) -> bytes:
    arr = np.asarray(plane, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError("PFM writer handles single planes")
    header = f"Pf\n{arr.shape[1]} {arr.shape[0]}\n-1.0\n".encode()
    # PFM stores rows bottom-up
    return header + arr[::-1].tobytes()


def write_pfm(path, plane: np.ndarray) -> None:
    atomic_write_bytes(path, pfm_bytes(plane))


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"Pf":
            raise ValueError("only grayscale (Pf) PFM is supported")
        w, h = (int(v) for v in fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(fh.read(), dtype=dtype, count=h * w)
    return data.reshape(h, w)[::-1].astype(float)


# ---------------------------------------------------------------------------
# Seeds JSON
# ---------------------------------------------------------------------------


def read_seeds_json(path) -> list[dict]:
    with open(path) as fh:
        data = json.load(fh)
    return validate_seed_list(data)


def validate_seed_list(data) -> list[dict]:
    if not isinstance(data, list):
        raise ValueError("seeds file must hold a JSON array")
    out = []
    for item in data:
        if not isinstance(item, dict) or not {"x", "y", "label"} <= set(item):
            raise ValueError("each seed needs x, y and label")
        x, y, label = int(item["x"]), int(item["y"]), int(item["label"])
        if label < 0:
            raise ValueError("labels must be nonnegative")
        out.append({"x": x, "y": y, "label": label})
    return out


def write_seeds_json(path, seeds: list[dict]) -> None:
    atomic_write_bytes(path, json.dumps(seeds, indent=2).encode())


# ---------------------------------------------------------------------------
# Overlay rendering
# ---------------------------------------------------------------------------


def render_overlay(image: np.ndarray, labels: np.ndarray, alpha: float = 0.5) -> bytes:
    """Label colors alpha-blended onto the (normalized) source image, as PNG."""
    img = np.asarray(image, dtype=float)
    if img.ndim == 3:  # display multichannel data by its magnitude
        img = np.sqrt((img**2).sum(axis=-1))
    lo, hi = float(img.min()), float(img.max())
    gray = np.zeros_like(img) if hi <= lo else (img - lo) / (hi - lo)
    base = np.repeat((gray * 255)[:, :, None], 3, axis=2)
    palette = np.array(LABEL_PALETTE, dtype=float)
    colors = palette[np.asarray(labels) % len(LABEL_PALETTE)]
    blended = ((1 - alpha) * base + alpha * colors).astype(np.uint8)
    im = PILImage.fromarray(blended, mode="RGB")
    import io

    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return buf.getvalue()
