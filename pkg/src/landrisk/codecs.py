"""Raster codecs, risk colorization and overlays.

Raw frames (``.rlm`` labels, ``.rkm`` risk)::

    magic   4 bytes  b"RLM1" | b"RKM1"
    width   uint32 little-endian
    height  uint32 little-endian
    data    width * height bytes, row-major ids

Color-coded PNGs are true-color RGB; every pixel must match a palette entry
exactly.
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image

from .classes import N_RISK_LEVELS, ClassTable, LabelError, validate_labels, validate_risk

LABEL_MAGIC = b"RLM1"
RISK_MAGIC = b"RKM1"
HEADER = struct.Struct("<4sII")


class CodecError(ValueError):
    pass


@dataclass(frozen=True)
class RiskColormap:
    colors: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        colors = tuple(tuple(int(c) for c in rgb) for rgb in self.colors)
        if len(colors) != N_RISK_LEVELS:
            raise ValueError(f"colormap needs {N_RISK_LEVELS} colors, got {len(colors)}")
        if any(len(rgb) != 3 or not all(0 <= c <= 255 for c in rgb) for rgb in colors):
            raise ValueError("colormap entries must be [r, g, b] with channels in 0-255")
        if len(set(colors)) != len(colors):
            raise ValueError("colormap colors must be pairwise distinct")
        object.__setattr__(self, "colors", colors)

    @property
    def palette(self) -> np.ndarray:
        return np.array(self.colors, dtype=np.uint8)


def load_colormap(path: str | Path | None = None) -> RiskColormap:
    """Read ``{"colors": [[r, g, b] x 6]}``; ``None`` loads the default blue -> red map."""
    if path is None:
        text = resources.files("landrisk.data").joinpath("colormap.json").read_text()
    else:
        text = Path(path).read_text()
    return RiskColormap(json.loads(text)["colors"])


def default_colormap() -> RiskColormap:
    return load_colormap(None)


# -- raw frames ---------------------------------------------------------------

def encode_raw(values: np.ndarray, magic: bytes) -> bytes:
    values = np.asarray(values)
    if values.ndim != 2 or 0 in values.shape:
        raise CodecError(f"expected a non-empty 2-D map, got shape {values.shape}")
    if values.min() < 0 or values.max() > 255:
        raise CodecError("raw frames store one byte per pixel")
    h, w = values.shape
    return HEADER.pack(magic, w, h) + np.ascontiguousarray(values, dtype=np.uint8).tobytes()


def decode_raw(data: bytes, magic: bytes | None = None) -> tuple[bytes, np.ndarray]:
    """Parse one raw frame; returns ``(magic, values)``. Trailing bytes are an error."""
    if len(data) < HEADER.size:
        raise CodecError("truncated header")
    got, w, h = HEADER.unpack_from(data)
    if got not in (LABEL_MAGIC, RISK_MAGIC) or (magic is not None and got != magic):
        want = magic or b"RLM1/RKM1"
        raise CodecError(f"bad magic {got!r}, expected {want!r}")
    if w == 0 or h == 0:
        raise CodecError(f"empty frame {w}x{h}")
    payload = memoryview(data)[HEADER.size :]
    if len(payload) < w * h:
        raise CodecError(f"truncated payload: need {w * h} bytes, got {len(payload)}")
    if len(payload) > w * h:
        raise CodecError(f"{len(payload) - w * h} trailing bytes after payload")
    values = np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
    return got, values


def encode_labels_raw(labels: np.ndarray, table: ClassTable) -> bytes:
    return encode_raw(validate_labels(labels, len(table)), LABEL_MAGIC)


def decode_labels_raw(data: bytes, table: ClassTable) -> np.ndarray:
    _, values = decode_raw(data, LABEL_MAGIC)
    return validate_labels(values, len(table))


def encode_risk_raw(risk: np.ndarray) -> bytes:
    return encode_raw(validate_risk(risk), RISK_MAGIC)


def decode_risk_raw(data: bytes) -> np.ndarray:
    _, values = decode_raw(data, RISK_MAGIC)
    return validate_risk(values)


def iter_raw_frames(stream, magic: bytes = LABEL_MAGIC):
    """Yield raw frame byte strings from a binary stream of concatenated records.

    A short header or payload raises :class:`CodecError` at that frame.
    """
    while True:
        head = stream.read(HEADER.size)
        if not head:
            return
        if len(head) < HEADER.size:
            raise CodecError("truncated header")
        got, w, h = HEADER.unpack(head)
        if got != magic:
            raise CodecError(f"bad magic {got!r}, expected {magic!r}")
        payload = stream.read(w * h)
        if len(payload) < w * h:
            raise CodecError(f"truncated payload: need {w * h} bytes, got {len(payload)}")
        yield head + payload


# -- color-coded PNG ----------------------------------------------------------

def _png_bytes(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    # fixed encoder settings keep the byte output stable
    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8)).save(
        buf, format="PNG", compress_level=6, optimize=False
    )
    return buf.getvalue()


def _read_rgb(png_bytes: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(png_bytes)) as img:
            return np.asarray(img.convert("RGB"))
    except (OSError, SyntaxError) as exc:
        raise CodecError(f"cannot decode image: {exc}") from None


def _pack(rgb: np.ndarray) -> np.ndarray:
    rgb = rgb.astype(np.uint32)
    return (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]


def colors_to_indices(rgb: np.ndarray, palette: np.ndarray) -> np.ndarray:
    """Exact inverse of ``palette[indices]``; unknown colors raise with pixel coordinates."""
    keys = _pack(np.asarray(palette))
    order = np.argsort(keys)
    sorted_keys = keys[order]
    packed = _pack(rgb)
    pos = np.searchsorted(sorted_keys, packed)
    pos = np.minimum(pos, len(sorted_keys) - 1)
    known = sorted_keys[pos] == packed
    if not known.all():
        y, x = np.argwhere(~known)[0]
        raise CodecError(f"unknown color {rgb[y, x].tolist()} at pixel (x={x}, y={y})")
    return order[pos].astype(np.uint8)


def encode_label_image(labels: np.ndarray, table: ClassTable) -> bytes:
    labels = validate_labels(labels, len(table))
    return _png_bytes(table.palette[labels])


def decode_label_image(png_bytes: bytes, table: ClassTable) -> np.ndarray:
    return colors_to_indices(_read_rgb(png_bytes), table.palette)


def encode_risk_image(risk: np.ndarray, cmap: RiskColormap) -> bytes:
    return _png_bytes(render_risk(risk, cmap))


def decode_risk_image(png_bytes: bytes, cmap: RiskColormap) -> np.ndarray:
    return colors_to_indices(_read_rgb(png_bytes), cmap.palette)


def read_rgb_image(path: str | Path) -> np.ndarray:
    return _read_rgb(Path(path).read_bytes())


def write_rgb_png(path: str | Path, rgb: np.ndarray) -> None:
    Path(path).write_bytes(_png_bytes(rgb))


# -- rendering ----------------------------------------------------------------

def render_risk(risk: np.ndarray, cmap: RiskColormap) -> np.ndarray:
    """``(h, w, 3)`` uint8 image with each level replaced by its colormap entry."""
    return cmap.palette[validate_risk(risk)]


def overlay(base: np.ndarray, risk: np.ndarray, cmap: RiskColormap, alpha: float) -> np.ndarray:
    """Alpha-blend the rendered risk map over ``base``, rounding half up per channel."""
    base = np.asarray(base)
    risk = validate_risk(risk)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if base.shape != risk.shape + (3,):
        raise LabelError(f"dimension mismatch: base {base.shape} vs risk {risk.shape}")
    colors = render_risk(risk, cmap)
    if alpha == 0.0:
        return base.astype(np.uint8, copy=True)
    if alpha == 1.0:
        return colors
    mixed = (1.0 - alpha) * base.astype(np.float64) + alpha * colors.astype(np.float64)
    return np.floor(mixed + 0.5).clip(0, 255).astype(np.uint8)
