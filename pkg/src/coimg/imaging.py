"""Deterministic pixel-level primitives shared across the pipeline.

Images are numpy arrays: uint8 RGB of shape (height, width, 3) at rest,
float64 inside transform chains.  All interpolation is bilinear in float64
and quantization back to 8 bits rounds half away from zero (``floor(x + 0.5)``
after clipping to [0, 255]), so independently re-rendering a record
reproduces its pixel digest exactly.
"""

from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np
from PIL import Image

from coimg.errors import DecodeFailure


def decode_image(path: str | Path) -> np.ndarray:
    """Decode an image file to an RGB uint8 array."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as exc:  # PIL raises a zoo of exception types
        raise DecodeFailure(f"{path}: {exc}") from exc


def pixel_digest(arr: np.ndarray) -> str:
    """SHA-256 over image dimensions plus the raw RGB pixel buffer."""
    if arr.dtype != np.uint8 or arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError("pixel_digest expects an RGB uint8 array")
    h, w = arr.shape[:2]
    digest = hashlib.sha256()
    digest.update(f"{w}x{h}:".encode("ascii"))
    digest.update(np.ascontiguousarray(arr).tobytes())
    return digest.hexdigest()


def quantize(arr: np.ndarray) -> np.ndarray:
    """Float image to uint8: clip to [0, 255], round half away from zero."""
    return np.floor(np.clip(arr, 0.0, 255.0) + 0.5).astype(np.uint8)


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with pixel-center alignment and edge clamping.

    Source coordinate of output pixel i is ``(i + 0.5) * in/out - 0.5``; a
    same-size resize is therefore an exact identity.
    """
    h, w = img.shape[:2]
    if out_h == h and out_w == w:
        return img
    if img.ndim == 2:
        return resize_bilinear(img[:, :, None], out_h, out_w)[:, :, 0]
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5
    yf = np.floor(ys)
    xf = np.floor(xs)
    fy = (ys - yf)[:, None, None]
    fx = (xs - xf)[None, :, None]
    y0 = np.clip(yf.astype(np.int64), 0, h - 1)
    y1 = np.clip(yf.astype(np.int64) + 1, 0, h - 1)
    x0 = np.clip(xf.astype(np.int64), 0, w - 1)
    x1 = np.clip(xf.astype(np.int64) + 1, 0, w - 1)
    rows0 = img[y0]
    rows1 = img[y1]
    r0 = rows0[:, x0] * (1.0 - fx) + rows0[:, x1] * fx
    r1 = rows1[:, x0] * (1.0 - fx) + rows1[:, x1] * fx
    return r0 * (1.0 - fy) + r1 * fy


def rotate_bilinear(img: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate about the image center, same output size, black fill.

    Positive angles rotate content clockwise on screen (y axis points down).
    Sampling is bilinear; taps outside the source contribute zero.
    """
    if degrees == 0.0:
        return img
    h, w = img.shape[:2]
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(
        np.arange(h, dtype=np.float64) - cy,
        np.arange(w, dtype=np.float64) - cx,
        indexing="ij",
    )
    sx = cos_t * xx + sin_t * yy + cx
    sy = -sin_t * xx + cos_t * yy + cy
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = (sx - x0)[..., None]
    fy = (sy - y0)[..., None]
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    def tap(yi: np.ndarray, xi: np.ndarray) -> np.ndarray:
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        vals = img[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
        return np.where(valid[..., None], vals, 0.0)

    top = tap(y0, x0) * (1.0 - fx) + tap(y0, x0 + 1) * fx
    bottom = tap(y0 + 1, x0) * (1.0 - fx) + tap(y0 + 1, x0 + 1) * fx
    return top * (1.0 - fy) + bottom * fy


def translate(img: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Shift content by whole pixels (dx right, dy down), black fill."""
    if dx == 0 and dy == 0:
        return img
    h, w = img.shape[:2]
    out = np.zeros_like(img)
    src_y = slice(max(0, -dy), min(h, h - dy))
    src_x = slice(max(0, -dx), min(w, w - dx))
    dst_y = slice(max(0, dy), min(h, h + dy))
    dst_x = slice(max(0, dx), min(w, w + dx))
    if src_y.start < src_y.stop and src_x.start < src_x.stop:
        out[dst_y, dst_x] = img[src_y, src_x]
    return out


def adjust_contrast(img: np.ndarray, scale: float) -> np.ndarray:
    """Scale contrast about mid-gray 127.5, clipped to the valid range."""
    if scale == 1.0:
        return img
    return np.clip((img - 127.5) * scale + 127.5, 0.0, 255.0)


def letterbox(img: np.ndarray, cell_w: int, cell_h: int) -> np.ndarray:
    """Aspect-preserving scale-to-fit into a cell, centered on black.

    The scaled size is ``floor(dim * scale + 0.5)`` (at least 1); centering
    offsets use integer floor division.
    """
    h, w = img.shape[:2]
    scale = min(cell_w / w, cell_h / h)
    tw = max(1, int(math.floor(w * scale + 0.5)))
    th = max(1, int(math.floor(h * scale + 0.5)))
    resized = resize_bilinear(img, th, tw)
    cell = np.zeros((cell_h, cell_w, img.shape[2]), dtype=np.float64)
    oy = (cell_h - th) // 2
    ox = (cell_w - tw) // 2
    cell[oy : oy + th, ox : ox + tw] = resized
    return cell
