"""Stereo and inpainting MRFs built from 8-bit grayscale images."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

import numpy as np

from irgc.mrf_model import MRFModel, build_grid, grid_edges
from irgc.priors import make_prior


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major 8-bit image; ``pixels`` has shape ``(height, width)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {px.shape}")
        if np.any(px < 0) or np.any(px > 255) or np.any(px != np.round(px)):
            raise ValueError("pixel values must be integers in [0, 255]")
        px = px.astype(np.uint8)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_flat(cls, width, height, values):
        values = np.asarray(values)
        if values.size != width * height:
            raise ValueError(f"expected {width * height} pixels, got {values.size}")
        return cls(values.reshape(height, width))

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)


# -- PGM -------------------------------------------------------------------------


class PGMError(ValueError):
    """Malformed or unsupported PGM data. ``code`` names the failure."""

    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _header_tokens(data, count):
    tokens = []
    pos = 0
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PGMError("MALFORMED_HEADER", "header ended early")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens, pos


def read_pgm(path):
    """Read a binary (P5) 8-bit PGM file."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise PGMError("UNSUPPORTED_FORMAT", f"{path}: only binary PGM (P5) is supported")
    (magic, w, h, maxval), pos = _header_tokens(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise PGMError("MALFORMED_HEADER", f"{path}: non-numeric header field") from None
    if width <= 0 or height <= 0 or maxval <= 0:
        raise PGMError("MALFORMED_HEADER", f"{path}: non-positive dimension or maxval")
    if maxval > 255:
        raise PGMError("UNSUPPORTED_MAXVAL", f"{path}: maxval {maxval} > 255")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise PGMError("MALFORMED_HEADER", f"{path}: missing separator before raster")
    raster = data[pos + 1:]
    if len(raster) < width * height:
        raise PGMError("TRUNCATED_DATA", f"{path}: expected {width * height} bytes, found {len(raster)}")
    pixels = np.frombuffer(raster, dtype=np.uint8, count=width * height).reshape(height, width)
    if pixels.max(initial=0) > maxval:
        raise PGMError("MALFORMED_HEADER", f"{path}: pixel exceeds maxval {maxval}")
    return GrayImage(pixels.copy())


def write_pgm(image, path):
    """Write ``image`` as binary PGM with maxval 255."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(image.pixels, dtype=np.uint8).tobytes())


def labels_to_image(labels, width, height, num_labels):
    """Map labels to gray levels ``floor(label * 255 / (L - 1))``."""
    labels = np.asarray(labels, dtype=np.int64).reshape(height, width)
    return GrayImage((labels * 255) // (num_labels - 1))


# -- stereo ------------------------------------------------------------------------


class Matcher(str, enum.Enum):
    ABSOLUTE_DIFFERENCE = "ABSOLUTE_DIFFERENCE"
    BIRCHFIELD_TOMASI = "BIRCHFIELD_TOMASI"


def _half_pixel_range(img):
    """Min and max over the pixel and its two horizontal half-pixel interpolants."""
    left = np.concatenate([img[:, :1], img[:, :-1]], axis=1)
    right = np.concatenate([img[:, 1:], img[:, -1:]], axis=1)
    minus = 0.5 * (img + left)
    plus = 0.5 * (img + right)
    lo = np.minimum(np.minimum(minus, plus), img)
    hi = np.maximum(np.maximum(minus, plus), img)
    return lo, hi


def stereo_unaries(left, right, num_labels, matcher=Matcher.ABSOLUTE_DIFFERENCE):
    """Matching cost ``f_p(d)`` between left pixel ``(r, c)`` and right pixel ``(r, c - d)``.

    Disparities that fall off the right image get the largest in-bounds cost of
    the same pixel.
    """
    if (left.width, left.height) != (right.width, right.height):
        raise ValueError("left and right images differ in size")
    if num_labels < 2:
        raise ValueError("need at least two disparity labels")
    matcher = Matcher(matcher)
    h, w = left.height, left.width
    L_img = left.pixels.astype(np.float64)
    R_img = right.pixels.astype(np.float64)
    if matcher is Matcher.BIRCHFIELD_TOMASI:
        l_lo, l_hi = _half_pixel_range(L_img)
        r_lo, r_hi = _half_pixel_range(R_img)

    cost = np.full((h, w, num_labels), np.nan)
    for d in range(num_labels):
        if d >= w:
            break
        il = L_img[:, d:]
        ir = R_img[:, : w - d]
        if matcher is Matcher.ABSOLUTE_DIFFERENCE:
            c = np.abs(il - ir)
        else:
            d_lr = np.maximum(0.0, np.maximum(il - r_hi[:, : w - d], r_lo[:, : w - d] - il))
            d_rl = np.maximum(0.0, np.maximum(ir - l_hi[:, d:], l_lo[:, d:] - ir))
            c = np.minimum(d_lr, d_rl)
        cost[:, d:, d] = c
    # d = 0 is always in bounds, so every pixel has a finite maximum
    fill = np.nanmax(cost, axis=2, keepdims=True)
    cost = np.where(np.isnan(cost), fill, cost)
    return cost.reshape(h * w, num_labels)


@dataclass(frozen=True)
class GradientGammaRule:
    """``gamma_low_gradient`` where ``|I(p) - I(q)| <= threshold``, else ``gamma_high_gradient``."""

    threshold: int
    gamma_low_gradient: float
    gamma_high_gradient: float

    def __post_init__(self):
        if self.threshold < 0 or self.gamma_low_gradient < 0 or self.gamma_high_gradient < 0:
            raise ValueError("gradient rule parameters must be non-negative")

    @classmethod
    def uniform(cls, gamma):
        return cls(0, float(gamma), float(gamma))


def stereo_gammas(left, rule, connectivity=4):
    """Per-edge gamma from intensity differences in the left image, in grid edge order."""
    edges = grid_edges(left.width, left.height, connectivity)
    flat = left.pixels.astype(np.int64).ravel()
    grad = np.abs(flat[edges[:, 0]] - flat[edges[:, 1]])
    return np.where(grad <= rule.threshold, rule.gamma_low_gradient, rule.gamma_high_gradient).astype(np.float64)


def stereo_model(left, right, num_labels, prior, rule, connectivity=4, matcher=Matcher.ABSOLUTE_DIFFERENCE):
    unary = stereo_unaries(left, right, num_labels, matcher)
    gamma = stereo_gammas(left, rule, connectivity)
    return build_grid(left.width, left.height, connectivity, unary, gamma, prior)


# -- inpainting ------------------------------------------------------------------------


def inpainting_model(image, mask, label_step, gamma, lam):
    """Inpainting/denoising MRF on quantized intensities ``{0, step, 2*step, ...}``.

    ``mask`` is true where the intensity is observed. Observed pixels cost
    ``(I_p - k*step)**2`` for label ``k``; missing pixels cost nothing. The prior
    is ``gamma * min((k_p - k_q)**2, lam**2)`` in label units on a 4-connected
    grid.
    """
    if label_step <= 0 or 256 % label_step:
        raise ValueError(f"label_step must be a positive divisor of 256, got {label_step}")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != image.pixels.shape:
        raise ValueError("mask and image differ in shape")
    num_labels = 256 // label_step
    levels = label_step * np.arange(num_labels, dtype=np.float64)
    intensity = image.pixels.astype(np.float64).ravel()
    unary = (intensity[:, None] - levels[None, :]) ** 2
    unary[~mask.ravel()] = 0.0
    prior = make_prior("TRUNCATED_QUADRATIC", lam=lam)
    return build_grid(image.width, image.height, 4, unary, float(gamma), prior)


# -- synthetic stereo ----------------------------------------------------------------------

SYNTHETIC_LAYERS = (
    # (disparity, top, left, size) in left-image coordinates, far to near
    (1, 0, 0, None),
    (3, 6, 8, 26),
    (5, 30, 30, 24),
    (7, 12, 40, 16),
)


def synthetic_stereo_pair(size=64, num_labels=8, seed=0, noise=2.0):
    """Render a rectified pair of textured fronto-parallel squares.

    Returns ``(left, right, disparity)`` where ``disparity`` is the true
    per-pixel label of the left image. Each square is a plane at a constant
    disparity; the right image is rendered by looking up, for every pixel, the
    nearest layer covering ``(r, c + d)``.
    """
    rng = np.random.default_rng(seed)
    pad = num_labels
    textures = []
    for _ in SYNTHETIC_LAYERS:
        tex = rng.uniform(0, 255, size=(size, size + pad))
        # light horizontal smoothing keeps the texture matchable but not trivial
        tex = (tex + np.roll(tex, 1, axis=1) + np.roll(tex, -1, axis=1)) / 3.0
        textures.append(tex)

    def cover(layer, rows, cols):
        d, top, lft, sq = layer
        if sq is None:
            return np.ones(np.broadcast(rows, cols).shape, dtype=bool)
        return (rows >= top) & (rows < top + sq) & (cols >= lft) & (cols < lft + sq)

    rows, cols = np.mgrid[0:size, 0:size]
    left = np.zeros((size, size))
    right = np.zeros((size, size))
    disparity = np.zeros((size, size), dtype=np.int64)
    for tex, layer in zip(textures, SYNTHETIC_LAYERS):
        d = layer[0]
        if d >= num_labels:
            raise ValueError("layer disparity exceeds label range")
        on_left = cover(layer, rows, cols)
        left[on_left] = tex[rows[on_left], cols[on_left]]
        disparity[on_left] = d
        on_right = cover(layer, rows, cols + d)
        right[on_right] = tex[rows[on_right], (cols + d)[on_right]]
    left += rng.normal(0.0, noise, left.shape)
    right += rng.normal(0.0, noise, right.shape)
    to_img = lambda a: GrayImage(np.clip(np.round(a), 0, 255))  # noqa: E731
    return to_img(left), to_img(right), disparity


SYNTHETIC_FILES = ("stereo_left.pgm", "stereo_right.pgm", "stereo_truth.pgm")


def load_synthetic_stereo():
    """Bundled 64x64 pair from ``synthetic_stereo_pair()`` with its defaults.

    The truth image stores raw disparity labels (0..7), not scaled gray levels.
    """
    from importlib.resources import as_file, files

    out = []
    for name in SYNTHETIC_FILES:
        with as_file(files("irgc") / "data" / name) as path:
            out.append(read_pgm(path))
    left, right, truth = out
    return left, right, truth.pixels.astype(np.int64)
