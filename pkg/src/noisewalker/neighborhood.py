"""Optimal per-pixel sample windows and symmetric overlap resolution.

Each pixel draws its sample multiset from the square window (side 2k+1,
fully inside the image) that maximizes the likelihood of the pixel's own
value under parameters estimated from the window. Windows of 4-adjacent
pixels may overlap; the overlap is split along the line orthogonal to the
connecting edge by sorting on the difference of Euclidean distances to the
two centers, then equalized so both sides keep the same sample count. The
split is invariant under argument order, which makes downstream edge
weights symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import gammaln

from .noise_models import (
    GaussianConstCovConfig,
    GaussianVarVarConfig,
    GradyConfig,
    NoiseModelConfig,
    PoissonConfig,
    SampleSet,
    estimate_global_covariance,
    variance_floor,
)

__all__ = [
    "ResolvedPair",
    "resolve_config",
    "candidate_origins",
    "window_sample_set",
    "select_neighborhood",
    "select_all_origins",
    "resolve_overlap",
]


@dataclass(frozen=True)
class ResolvedPair:
    """Disjoint, equal-cardinality sample sets for one graph edge."""

    set_x: SampleSet
    set_y: SampleSet


def resolve_config(model: NoiseModelConfig, image: np.ndarray) -> NoiseModelConfig:
    """Fill image-derived model fields (covariance, variance floor)."""
    if isinstance(model, GaussianConstCovConfig) and model.covariance is None:
        return GaussianConstCovConfig(covariance=estimate_global_covariance(image))
    if isinstance(model, GaussianVarVarConfig) and model.variance_floor is None:
        img = np.asarray(image, dtype=float)
        return GaussianVarVarConfig(variance_floor=variance_floor(float(img.max() - img.min())))
    return model


def _check_window_fits(shape: tuple[int, int], k: int) -> None:
    size = 2 * k + 1
    if shape[0] < size or shape[1] < size:
        raise ValueError(
            f"image of shape {shape} cannot hold a {size}x{size} window; use a smaller k"
        )


def candidate_origins(shape: tuple[int, int], pixel: tuple[int, int], k: int) -> list[tuple[int, int]]:
    """All origins of (2k+1)-windows that contain ``pixel`` and fit the image.

    Raster order (the tie-break order of the selection argmax).
    """
    _check_window_fits(shape, k)
    size = 2 * k + 1
    py, px = pixel
    if not (0 <= py < shape[0] and 0 <= px < shape[1]):
        raise ValueError(f"pixel {pixel} outside image of shape {shape}")
    ys = range(max(py - 2 * k, 0), min(py, shape[0] - size) + 1)
    xs = range(max(px - 2 * k, 0), min(px, shape[1] - size) + 1)
    return [(oy, ox) for oy in ys for ox in xs]


def window_sample_set(
    image: np.ndarray, origin: tuple[int, int], k: int, center: tuple[int, int]
) -> SampleSet:
    """Materialize the window at ``origin`` as a raster-ordered sample set."""
    size = 2 * k + 1
    oy, ox = origin
    patch = np.asarray(image, dtype=float)[oy : oy + size, ox : ox + size]
    if patch.ndim == 2:
        values = patch.reshape(-1)
    else:
        values = patch.reshape(-1, patch.shape[2])
    yy, xx = np.mgrid[oy : oy + size, ox : ox + size]
    coords = np.stack([yy.reshape(-1), xx.reshape(-1)], axis=1)
    return SampleSet(values=values, center=tuple(center), coords=coords)


def _poisson_loglik(value, total, count):
    """log Poisson pmf of ``value`` at rate mean = total/count (counts rounded)."""
    lam = total / count
    v = value
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = v * np.log(lam) - lam - gammaln(v + 1.0)
        ll = np.where(lam == 0, np.where(v == 0, 0.0, -np.inf), ll)
    return ll


def _gauss_loglik(value, mean, var):
    return -0.5 * np.log(2 * np.pi * var) - (value - mean) ** 2 / (2.0 * var)


def _mahalanobis_loglik(value, mean, cov_inv, log_norm):
    diff = value - mean
    d2 = np.einsum("...i,ij,...j->...", diff, cov_inv, diff)
    return log_norm - 0.5 * d2


def _prepare_image(image: np.ndarray, model: NoiseModelConfig) -> np.ndarray:
    img = np.asarray(image, dtype=float)
    if isinstance(model, PoissonConfig):
        if img.ndim != 2:
            raise ValueError("Poisson model expects a scalar image")
        return np.clip(np.rint(img), 0, None)
    if isinstance(model, GaussianVarVarConfig) and img.ndim != 2:
        raise ValueError("variable-variance model expects a scalar image")
    return img


def _window_loglik(model: NoiseModelConfig, value, total, sq_total, count):
    """Likelihood of one pixel value under parameters estimated from window stats."""
    if isinstance(model, PoissonConfig):
        return _poisson_loglik(value, total, count)
    if isinstance(model, GaussianConstCovConfig):
        cov = model.covariance
        cov_inv = np.linalg.inv(cov)
        log_norm = -0.5 * (
            cov.shape[0] * np.log(2 * np.pi) + np.linalg.slogdet(cov)[1]
        )
        return _mahalanobis_loglik(value, total / count, cov_inv, log_norm)
    if isinstance(model, GaussianVarVarConfig):
        mean = total / count
        var = np.maximum(sq_total / count - mean**2, 0.0)
        var = np.maximum(var, model.variance_floor)
        return _gauss_loglik(value, mean, var)
    raise ValueError(f"model {model!r} does not define a pixel likelihood")


def select_neighborhood(
    image: np.ndarray, pixel: tuple[int, int], k: int, model: NoiseModelConfig
) -> SampleSet:
    """Likelihood-maximizing window of ``pixel`` as a sample set.

    Ties resolve to the smallest window origin in raster order. ``model``
    must be one of the noise models with a pixel PDF; the baseline weight has
    none and is rejected.
    """
    if isinstance(model, GradyConfig):
        raise ValueError("the baseline weight uses no neighborhoods")
    model = resolve_config(model, image)
    img = _prepare_image(image, model)
    shape = img.shape[:2]
    origins = candidate_origins(shape, pixel, k)
    size = 2 * k + 1
    count = size * size
    value = np.atleast_1d(img[pixel[0], pixel[1]])
    best, best_ll = None, -math.inf
    for origin in origins:
        patch = img[origin[0] : origin[0] + size, origin[1] : origin[1] + size]
        flat = patch.reshape(count, -1).astype(float)
        total = flat.sum(axis=0)
        sq_total = (flat**2).sum(axis=0)
        ll = np.asarray(_window_loglik(model, value, total, sq_total, count)).sum()
        if ll > best_ll:
            best, best_ll = origin, ll
    return window_sample_set(image, best, k, pixel)


def select_all_origins(image: np.ndarray, k: int, model: NoiseModelConfig) -> np.ndarray:
    """Chosen window origin for every pixel, shape (H, W, 2).

    Vectorized equivalent of :func:`select_neighborhood` over the whole
    image: per-origin window statistics come from sliding windows, the
    argmax scans candidate offsets in raster order so ties resolve the same
    way as the per-pixel routine.
    """
    if isinstance(model, GradyConfig):
        raise ValueError("the baseline weight uses no neighborhoods")
    model = resolve_config(model, image)
    img = _prepare_image(image, model)
    h, w = img.shape[:2]
    _check_window_fits((h, w), k)
    size = 2 * k + 1
    count = size * size
    img3 = img[:, :, None] if img.ndim == 2 else img
    m = img3.shape[2]

    # stats per window origin, flattened windows so both selection paths
    # accumulate in identical order
    sw = sliding_window_view(img3, (size, size), axis=(0, 1))
    flat = sw.reshape(h - size + 1, w - size + 1, m, count)
    totals = flat.sum(axis=-1)
    sq_totals = (flat**2).sum(axis=-1)

    if isinstance(model, GaussianConstCovConfig):
        cov = model.covariance
        if cov.shape[0] != m:
            raise ValueError(f"covariance is {cov.shape[0]}-channel but image has {m}")
        cov_inv = np.linalg.inv(cov)
        log_norm = -0.5 * (m * np.log(2 * np.pi) + np.linalg.slogdet(cov)[1])

    offsets = [(dy, dx) for dy in range(-2 * k, 1) for dx in range(-2 * k, 1)]
    n_offsets = len(offsets)
    ll = np.full((n_offsets, h, w), -np.inf)
    for ci, (dy, dx) in enumerate(offsets):
        # pixels whose candidate origin (y+dy, x+dx) is a valid window origin
        y0, y1 = max(-dy, 0), min(h - size - dy, h - 1) + 1
        x0, x1 = max(-dx, 0), min(w - size - dx, w - 1) + 1
        if y0 >= y1 or x0 >= x1:
            continue
        tot = totals[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
        val = img3[y0:y1, x0:x1]
        if isinstance(model, PoissonConfig):
            ll[ci, y0:y1, x0:x1] = _poisson_loglik(val[..., 0], tot[..., 0], count)
        elif isinstance(model, GaussianConstCovConfig):
            ll[ci, y0:y1, x0:x1] = _mahalanobis_loglik(val, tot / count, cov_inv, log_norm)
        else:
            sq = sq_totals[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
            mean = tot[..., 0] / count
            var = np.maximum(sq[..., 0] / count - mean**2, 0.0)
            var = np.maximum(var, model.variance_floor)
            ll[ci, y0:y1, x0:x1] = _gauss_loglik(val[..., 0], mean, var)

    choice = np.argmax(ll, axis=0)  # first max = raster-smallest origin
    off = np.asarray(offsets)
    yy, xx = np.mgrid[0:h, 0:w]
    origins = np.stack([yy + off[choice, 0], xx + off[choice, 1]], axis=-1)
    return origins


# ---------------------------------------------------------------------------
# Overlap resolution
# ---------------------------------------------------------------------------


def _partition_coords(
    ca: tuple[int, int],
    cb: tuple[int, int],
    coords_a: list[tuple[int, int]],
    coords_b: list[tuple[int, int]],
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Split two overlapping coordinate sets; ``ca`` must precede ``cb`` in raster order.

    Overlap pixels sort by d(p, ca) - d(p, cb) (ties by raster order); the
    lower half goes to a's side, the upper to b's. An odd overlap assigns the
    median pixel to a's side (the raster-smaller center), after which the
    larger side drops its pixel of largest key magnitude so the cardinalities
    match.
    """

    def key(p):
        return math.hypot(p[0] - ca[0], p[1] - ca[1]) - math.hypot(p[0] - cb[0], p[1] - cb[1])

    in_b = set(coords_b)
    in_a = set(coords_a)
    overlap = sorted((p for p in coords_a if p in in_b), key=lambda p: (key(p), p))
    side_a = [p for p in coords_a if p not in in_b]
    side_b = [p for p in coords_b if p not in in_a]
    half = len(overlap) // 2
    side_a += overlap[:half]
    side_b += overlap[half + (len(overlap) % 2) :]
    if len(overlap) % 2:
        side_a.append(overlap[half])
        # equalize: larger side sheds its most one-sided pixel
        drop = max(side_a, key=lambda p: (abs(key(p)), (-p[0], -p[1])))
        side_a.remove(drop)
    side_a.sort()
    side_b.sort()
    return side_a, side_b


def resolve_overlap(x: SampleSet, y: SampleSet) -> ResolvedPair:
    """Disjoint equal-size split of two selected neighborhoods.

    Requires coordinate-tagged sample sets of equal cardinality belonging to
    distinct center pixels. The result does not depend on argument order.
    """
    if x.coords is None or y.coords is None or x.center is None or y.center is None:
        raise ValueError("overlap resolution needs coordinate-tagged sample sets")
    if len(x) != len(y):
        raise ValueError("sample sets must have equal cardinality")
    if tuple(x.center) == tuple(y.center):
        raise ValueError("sample sets must belong to distinct pixels")
    if tuple(y.center) < tuple(x.center):
        flipped = resolve_overlap(y, x)
        return ResolvedPair(set_x=flipped.set_y, set_y=flipped.set_x)

    coords_a = [tuple(c) for c in x.coords]
    coords_b = [tuple(c) for c in y.coords]
    side_a, side_b = _partition_coords(tuple(x.center), tuple(y.center), coords_a, coords_b)

    def subset(s: SampleSet, keep: list[tuple[int, int]]) -> SampleSet:
        index = {tuple(c): i for i, c in enumerate(s.coords)}
        rows = [index[p] for p in keep]
        return SampleSet(
            values=s.values[rows], center=tuple(s.center), coords=s.coords[rows]
        )

    return ResolvedPair(set_x=subset(x, side_a), set_y=subset(y, side_b))


@lru_cache(maxsize=None)
def _relative_partition(
    k: int,
    d_center: tuple[int, int],
    off_a: tuple[int, int],
    off_b: tuple[int, int],
) -> tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]:
    """Overlap split in coordinates relative to the first center.

    ``d_center`` is the second center relative to the first and must be
    raster-positive (edges are canonicalized to left-to-right / top-to-bottom
    before lookup); ``off_a``/``off_b`` are the window origins relative to
    their own centers. Cached: for fixed k there are only (2k+1)^4 geometries
    per edge orientation.
    """
    size = 2 * k + 1
    rel = [(dy, dx) for dy in range(size) for dx in range(size)]
    coords_a = [(off_a[0] + dy, off_a[1] + dx) for dy, dx in rel]
    coords_b = [
        (d_center[0] + off_b[0] + dy, d_center[1] + off_b[1] + dx) for dy, dx in rel
    ]
    side_a, side_b = _partition_coords((0, 0), d_center, coords_a, coords_b)
    return tuple(side_a), tuple(side_b)
