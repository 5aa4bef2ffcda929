"""Weighted 4-connected lattice graphs and the Dirichlet label solves.

An image becomes a graph with one node per pixel and one weighted edge per
horizontal/vertical neighbor pair. Edge weights come from the configured
noise model: both endpoint neighborhoods are selected, their overlap is
resolved, and the model's closed-form weight is evaluated on the resolved
sample sets (the baseline model weighs raw intensity differences instead).
Seed pixels impose boundary conditions; per label, the unseeded probabilities
solve a symmetric positive definite linear system in the graph Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import neighborhood as nb
from .noise_models import (
    GaussianConstCovConfig,
    GradyConfig,
    NoiseModelConfig,
    PoissonConfig,
    _gaussian_var_weight_arrays,
    _poisson_weight_arrays,
)

__all__ = [
    "WEIGHT_FLOOR",
    "DIRECT_SOLVE_LIMIT",
    "LatticeGraph",
    "SeedMap",
    "ProbabilityField",
    "SolverConvergenceError",
    "normalize_intensities",
    "build_graph",
    "solve_dirichlet",
    "segment",
]

# Weights are clamped to [WEIGHT_FLOOR, 1]: closed forms can underflow to 0,
# which would disconnect the walk graph and break positive definiteness.
WEIGHT_FLOOR = 1e-6

# The dense direct path factorizes L_UU in full; beyond this it is refused.
DIRECT_SOLVE_LIMIT = 4096


class SolverConvergenceError(RuntimeError):
    """Iterative solve missed the residual tolerance within the iteration cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class LatticeGraph:
    """Edge weights of a height x width 4-connected pixel lattice."""

    horizontal: np.ndarray  # (H, W-1), edge (y, x) -- (y, x+1)
    vertical: np.ndarray  # (H-1, W), edge (y, x) -- (y+1, x)

    def __post_init__(self):
        h = np.asarray(self.horizontal, dtype=float)
        v = np.asarray(self.vertical, dtype=float)
        if h.ndim != 2 or v.ndim != 2 or h.shape[0] != v.shape[0] + 1 or v.shape[1] != h.shape[1] + 1:
            raise ValueError("inconsistent edge array shapes")
        for w in (h, v):
            if w.size and (w.min() < WEIGHT_FLOOR or w.max() > 1.0):
                raise ValueError(f"edge weights must lie in [{WEIGHT_FLOOR}, 1]")
        object.__setattr__(self, "horizontal", h)
        object.__setattr__(self, "vertical", v)

    @property
    def height(self) -> int:
        return self.horizontal.shape[0]

    @property
    def width(self) -> int:
        return self.vertical.shape[1]


@dataclass(frozen=True)
class SeedMap:
    """Dense label assignment; -1 marks unseeded pixels."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int32)
        if lab.ndim != 2:
            raise ValueError("seed map must be 2-D")
        if lab.size and lab.min() < -1:
            raise ValueError("labels must be nonnegative (-1 = unseeded)")
        object.__setattr__(self, "labels", lab)

    @classmethod
    def empty(cls, shape: tuple[int, int]) -> "SeedMap":
        return cls(labels=np.full(shape, -1, dtype=np.int32))

    @classmethod
    def from_points(cls, shape: tuple[int, int], points) -> "SeedMap":
        """Build from an iterable of ``{"x", "y", "label"}`` dicts or (x, y, label) tuples."""
        lab = np.full(shape, -1, dtype=np.int32)
        for p in points:
            x, y, label = (p["x"], p["y"], p["label"]) if isinstance(p, dict) else p
            if not (0 <= y < shape[0] and 0 <= x < shape[1]):
                raise ValueError(f"seed ({x}, {y}) outside image of shape {shape}")
            if label < 0:
                raise ValueError("seed labels must be nonnegative")
            if lab[y, x] != -1 and lab[y, x] != label:
                raise ValueError(f"pixel ({x}, {y}) seeded with conflicting labels")
            lab[y, x] = label
        return cls(labels=lab)

    def to_points(self) -> list[dict]:
        ys, xs = np.nonzero(self.labels >= 0)
        return [
            {"x": int(x), "y": int(y), "label": int(self.labels[y, x])}
            for y, x in zip(ys.tolist(), xs.tolist())
        ]

    def with_seed(self, x: int, y: int, label: int) -> "SeedMap":
        pts = self.to_points()
        pts.append({"x": x, "y": y, "label": label})
        return SeedMap.from_points(self.labels.shape, pts)

    def label_ids(self) -> np.ndarray:
        present = np.unique(self.labels)
        return present[present >= 0]

    @property
    def count(self) -> int:
        return int((self.labels >= 0).sum())


@dataclass(frozen=True)
class ProbabilityField:
    """Per-label probabilities, their argmax labeling, and solver health data.

    ``prenorm_sums`` holds the per-pixel probability sums before clamping and
    renormalization; deviations from 1 beyond ~10x the solver tolerance point
    at an unhealthy solve.
    """

    probabilities: np.ndarray  # (K, H, W)
    labels: np.ndarray  # (K,) ascending label ids
    argmax_map: np.ndarray  # (H, W)
    prenorm_sums: np.ndarray  # (H, W)


def normalize_intensities(image: np.ndarray) -> np.ndarray:
    """Rescale to [0, 1]: scalar images by range, vector images by max norm."""
    img = np.asarray(image, dtype=float)
    if img.ndim == 2:
        lo, hi = float(img.min()), float(img.max())
        if hi <= lo:
            return np.zeros_like(img)
        return (img - lo) / (hi - lo)
    norms = np.sqrt((img**2).sum(axis=-1))
    peak = float(norms.max())
    if peak <= 0:
        return np.zeros_like(img)
    return img / peak


def _gather(values: np.ndarray, ys: np.ndarray, xs: np.ndarray, rel) -> np.ndarray:
    """Sample values at ys/xs shifted by each relative coordinate: (E, n[, m])."""
    planes = [values[ys + dy, xs + dx] for dy, dx in rel]
    return np.stack(planes, axis=1)


def _model_edge_weights(
    img: np.ndarray,
    origins: np.ndarray,
    model: NoiseModelConfig,
    k: int,
    horizontal: bool,
) -> np.ndarray:
    """Weights of all horizontal or vertical edges for a neighborhood model.

    Edges with identical window geometry share one overlap resolution; edges
    are grouped by the two window origins relative to their centers and each
    group is evaluated vectorized.
    """
    h, w = img.shape[:2]
    if horizontal:
        ys, xs = np.mgrid[0:h, 0 : w - 1]
        d_center = (0, 1)
    else:
        ys, xs = np.mgrid[0 : h - 1, 0:w]
        d_center = (1, 0)
    ys, xs = ys.ravel(), xs.ravel()
    by, bx = ys + d_center[0], xs + d_center[1]

    size = 2 * k + 1
    off_a = origins[ys, xs] - np.stack([ys, xs], axis=1)  # in [-2k, 0]
    off_b = origins[by, bx] - np.stack([by, bx], axis=1)
    combo = (
        ((off_a[:, 0] + 2 * k) * size + (off_a[:, 1] + 2 * k)) * size * size
        + (off_b[:, 0] + 2 * k) * size
        + (off_b[:, 1] + 2 * k)
    )

    if isinstance(model, GaussianConstCovConfig):
        cov_inv = np.linalg.inv(model.covariance)

    weights = np.empty(len(ys), dtype=float)
    for cid in np.unique(combo):
        sel = combo == cid
        oa = tuple(off_a[sel][0])
        ob = tuple(off_b[sel][0])
        rel_a, rel_b = nb._relative_partition(k, d_center, oa, ob)
        eys, exs = ys[sel], xs[sel]
        va = _gather(img, eys, exs, rel_a)
        vb = _gather(img, eys, exs, rel_b)
        n = len(rel_a)
        if isinstance(model, PoissonConfig):
            weights[sel] = _poisson_weight_arrays(va.sum(axis=1), vb.sum(axis=1))
        elif isinstance(model, GaussianConstCovConfig):
            diff = va.sum(axis=1) / n - vb.sum(axis=1) / n
            if diff.ndim == 1:
                diff = diff[:, None]
            d2 = np.einsum("ei,ij,ej->e", diff, cov_inv, diff)
            weights[sel] = np.exp(-n * d2 / 8.0)
        else:
            mean_a = va.sum(axis=1) / n
            mean_b = vb.sum(axis=1) / n
            var_a = ((va - mean_a[:, None]) ** 2).sum(axis=1) / n
            var_b = ((vb - mean_b[:, None]) ** 2).sum(axis=1) / n
            weights[sel] = _gaussian_var_weight_arrays(
                var_a, var_b, mean_a, mean_b, n, model.variance_floor
            )
    shape = (h, w - 1) if horizontal else (h - 1, w)
    return weights.reshape(shape)


def build_graph(image: np.ndarray, model: NoiseModelConfig, k: int = 1) -> LatticeGraph:
    """Evaluate the configured weight on every 4-neighbor edge of the image.

    Neighborhood models select both endpoint windows, resolve the overlap and
    weigh the resolved sample sets; the baseline model weighs normalized
    intensity differences directly. All weights are clamped to
    [WEIGHT_FLOOR, 1].
    """
    img = np.asarray(image, dtype=float)
    if img.ndim not in (2, 3):
        raise ValueError("image must be 2-D scalar or 3-D multichannel")
    h, w = img.shape[:2]
    if isinstance(model, GradyConfig):
        norm = normalize_intensities(img)
        dh = norm[:, 1:] - norm[:, :-1]
        dv = norm[1:, :] - norm[:-1, :]
        if norm.ndim == 3:
            qh, qv = (dh**2).sum(axis=-1), (dv**2).sum(axis=-1)
        else:
            qh, qv = dh**2, dv**2
        wh = np.exp(-model.beta * qh)
        wv = np.exp(-model.beta * qv)
    else:
        nb._check_window_fits((h, w), k)
        model = nb.resolve_config(model, img)
        prepared = nb._prepare_image(img, model)
        origins = nb.select_all_origins(img, k, model)
        wh = _model_edge_weights(prepared, origins, model, k, horizontal=True)
        wv = _model_edge_weights(prepared, origins, model, k, horizontal=False)
    wh = np.clip(wh, WEIGHT_FLOOR, 1.0)
    wv = np.clip(wv, WEIGHT_FLOOR, 1.0)
    return LatticeGraph(horizontal=wh, vertical=wv)


def _laplacian(graph: LatticeGraph) -> sp.csr_matrix:
    h, w = graph.height, graph.width
    n = h * w
    idx = np.arange(n).reshape(h, w)
    pairs = [
        (idx[:, :-1].ravel(), idx[:, 1:].ravel(), graph.horizontal.ravel()),
        (idx[:-1, :].ravel(), idx[1:, :].ravel(), graph.vertical.ravel()),
    ]
    rows = np.concatenate([p[0] for p in pairs] + [p[1] for p in pairs])
    cols = np.concatenate([p[1] for p in pairs] + [p[0] for p in pairs])
    vals = np.concatenate([p[2] for p in pairs] * 2)
    adj = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    return (sp.diags(deg) - adj).tocsr()


def solve_dirichlet(
    graph: LatticeGraph,
    seeds: SeedMap,
    method: str = "iterative",
    rtol: float = 1e-8,
    maxiter: int | None = None,
) -> ProbabilityField:
    """Per-label probabilities of reaching that label's seeds first.

    One SPD solve per label; solutions are clamped to [0, 1] and renormalized
    per pixel (the raw sums are kept in ``prenorm_sums`` as a health check).
    Seeded pixels carry exact 0/1 probabilities. Argmax ties go to the
    smaller label id.

    ``method``: ``iterative`` (conjugate gradients, diagonal preconditioner,
    relative residual ``rtol``, iteration cap ``maxiter`` defaulting to
    10x the unknown count) or ``direct`` (dense Cholesky, exact up to
    roundoff, available up to ``DIRECT_SOLVE_LIMIT`` unknowns).
    """
    if method not in ("iterative", "direct"):
        raise ValueError("method must be 'iterative' or 'direct'")
    h, w = graph.height, graph.width
    if seeds.labels.shape != (h, w):
        raise ValueError("seed map shape does not match the graph")
    ids = seeds.label_ids()
    if len(ids) < 2:
        raise ValueError("need seeds for at least 2 labels")
    k_labels = len(ids)
    flat_seeds = seeds.labels.ravel()
    unseeded = np.nonzero(flat_seeds < 0)[0]
    seeded = np.nonzero(flat_seeds >= 0)[0]

    probs = np.zeros((k_labels, h * w))
    for i, label in enumerate(ids):
        probs[i, seeded] = (flat_seeds[seeded] == label).astype(float)

    if len(unseeded):
        lap = _laplacian(graph)
        l_uu = lap[unseeded][:, unseeded]
        l_um = lap[unseeded][:, seeded]
        if method == "direct":
            if len(unseeded) > DIRECT_SOLVE_LIMIT:
                raise ValueError(
                    f"dense direct solve supports at most {DIRECT_SOLVE_LIMIT} unknowns"
                )
            factor = sla.cho_factor(l_uu.toarray())
            for i, label in enumerate(ids):
                rhs = -l_um @ probs[i, seeded]
                probs[i, unseeded] = sla.cho_solve(factor, rhs)
        else:
            cap = maxiter if maxiter is not None else 10 * len(unseeded)
            precond = sp.diags(1.0 / l_uu.diagonal())
            l_uu = l_uu.tocsr()
            for i, label in enumerate(ids):
                rhs = -l_um @ probs[i, seeded]
                x, info = spla.cg(l_uu, rhs, rtol=rtol, atol=0.0, maxiter=cap, M=precond)
                if info != 0:
                    res = np.linalg.norm(l_uu @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
                    raise SolverConvergenceError(
                        f"label {label}: no convergence within {cap} iterations "
                        f"(relative residual {res:.3e})",
                        residual=float(res),
                    )
                probs[i, unseeded] = x

    prenorm = probs.sum(axis=0)
    clamped = np.clip(probs, 0.0, 1.0)
    clamped /= clamped.sum(axis=0)
    arg = np.argmax(clamped, axis=0)
    return ProbabilityField(
        probabilities=clamped.reshape(k_labels, h, w),
        labels=ids.astype(np.int32),
        argmax_map=ids[arg].reshape(h, w).astype(np.int32),
        prenorm_sums=prenorm.reshape(h, w),
    )


def segment(
    image: np.ndarray,
    seeds: SeedMap,
    model: NoiseModelConfig,
    k: int = 1,
    method: str = "iterative",
) -> tuple[ProbabilityField, np.ndarray]:
    """Build the weighted graph, solve all labels, return field and label map."""
    graph = build_graph(image, model, k)
    field = solve_dirichlet(graph, seeds, method=method)
    return field, field.argmax_map
