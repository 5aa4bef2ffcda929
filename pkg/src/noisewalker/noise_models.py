"""Edge-weight functions derived from per-pixel noise models.

A pixel value is modeled as a draw from a noise distribution whose parameters
are themselves uncertain; given two multisets of samples (one per adjacent
pixel), the edge weight is the Bhattacharyya coefficient between the two
posterior parameter distributions. Closed forms are provided for Poisson
noise, multivariate Gaussian noise with a constant covariance, and scalar
Gaussian noise with region-dependent variance, together with the classic
exponential intensity-difference weight as a baseline. ``weight_numeric``
integrates the defining ratio of integrals by tensor-grid quadrature and
serves as the independent oracle for all closed forms.

All weight functions are pure, symmetric in their two sample arguments
(bit-identical results), and return values in [0, 1].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import gammaln

__all__ = [
    "SampleSet",
    "PoissonStats",
    "PoissonConfig",
    "GaussianConstCovConfig",
    "GaussianVarVarConfig",
    "GradyConfig",
    "GenericPdfModel",
    "NoiseModelConfig",
    "QuadratureDomainError",
    "DegenerateImageWarning",
    "weight_poisson",
    "weight_poisson_approx",
    "weight_gaussian_const",
    "weight_gaussian_var",
    "weight_gaussian_var_pairwise",
    "weight_grady",
    "weight_numeric",
    "estimate_params",
    "estimate_global_covariance",
    "poisson_stats",
    "poisson_pdf_model",
    "gaussian_const_pdf_model",
    "gaussian_var_pdf_model",
    "variance_floor",
    "model_from_name",
]

# Fallback scale when a variance floor or covariance repair is requested for
# data with zero intensity range; the literal range-based formulas would
# yield 0 and break totality on constant inputs.
_UNIT_RANGE = 1.0


class QuadratureDomainError(RuntimeError):
    """All quadrature nodes evaluated to zero density: the domain is too small."""


class DegenerateImageWarning(UserWarning):
    """Covariance estimation fell back to a scaled identity."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSet:
    """Multiset of pixel samples attributed to one center pixel.

    ``values`` has shape (n,) for scalar samples or (n, m) for m-channel
    samples, in raster order of the originating pixels. ``coords`` optionally
    carries the (y, x) pixel coordinate of each sample (required by overlap
    resolution, not by the weight functions).
    """

    values: np.ndarray
    center: tuple[int, int] | None = None
    coords: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size == 0:
            raise ValueError("sample set must be nonempty")
        if values.ndim not in (1, 2):
            raise ValueError("sample values must be (n,) or (n, m)")
        object.__setattr__(self, "values", values)
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=int)
            if coords.shape != (len(values), 2):
                raise ValueError("coords must be (n, 2) matching values")
            object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def channels(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]


@dataclass(frozen=True)
class PoissonStats:
    """Sufficient statistic of a count sample set: the sum of its values."""

    sum: int

    def __post_init__(self):
        if self.sum < 0:
            raise ValueError("Poisson sample sum must be nonnegative")


@dataclass(frozen=True)
class PoissonConfig:
    """Poisson (shot) noise model; parameter-free."""

    kind = "poisson"


@dataclass(frozen=True)
class GaussianConstCovConfig:
    """Gaussian noise with one covariance matrix shared by the whole image.

    ``covariance`` is validated symmetric positive definite at construction;
    ``None`` requests estimation from the image at graph-build time.
    """

    covariance: np.ndarray | None = None
    kind = "const-gauss"

    def __post_init__(self):
        if self.covariance is not None:
            cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
            if cov.shape[0] != cov.shape[1]:
                raise ValueError("covariance must be square")
            if not np.allclose(cov, cov.T, atol=1e-12):
                raise ValueError("covariance must be symmetric")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError("covariance must be positive definite") from None
            object.__setattr__(self, "covariance", cov)

    @property
    def channels(self) -> int | None:
        return None if self.covariance is None else self.covariance.shape[0]


@dataclass(frozen=True)
class GaussianVarVarConfig:
    """Scalar Gaussian noise whose variance differs between image regions.

    ``variance_floor`` guards the 0/0 case on constant patches; ``None``
    requests the default floor derived from the image intensity range at
    graph-build time (see :func:`variance_floor`).
    """

    variance_floor: float | None = None
    kind = "var-gauss"

    def __post_init__(self):
        if self.variance_floor is not None and self.variance_floor <= 0:
            raise ValueError("variance floor must be positive")


@dataclass(frozen=True)
class GradyConfig:
    """Exponential intensity-difference weight with scale parameter beta."""

    beta: float
    kind = "grady"

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")


NoiseModelConfig = Union[
    PoissonConfig, GaussianConstCovConfig, GaussianVarVarConfig, GradyConfig
]

_MODEL_NAMES = {
    "poisson": PoissonConfig,
    "const-gauss": GaussianConstCovConfig,
    "var-gauss": GaussianVarVarConfig,
    "grady": GradyConfig,
}


def model_from_name(name: str, beta: float | None = None) -> NoiseModelConfig:
    """Build a model config from its CLI name; grady requires ``beta``."""
    if name not in _MODEL_NAMES:
        raise ValueError(f"unknown model {name!r}; expected one of {sorted(_MODEL_NAMES)}")
    if name == "grady":
        if beta is None:
            raise ValueError("grady model requires beta")
        return GradyConfig(beta=beta)
    return _MODEL_NAMES[name]()


# ---------------------------------------------------------------------------
# Closed-form weights
# ---------------------------------------------------------------------------


def _as_sum(s) -> float:
    if isinstance(s, PoissonStats):
        return float(s.sum)
    v = float(s)
    if v < 0 or not np.isfinite(v):
        raise ValueError("Poisson sum must be a finite nonnegative number")
    return v


def poisson_stats(samples) -> PoissonStats:
    """Sum a sample set into its Poisson sufficient statistic.

    Float inputs are rounded to the nearest nonnegative integer first, since
    the count model is only defined on integers.
    """
    values = samples.values if isinstance(samples, SampleSet) else np.asarray(samples, float)
    counts = np.clip(np.rint(values), 0, None)
    return PoissonStats(sum=int(counts.sum()))


def _poisson_weight_arrays(sx, sy):
    sx = np.asarray(sx, dtype=float)
    sy = np.asarray(sy, dtype=float)
    return np.exp(gammaln((sx + sy) / 2.0 + 1.0) - (gammaln(sx + 1.0) + gammaln(sy + 1.0)) / 2.0)


def weight_poisson(sx, sy) -> float:
    """Bhattacharyya weight of two count sample sets from their sums.

    Evaluated through the log-gamma function so that large sums cannot
    overflow. Returns 1 exactly iff the two sums are equal.
    """
    return float(np.minimum(_poisson_weight_arrays(_as_sum(sx), _as_sum(sy)), 1.0))


def _poisson_approx_arrays(sx, sy):
    sx = np.asarray(sx, dtype=float)
    sy = np.asarray(sy, dtype=float)
    return np.exp(-0.5 * (np.sqrt(sx) - np.sqrt(sy)) ** 2)


def weight_poisson_approx(sx, sy) -> float:
    """Square-root approximation of :func:`weight_poisson`.

    Within 0.05 absolute of the exact form whenever both sums exceed 2.
    """
    return float(_poisson_approx_arrays(_as_sum(sx), _as_sum(sy)))


def _mahalanobis_sq(diff: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """diff (..., m) -> (...,) squared Mahalanobis norm under cov."""
    sol = np.linalg.solve(cov, diff[..., None])[..., 0]
    return (diff * sol).sum(axis=-1)


def weight_gaussian_const(mean_x, mean_y, cfg: GaussianConstCovConfig, n: int) -> float:
    """Constant-covariance Gaussian weight from the two sample means.

    The posterior of the true value given n samples is Gaussian with
    covariance C/n around the sample mean; the weight is the Bhattacharyya
    coefficient of the two posteriors,
    exp(-1/8 (mean_x - mean_y)^T (C/n)^{-1} (mean_x - mean_y)).
    """
    if cfg.covariance is None:
        raise ValueError("config carries no covariance; estimate or supply one first")
    if n < 1:
        raise ValueError("sample count must be >= 1")
    mx = np.atleast_1d(np.asarray(mean_x, dtype=float))
    my = np.atleast_1d(np.asarray(mean_y, dtype=float))
    if mx.shape != my.shape or mx.shape[-1] != cfg.covariance.shape[0]:
        raise ValueError("mean dimensions must match the covariance")
    d2 = _mahalanobis_sq(mx - my, cfg.covariance / float(n))
    return float(np.minimum(np.exp(-d2 / 8.0), 1.0))


def _gaussian_var_weight_arrays(var_x, var_y, mean_x, mean_y, n, floor):
    var_x = np.maximum(var_x, floor)
    var_y = np.maximum(var_y, floor)
    pooled = np.maximum((var_x + var_y) / 2.0 + ((mean_x - mean_y) / 2.0) ** 2, floor)
    ratio = np.minimum(np.sqrt(var_x * var_y) / pooled, 1.0)
    return ratio ** ((np.asarray(n, float) - 3.0) / 2.0)


def _scalar_values(s, name: str) -> np.ndarray:
    values = s.values if isinstance(s, SampleSet) else np.asarray(s, dtype=float)
    if values.ndim != 1:
        raise ValueError(f"{name} must hold scalar samples")
    return values


def _resolve_floor(floor: float | None, values: np.ndarray) -> float:
    if floor is not None:
        return floor
    rng = float(values.max() - values.min())
    return variance_floor(rng)


def variance_floor(intensity_range: float) -> float:
    """Default variance floor: 1e-6 x (intensity range)^2, unit scale if flat."""
    if intensity_range <= 0:
        return 1e-6 * _UNIT_RANGE**2
    return 1e-6 * intensity_range**2


def weight_gaussian_var(x, y, var_floor: float | None = None) -> float:
    """Variable-variance Gaussian weight of two equal-size scalar sample sets.

    Uses the variance-ratio form with the numerically preferable pooled
    denominator Var(X)/2 + Var(Y)/2 + ((mean X - mean Y)/2)^2 and the biased
    variance convention; the exponent is (n - 3)/2. Variances (and the
    denominator) are floored so constant patches stay well-defined: equal
    constant patches give 1, strongly different ones give ~0. With
    ``var_floor=None`` the floor derives from the pooled sample range.
    """
    vx = _scalar_values(x, "x")
    vy = _scalar_values(y, "y")
    n = len(vx)
    if len(vy) != n:
        raise ValueError("sample sets must have equal cardinality")
    if n < 4:
        raise ValueError("variable-variance weight requires at least 4 samples per set")
    floor = _resolve_floor(var_floor, np.concatenate([vx, vy]))
    mean_x = vx.sum() / n
    mean_y = vy.sum() / n
    var_x = ((vx - mean_x) ** 2).sum() / n
    var_y = ((vy - mean_y) ** 2).sum() / n
    return float(_gaussian_var_weight_arrays(var_x, var_y, mean_x, mean_y, n, floor))


def weight_gaussian_var_pairwise(x, y, var_floor: float | None = None) -> float:
    """Pairwise-difference form of :func:`weight_gaussian_var`.

    Evaluates (4 sqrt(S_X S_Y) / S_Z)^((n-3)/2) with S_A the sum of squared
    differences over all ordered sample pairs of A and Z the union multiset.
    Kept as an algebraically independent cross-check of the variance form.
    """
    vx = _scalar_values(x, "x")
    vy = _scalar_values(y, "y")
    n = len(vx)
    if len(vy) != n:
        raise ValueError("sample sets must have equal cardinality")
    if n < 4:
        raise ValueError("variable-variance weight requires at least 4 samples per set")
    floor = _resolve_floor(var_floor, np.concatenate([vx, vy]))

    def pair_sq(a: np.ndarray) -> float:
        return float(((a[:, None] - a[None, :]) ** 2).sum())

    # same floor semantics as the variance form: S_A = 2 |A|^2 Var(A)
    sx = max(pair_sq(vx), 2.0 * n * n * floor)
    sy = max(pair_sq(vy), 2.0 * n * n * floor)
    sz = max(pair_sq(np.concatenate([vx, vy])), 2.0 * (2 * n) ** 2 * floor)
    ratio = min(4.0 * np.sqrt(sx * sy) / sz, 1.0)
    return float(ratio ** ((n - 3) / 2.0))


def weight_grady(x, y, cfg: GradyConfig) -> float:
    """Baseline weight exp(-beta ||x - y||^2) on single pixel intensities.

    Intensities are expected pre-normalized to [0, 1] per channel (vector
    images by global max norm) so beta grids are comparable across images.
    """
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.shape != yv.shape:
        raise ValueError("pixel values must have matching shape")
    return float(np.exp(-cfg.beta * ((xv - yv) ** 2).sum()))


# ---------------------------------------------------------------------------
# Parameter estimation
# ---------------------------------------------------------------------------


def estimate_params(kind: str, samples):
    """Per-model parameter estimate from a sample set.

    poisson -> mean; const-gauss -> mean vector; var-gauss -> (mean, biased
    variance).
    """
    values = samples.values if isinstance(samples, SampleSet) else np.asarray(samples, float)
    if values.size == 0:
        raise ValueError("sample set must be nonempty")
    n = len(values)
    if kind == "poisson":
        counts = np.clip(np.rint(values), 0, None)
        return float(counts.sum() / n)
    if kind == "const-gauss":
        return np.atleast_1d(values.sum(axis=0) / n).astype(float)
    if kind == "var-gauss":
        if values.ndim != 1:
            raise ValueError("var-gauss expects scalar samples")
        mean = values.sum() / n
        var = ((values - mean) ** 2).sum() / n
        return float(mean), float(var)
    raise ValueError(f"unknown model kind {kind!r}")


def _robust_var(d: np.ndarray) -> float:
    # MAD of first differences -> variance of the underlying noise;
    # the factor 2 removes the variance doubling of a difference.
    mad = float(np.median(np.abs(d - np.median(d))))
    return mad**2 / (2.0 * 0.6745**2)


def estimate_global_covariance(
    image: np.ndarray, override: np.ndarray | None = None
) -> np.ndarray:
    """Robust global noise covariance from horizontal first differences.

    Per channel pair the covariance follows from the polarization identity on
    MAD-based variances of the differences, which is insensitive to true
    region edges. The result is symmetrized and repaired to be positive
    definite. A user-supplied ``override`` is returned unchanged. A constant
    image yields a scaled identity and a :class:`DegenerateImageWarning`.
    """
    if override is not None:
        return np.atleast_2d(np.asarray(override, dtype=float))
    img = np.asarray(image, dtype=float)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.shape[1] < 2:
        raise ValueError("image needs at least 2 columns for difference-based estimation")
    m = img.shape[2]
    diffs = img[:, 1:, :] - img[:, :-1, :]
    flat = diffs.reshape(-1, m)
    cov = np.empty((m, m))
    for i in range(m):
        cov[i, i] = _robust_var(flat[:, i])
    for i in range(m):
        for j in range(i + 1, m):
            v_plus = _robust_var(flat[:, i] + flat[:, j])
            v_minus = _robust_var(flat[:, i] - flat[:, j])
            cov[i, j] = cov[j, i] = (v_plus - v_minus) / 4.0
    rng = float(img.max() - img.min())
    eps = 1e-8 * (rng**2 if rng > 0 else _UNIT_RANGE**2)
    if not cov.any():
        warnings.warn(
            "degenerate image differences: covariance falls back to eps * I",
            DegenerateImageWarning,
        )
        return eps * np.eye(m)
    # SPD repair: clip eigenvalues from below
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2.0)
    if vals.min() < eps:
        vals = np.maximum(vals, eps)
        cov = (vecs * vals) @ vecs.T
        cov = (cov + cov.T) / 2.0
    return cov


# ---------------------------------------------------------------------------
# Quadrature oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenericPdfModel:
    """Noise model defined only through its pixel-value density.

    ``log_pdf(values, kappa)`` maps samples of shape (n,) or (n, m) and a
    parameter grid of shape (..., d) to log densities of shape (n, ...).
    ``domain(values, power)`` builds the quadrature grid (nodes plus log
    quadrature weights) covering the parameter box for an integral of
    prod_i p(x_i | kappa)^power. ``quadrature_points`` is the per-axis node
    count (>= 16).
    """

    log_pdf: Callable[[np.ndarray, np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray, float], "ParamGrid"]
    quadrature_points: int = 512

    def __post_init__(self):
        if self.quadrature_points < 16:
            raise ValueError("need at least 16 quadrature points per axis")


@dataclass(frozen=True)
class ParamGrid:
    """Quadrature nodes (N, d) with log weights (N,) including cell volumes."""

    nodes: np.ndarray
    log_weights: np.ndarray


def _midpoint_axis(lo: float, hi: float, q: int) -> tuple[np.ndarray, float]:
    h = (hi - lo) / q
    return lo + (np.arange(q) + 0.5) * h, h


def uniform_box_grid(bounds: Sequence[tuple[float, float]], q: int) -> ParamGrid:
    """Midpoint-rule tensor grid over an axis-aligned box."""
    axes, log_h = [], 0.0
    for lo, hi in bounds:
        nodes, h = _midpoint_axis(lo, hi, q)
        axes.append(nodes)
        log_h += np.log(h)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    return ParamGrid(nodes=nodes, log_weights=np.full(len(nodes), log_h))


def _log_integral(model: GenericPdfModel, values: np.ndarray, power: float) -> float:
    grid = model.domain(values, power)
    lp = model.log_pdf(values, grid.nodes)
    with np.errstate(invalid="ignore"):
        g = power * lp.sum(axis=0) + grid.log_weights
    m = np.max(g)
    if not np.isfinite(m):
        raise QuadratureDomainError(
            "all quadrature nodes carry zero density; enlarge the parameter domain"
        )
    return float(m + np.log(np.exp(g - m).sum()))


def _union_sorted(vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    vz = np.concatenate([vx, vy], axis=0)
    if vz.ndim == 1:
        return np.sort(vz, kind="stable")
    order = np.lexsort(vz.T[::-1])
    return vz[order]


def weight_numeric(model: GenericPdfModel, x, y) -> float:
    """Bhattacharyya weight by direct quadrature of the defining integrals.

    Computes N / sqrt(I_X I_Y) with N the integral of the square root of the
    joint sample likelihood over the parameter domain and I_S the likelihood
    integral of set S, all evaluated in log space on tensor grids. Serves as
    the independent oracle for the closed-form weights. The union multiset is
    sorted by value so the result is bit-identical under argument swap.
    """
    vx = np.asarray(x.values if isinstance(x, SampleSet) else x, dtype=float)
    vy = np.asarray(y.values if isinstance(y, SampleSet) else y, dtype=float)
    if vx.size == 0 or vy.size == 0:
        raise ValueError("sample sets must be nonempty")
    vz = _union_sorted(vx, vy)
    log_num = _log_integral(model, vz, 0.5)
    log_den = 0.5 * (_log_integral(model, vx, 1.0) + _log_integral(model, vy, 1.0))
    return float(np.minimum(np.exp(log_num - log_den), 1.0))


def poisson_pdf_model(quadrature_points: int = 2048) -> GenericPdfModel:
    """Poisson pixel PDF over a rate domain (0, a), a from the sample range.

    The default grid is denser than the other models' because the padded
    domain bound (see ``domain``) stretches the 1-D axis; the cost stays
    negligible.
    """

    def log_pdf(values: np.ndarray, kappa: np.ndarray) -> np.ndarray:
        v = np.clip(np.rint(np.asarray(values, float)), 0, None)[:, None]
        lam = kappa[..., 0][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = v * np.log(lam) - lam - gammaln(v + 1.0)
            out = np.where((lam == 0) & (v == 0), -lam, out)
        return out

    def domain(values: np.ndarray, power: float) -> ParamGrid:
        vmax = float(np.clip(np.rint(values), 0, None).max())
        # the integrand decays like exp(-n_eff * rate); pad the bound so
        # single-sample sets do not truncate visibly
        n_eff = max(power * len(values), 0.5)
        a = vmax + 10.0 * np.sqrt(vmax + 1.0) + 30.0 / n_eff
        return uniform_box_grid([(0.0, a)], quadrature_points)

    return GenericPdfModel(log_pdf=log_pdf, domain=domain, quadrature_points=quadrature_points)


def gaussian_const_pdf_model(
    covariance: np.ndarray, quadrature_points: int = 512
) -> GenericPdfModel:
    """m-channel Gaussian pixel PDF with known covariance, mean domain (-a, a)^m."""
    cov = np.atleast_2d(np.asarray(covariance, dtype=float))
    m = cov.shape[0]
    cov_inv = np.linalg.inv(cov)
    log_norm = -0.5 * (m * np.log(2 * np.pi) + np.linalg.slogdet(cov)[1])
    sigmas = np.sqrt(np.diag(cov))

    def log_pdf(values: np.ndarray, kappa: np.ndarray) -> np.ndarray:
        v = np.asarray(values, float)
        if v.ndim == 1:
            v = v[:, None]
        diff = v[:, None, :] - kappa[None, :, :]
        d2 = np.einsum("nki,ij,nkj->nk", diff, cov_inv, diff)
        return log_norm - 0.5 * d2

    def domain(values: np.ndarray, power: float) -> ParamGrid:
        v = np.asarray(values, float)
        if v.ndim == 1:
            v = v[:, None]
        bounds = [
            (-(np.abs(v[:, j]).max() + 10.0 * sigmas[j]), np.abs(v[:, j]).max() + 10.0 * sigmas[j])
            for j in range(m)
        ]
        return uniform_box_grid(bounds, quadrature_points)

    return GenericPdfModel(log_pdf=log_pdf, domain=domain, quadrature_points=quadrature_points)


def gaussian_var_pdf_model(quadrature_points: int = 512) -> GenericPdfModel:
    """Scalar Gaussian pixel PDF with unknown (mean, variance) parameter.

    The variance axis of the likelihood integrals decays only polynomially,
    so the grid places nodes geometrically in the variance and centers the
    mean axis on the sample mean at every variance level (nodes
    mu = mean + sigma t on a fixed t grid). Tails are then exponential on
    both axes and the resolution is scale-free, which keeps the oracle
    accurate down to 4-sample sets.
    """

    def log_pdf(values: np.ndarray, kappa: np.ndarray) -> np.ndarray:
        v = np.asarray(values, float)[:, None]
        mu = kappa[..., 0][None, :]
        s2 = kappa[..., 1][None, :]
        return -0.5 * np.log(2 * np.pi * s2) - (v - mu) ** 2 / (2.0 * s2)

    def domain(values: np.ndarray, power: float) -> ParamGrid:
        v = np.asarray(values, float)
        q = quadrature_points
        n_eff = power * len(v)
        mean = v.sum() / len(v)
        var = float(((v - mean) ** 2).sum() / len(v))
        v_scale = max(var, 1e-12)
        tail = max(n_eff - 3.0, 0.5)
        u_lo = np.log(v_scale) - 14.0
        u_hi = np.log(v_scale) + 2.0 * 21.0 / tail + 4.0
        u, hu = _midpoint_axis(u_lo, u_hi, q)
        b = 9.0 / np.sqrt(n_eff)
        t, ht = _midpoint_axis(-b, b, q)
        sig = np.exp(u / 2.0)
        mu = (mean + sig[None, :] * t[:, None]).ravel()
        s2 = np.broadcast_to(np.exp(u)[None, :], (q, q)).ravel()
        # d mu d sigma^2 = sigma e^u dt du = e^{1.5 u} dt du
        log_w = np.broadcast_to(1.5 * u[None, :], (q, q)).ravel() + np.log(hu * ht)
        return ParamGrid(nodes=np.stack([mu, s2], axis=-1), log_weights=log_w)

    return GenericPdfModel(log_pdf=log_pdf, domain=domain, quadrature_points=quadrature_points)
