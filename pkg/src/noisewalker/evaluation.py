"""Segmentation quality metrics and the incremental seed placement strategy.

Two partition metrics (variation of information, adapted Rand error) plus
plain accuracy and per-class Dice. Seeding follows the evaluation protocol
for interactive methods: every connected component of every ground-truth
class receives one initial seed at its pole of inaccessibility; afterwards
one seed per round goes to the class with the worst Dice score, inside its
largest misclassified region. A grid-search harness tunes the baseline
weight's beta both per dataset and per image.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import ndimage

from .graph_core import SeedMap, segment
from .noise_models import GradyConfig, NoiseModelConfig

__all__ = [
    "PartitionPair",
    "SeedTrajectory",
    "TrajectoryStep",
    "BetaSearchResult",
    "voi",
    "voi_raw",
    "arand",
    "accuracy",
    "dice",
    "place_initial_seeds",
    "place_next_seed",
    "grady_beta_search",
    "run_trajectory",
    "summarize_trajectories",
    "DEFAULT_BETA_GRID",
    "DEFAULT_THRESHOLDS",
    "TRAJECTORY_CSV_COLUMNS",
]

# Logarithmic beta grid 10^0 .. 10^4, 9 points.
DEFAULT_BETA_GRID = tuple(float(10**e) for e in np.arange(0.0, 4.5, 0.5))

# Score thresholds reported as "first step reaching <= t" per metric.
DEFAULT_THRESHOLDS = {
    "voi": (0.2, 0.1, 0.05, 0.02, 0.01),
    "arand": (0.2, 0.1, 0.05, 0.02, 0.01),
}

TRAJECTORY_CSV_COLUMNS = (
    "step",
    "n_seeds",
    "n_additional",
    "voi",
    "voi_raw",
    "arand",
    "accuracy",
    "dice_min",
    "converged",
)

_FOUR_CONN = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class PartitionPair:
    """A predicted and a ground-truth label map of identical shape."""

    predicted: np.ndarray
    truth: np.ndarray

    def __post_init__(self):
        pred = np.asarray(self.predicted)
        tru = np.asarray(self.truth)
        if pred.shape != tru.shape or pred.size == 0:
            raise ValueError("maps must be nonempty and of identical shape")
        object.__setattr__(self, "predicted", pred)
        object.__setattr__(self, "truth", tru)

    @property
    def size(self) -> int:
        return self.predicted.size


def _as_pair(predicted, truth=None) -> PartitionPair:
    if isinstance(predicted, PartitionPair):
        return predicted
    return PartitionPair(predicted=predicted, truth=truth)


def _contingency(pair: PartitionPair) -> np.ndarray:
    _, pi = np.unique(pair.predicted, return_inverse=True)
    _, ti = np.unique(pair.truth, return_inverse=True)
    counts = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(counts, (pi.ravel(), ti.ravel()), 1)
    return counts


def voi_raw(predicted, truth=None) -> float:
    """Unnormalized variation of information, natural-log entropies.

    H(pred | truth) + H(truth | pred); 0 iff the partitions coincide,
    unbounded above, invariant under label permutations.
    """
    pair = _as_pair(predicted, truth)
    joint = _contingency(pair) / pair.size

    def entropy(p: np.ndarray) -> float:
        p = p[p > 0]
        return float(-(p * np.log(p)).sum())

    h_joint = entropy(joint.ravel())
    h_pred = entropy(joint.sum(axis=1))
    h_truth = entropy(joint.sum(axis=0))
    return max(2.0 * h_joint - h_pred - h_truth, 0.0)


def voi(predicted, truth=None) -> float:
    """Variation of information normalized by log(N) into [0, 1]."""
    pair = _as_pair(predicted, truth)
    if pair.size == 1:
        return 0.0
    return voi_raw(pair) / np.log(pair.size)


def _partitions_equal(pair: PartitionPair) -> bool:
    _, pi = np.unique(pair.predicted, return_inverse=True)
    _, ti = np.unique(pair.truth, return_inverse=True)
    # canonical relabeling by first occurrence
    def canon(ix: np.ndarray) -> np.ndarray:
        _, first = np.unique(ix, return_index=True)
        order = np.argsort(np.sort(first))
        remap = np.empty_like(order)
        remap[np.argsort(first)] = np.arange(len(first))
        return remap[ix]

    return bool(np.array_equal(canon(pi.ravel()), canon(ti.ravel())))


def arand(predicted, truth=None) -> float:
    """Adapted Rand error: one minus the rescaled Rand index.

    The Rand index (fraction of pixel pairs grouped consistently by both
    maps) is rescaled so that coin-flip pair agreement scores zero:
    ARI = 2 RI - 1, ARAND = 1 - ARI = 2 (1 - RI). 0 for matching partitions,
    ~1 for random ones, above 1 for worse-than-random maps (e.g. the fully
    crossed 4-pixel maps score 4/3). Computed in exact rational arithmetic
    from the contingency table, so it matches brute-force pair counting bit
    for bit. The degenerate no-pairs case (single-pixel maps) resolves by
    partition equality.
    """
    pair = _as_pair(predicted, truth)
    counts = _contingency(pair)

    def comb2(v) -> int:
        return int(v) * (int(v) - 1) // 2

    together_both = sum(comb2(v) for v in counts.ravel())
    together_pred = sum(comb2(v) for v in counts.sum(axis=1))
    together_truth = sum(comb2(v) for v in counts.sum(axis=0))
    total = comb2(pair.size)
    if total == 0:
        return 0.0 if _partitions_equal(pair) else 1.0
    # disagreeing pairs: grouped in exactly one of the two maps
    disagreements = together_pred + together_truth - 2 * together_both
    return float(Fraction(2 * disagreements, total))


def accuracy(predicted, truth=None) -> float:
    """Fraction of pixels whose predicted label equals the ground truth."""
    pair = _as_pair(predicted, truth)
    return float((pair.predicted == pair.truth).mean())


def dice(predicted, truth=None, label: int | None = None) -> float:
    """Dice score of one class; vacuous agreement (absent from both) scores 1."""
    if label is None:
        raise ValueError("dice requires a class label")
    pair = _as_pair(predicted, truth)
    a = pair.predicted == label
    b = pair.truth == label
    denom = int(a.sum()) + int(b.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / denom


def _dice_scores(pair: PartitionPair) -> dict[int, float]:
    labels = np.union1d(np.unique(pair.truth), np.unique(pair.predicted))
    return {int(l): dice(pair, label=int(l)) for l in labels}


def _component_seed(mask: np.ndarray, exclude: np.ndarray | None = None) -> tuple[int, int]:
    """Distance-transform maximum of a component; raster order breaks ties."""
    dist = ndimage.distance_transform_edt(mask)
    if exclude is not None:
        dist = np.where(exclude, -1.0, dist)
    flat = int(np.argmax(dist))
    return np.unravel_index(flat, mask.shape)


def place_initial_seeds(truth: np.ndarray) -> SeedMap:
    """One seed per 4-connected component of every class, at its deepest pixel."""
    truth = np.asarray(truth)
    labels = np.unique(truth)
    if len(labels) < 2:
        raise ValueError("ground truth needs at least 2 classes")
    seeds = SeedMap.empty(truth.shape)
    points = []
    for label in labels:
        comp, n_comp = ndimage.label(truth == label, structure=_FOUR_CONN)
        for ci in range(1, n_comp + 1):
            y, x = _component_seed(comp == ci)
            points.append({"x": int(x), "y": int(y), "label": int(label)})
    return SeedMap.from_points(truth.shape, points)


def place_next_seed(
    truth: np.ndarray, predicted: np.ndarray, seeds: SeedMap
) -> tuple[SeedMap, bool]:
    """Add one seed for the worst-Dice class inside its largest error region.

    Returns ``(seeds, converged)``; when prediction and truth agree everywhere
    the seeds come back unchanged with ``converged=True``. Ties on the Dice
    score go to the smaller class id, ties on region size to the region
    appearing first in raster order; within the region the seed sits at the
    distance-transform maximum, skipping already-seeded pixels.
    """
    truth = np.asarray(truth)
    predicted = np.asarray(predicted)
    pair = PartitionPair(predicted=predicted, truth=truth)
    if bool((predicted == truth).all()):
        return seeds, True
    scores = _dice_scores(pair)
    worst = min(scores, key=lambda l: (scores[l], l))
    wrong = (truth == worst) & (predicted != worst)
    if not wrong.any():
        # the worst class by Dice over-segments only; fall back to any class
        # that still has misclassified truth pixels
        candidates = [
            l for l in sorted(scores) if bool(((truth == l) & (predicted != l)).any())
        ]
        worst = candidates[0]
        wrong = (truth == worst) & (predicted != worst)
    comp, n_comp = ndimage.label(wrong, structure=_FOUR_CONN)
    sizes = ndimage.sum_labels(np.ones_like(comp), comp, index=np.arange(1, n_comp + 1))
    largest = int(np.argmax(sizes)) + 1  # argmax -> first raster appearance on ties
    y, x = _component_seed(comp == largest, exclude=seeds.labels >= 0)
    return seeds.with_seed(int(x), int(y), int(worst)), False


@dataclass(frozen=True)
class TrajectoryStep:
    step: int
    n_seeds: int
    n_additional: int
    voi: float
    voi_raw: float
    arand: float
    accuracy: float
    dice_min: float
    converged: bool

    def metrics(self) -> dict:
        return {
            "voi": self.voi,
            "voi_raw": self.voi_raw,
            "arand": self.arand,
            "accuracy": self.accuracy,
            "dice_min": self.dice_min,
        }


@dataclass(frozen=True)
class SeedTrajectory:
    """Metric values after each seed placement round, plus threshold summaries.

    ``first_reaching[metric][threshold]`` is the smallest additional-seed
    count whose step scored <= threshold, or None if never reached.
    """

    steps: tuple[TrajectoryStep, ...]
    first_reaching: dict = field(default_factory=dict)

    def to_rows(self) -> list[dict]:
        return [
            {
                "step": s.step,
                "n_seeds": s.n_seeds,
                "n_additional": s.n_additional,
                "voi": s.voi,
                "voi_raw": s.voi_raw,
                "arand": s.arand,
                "accuracy": s.accuracy,
                "dice_min": s.dice_min,
                "converged": s.converged,
            }
            for s in self.steps
        ]


def _evaluate_step(
    step: int, seeds: SeedMap, base_count: int, predicted: np.ndarray, truth: np.ndarray, converged: bool
) -> TrajectoryStep:
    pair = PartitionPair(predicted=predicted, truth=truth)
    return TrajectoryStep(
        step=step,
        n_seeds=seeds.count,
        n_additional=seeds.count - base_count,
        voi=voi(pair),
        voi_raw=voi_raw(pair),
        arand=arand(pair),
        accuracy=accuracy(pair),
        dice_min=min(_dice_scores(pair).values()),
        converged=converged,
    )


def run_trajectory(
    image: np.ndarray,
    truth: np.ndarray,
    model: NoiseModelConfig,
    max_additional_seeds: int,
    k: int = 1,
    thresholds: dict | None = None,
) -> SeedTrajectory:
    """Segment, score, place the next seed, repeat.

    Stops after ``max_additional_seeds`` placement rounds or as soon as the
    prediction matches the truth. Metrics are recorded verbatim each round,
    monotone or not.
    """
    thresholds = DEFAULT_THRESHOLDS if thresholds is None else thresholds
    seeds = place_initial_seeds(truth)
    base = seeds.count
    _, predicted = segment(image, seeds, model, k=k)
    steps = [_evaluate_step(0, seeds, base, predicted, truth, bool((predicted == truth).all()))]
    for step in range(1, max_additional_seeds + 1):
        seeds, converged = place_next_seed(truth, predicted, seeds)
        if converged:
            break
        _, predicted = segment(image, seeds, model, k=k)
        steps.append(
            _evaluate_step(step, seeds, base, predicted, truth, bool((predicted == truth).all()))
        )
    first = {
        metric: {
            t: next(
                (s.n_additional for s in steps if getattr(s, metric) <= t),
                None,
            )
            for t in ts
        }
        for metric, ts in thresholds.items()
    }
    return SeedTrajectory(steps=tuple(steps), first_reaching=first)


def summarize_trajectories(trajectories) -> tuple[list[dict], list[dict]]:
    """Dataset-level summaries over multiple seed trajectories.

    Returns (by_step, by_threshold): mean metric values per additional-seed
    count (images whose trajectory ended early carry their last value
    forward), and the median number of additional seeds needed to reach each
    threshold (None when fewer than half the images ever reach it).
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("need at least one trajectory")
    max_step = max(t.steps[-1].n_additional for t in trajectories)
    metrics = ("voi", "voi_raw", "arand", "accuracy", "dice_min")
    by_step = []
    for n in range(max_step + 1):
        row = {"n_additional": n, "images": len(trajectories)}
        for metric in metrics:
            values = []
            for t in trajectories:
                reached = [s for s in t.steps if s.n_additional <= n]
                values.append(getattr(reached[-1], metric))
            row[f"mean_{metric}"] = float(np.mean(values))
        by_step.append(row)

    by_threshold = []
    thresholds = sorted({t for traj in trajectories for t in traj.first_reaching.get("voi", {})})
    for metric in ("voi", "arand"):
        for threshold in thresholds:
            counts = [t.first_reaching.get(metric, {}).get(threshold) for t in trajectories]
            reached = sorted(c for c in counts if c is not None)
            median = (
                float(np.median(reached)) if len(reached) * 2 > len(trajectories) else None
            )
            by_threshold.append(
                {
                    "metric": metric,
                    "threshold": threshold,
                    "median_additional_seeds": median,
                    "images_reaching": len(reached),
                    "images": len(trajectories),
                }
            )
    return by_step, by_threshold


@dataclass(frozen=True)
class BetaSearchResult:
    dataset_beta: float
    per_image_beta: tuple[float, ...]
    grid: tuple[float, ...]
    mean_scores: tuple[float, ...]  # dataset mean metric per grid point
    scores: tuple[tuple[float, ...], ...]  # [image][grid point]


_METRICS = {
    "arand": (arand, False),
    "voi": (voi, False),
    "accuracy": (accuracy, True),
}


def grady_beta_search(
    dataset,
    beta_grid=DEFAULT_BETA_GRID,
    metric: str = "arand",
    k: int = 1,
    seeds_for=None,
) -> BetaSearchResult:
    """Evaluate the baseline weight over a beta grid on (image, truth) pairs.

    Each image is segmented from its initial seeds (or ``seeds_for(truth)``)
    at every grid point; returns the grid argmin of the dataset mean metric
    and the per-image argmins. For ``metric="accuracy"`` higher is better and
    argmax applies. Ties go to the first grid point.
    """
    metric_fn, maximize = _METRICS[metric]
    grid = tuple(float(b) for b in beta_grid)
    if not grid:
        raise ValueError("beta grid must be nonempty")
    seeds_for = seeds_for or place_initial_seeds
    scores = []
    for image, truth in dataset:
        seeds = seeds_for(np.asarray(truth))
        row = []
        for beta in grid:
            _, predicted = segment(image, seeds, GradyConfig(beta=beta), k=k)
            row.append(float(metric_fn(predicted, truth)))
        scores.append(tuple(row))
    arr = np.asarray(scores)
    signed = -arr if maximize else arr
    mean_scores = arr.mean(axis=0)
    dataset_idx = int(np.argmin(signed.mean(axis=0)))
    per_image_idx = np.argmin(signed, axis=1)
    return BetaSearchResult(
        dataset_beta=grid[dataset_idx],
        per_image_beta=tuple(grid[i] for i in per_image_idx),
        grid=grid,
        mean_scores=tuple(float(v) for v in mean_scores),
        scores=tuple(tuple(r) for r in scores),
    )
