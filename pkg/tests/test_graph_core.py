"""Graph construction and Dirichlet solver tests."""

import numpy as np
import pytest

from noisewalker import graph_core as gc
from noisewalker import neighborhood as nb
from noisewalker import noise_models as nm


def uniform_chain(n, w=1.0):
    return gc.LatticeGraph(horizontal=np.full((1, n - 1), w), vertical=np.zeros((0, n)))


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------


def test_constant_image_poisson_all_weights_one():
    img = np.full((6, 6), 17.0)
    g = gc.build_graph(img, nm.PoissonConfig(), k=1)
    assert np.all(g.horizontal == 1.0)
    assert np.all(g.vertical == 1.0)


def test_too_small_image_rejected_minimum_accepted():
    with pytest.raises(ValueError, match="smaller k"):
        gc.build_graph(np.zeros((2, 2)), nm.PoissonConfig(), k=1)
    g = gc.build_graph(np.zeros((3, 3)), nm.PoissonConfig(), k=1)
    assert g.horizontal.shape == (3, 2)
    assert g.vertical.shape == (2, 3)


def test_grady_step_image_across_weights_smaller():
    img = np.zeros((6, 6))
    img[:, 3:] = 200.0
    g = gc.build_graph(img, nm.GradyConfig(beta=90.0), k=1)
    # after [0,1] normalization the step difference is 1
    across = g.horizontal[:, 2]
    within = np.concatenate([g.horizontal[:, :2].ravel(), g.horizontal[:, 3:].ravel()])
    assert np.all(across < within.min())
    assert across[0] == pytest.approx(max(np.exp(-90.0), gc.WEIGHT_FLOOR), abs=1e-12)
    assert np.all(within == 1.0)


def test_grady_weights_direct_recompute():
    rng = np.random.default_rng(0)
    img = rng.uniform(0, 255, (5, 7))
    beta = 37.0
    g = gc.build_graph(img, nm.GradyConfig(beta=beta), k=1)
    norm = (img - img.min()) / (img.max() - img.min())
    for y in range(5):
        for x in range(6):
            w = np.clip(np.exp(-beta * (norm[y, x] - norm[y, x + 1]) ** 2), gc.WEIGHT_FLOOR, 1)
            assert g.horizontal[y, x] == pytest.approx(w, rel=1e-12)


@pytest.mark.parametrize(
    "model",
    [
        nm.PoissonConfig(),
        nm.GaussianVarVarConfig(variance_floor=1e-4),
        nm.GaussianConstCovConfig(covariance=np.array([[4.0]])),
    ],
)
def test_build_graph_matches_per_edge_reference(model):
    """The vectorized builder equals select + resolve + weigh per edge."""
    rng = np.random.default_rng(8)
    img = rng.poisson(20.0, (8, 9)).astype(float)
    img[4:, :] += 30
    g = gc.build_graph(img, model, k=1)
    prepared = nb._prepare_image(img, model)

    def edge_weight(pa, pb):
        a = nb.select_neighborhood(img, pa, 1, model)
        b = nb.select_neighborhood(img, pb, 1, model)
        r = nb.resolve_overlap(a, b)
        va = prepared[r.set_x.coords[:, 0], r.set_x.coords[:, 1]]
        vb = prepared[r.set_y.coords[:, 0], r.set_y.coords[:, 1]]
        if isinstance(model, nm.PoissonConfig):
            w = nm.weight_poisson(int(va.sum()), int(vb.sum()))
        elif isinstance(model, nm.GaussianConstCovConfig):
            w = nm.weight_gaussian_const([va.mean()], [vb.mean()], model, len(va))
        else:
            w = nm.weight_gaussian_var(va, vb, var_floor=model.variance_floor)
        return np.clip(w, gc.WEIGHT_FLOOR, 1.0)

    for y in range(8):
        for x in range(8):
            assert g.horizontal[y, x] == pytest.approx(edge_weight((y, x), (y, x + 1)), rel=1e-12)
    for y in range(7):
        for x in range(9):
            assert g.vertical[y, x] == pytest.approx(edge_weight((y, x), (y + 1, x)), rel=1e-12)


def test_weights_clamped_to_floor():
    img = np.zeros((6, 6))
    img[:, 3:] = 1e6
    g = gc.build_graph(img, nm.PoissonConfig(), k=1)
    assert g.horizontal.min() == gc.WEIGHT_FLOOR


def test_lattice_graph_validation():
    with pytest.raises(ValueError):
        gc.LatticeGraph(horizontal=np.full((2, 2), 0.5), vertical=np.full((2, 2), 0.5))
    with pytest.raises(ValueError):
        gc.LatticeGraph(horizontal=np.full((2, 1), 2.0), vertical=np.full((1, 2), 0.5))


# ---------------------------------------------------------------------------
# Seed maps
# ---------------------------------------------------------------------------


def test_seed_map_roundtrip_and_validation():
    seeds = gc.SeedMap.from_points((4, 5), [{"x": 1, "y": 2, "label": 3}, (0, 0, 1)])
    assert seeds.count == 2
    assert seeds.labels[2, 1] == 3
    assert {tuple(sorted(p.items())) for p in seeds.to_points()} == {
        (("label", 1), ("x", 0), ("y", 0)),
        (("label", 3), ("x", 1), ("y", 2)),
    }
    with pytest.raises(ValueError, match="outside"):
        gc.SeedMap.from_points((4, 5), [(9, 0, 1)])
    with pytest.raises(ValueError, match="conflicting"):
        gc.SeedMap.from_points((4, 5), [(1, 1, 0), (1, 1, 2)])
    # duplicate with the same label is fine
    gc.SeedMap.from_points((4, 5), [(1, 1, 2), (1, 1, 2)])


# ---------------------------------------------------------------------------
# Dirichlet solves
# ---------------------------------------------------------------------------


def test_all_pixels_seeded_returns_indicator():
    g = gc.LatticeGraph(horizontal=np.full((2, 1), 0.5), vertical=np.full((1, 2), 0.5))
    seeds = gc.SeedMap(labels=np.array([[0, 1], [1, 0]], dtype=np.int32))
    f = gc.solve_dirichlet(g, seeds)
    assert np.array_equal(f.argmax_map, seeds.labels)
    assert np.array_equal(f.probabilities[0], (seeds.labels == 0).astype(float))
    assert np.array_equal(f.prenorm_sums, np.ones((2, 2)))


def test_three_chain_middle_is_half():
    g = uniform_chain(3)
    seeds = gc.SeedMap.from_points((1, 3), [(0, 0, 0), (2, 0, 1)])
    f = gc.solve_dirichlet(g, seeds, method="direct")
    assert f.probabilities[0, 0, 1] == pytest.approx(0.5, abs=1e-12)


def test_four_chain_two_thirds():
    g = uniform_chain(4)
    seeds = gc.SeedMap.from_points((1, 4), [(0, 0, 0), (3, 0, 1)])
    f = gc.solve_dirichlet(g, seeds, method="direct")
    assert f.probabilities[0, 0, 1] == pytest.approx(2 / 3, abs=1e-9)
    assert f.probabilities[1, 0, 1] == pytest.approx(1 / 3, abs=1e-9)
    f_it = gc.solve_dirichlet(g, seeds, method="iterative")
    assert np.allclose(f.probabilities, f_it.probabilities, atol=1e-6)


def test_seeded_pixels_exact_indicator():
    rng = np.random.default_rng(1)
    g = gc.LatticeGraph(
        horizontal=rng.uniform(0.1, 1, (6, 5)), vertical=rng.uniform(0.1, 1, (5, 6))
    )
    seeds = gc.SeedMap.from_points((6, 6), [(0, 0, 0), (5, 5, 1), (2, 3, 2)])
    f = gc.solve_dirichlet(g, seeds)
    assert f.probabilities[0, 0, 0] == 1.0
    assert f.probabilities[1, 0, 0] == 0.0
    assert f.probabilities[2, 3, 2] == 1.0
    assert np.all((f.probabilities >= 0) & (f.probabilities <= 1))
    sums = f.probabilities.sum(axis=0)
    assert np.allclose(sums, 1.0, atol=1e-6)
    assert np.all(np.abs(f.prenorm_sums - 1) < 1e-5)


def test_label_permutation_equivariance():
    rng = np.random.default_rng(2)
    g = gc.LatticeGraph(
        horizontal=rng.uniform(0.2, 1, (5, 4)), vertical=rng.uniform(0.2, 1, (4, 5))
    )
    pts = [(0, 0, 0), (4, 4, 1), (0, 4, 2)]
    f1 = gc.solve_dirichlet(g, gc.SeedMap.from_points((5, 5), pts))
    swapped = [(x, y, {0: 2, 1: 1, 2: 0}[l]) for x, y, l in pts]
    f2 = gc.solve_dirichlet(g, gc.SeedMap.from_points((5, 5), swapped))
    assert np.allclose(f1.probabilities[0], f2.probabilities[2])
    assert np.allclose(f1.probabilities[2], f2.probabilities[0])
    remap = np.array([2, 1, 0])
    assert np.array_equal(remap[f1.argmax_map], f2.argmax_map)


def test_argmax_tie_prefers_smaller_label():
    g = uniform_chain(3)
    seeds = gc.SeedMap.from_points((1, 3), [(0, 0, 3), (2, 0, 5)])
    f = gc.solve_dirichlet(g, seeds, method="direct")
    assert f.argmax_map[0, 1] == 3  # exact 0.5/0.5 tie


def test_single_label_rejected():
    g = uniform_chain(3)
    with pytest.raises(ValueError, match="2 labels"):
        gc.solve_dirichlet(g, gc.SeedMap.from_points((1, 3), [(0, 0, 1)]))


def test_direct_limit_enforced():
    g = gc.LatticeGraph(horizontal=np.full((70, 69), 0.5), vertical=np.full((69, 70), 0.5))
    seeds = gc.SeedMap.from_points((70, 70), [(0, 0, 0), (69, 69, 1)])
    with pytest.raises(ValueError, match="at most"):
        gc.solve_dirichlet(g, seeds, method="direct")


@pytest.mark.parametrize("seed", range(4))
def test_direct_and_iterative_agree(seed):
    rng = np.random.default_rng(seed)
    h, w = int(rng.integers(4, 12)), int(rng.integers(4, 12))
    g = gc.LatticeGraph(
        horizontal=10 ** rng.uniform(-6, 0, (h, w - 1)),
        vertical=10 ** rng.uniform(-6, 0, (h - 1, w)),
    )
    n_seeds = int(rng.integers(2, 6))
    pts = []
    taken = set()
    for i in range(n_seeds):
        while True:
            x, y = int(rng.integers(0, w)), int(rng.integers(0, h))
            if (x, y) not in taken:
                taken.add((x, y))
                break
        pts.append((x, y, i % 3))
    if len({l for _, _, l in pts}) < 2:
        pts[-1] = (pts[-1][0], pts[-1][1], pts[-2][2] + 1)
    seeds = gc.SeedMap.from_points((h, w), pts)
    fd = gc.solve_dirichlet(g, seeds, method="direct")
    fi = gc.solve_dirichlet(g, seeds, method="iterative")
    assert np.abs(fd.probabilities - fi.probabilities).max() < 1e-6


def test_iterative_cap_raises_with_residual():
    rng = np.random.default_rng(3)
    g = gc.LatticeGraph(
        horizontal=10 ** rng.uniform(-6, 0, (12, 11)),
        vertical=10 ** rng.uniform(-6, 0, (11, 12)),
    )
    seeds = gc.SeedMap.from_points((12, 12), [(0, 0, 0), (11, 11, 1)])
    with pytest.raises(gc.SolverConvergenceError) as err:
        gc.solve_dirichlet(g, seeds, maxiter=1)
    assert err.value.residual > 0


def test_build_graph_k2_matches_per_edge_reference():
    rng = np.random.default_rng(12)
    img = rng.normal(10, 2, (9, 9))
    img[:, 5:] += 15
    model = nm.GaussianVarVarConfig(variance_floor=1e-4)
    g = gc.build_graph(img, model, k=2)
    for y, x in [(4, 4), (0, 0), (8, 3), (5, 7)]:
        a = nb.select_neighborhood(img, (y, x), 2, model)
        b = nb.select_neighborhood(img, (y, x + 1), 2, model)
        r = nb.resolve_overlap(a, b)
        w = nm.weight_gaussian_var(r.set_x.values, r.set_y.values, var_floor=1e-4)
        assert g.horizontal[y, x] == pytest.approx(np.clip(w, gc.WEIGHT_FLOOR, 1), rel=1e-12)


def test_segment_step_image_perfect():
    img = np.full((8, 8), 10.0)
    img[:, 4:] = 1000.0
    truth = np.zeros((8, 8), dtype=int)
    truth[:, 4:] = 1
    seeds = gc.SeedMap.from_points((8, 8), [(1, 1, 0), (6, 6, 1)])
    _, labels = gc.segment(img, seeds, nm.PoissonConfig())
    assert np.array_equal(labels, truth)


def test_segment_deterministic():
    rng = np.random.default_rng(5)
    img = rng.poisson(30, (10, 10)).astype(float)
    img[5:, :] += 40
    seeds = gc.SeedMap.from_points((10, 10), [(2, 2, 0), (7, 7, 1)])
    f1, l1 = gc.segment(img, seeds, nm.PoissonConfig())
    f2, l2 = gc.segment(img, seeds, nm.PoissonConfig())
    assert np.array_equal(l1, l2)
    assert np.array_equal(f1.probabilities, f2.probabilities)
