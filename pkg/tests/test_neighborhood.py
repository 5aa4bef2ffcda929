"""Window selection and overlap resolution tests."""

import numpy as np
import pytest
from scipy.stats import norm, poisson

from noisewalker import neighborhood as nb
from noisewalker import noise_models as nm

VAR_MODEL = nm.GaussianVarVarConfig(variance_floor=1e-6)


def brute_force_best_origin(image, pixel, k, model):
    """Independent exhaustive search with scipy likelihoods."""
    image = np.asarray(image, dtype=float)
    best, best_ll = None, -np.inf
    for origin in nb.candidate_origins(image.shape[:2], pixel, k):
        size = 2 * k + 1
        win = image[origin[0] : origin[0] + size, origin[1] : origin[1] + size]
        x = image[pixel]
        if isinstance(model, nm.PoissonConfig):
            lam = np.rint(win).clip(0).mean()
            ll = poisson.logpmf(int(round(x)), lam) if lam > 0 else (0.0 if round(x) == 0 else -np.inf)
        elif isinstance(model, nm.GaussianVarVarConfig):
            var = max(win.var(), model.variance_floor)
            ll = norm.logpdf(x, win.mean(), np.sqrt(var))
        else:
            var = model.covariance[0, 0]
            ll = norm.logpdf(x, win.mean(), np.sqrt(var))
        if ll > best_ll + 1e-12:
            best, best_ll = origin, ll
    return best, best_ll


def test_constant_image_ties_break_raster():
    img = np.full((7, 7), 5.0)
    s = nb.select_neighborhood(img, (3, 3), 1, VAR_MODEL)
    # all candidates tie; the raster-smallest origin wins
    assert tuple(s.coords[0]) == (1, 1)
    corner = nb.select_neighborhood(img, (0, 0), 1, VAR_MODEL)
    assert tuple(corner.coords[0]) == (0, 0)


def test_step_image_selects_bright_side():
    img = np.zeros((9, 9))
    img[:, 5:] = 10.0
    img += np.linspace(0, 0.01, 81).reshape(9, 9)  # break exact ties
    s = nb.select_neighborhood(img, (4, 5), 1, VAR_MODEL)
    assert s.coords[:, 1].min() >= 5  # fully in the bright region
    origin, _ = brute_force_best_origin(img, (4, 5), 1, VAR_MODEL)
    assert tuple(s.coords[0]) == origin


def test_interior_pixel_has_nine_candidates():
    assert len(nb.candidate_origins((10, 10), (5, 5), 1)) == 9
    assert len(nb.candidate_origins((10, 10), (0, 0), 1)) == 1
    assert len(nb.candidate_origins((10, 10), (0, 5), 1)) == 3


def test_window_too_large_error_mentions_k():
    with pytest.raises(ValueError, match="smaller k"):
        nb.candidate_origins((2, 2), (0, 0), 1)
    with pytest.raises(ValueError, match="smaller k"):
        nb.select_neighborhood(np.zeros((3, 3)), (1, 1), 2, VAR_MODEL)


def test_grady_has_no_neighborhoods():
    with pytest.raises(ValueError):
        nb.select_neighborhood(np.zeros((5, 5)), (2, 2), 1, nm.GradyConfig(beta=1.0))


@pytest.mark.parametrize(
    "model",
    [
        nm.PoissonConfig(),
        VAR_MODEL,
        nm.GaussianConstCovConfig(covariance=np.array([[0.5]])),
    ],
)
def test_selection_attains_exhaustive_maximum(model):
    rng = np.random.default_rng(42)
    img = rng.poisson(8.0, (12, 12)).astype(float)
    img[:, 6:] += 12.0
    for _ in range(25):
        pixel = (int(rng.integers(0, 12)), int(rng.integers(0, 12)))
        s = nb.select_neighborhood(img, pixel, 1, model)
        _, best_ll = brute_force_best_origin(img, pixel, 1, model)
        origin = tuple(s.coords[0])
        # re-evaluate the chosen window with the independent likelihood
        size = 3
        win = img[origin[0] : origin[0] + size, origin[1] : origin[1] + size]
        x = img[pixel]
        if isinstance(model, nm.PoissonConfig):
            lam = np.rint(win).clip(0).mean()
            chosen_ll = poisson.logpmf(int(round(x)), lam)
        elif isinstance(model, nm.GaussianVarVarConfig):
            chosen_ll = norm.logpdf(x, win.mean(), np.sqrt(max(win.var(), model.variance_floor)))
        else:
            chosen_ll = norm.logpdf(x, win.mean(), np.sqrt(model.covariance[0, 0]))
        assert chosen_ll >= best_ll - 1e-9


@pytest.mark.parametrize(
    "model",
    [
        nm.PoissonConfig(),
        VAR_MODEL,
        nm.GaussianConstCovConfig(covariance=np.array([[0.5]])),
    ],
)
def test_vectorized_selection_matches_per_pixel(model):
    rng = np.random.default_rng(3)
    img = rng.poisson(10.0, (10, 11)).astype(float)
    img[:5, :] *= 2
    origins = nb.select_all_origins(img, 1, model)
    for y in range(10):
        for x in range(11):
            s = nb.select_neighborhood(img, (y, x), 1, model)
            assert tuple(origins[y, x]) == tuple(s.coords[0]), (y, x)


def test_vectorized_selection_matches_per_pixel_k2():
    rng = np.random.default_rng(4)
    img = rng.normal(5, 1, (11, 12))
    origins = nb.select_all_origins(img, 2, VAR_MODEL)
    for y in range(0, 11, 3):
        for x in range(0, 12, 3):
            s = nb.select_neighborhood(img, (y, x), 2, VAR_MODEL)
            assert tuple(origins[y, x]) == tuple(s.coords[0])


def test_vectorized_selection_two_channel():
    rng = np.random.default_rng(5)
    img = rng.normal(0, 1, (9, 9, 2))
    cfg = nm.GaussianConstCovConfig(covariance=np.eye(2))
    origins = nb.select_all_origins(img, 1, cfg)
    s = nb.select_neighborhood(img, (4, 4), 1, cfg)
    assert tuple(origins[4, 4]) == tuple(s.coords[0])


# ---------------------------------------------------------------------------
# Overlap resolution
# ---------------------------------------------------------------------------


def _window(img, origin, center, k=1):
    return nb.window_sample_set(img, origin, k, center)


def test_disjoint_windows_unchanged():
    img = np.arange(100, dtype=float).reshape(10, 10)
    a = _window(img, (0, 0), (1, 1))
    b = _window(img, (0, 4), (1, 5))
    r = nb.resolve_overlap(a, b)
    assert np.array_equal(r.set_x.coords, a.coords)
    assert np.array_equal(r.set_y.coords, b.coords)


def test_full_overlap_splits_four_four():
    img = np.arange(100, dtype=float).reshape(10, 10)
    a = _window(img, (2, 2), (3, 3))
    b = _window(img, (2, 2), (3, 4))
    r = nb.resolve_overlap(a, b)
    assert len(r.set_x) == len(r.set_y) == 4
    # hand enumeration: the window spans columns 2..4 around centers
    # (3,3) and (3,4); the key d(p,A)-d(p,B) is negative on the left
    # columns, so A keeps left pixels, B right pixels
    assert r.set_x.coords[:, 1].max() <= 3
    assert r.set_y.coords[:, 1].min() >= 3


def test_resolution_symmetric_in_argument_order():
    img = np.arange(121, dtype=float).reshape(11, 11)
    a = _window(img, (2, 3), (3, 4))
    b = _window(img, (3, 4), (3, 5))
    r1 = nb.resolve_overlap(a, b)
    r2 = nb.resolve_overlap(b, a)
    assert np.array_equal(r1.set_x.coords, r2.set_y.coords)
    assert np.array_equal(r1.set_y.coords, r2.set_x.coords)
    assert np.array_equal(r1.set_x.values, r2.set_y.values)


def test_resolution_requires_coords_and_equal_size():
    plain = nm.SampleSet(values=np.ones(4))
    with pytest.raises(ValueError):
        nb.resolve_overlap(plain, plain)
    img = np.zeros((8, 8))
    a = _window(img, (0, 0), (1, 1))
    b = nm.SampleSet(values=np.ones(4), center=(1, 2), coords=np.zeros((4, 2), int))
    with pytest.raises(ValueError):
        nb.resolve_overlap(a, b)


def test_resolution_contract_random_pairs():
    """Disjointness, equal cardinality, coverage, symmetry, minimum size."""
    rng = np.random.default_rng(0)
    img = rng.normal(10, 2, (16, 16))
    t = 9
    for _ in range(300):
        y = int(rng.integers(0, 16))
        x = int(rng.integers(0, 15))
        horizontal = bool(rng.integers(0, 2))
        if horizontal:
            pa, pb = (y, x), (y, x + 1)
        else:
            if y >= 15:
                continue
            pa, pb = (y, x), (y + 1, x)
        oa = rng.integers(0, 2, 2)  # random-ish valid origins
        ca = nb.candidate_origins(img.shape, pa, 1)
        cb = nb.candidate_origins(img.shape, pb, 1)
        a = _window(img, ca[int(rng.integers(len(ca)))], pa)
        b = _window(img, cb[int(rng.integers(len(cb)))], pb)
        r = nb.resolve_overlap(a, b)
        sx = {tuple(c) for c in r.set_x.coords}
        sy = {tuple(c) for c in r.set_y.coords}
        assert not sx & sy
        assert len(r.set_x) == len(r.set_y) >= t // 2
        assert sx <= {tuple(c) for c in a.coords}
        assert sy <= {tuple(c) for c in b.coords}
        r_flip = nb.resolve_overlap(b, a)
        assert np.array_equal(r_flip.set_x.coords, r.set_y.coords)
        assert np.array_equal(r_flip.set_y.coords, r.set_x.coords)


def test_relative_partition_matches_absolute():
    img = np.arange(144, dtype=float).reshape(12, 12)
    pa, pb = (5, 5), (5, 6)
    for oa in [(-2, -2), (-1, -1), (0, 0), (-2, 0)]:
        for ob in [(-2, -2), (-1, 0), (0, -2)]:
            a = _window(img, (pa[0] + oa[0], pa[1] + oa[1]), pa)
            b = _window(img, (pb[0] + ob[0], pb[1] + ob[1]), pb)
            r = nb.resolve_overlap(a, b)
            rel_a, rel_b = nb._relative_partition(1, (0, 1), oa, ob)
            abs_a = [(pa[0] + dy, pa[1] + dx) for dy, dx in rel_a]
            abs_b = [(pa[0] + dy, pa[1] + dx) for dy, dx in rel_b]
            assert [tuple(c) for c in r.set_x.coords] == abs_a
            assert [tuple(c) for c in r.set_y.coords] == abs_b
