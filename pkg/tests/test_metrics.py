import numpy as np
import pytest

from uaproj import (
    EvalConfig,
    Gaussian,
    ImportanceWeights,
    LabeledDataset,
    MixtureModel,
    ValidationError,
    empirical_moments,
    evaluate_strategies,
    kde_grid,
    kl_grid,
    make_synthetic_multimodal,
    rasterize,
    sample_gaussian,
    sliced_w2,
    weighted_average,
)
from uaproj.metrics import scott_bandwidth
from uaproj.sampling import substream


def gauss2d(mean, cov):
    return MixtureModel.single(Gaussian(mean, cov))


def test_scott_rule_value():
    rng = substream(0, 1)
    pts = rng.standard_normal((4096, 2))
    h = scott_bandwidth(pts)
    assert np.allclose(h, pts.std(axis=0, ddof=1) * 4096 ** (-1 / 6), rtol=1e-12)
    assert h[0] == pytest.approx(0.25, rel=0.05)


def test_kde_single_point_bump():
    pts = np.array([[0.5, 0.5], [0.5, 0.5]])
    grid = kde_grid(pts, (-1, 2, -1, 2), (64, 64))
    i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert grid.x_coords()[i] == pytest.approx(0.5, abs=0.1)
    assert grid.y_coords()[j] == pytest.approx(0.5, abs=0.1)
    assert grid.total_mass == pytest.approx(1.0, abs=1e-6)


def test_kde_consistency_against_true_density():
    g = Gaussian([0.0, 0.0], np.array([[1.0, 0.3], [0.3, 0.7]]))
    pts = sample_gaussian(g, 100_000, 13)
    bounds = (-5, 5, -5, 5)
    kde = kde_grid(pts, bounds, (256, 256))
    true = rasterize(MixtureModel.single(g), bounds=bounds, resolution=(256, 256))
    assert kl_grid(kde, true) < 0.01


def test_kl_identity_is_zero():
    g = rasterize(gauss2d([0.0, 0.0], np.eye(2)), bounds=(-5, 5, -5, 5),
                  resolution=(128, 128))
    assert abs(kl_grid(g, g)) < 1e-9


def test_kl_gaussian_mean_shift():
    # second axis identical, so the 2D KL equals the 1D closed form 0.5
    bounds = (-9, 10, -8, 8)
    res = (512, 256)
    p = rasterize(gauss2d([0.0, 0.0], np.eye(2)), bounds=bounds, resolution=res)
    q = rasterize(gauss2d([1.0, 0.0], np.eye(2)), bounds=bounds, resolution=res)
    assert kl_grid(p, q) == pytest.approx(0.5, rel=0.02)


def test_kl_gaussian_scale_and_asymmetry():
    bounds = (-17, 17, -8, 8)
    res = (768, 256)
    p = rasterize(gauss2d([0.0, 0.0], np.eye(2)), bounds=bounds, resolution=res)
    q = rasterize(gauss2d([0.0, 0.0], np.diag([4.0, 1.0])), bounds=bounds, resolution=res)
    expected = np.log(2.0) + 1.0 / 8.0 - 0.5
    assert kl_grid(p, q) == pytest.approx(expected, rel=0.02)
    assert kl_grid(q, p) != pytest.approx(expected, rel=0.02)


def test_kl_shape_mismatch():
    a = rasterize(gauss2d([0.0, 0.0], np.eye(2)), bounds=(-5, 5, -5, 5), resolution=(64, 64))
    b = rasterize(gauss2d([0.0, 0.0], np.eye(2)), bounds=(-5, 5, -5, 5), resolution=(32, 32))
    with pytest.raises(ValidationError):
        kl_grid(a, b)


def test_sw2_identical_sets_zero():
    rng = substream(3, 1)
    a = rng.standard_normal((500, 2))
    assert sliced_w2(a, a.copy(), 50, seed=1) == 0.0


def test_sw2_translation_closed_form():
    rng = substream(4, 1)
    a = rng.standard_normal((4000, 2))
    t = np.array([2.0, -1.0])
    val = sliced_w2(a, a + t, 400, seed=2)
    assert val == pytest.approx(np.linalg.norm(t) / np.sqrt(2), rel=0.03)


def test_sw2_symmetry_under_shared_directions():
    rng = substream(5, 1)
    a = rng.standard_normal((300, 2))
    b = rng.standard_normal((400, 2)) + 1.0
    assert abs(sliced_w2(a, b, 64, seed=7) - sliced_w2(b, a, 64, seed=7)) < 1e-12


def test_sw2_triangle_inequality():
    rng = substream(6, 1)
    a = rng.standard_normal((1000, 2))
    b = rng.standard_normal((1000, 2)) + [1.5, 0.0]
    c = rng.standard_normal((1000, 2)) + [0.0, 2.0]
    ab = sliced_w2(a, b, 200, seed=3)
    bc = sliced_w2(b, c, 200, seed=3)
    ac = sliced_w2(a, c, 200, seed=3)
    assert ac <= ab + bc + 3 * 0.05


def test_sw2_rejects_empty():
    with pytest.raises(ValidationError):
        sliced_w2(np.empty((0, 2)), np.zeros((3, 2)))


def test_weighted_average_cases():
    tau = ImportanceWeights(np.array([0.25, 0.75]))
    assert weighted_average([1.0, 3.0], tau) == pytest.approx(2.5)
    assert weighted_average([4.0, 4.0], tau) == pytest.approx(4.0)
    one_hot = ImportanceWeights(np.array([0.0, 1.0]))
    assert weighted_average([9.0, 2.0], one_hot) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        weighted_average([1.0], tau)


def _k1_dataset(seed=0):
    rng = substream(seed, 0xE1)
    a = rng.multivariate_normal([0, 0, 0], np.eye(3), size=600)
    b = rng.multivariate_normal([4, 0, 0], np.diag([1.0, 2.0, 0.5]), size=600)
    ds = LabeledDataset(
        np.vstack([a, b]),
        np.concatenate([np.zeros(600, int), np.ones(600, int)]),
        ("a", "b"),
    )
    models = {
        0: MixtureModel.single(empirical_moments(a)),
        1: MixtureModel.single(empirical_moments(b)),
    }
    return ds, models


def test_k1_classes_make_strategies_agree():
    ds, models = _k1_dataset()
    tau = ImportanceWeights.equal(2)
    report = evaluate_strategies(ds, models, tau, EvalConfig(seed=0))
    for c in report.per_class:
        assert abs(c.kl_wgmm - c.kl_uapca) < 1e-9


def test_bimodal_classes_favor_mixture_projection():
    specs = [
        (
            [np.zeros(4), np.r_[10.0, np.zeros(3)]],
            [np.eye(4), np.eye(4)],
            [0.5, 0.5],
        ),
        (
            [np.r_[0.0, 8.0, 0.0, 0.0], np.r_[10.0, 8.0, 0.0, 0.0]],
            [np.eye(4), np.eye(4)],
            [0.5, 0.5],
        ),
    ]
    # large N keeps the Scott bandwidth well below the mode width, so the
    # reference KDE stays sharply bimodal
    ds, models = make_synthetic_multimodal(specs, 20_000, seed=4)
    tau = ImportanceWeights.equal(2)
    report = evaluate_strategies(
        ds, dict(enumerate(models)), tau, EvalConfig(seed=4)
    )
    assert report.kl_wgmm < report.kl_uapca
    assert report.sw2_wgmm < report.sw2_uapca


def test_balanced_tau_modes_identical():
    ds, models = _k1_dataset(1)
    cfg = EvalConfig(seed=2)
    eq = evaluate_strategies(ds, models, ImportanceWeights.equal(2), cfg)
    by_counts = evaluate_strategies(
        ds, models, ImportanceWeights.from_counts(ds.class_counts()), cfg
    )
    assert eq.kl_wgmm == pytest.approx(by_counts.kl_wgmm, abs=1e-12)
    assert eq.sw2_uapca == pytest.approx(by_counts.sw2_uapca, abs=1e-12)


def test_evaluate_deterministic():
    ds, models = _k1_dataset(2)
    tau = ImportanceWeights.equal(2)
    r1 = evaluate_strategies(ds, models, tau, EvalConfig(seed=9))
    r2 = evaluate_strategies(ds, models, tau, EvalConfig(seed=9))
    assert r1.per_class == r2.per_class


def test_evaluate_missing_class():
    ds, models = _k1_dataset(3)
    del models[1]
    with pytest.raises(ValidationError):
        evaluate_strategies(ds, models, ImportanceWeights.equal(2))
