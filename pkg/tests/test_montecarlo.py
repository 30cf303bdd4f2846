from fractions import Fraction

import numpy as np
import pytest

from wishmom import _kernels
from wishmom.montecarlo import (
    EntryProduct,
    PowerTrace,
    RngSpec,
    TracePower,
    TraceProduct,
    estimate,
    estimate_haar,
    sample_haar_orthogonal,
    sample_wishart,
    sample_wishart_batch,
)
from wishmom.wishart import DomainError, WishartParams


@pytest.fixture(autouse=True)
def numpy_backend(monkeypatch):
    # unit tests run the pure-numpy path; the numba path has its own tests below
    monkeypatch.setenv("WW_BACKEND", "numpy")


@pytest.fixture(scope="module")
def params():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(3, 3))
    return WishartParams(d=3, beta=Fraction(5, 2), sigma=a @ a.T + 3 * np.eye(3))


def test_rngspec_reproducibility(params):
    descs = [EntryProduct((1, 2)), TracePower(2)]
    s1 = estimate(descs, params, 5000, RngSpec(42))
    s2 = estimate(descs, params, 5000, RngSpec(42))
    for a, b in zip(s1, s2):
        assert a.mean == b.mean and a.stderr == b.stderr and a.count == b.count
    s3 = estimate(descs, params, 5000, RngSpec(43))
    assert s3[0].mean != s1[0].mean


def test_estimate_requires_minimum_samples(params):
    with pytest.raises(ValueError):
        estimate([EntryProduct((1, 1))], params, 10, RngSpec(0))


def test_thread_count_does_not_change_results(params):
    descs = [EntryProduct((1, 1, 2, 2))]
    a = estimate(descs, params, 12000, RngSpec(7), streams=4, threads=1)
    b = estimate(descs, params, 12000, RngSpec(7), streams=4, threads=4)
    assert a[0].mean == b[0].mean and a[0].stderr == b[0].stderr


def test_sample_wishart_is_symmetric_pd(params):
    for method in ("bartlett", "vectors"):  # beta=5/2 admits both paths
        w = sample_wishart(params, RngSpec(1), method)
        assert np.allclose(w, w.T)
        np.linalg.cholesky(w)


def test_entry_pair_product_d4():
    rng = np.random.default_rng(20)
    a = rng.normal(size=(4, 4))
    p = WishartParams(d=4, beta=3, sigma=a @ a.T + 4 * np.eye(4))
    s = estimate([EntryProduct((1, 2, 3, 4))], p, 30000, RngSpec(21))[0]
    assert abs(s.zscore) < 6


def test_scalar_wishart_mean():
    # d=1, beta=1, sigma=2 is an exponential with mean 2
    p = WishartParams(d=1, beta=1, sigma=np.array([[2.0]]))
    s = estimate([EntryProduct((1, 1))], p, 20000, RngSpec(15))[0]
    assert s.target == pytest.approx(2.0)
    assert abs(s.zscore) < 5


def test_haar_degenerate_dimension():
    # N=1: entries are +-1, even powers are exactly 1 with zero spread
    s = estimate_haar([((1, 1, 1, 1), (1, 1, 1, 1))], 1, 2000, RngSpec(16))[0]
    assert s.mean == 1.0 and s.target == 1.0 and s.stderr == 0.0 and s.zscore == 0.0


def test_sampler_paths_agree_in_distribution():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 2))
    p = WishartParams(d=2, beta=2, sigma=a @ a.T + 2 * np.eye(2))
    descs = [EntryProduct((i, j)) for i in (1, 2) for j in (1, 2)] + [EntryProduct((1, 1, 2, 2))]
    res_b = estimate(descs, p, 40000, RngSpec(11), method="bartlett")
    res_v = estimate(descs, p, 40000, RngSpec(12), method="vectors")
    for sb, sv in zip(res_b, res_v):
        # both target the same exact values; 5 stderr in both directions
        assert abs(sb.zscore) < 5 and abs(sv.zscore) < 5
        assert abs(sb.mean - sv.mean) < 5 * (sb.stderr + sv.stderr)


def test_sampler_method_guards():
    p_frac = WishartParams(d=3, beta=Fraction(1, 2), sigma=np.eye(3))
    with pytest.raises(DomainError):
        sample_wishart_batch(p_frac, 4, RngSpec(0).generator(), "bartlett")
    with pytest.raises(DomainError):
        sample_wishart_batch(
            WishartParams(d=3, beta=Fraction(9, 4), sigma=np.eye(3)), 4, RngSpec(0).generator(), "vectors"
        )
    w = sample_wishart_batch(p_frac, 4, RngSpec(0).generator(), "vectors")
    assert w.shape == (4, 3, 3)


def test_estimator_zscores_sane(params):
    descs = [
        EntryProduct((1, 2)),
        EntryProduct((1, 1, 2, 2)),
        TracePower(2),
        PowerTrace((2, 1)),
        TraceProduct((np.eye(3),)),
    ]
    for s in estimate(descs, params, 30000, RngSpec(5)):
        assert abs(s.zscore) < 6
        assert s.count == 30000 and s.rejected == 0


def test_inverse_descriptors():
    p = WishartParams(d=2, beta=6, sigma=np.diag([1.0, 2.0]))  # gamma = 9/2
    stats = estimate(
        [EntryProduct((1, 1), inverse=True), TracePower(1, inverse=True)],
        p,
        30000,
        RngSpec(6),
    )
    for s in stats:
        assert abs(s.zscore) < 6
        assert s.count + s.rejected == 30000


def test_inverse_gamma_margin_guard():
    p = WishartParams(d=2, beta=Fraction(9, 2), sigma=np.eye(2))  # gamma = 3
    with pytest.raises(DomainError):
        estimate([EntryProduct((1, 1, 2, 2, 1, 2), inverse=True)], p, 2000, RngSpec(0))


def test_haar_sample_orthogonal():
    for N in (2, 3, 5):
        O = sample_haar_orthogonal(N, RngSpec(4))
        assert np.allclose(O.T @ O, np.eye(N), atol=1e-12)


def test_haar_estimates(params):
    stats = estimate_haar(
        [((1, 1), (1, 1)), ((1, 1, 2, 2), (1, 2, 1, 2))], 3, 30000, RngSpec(9)
    )
    for s in stats:
        assert abs(s.zscore) < 6


def test_trace_product_descriptor_rejects_inverse():
    with pytest.raises(ValueError):
        TraceProduct((np.eye(2),), inverse=True)


# ------------------------------------------------------------------ backend


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("WW_BACKEND", "numpy")
    assert _kernels.backend() == "numpy"
    monkeypatch.setenv("WW_BACKEND", "bogus")
    with pytest.raises(ValueError):
        _kernels.backend()
    monkeypatch.delenv("WW_BACKEND")
    assert _kernels.backend() == ("numba" if _kernels.HAVE_NUMBA else "numpy")


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
def test_numba_and_numpy_kernels_agree(monkeypatch):
    rng = np.random.default_rng(10)
    chol2 = np.linalg.cholesky(np.array([[2.0, 0.3], [0.3, 1.5]])) / np.sqrt(2)
    chis = rng.chisquare(5.0, size=(64, 2))
    normals = rng.standard_normal((64, 1))
    Z = rng.standard_normal((64, 2, 4))
    G = rng.standard_normal((64, 3, 3))
    monkeypatch.setenv("WW_BACKEND", "numba")
    w1 = _kernels.bartlett_gram(chol2, chis, normals)
    v1 = _kernels.vectors_gram(chol2, Z)
    i1, c1 = _kernels.inverse_and_cond(w1)
    q1 = _kernels.haar_orthogonalize(G)
    monkeypatch.setenv("WW_BACKEND", "numpy")
    w2 = _kernels.bartlett_gram(chol2, chis, normals)
    v2 = _kernels.vectors_gram(chol2, Z)
    i2, c2 = _kernels.inverse_and_cond(w1)
    q2 = _kernels.haar_orthogonalize(G)
    assert np.allclose(w1, w2, rtol=1e-12, atol=1e-12)
    assert np.allclose(v1, v2, rtol=1e-12, atol=1e-12)
    assert np.allclose(i1, i2, rtol=1e-9, atol=1e-12)
    assert np.allclose(c1, c2, rtol=1e-9)
    assert np.allclose(q1, q2, rtol=1e-10, atol=1e-12)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
def test_estimates_consistent_across_backends(params, monkeypatch):
    descs = [EntryProduct((1, 2)), TracePower(2)]
    monkeypatch.setenv("WW_BACKEND", "numba")
    a = estimate(descs, params, 5000, RngSpec(13))
    monkeypatch.setenv("WW_BACKEND", "numpy")
    b = estimate(descs, params, 5000, RngSpec(13))
    for x, y in zip(a, b):
        # same RNG stream, different matmul order: equal to float-noise level
        assert x.mean == pytest.approx(y.mean, rel=1e-10)
