import random
from fractions import Fraction
from itertools import permutations, product
from math import factorial

import numpy as np
import pytest
from scipy.integrate import quad

from wishmom.matchgroup import coset_type, enumerate_matchings, hyperoctahedral
from wishmom.symcomb import Perm, partitions_of
from wishmom.weingarten import PoleError
from wishmom.wishart import (
    DomainError,
    MomentSpec,
    WishartParams,
    admissible_beta,
    density,
    gamma_regime,
    haar_moment,
    invariant_moment,
    inverse_moment,
    log_density,
    mixed_trace_moment,
    moment,
    paired_contraction,
    power_trace_coeffs,
    power_trace_moment,
    trace_pattern_perm,
    trace_power_coeffs,
    trace_power_moment,
    trace_product_moment,
)

from oracles import entrywise_power_trace, t_contraction_bruteforce


def rand_pd(rng, d):
    a = rng.normal(size=(d, d))
    return a @ a.T + d * np.eye(d)


@pytest.fixture(scope="module")
def params3():
    rng = np.random.default_rng(17)
    return WishartParams(d=3, beta=Fraction(11, 2), sigma=rand_pd(rng, 3))


@pytest.fixture(scope="module")
def params2():
    rng = np.random.default_rng(23)
    return WishartParams(d=2, beta=6, sigma=rand_pd(rng, 2))


def test_admissible_beta_set():
    assert admissible_beta(Fraction(1, 2), 3)
    assert admissible_beta(Fraction(1), 3)
    assert not admissible_beta(Fraction(3, 4), 3)
    assert admissible_beta(Fraction(7, 5), 3)  # beyond (d-1)/2 anything goes
    assert not admissible_beta(Fraction(1, 4), 2)
    with pytest.raises(DomainError):
        WishartParams(d=4, beta=Fraction(5, 4), sigma=np.eye(4))


def test_params_validation():
    with pytest.raises(DomainError):
        WishartParams(d=2, beta=2, sigma=np.array([[1.0, 0.5], [0.2, 1.0]]))
    with pytest.raises(DomainError):
        WishartParams(d=2, beta=2, sigma=np.array([[1.0, 2.0], [2.0, 1.0]]))
    p = WishartParams(d=2, beta=Fraction(9, 2), sigma=np.diag([2.0, 3.0]))
    assert p.gamma == 3
    assert np.allclose(p.sigma_inv, np.diag([0.5, 1 / 3]))


def test_gamma_regime():
    assert gamma_regime(Fraction(5), 2) == "standard"
    assert gamma_regime(Fraction(1, 2), 2) == "analytic-continuation"
    with pytest.raises(DomainError):
        gamma_regime(Fraction(-1), 1)


def test_moment_degree1(params3):
    b = float(params3.beta)
    for i, j in product(range(1, 4), repeat=2):
        assert moment(params3, MomentSpec((i, j))) == pytest.approx(b * params3.sigma[i - 1, j - 1], rel=1e-13)


def test_moment_degree2_display(params3):
    b = float(params3.beta)
    s = params3.sigma
    for k in ((1, 2, 3, 1), (2, 2, 3, 3), (1, 3, 2, 1), (1, 1, 1, 1)):
        want = (
            b * b * s[k[0] - 1, k[1] - 1] * s[k[2] - 1, k[3] - 1]
            + b / 2 * s[k[0] - 1, k[2] - 1] * s[k[1] - 1, k[3] - 1]
            + b / 2 * s[k[0] - 1, k[3] - 1] * s[k[1] - 1, k[2] - 1]
        )
        assert moment(params3, MomentSpec(k)) == pytest.approx(want, rel=1e-12)


def test_moment_w_squared_identity_scale():
    p = WishartParams(d=2, beta=2, sigma=np.eye(2))
    m2 = np.array(
        [[sum(moment(p, MomentSpec((i, k, k, j))) for k in (1, 2)) for j in (1, 2)] for i in (1, 2)]
    )
    assert np.allclose(m2, 7 * np.eye(2), atol=1e-12)


def test_moment_matches_group_averaged_form(params3):
    # summing (2 beta)^kappa over all of S_{2n} with the 1/(2^n n!) factor
    # reproduces the matching sum
    two_beta = 2 * float(params3.beta)
    s = params3.sigma
    for k in ((1, 2), (1, 2, 3, 1)):
        n = len(k) // 2
        total = 0.0
        for images in permutations(range(1, 2 * n + 1)):
            g = Perm(images)
            term = two_beta ** len(coset_type(g))
            for t in range(n):
                term *= s[k[g(2 * t + 1) - 1] - 1, k[g(2 * t + 2) - 1] - 1]
            total += term
        want = total / (2**n * factorial(n)) / 2**n
        assert moment(params3, MomentSpec(k)) == pytest.approx(want, rel=1e-12)


def test_moment_index_out_of_range(params3):
    with pytest.raises(ValueError):
        moment(params3, MomentSpec((1, 4)))


def test_inverse_moment_degree1(params2):
    g = float(params2.gamma)
    si = params2.sigma_inv
    for i, j in product((1, 2), repeat=2):
        got = inverse_moment(params2, MomentSpec((i, j), inverse=True))
        assert got == pytest.approx(si[i - 1, j - 1] / g, rel=1e-13)


def test_inverse_moment_degree2_display():
    p = WishartParams(d=2, beta=4, sigma=np.diag([1.0, 2.0]))
    g = float(p.gamma)
    si = p.sigma_inv
    den = g * (g - 1) * (2 * g + 1)
    for k in product((1, 2), repeat=4):
        got = inverse_moment(p, MomentSpec(k, inverse=True))
        want = (
            (2 * g - 1) * si[k[0] - 1, k[1] - 1] * si[k[2] - 1, k[3] - 1]
            + si[k[0] - 1, k[2] - 1] * si[k[1] - 1, k[3] - 1]
            + si[k[0] - 1, k[3] - 1] * si[k[1] - 1, k[2] - 1]
        ) / den
        assert got == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_inverse_w_squared_display():
    p = WishartParams(d=2, beta=4, sigma=np.diag([1.0, 2.0]))
    g = float(p.gamma)
    si = p.sigma_inv
    got = np.array(
        [
            [sum(inverse_moment(p, MomentSpec((i, k, k, j), inverse=True)) for k in (1, 2)) for j in (1, 2)]
            for i in (1, 2)
        ]
    )
    want = (2 * g * si @ si + np.trace(si) * si) / (g * (g - 1) * (2 * g + 1))
    assert np.allclose(got, want, rtol=1e-12)


def test_inverse_moment_requires_positive_gamma():
    p = WishartParams(d=3, beta=Fraction(3, 2), sigma=np.eye(3))  # gamma = -1/2
    with pytest.raises(DomainError):
        inverse_moment(p, MomentSpec((1, 1), inverse=True))


def test_inverse_moment_pole():
    p = WishartParams(d=3, beta=3, sigma=np.eye(3))  # gamma = 1: degree-2 pole
    with pytest.raises(PoleError):
        inverse_moment(p, MomentSpec((1, 1, 2, 2), inverse=True))


def test_moment_reconstruction_roundtrip(params3):
    # plugging inverse moments back into the signed matching sum returns the
    # product of inverse-scale entries
    si = params3.sigma_inv
    g = params3.gamma
    rnd = random.Random(2)
    for n in (1, 2, 3):
        for _ in range(4):
            k = tuple(rnd.randint(1, 3) for _ in range(2 * n))
            total = 0.0
            for m in enumerate_matchings(n):
                reordered = tuple(k[s - 1] for s in m.seq)
                coef = float((-2 * g) ** len(coset_type(m.as_perm())))
                total += coef * inverse_moment(params3, MomentSpec(reordered, inverse=True))
            total *= (-1) ** n / 2**n
            want = 1.0
            for t in range(n):
                want *= si[k[2 * t] - 1, k[2 * t + 1] - 1]
            assert total == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_trace_product_degree1(params3):
    m = rand_pd(np.random.default_rng(1), 3)
    want = float(params3.beta) * np.trace(params3.sigma @ m)
    assert trace_product_moment(params3, [m]) == pytest.approx(want, rel=1e-12)


def test_trace_product_matches_entrywise_moments(params3):
    # with s_j the symmetrized matrix units the trace product is an entrywise moment
    rnd = random.Random(5)
    d = 3
    for n in (1, 2, 3):
        for _ in range(3):
            k = tuple(rnd.randint(1, d) for _ in range(2 * n))
            mats = []
            for j in range(n):
                a, b = k[2 * j] - 1, k[2 * j + 1] - 1
                e = np.zeros((d, d))
                e[a, b] += 0.5
                e[b, a] += 0.5
                mats.append(e)
            got = trace_product_moment(params3, mats)
            want = moment(params3, MomentSpec(k))
            assert got == pytest.approx(want, rel=1e-11, abs=1e-13)


def test_trace_product_identity_matrices_give_trace_power(params3):
    for n in (1, 2, 3):
        got = trace_product_moment(params3, [np.eye(3)] * n)
        want = trace_power_moment(params3, n)
        assert got == pytest.approx(want, rel=1e-11)


def test_trace_product_rejects_asymmetric(params3):
    bad = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        trace_product_moment(params3, [bad])


def test_paired_contraction_against_bruteforce():
    rng = np.random.default_rng(3)
    d = 2
    x = rand_pd(rng, d)
    for n in (1, 2, 3):
        ms = [rng.normal(size=(d, d)) for _ in range(n)]
        for images in (list(range(1, 2 * n + 1)), list(range(2 * n, 0, -1))):
            g = Perm(images)
            got = paired_contraction(g, x, ms)
            want = t_contraction_bruteforce(g, x, ms)
            assert got == pytest.approx(want, rel=1e-10, abs=1e-10)
    rnd = random.Random(7)
    for n in (2, 3):
        ms = [rng.normal(size=(d, d)) for _ in range(n)]
        for _ in range(4):
            images = list(range(1, 2 * n + 1))
            rnd.shuffle(images)
            g = Perm(images)
            assert paired_contraction(g, x, ms) == pytest.approx(
                t_contraction_bruteforce(g, x, ms), rel=1e-10, abs=1e-10
            )


def test_trace_pattern_matches_trace_words():
    # T at the pattern of (pi, signs) equals the product of trace words with
    # the flagged factors transposed
    rng = np.random.default_rng(4)
    d = 3
    x = rand_pd(rng, d)
    rnd = random.Random(9)
    for n in (1, 2, 3):
        ms = [rng.normal(size=(d, d)) for _ in range(n)]
        for _ in range(5):
            images = list(range(1, n + 1))
            rnd.shuffle(images)
            pi = Perm(images)
            signs = [rnd.random() < 0.5 for _ in range(n)]
            g = trace_pattern_perm(pi, signs)
            direct = 1.0
            for cyc in pi.cycles():
                word = np.eye(d)
                for c in cyc:
                    word = word @ x @ (ms[c - 1].T if signs[c - 1] else ms[c - 1])
                direct *= np.trace(word)
            assert paired_contraction(g, x, ms) == pytest.approx(direct, rel=1e-10, abs=1e-10)


def test_mixed_trace_forward_display(params3):
    rng = np.random.default_rng(6)
    m1, m2 = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    s = params3.sigma
    b = float(params3.beta)
    g = trace_pattern_perm(Perm((2, 1)), [False, False])
    got = mixed_trace_moment(params3, g, [m1, m2])
    want = (
        b * b * np.trace(s @ m1 @ s @ m2)
        + b / 2 * np.trace(s @ m1.T @ s @ m2)
        + b / 2 * np.trace(s @ m1) * np.trace(s @ m2)
    )
    assert got == pytest.approx(want, rel=1e-11)


def test_mixed_trace_inverse_display(params2):
    rng = np.random.default_rng(7)
    m1, m2 = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    si = params2.sigma_inv
    g = float(params2.gamma)
    den = g * (g - 1) * (2 * g + 1)
    pattern = trace_pattern_perm(Perm((1, 2)), [False, False])
    got = mixed_trace_moment(params2, pattern, [m1, m2], inverse=True)
    want = (
        (2 * g - 1) * np.trace(si @ m1) * np.trace(si @ m2)
        + np.trace(si @ m1 @ si @ m2)
        + np.trace(si @ m1.T @ si @ m2)
    ) / den
    assert got == pytest.approx(want, rel=1e-11)
    pair_inv = trace_pattern_perm(Perm((2, 1)), [False, False])
    got = mixed_trace_moment(params2, pair_inv, [m1, m2], inverse=True)
    want = (
        (2 * g - 1) * np.trace(si @ m1 @ si @ m2)
        + np.trace(si @ m1.T @ si @ m2)
        + np.trace(si @ m1) * np.trace(si @ m2)
    ) / den
    assert got == pytest.approx(want, rel=1e-11)


def test_mixed_trace_right_invariance(params3):
    rng = np.random.default_rng(8)
    ms = [rng.normal(size=(3, 3)) for _ in range(2)]
    base = trace_pattern_perm(Perm((2, 1)), [True, False])
    want = mixed_trace_moment(params3, base, ms)
    for zeta in hyperoctahedral(2):
        assert mixed_trace_moment(params3, base * zeta, ms) == pytest.approx(want, rel=1e-11)


def test_invariant_moment_degree1(params3, params2):
    got = invariant_moment(params3, (1,))
    assert got == pytest.approx(float(params3.beta) * np.trace(params3.sigma), rel=1e-12)
    got = invariant_moment(params2, (1,), inverse=True)
    want = np.trace(params2.sigma_inv) / float(params2.gamma)
    assert got == pytest.approx(want, rel=1e-12)


def test_invariant_moment_degree2_vs_entrywise(params3):
    # assemble E[Z_lam(W)] from entrywise moments through the power-sum expansion
    from wishmom.symcomb import centralizer_order
    from wishmom.weingarten import zonal_spherical

    n = 2
    for lam in partitions_of(n):
        assembled = 0.0
        for rho in partitions_of(n):
            coef = Fraction(2**n * factorial(n), 2 ** len(rho) * centralizer_order(rho)) * zonal_spherical(lam, rho)
            assembled += float(coef) * entrywise_power_trace(params3, rho)
        assert invariant_moment(params3, lam) == pytest.approx(assembled, rel=1e-11)


def test_power_trace_degree3_closed_forms(params3):
    b = params3.beta
    s = params3.sigma
    ps = {r: float(np.trace(np.linalg.matrix_power(s, r))) for r in (1, 2, 3)}
    want = {
        (3,): float(b * (2 * b**2 + 3 * b + 2) / 2) * ps[3]
        + float(3 * b * (2 * b + 1) / 4) * ps[2] * ps[1]
        + float(b / 4) * ps[1] ** 3,
        (2, 1): float(b * (2 * b + 1)) * ps[3]
        + float(b * (2 * b**2 + b + 2) / 2) * ps[2] * ps[1]
        + float(b**2 / 2) * ps[1] ** 3,
        (1, 1, 1): float(2 * b) * ps[3] + float(3 * b**2) * ps[2] * ps[1] + float(b**3) * ps[1] ** 3,
    }
    for mu, target in want.items():
        assert power_trace_moment(params3, mu) == pytest.approx(target, rel=1e-12)


def test_power_trace_degree3_inverse_closed_forms(params2):
    g = params2.gamma
    si = params2.sigma_inv
    ps = {r: float(np.trace(np.linalg.matrix_power(si, r))) for r in (1, 2, 3)}
    u3 = float(g * (g - 1) * (g - 2) * (g + 1) * (2 * g + 1))
    gf = float(g)
    want = {
        (3,): (2 * gf**2 * ps[3] + 3 * gf * ps[2] * ps[1] + ps[1] ** 3) / u3,
        (2, 1): (4 * gf * ps[3] + 2 * (gf**2 - gf + 1) * ps[2] * ps[1] + (gf - 1) * ps[1] ** 3) / u3,
        (1, 1, 1): (8 * ps[3] + 6 * (gf - 1) * ps[2] * ps[1] + (2 * gf**2 - 3 * gf - 1) * ps[1] ** 3) / u3,
    }
    for mu, target in want.items():
        assert power_trace_moment(params2, mu, inverse=True) == pytest.approx(target, rel=1e-11)


def test_power_trace_matches_entrywise_assembly(params3):
    for mu in [(1,), (2,), (1, 1), (3,), (2, 1)]:
        got = power_trace_moment(params3, mu)
        want = entrywise_power_trace(params3, mu)
        assert got == pytest.approx(want, rel=1e-10)


def test_power_trace_inverse_matches_entrywise_assembly(params2):
    for mu in [(1,), (2,), (1, 1), (2, 1)]:
        got = power_trace_moment(params2, mu, inverse=True)
        want = entrywise_power_trace(params2, mu, inverse=True)
        assert got == pytest.approx(want, rel=1e-10)


def test_trace_power_coefficients_degree4():
    b = Fraction(7, 3)
    c = trace_power_coeffs(4, b)
    assert c == {
        (4,): 6 * b,
        (3, 1): 8 * b**2,
        (2, 2): 3 * b**2,
        (2, 1, 1): 6 * b**3,
        (1, 1, 1, 1): b**4,
    }


def test_trace_power_inverse_display_degree4():
    g = Fraction(19, 4)
    u4 = g * (g - 1) * (g - 2) * (g - 3) * (2 * g - 1) * (g + 1) * (2 * g + 1) * (2 * g + 3)
    c = trace_power_coeffs(4, g, inverse=True)
    assert c[(4,)] * u4 == 48 * (5 * g - 3)
    assert c[(3, 1)] * u4 == 128 * g * (g - 2)
    assert c[(2, 2)] * u4 == 12 * (2 * g**2 - 5 * g + 9)
    assert c[(2, 1, 1)] * u4 == 12 * (4 * g**3 - 12 * g**2 + 3 * g + 3)
    assert c[(1, 1, 1, 1)] * u4 == (g + 1) * (2 * g - 3) * (4 * g**2 - 12 * g + 1)


def test_trace_power_degree1(params3):
    assert trace_power_moment(params3, 1) == pytest.approx(
        float(params3.beta) * np.trace(params3.sigma), rel=1e-13
    )


def test_power_trace_coeffs_degree3_matrix():
    b = Fraction(5, 2)
    got = power_trace_coeffs((1, 1, 1), b)
    assert got == {(3,): 2 * b, (2, 1): 3 * b**2, (1, 1, 1): b**3}


def test_density_is_exponential_at_d1():
    p = WishartParams(d=1, beta=1, sigma=np.array([[2.0]]))
    for w in (0.3, 1.0, 4.2):
        assert density(p, np.array([[w]])) == pytest.approx(0.5 * np.exp(-w / 2), rel=1e-13)
    total, _ = quad(lambda w: density(p, np.array([[w]])), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_density_domain_checks():
    p = WishartParams(d=2, beta=3, sigma=np.eye(2))
    rng = np.random.default_rng(0)
    w = rand_pd(rng, 2)
    assert np.isfinite(log_density(p, w))
    with pytest.raises(DomainError):
        log_density(p, -w)
    with pytest.raises(DomainError):
        # admissible beta, but below the density threshold
        density(WishartParams(d=2, beta=Fraction(1, 2), sigma=np.eye(2)), w)


def test_haar_moment_degree1():
    for N in (1, 2, 5):
        assert haar_moment((1, 1), (1, 1), N) == Fraction(1, N)


def test_haar_moment_degree2_display_exhaustive():
    N = 3
    den = N * (N + 2) * (N - 1)
    for j in product(range(1, N + 1), repeat=4):
        want = Fraction(
            (N + 1) * (j[0] == j[1]) * (j[2] == j[3])
            - (j[0] == j[2]) * (j[1] == j[3])
            - (j[0] == j[3]) * (j[1] == j[2]),
            den,
        )
        assert haar_moment((1, 1, 2, 2), j, N) == want


def test_haar_moment_row_orthonormality():
    for N in (2, 3, 4):
        assert sum(haar_moment((1, 1), (j, j), N) for j in range(1, N + 1)) == 1


def test_haar_moment_odd_and_unmatchable():
    assert haar_moment((1,), (1,), 3) == 0
    assert haar_moment((1, 1, 1), (1, 1, 1), 3) == 0
    # any index of odd multiplicity on either side kills the moment
    for idx in product((1, 2), repeat=4):
        counts = {v: idx.count(v) for v in set(idx)}
        if any(c % 2 for c in counts.values()):
            assert haar_moment(idx, (1, 1, 1, 1), 2) == 0
            assert haar_moment((1, 1, 1, 1), idx, 2) == 0


def test_haar_moment_below_dimension_uses_truncation():
    # at N=1 the matrix is +-1, so all even power moments are exactly 1
    assert haar_moment((1, 1), (1, 1), 1) == 1
    assert haar_moment((1, 1, 1, 1), (1, 1, 1, 1), 1) == 1


def test_haar_moment_errors():
    with pytest.raises(ValueError):
        haar_moment((1, 1), (1,), 3)
    with pytest.raises(ValueError):
        haar_moment((1, 4), (1, 1), 3)
