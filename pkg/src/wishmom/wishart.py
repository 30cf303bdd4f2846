"""Closed-form moments of real Wishart matrices and their inverses.

Convention: W has moment generating function det(I - theta*sigma)**(-beta),
so E[W] = beta*sigma and, for integer 2*beta = p, W is a sum of p outer
products of N(0, sigma/2) vectors.  Textbook W_d(p, Sigma) corresponds to
p = 2*beta and Sigma = sigma/2.  The shifted shape gamma = beta - (d+1)/2
drives every inverse moment.

Coefficients (powers of 2*beta, Weingarten values, partition weights) are
kept exact as rationals; only the contractions against the user-supplied
sigma happen in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cache, cached_property
from itertools import permutations
from math import factorial
from typing import Sequence

import numpy as np
from scipy.special import multigammaln

from .matchgroup import (
    coset_type,
    iter_matchings,
    iter_matchings_with_type,
    paired_perm,
)
from .symcomb import (
    Partition,
    Perm,
    centralizer_order,
    check_partition,
    content_product,
    partitions_of,
    hook_dim_doubled,
)
from .weingarten import (
    PoleError,
    inv_wishart_weingarten,
    weingarten_truncated,
    zonal_eval,
    zonal_spherical,
)

MAX_ENTRY_DEGREE = 8
MAX_TRACE_PRODUCT_DEGREE = 7
MAX_MIXED_DEGREE = 5
MAX_HAAR_DEGREE = 4
SYMMETRY_TOL = 1e-12


class DomainError(ValueError):
    """Parameter outside the mathematical domain (non-PD, bad beta/gamma, ...)."""


def to_fraction(x) -> Fraction:
    """Exact rational from int/str/Fraction/float (floats read as their binary value)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def admissible_beta(beta: Fraction, d: int) -> bool:
    """True when beta lies in {1/2, 1, ..., (d-1)/2} or beyond (d-1)/2."""
    if beta > Fraction(d - 1, 2):
        return True
    twice = 2 * beta
    return twice.denominator == 1 and 1 <= twice.numerator <= d - 1


def gamma_regime(gamma: Fraction, n: int) -> str:
    """'standard' when gamma > n-1; 'analytic-continuation' for smaller positive
    gamma, where the formulas extend but only pole-freeness is checked."""
    if gamma > n - 1:
        return "standard"
    if gamma > 0:
        return "analytic-continuation"
    raise DomainError(f"gamma={gamma} must be positive for inverse moments")


@dataclass
class WishartParams:
    """Dimension, shape and scale of one Wishart law; sigma must be symmetric PD."""

    d: int
    beta: Fraction
    sigma: np.ndarray

    def __post_init__(self):
        self.beta = to_fraction(self.beta)
        sig = np.asarray(self.sigma, dtype=float)
        if sig.ndim != 2 or sig.shape[0] != sig.shape[1]:
            raise ValueError(f"sigma must be square, got shape {sig.shape}")
        if self.d != sig.shape[0]:
            raise ValueError(f"d={self.d} does not match sigma shape {sig.shape}")
        scale = max(np.abs(sig).max(), 1.0)
        if np.abs(sig - sig.T).max() > SYMMETRY_TOL * scale:
            raise DomainError("sigma is not symmetric")
        self.sigma = (sig + sig.T) / 2
        try:
            np.linalg.cholesky(self.sigma)
        except np.linalg.LinAlgError as exc:
            raise DomainError("sigma is not positive definite") from exc
        if not admissible_beta(self.beta, self.d):
            raise DomainError(f"beta={self.beta} not admissible for d={self.d}")

    @property
    def gamma(self) -> Fraction:
        return self.beta - Fraction(self.d + 1, 2)

    @cached_property
    def chol(self) -> np.ndarray:
        return np.linalg.cholesky(self.sigma)

    @cached_property
    def sigma_inv(self) -> np.ndarray:
        # inverse through the Cholesky factor; also the PD certificate
        L = self.chol
        inv_l = np.linalg.solve(L, np.eye(self.d))
        return inv_l.T @ inv_l


@dataclass(frozen=True)
class MomentSpec:
    """Index list k_1..k_2n (1-based) of an entrywise product moment."""

    indices: tuple[int, ...]
    inverse: bool = False

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if len(self.indices) % 2:
            raise ValueError("index list must have even length")

    @property
    def degree(self) -> int:
        return len(self.indices) // 2


def _check_indices(indices: Sequence[int], d: int) -> None:
    for k in indices:
        if not 1 <= k <= d:
            raise ValueError(f"index {k} outside 1..{d}")


def moment(params: WishartParams, spec: MomentSpec) -> float:
    """E[W_{k1 k2} ... W_{k_{2n-1} k_{2n}}]: the matching sum with weights
    (2 beta)^kappa / 2^n over the index-restricted scale matrix."""
    if spec.inverse:
        return inverse_moment(params, spec)
    n = spec.degree
    if n == 0:
        return 1.0
    if n > MAX_ENTRY_DEGREE:
        raise ValueError(f"entrywise moments support degree <= {MAX_ENTRY_DEGREE}")
    _check_indices(spec.indices, params.d)
    sig = params.sigma
    k = spec.indices
    two_beta = 2 * params.beta
    total = 0.0
    for pairs, ctype in iter_matchings_with_type(n):
        term = float(two_beta ** len(ctype))
        for p, q in pairs:
            term *= sig[k[p - 1] - 1, k[q - 1] - 1]
        total += term
    return total / 2**n


@cache
def _inv_wg_table(n: int, gamma: Fraction) -> dict[Partition, Fraction]:
    return {rho: inv_wishart_weingarten(rho, gamma) for rho in partitions_of(n)}


def inverse_moment(params: WishartParams, spec: MomentSpec) -> float:
    """E[W^{k1 k2} ... W^{k_{2n-1} k_{2n}}]: matching sum with inverse-Wishart
    Weingarten coefficients over the inverse scale matrix.

    Valid for gamma > n-1 and, by analytic continuation, for any positive
    gamma avoiding the poles (those raise PoleError).
    """
    n = spec.degree
    if n == 0:
        return 1.0
    _check_indices(spec.indices, params.d)
    gamma = params.gamma
    gamma_regime(gamma, n)  # raises when gamma <= 0
    table = _inv_wg_table(n, gamma)
    inv = params.sigma_inv
    k = spec.indices
    total = 0.0
    for pairs, ctype in iter_matchings_with_type(n):
        term = float(table[ctype])
        for p, q in pairs:
            term *= inv[k[p - 1] - 1, k[q - 1] - 1]
        total += term
    return total


def _require_symmetric(mats: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = []
    for s in mats:
        s = np.asarray(s, dtype=float)
        if not np.allclose(s, s.T, rtol=1e-12, atol=1e-12):
            raise ValueError("trace-product factors must be symmetric matrices")
        out.append(s)
    return out


def _perm_objects(n: int) -> list[Perm]:
    return [Perm(images) for images in permutations(range(1, n + 1))]


def trace_product_moment(params: WishartParams, s_list: Sequence[np.ndarray]) -> float:
    """E[prod_i tr(W s_i)] = sum over permutations of beta**nu * products of
    traces tr(sigma s_{c1} sigma s_{c2} ...) along cycles."""
    n = len(s_list)
    if not 1 <= n <= MAX_TRACE_PRODUCT_DEGREE:
        raise ValueError(f"trace products support 1 <= n <= {MAX_TRACE_PRODUCT_DEGREE}")
    mats = _require_symmetric(s_list)
    sig = params.sigma
    beta = params.beta
    total = 0.0
    for pi in _perm_objects(n):
        cycles = pi.cycles()
        term = float(beta ** len(cycles))
        for c in cycles:
            prod = np.eye(params.d)
            for ci in c:
                prod = prod @ sig @ mats[ci - 1]
            term *= np.trace(prod)
        total += term
    return total


def trace_pattern_perm(pi: Perm, transposed: Sequence[bool]) -> Perm:
    """The S_{2n} pattern whose paired contraction reproduces the trace word
    R_pi with the flagged factors transposed: pair swaps at the flagged slots
    composed with the paired lift of pi."""
    n = pi.size
    if len(transposed) != n:
        raise ValueError("one transpose flag per matrix")
    swap = {}
    for i, t in enumerate(transposed, start=1):
        if t:
            swap[2 * i - 1] = 2 * i
            swap[2 * i] = 2 * i - 1
    base = paired_perm(pi)
    return Perm(swap.get(v, v) for v in base.images)


def paired_contraction(g: Perm, x: np.ndarray, ms: Sequence[np.ndarray]) -> float:
    """T_g(x; m_1..m_n): contract m_k row/col indices at slots (2k-1, 2k)
    against symmetric-x links between slots g(2i-1) and g(2i).

    The pairing makes the contraction a product of trace words; each word is
    assembled by walking the alternating matrix/x edges.
    """
    n = len(ms)
    if g.size != 2 * n:
        raise ValueError("pattern size must be twice the number of matrices")
    xpartner = {}
    for i in range(1, n + 1):
        a, b = g(2 * i - 1), g(2 * i)
        xpartner[a] = b
        xpartner[b] = a
    done = [False] * (n + 1)
    total = 1.0
    for k0 in range(1, n + 1):
        if done[k0]:
            continue
        done[k0] = True
        word = ms[k0 - 1]
        start, end = 2 * k0 - 1, 2 * k0
        while True:
            nxt = xpartner[end]
            word = word @ x
            if nxt == start:
                total *= np.trace(word)
                break
            if nxt % 2:  # row slot: traverse the matrix forward
                l = (nxt + 1) // 2
                word = word @ ms[l - 1]
                end = 2 * l
            else:  # column slot: traverse backwards, i.e. transposed
                l = nxt // 2
                word = word @ ms[l - 1].T
                end = 2 * l - 1
            done[l] = True
    return total


def mixed_trace_moment(
    params: WishartParams, g: Perm, ms: Sequence[np.ndarray], inverse: bool = False
) -> float:
    """E[T_g(W^{+-1}; m_1..m_n)] as a matching sum of paired contractions of
    sigma^{+-1} weighted by (2 beta)^kappa / 2^n, or by the inverse-Wishart
    Weingarten value of g^-1 n."""
    n = len(ms)
    if not 1 <= n <= MAX_MIXED_DEGREE:
        raise ValueError(f"mixed trace moments support 1 <= n <= {MAX_MIXED_DEGREE}")
    if g.size != 2 * n:
        raise ValueError("pattern size must be twice the number of matrices")
    mats = [np.asarray(m, dtype=float) for m in ms]
    g_inv = g.inverse()
    if inverse:
        gamma = params.gamma
        gamma_regime(gamma, n)
        table = _inv_wg_table(n, gamma)
        x = params.sigma_inv
    else:
        two_beta = 2 * params.beta
        x = params.sigma
    total = 0.0
    for m in iter_matchings(n):
        t = coset_type(g_inv * m.as_perm())
        coef = float(table[t]) if inverse else float(two_beta ** len(t)) / 2**n
        total += coef * paired_contraction(m.as_perm(), x, mats)
    return total


def _power_sums(x: np.ndarray, n: int) -> dict[int, float]:
    out = {}
    acc = np.eye(x.shape[0])
    for r in range(1, n + 1):
        acc = acc @ x
        out[r] = float(np.trace(acc))
    return out


def _p_value(rho: Partition, psums: dict[int, float]) -> float:
    val = 1.0
    for part in rho:
        val *= psums[part]
    return val


def invariant_moment(params: WishartParams, lam: Partition, inverse: bool = False) -> float:
    """E[Z_lam(W)] = 2^-n C_lam(2 beta) Z_lam(sigma); inverse side uses
    (-1)^n 2^n / C_lam(-2 gamma) and sigma^-1.  Power sums only, no
    eigendecomposition."""
    lam = check_partition(lam)
    n = sum(lam)
    if inverse:
        gamma = params.gamma
        gamma_regime(gamma, n)
        cval = content_product(lam, -2 * gamma)
        if cval == 0:
            raise PoleError(-2 * gamma, (lam,))
        coef = Fraction((-1) ** n * 2**n) / cval
        x = params.sigma_inv
    else:
        coef = Fraction(content_product(lam, 2 * params.beta), 2**n)
        x = params.sigma
    zval = zonal_eval(lam, _power_sums(x, n))
    return float(coef) * zval


def power_trace_coeffs(mu: Partition, shape: Fraction, inverse: bool = False) -> dict[Partition, Fraction]:
    """Exact coefficients c_rho with E[p_mu(W^{+-1})] = sum c_rho p_rho(sigma^{+-1}).

    ``shape`` is beta on the forward side and gamma on the inverse side.
    """
    mu = check_partition(mu)
    n = sum(mu)
    shape = to_fraction(shape)
    if inverse:
        bad = tuple(l for l in partitions_of(n) if content_product(l, -2 * shape) == 0)
        if bad:
            raise PoleError(-2 * shape, bad)
    pref = Fraction((2**n * factorial(n)) ** 2, factorial(2 * n))
    coeffs = {}
    for rho in partitions_of(n):
        inner = Fraction(0)
        for lam in partitions_of(n):
            w = hook_dim_doubled(lam) * zonal_spherical(lam, mu) * zonal_spherical(lam, rho)
            if inverse:
                inner += Fraction((-1) ** n * 2**n) / content_product(lam, -2 * shape) * w
            else:
                inner += Fraction(content_product(lam, 2 * shape), 2**n) * w
        coeffs[rho] = pref * Fraction(1, 2 ** len(rho) * centralizer_order(rho)) * inner
    return coeffs


def power_trace_moment(params: WishartParams, mu: Partition, inverse: bool = False) -> float:
    """E[prod_i tr((W^{+-1})^{mu_i})] with exact coefficients on p_rho(sigma^{+-1})."""
    mu = check_partition(mu)
    n = sum(mu)
    if n > 4:
        raise ValueError("power-trace moments support |mu| <= 4")
    if inverse:
        gamma_regime(params.gamma, n)
        coeffs = power_trace_coeffs(mu, params.gamma, inverse=True)
        psums = _power_sums(params.sigma_inv, n)
    else:
        coeffs = power_trace_coeffs(mu, params.beta, inverse=False)
        psums = _power_sums(params.sigma, n)
    return sum(float(c) * _p_value(rho, psums) for rho, c in coeffs.items())


def trace_power_coeffs(n: int, shape: Fraction, inverse: bool = False) -> dict[Partition, Fraction]:
    """Exact coefficients with E[(tr W^{+-1})^n] = sum c_rho p_rho(sigma^{+-1})."""
    shape = to_fraction(shape)
    coeffs = {}
    for rho in partitions_of(n):
        base = Fraction(factorial(n), centralizer_order(rho))
        if inverse:
            coeffs[rho] = 2 ** (n - len(rho)) * base * inv_wishart_weingarten(rho, shape)
        else:
            coeffs[rho] = base * shape ** len(rho)
    return coeffs


def trace_power_moment(params: WishartParams, n: int, inverse: bool = False) -> float:
    """E[(tr W)^n] or E[(tr W^-1)^n] with exact partition-indexed coefficients."""
    if not 1 <= n <= 4:
        raise ValueError("trace-power moments support 1 <= n <= 4")
    if inverse:
        gamma_regime(params.gamma, n)
        coeffs = trace_power_coeffs(n, params.gamma, inverse=True)
        psums = _power_sums(params.sigma_inv, n)
    else:
        coeffs = trace_power_coeffs(n, params.beta, inverse=False)
        psums = _power_sums(params.sigma, n)
    return sum(float(c) * _p_value(rho, psums) for rho, c in coeffs.items())


def log_density(params: WishartParams, w: np.ndarray) -> float:
    """Log density at a positive definite w; needs beta > (d-1)/2."""
    d = params.d
    beta = float(params.beta)
    if params.beta <= Fraction(d - 1, 2):
        raise DomainError(f"density requires beta > (d-1)/2, got beta={params.beta}")
    w = np.asarray(w, dtype=float)
    try:
        np.linalg.cholesky(w)
    except np.linalg.LinAlgError as exc:
        raise DomainError("w is not positive definite") from exc
    _, logdet_sigma = np.linalg.slogdet(params.sigma)
    _, logdet_w = np.linalg.slogdet(w)
    return (
        -multigammaln(beta, d)
        - beta * logdet_sigma
        + (beta - (d + 1) / 2) * logdet_w
        - float(np.sum(params.sigma_inv * w))
    )


def density(params: WishartParams, w: np.ndarray) -> float:
    return float(np.exp(log_density(params, w)))


@cache
def _matching_product_types(n: int) -> tuple[tuple[Partition, ...], ...]:
    # coset type of m^-1 * n for every ordered pair of matchings
    perms = [m.as_perm() for m in iter_matchings(n)]
    invs = [p.inverse() for p in perms]
    return tuple(
        tuple(coset_type(inv_p * q) for q in perms)
        for inv_p in invs
    )


@cache
def _haar_wg_values(n: int, N: int) -> dict[Partition, Fraction]:
    return {rho: weingarten_truncated(rho, N) for rho in partitions_of(n)}


def haar_moment(i_idx: Sequence[int], j_idx: Sequence[int], N: int) -> Fraction:
    """Exact E[O_{i1 j1} ... O_{ik jk}] for a Haar orthogonal N x N matrix.

    Odd k gives exactly zero; otherwise a double matching sum with truncated
    Weingarten weights, valid for every N >= 1.
    """
    i_idx = tuple(int(v) for v in i_idx)
    j_idx = tuple(int(v) for v in j_idx)
    if len(i_idx) != len(j_idx):
        raise ValueError("row and column index lists must have equal length")
    if N < 1:
        raise ValueError("N must be a positive integer")
    for v in i_idx + j_idx:
        if not 1 <= v <= N:
            raise ValueError(f"index {v} outside 1..{N}")
    k = len(i_idx)
    if k % 2:
        return Fraction(0)
    n = k // 2
    if n == 0:
        return Fraction(1)
    if n > MAX_HAAR_DEGREE:
        raise ValueError(f"Haar moments support degree <= {MAX_HAAR_DEGREE}")
    matchings = list(iter_matchings(n))
    ok_i = [all(i_idx[p - 1] == i_idx[q - 1] for p, q in m.pairs) for m in matchings]
    ok_j = [all(j_idx[p - 1] == j_idx[q - 1] for p, q in m.pairs) for m in matchings]
    if not any(ok_i) or not any(ok_j):
        return Fraction(0)
    types = _matching_product_types(n)
    wg = _haar_wg_values(n, N)
    total = Fraction(0)
    for a, good_a in enumerate(ok_i):
        if not good_a:
            continue
        row = types[a]
        for b, good_b in enumerate(ok_j):
            if good_b:
                total += wg[row[b]]
    return total
