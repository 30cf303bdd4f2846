"""Wishart and Haar-orthogonal samplers plus a moment-validation estimator.

Sampling is reproducible: an RngSpec (seed, stream) pins the whole draw
sequence, worker streams are merged by a deterministic pairwise reduction,
and the thread count never changes results.  Every estimated moment is
paired with its exact target from the closed-form modules and reported as a
z-score.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Sequence

import numpy as np

from . import _kernels, wishart
from .symcomb import Partition, check_partition
from .wishart import DomainError, MomentSpec, WishartParams

COND_LIMIT = 1e12
DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class RngSpec:
    """Seed plus worker-stream index; fully determines a sample sequence."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class SampleStats:
    """Streaming summary of one estimated moment against its exact target."""

    count: int
    mean: float
    stderr: float
    target: float
    zscore: float
    rejected: int = 0
    label: str = ""


# ------------------------------------------------------------- descriptors


@dataclass(frozen=True)
class EntryProduct:
    """Product of matrix entries W^{+-1}[k1,k2] * W^{+-1}[k3,k4] * ..."""

    indices: tuple[int, ...]
    inverse: bool = False

    @property
    def order(self) -> int:
        return len(self.indices) // 2

    @property
    def label(self) -> str:
        w = "Winv" if self.inverse else "W"
        pairs = [f"{w}[{self.indices[i]},{self.indices[i+1]}]" for i in range(0, len(self.indices), 2)]
        return "*".join(pairs)

    def target(self, params: WishartParams) -> float:
        spec = MomentSpec(self.indices, inverse=self.inverse)
        return wishart.inverse_moment(params, spec) if self.inverse else wishart.moment(params, spec)

    def values(self, mats: np.ndarray) -> np.ndarray:
        out = np.ones(mats.shape[0])
        for i in range(0, len(self.indices), 2):
            out *= mats[:, self.indices[i] - 1, self.indices[i + 1] - 1]
        return out


@dataclass(frozen=True)
class TracePower:
    """(tr W^{+-1})**n."""

    power: int
    inverse: bool = False

    @property
    def order(self) -> int:
        return self.power

    @property
    def label(self) -> str:
        return f"tr({'Winv' if self.inverse else 'W'})^{self.power}"

    def target(self, params: WishartParams) -> float:
        return wishart.trace_power_moment(params, self.power, inverse=self.inverse)

    def values(self, mats: np.ndarray) -> np.ndarray:
        return np.einsum("mii->m", mats) ** self.power


@dataclass(frozen=True)
class PowerTrace:
    """prod_i tr((W^{+-1})**mu_i)."""

    mu: Partition
    inverse: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu", check_partition(self.mu))

    @property
    def order(self) -> int:
        return sum(self.mu)

    @property
    def label(self) -> str:
        return f"p_{self.mu}({'Winv' if self.inverse else 'W'})"

    def target(self, params: WishartParams) -> float:
        return wishart.power_trace_moment(params, self.mu, inverse=self.inverse)

    def values(self, mats: np.ndarray) -> np.ndarray:
        out = np.ones(mats.shape[0])
        top = max(self.mu)
        acc = mats
        traces = {1: np.einsum("mii->m", mats)}
        for r in range(2, top + 1):
            acc = acc @ mats
            traces[r] = np.einsum("mii->m", acc)
        for part in self.mu:
            out = out * traces[part]
        return out


@dataclass(frozen=True)
class TraceProduct:
    """prod_i tr(W s_i) for fixed symmetric matrices s_i (forward only)."""

    mats: tuple

    inverse: bool = False  # kept for interface symmetry; must stay False

    def __post_init__(self):
        if self.inverse:
            raise ValueError("trace products of fixed matrices are forward-only")
        object.__setattr__(self, "mats", tuple(np.asarray(m, dtype=float) for m in self.mats))

    @property
    def order(self) -> int:
        return len(self.mats)

    @property
    def label(self) -> str:
        return f"prod tr(W s_i), n={len(self.mats)}"

    def target(self, params: WishartParams) -> float:
        return wishart.trace_product_moment(params, list(self.mats))

    def values(self, mats: np.ndarray) -> np.ndarray:
        out = np.ones(mats.shape[0])
        for s in self.mats:
            out = out * np.einsum("mij,ji->m", mats, s)
        return out


# ---------------------------------------------------------------- sampling


def _resolve_method(params: WishartParams, method: str) -> str:
    two_beta = 2 * params.beta
    if method == "auto":
        if two_beta > params.d - 1:
            return "bartlett"
        if two_beta.denominator == 1:
            return "vectors"
        raise DomainError("no sampler: need 2*beta > d-1 (Bartlett) or integer 2*beta")
    if method == "bartlett":
        if not two_beta > params.d - 1:
            raise DomainError(f"Bartlett path needs 2*beta > d-1, got beta={params.beta}")
        return method
    if method == "vectors":
        if two_beta.denominator != 1:
            raise DomainError(f"integer path needs integer 2*beta, got beta={params.beta}")
        return method
    raise ValueError(f"unknown sampling method {method!r}")


def sample_wishart_batch(
    params: WishartParams, count: int, gen: np.random.Generator, method: str = "auto"
) -> np.ndarray:
    """Draw ``count`` Wishart matrices; E[W] = beta * sigma."""
    method = _resolve_method(params, method)
    d = params.d
    chol2 = params.chol / np.sqrt(2.0)  # cholesky factor of sigma/2
    if method == "bartlett":
        dof = 2 * float(params.beta) - np.arange(d)
        chis = gen.chisquare(dof, size=(count, d))
        normals = gen.standard_normal((count, d * (d - 1) // 2)) if d > 1 else np.zeros((count, 0))
        return _kernels.bartlett_gram(chol2, chis, normals)
    p = int(2 * params.beta)
    Z = gen.standard_normal((count, d, p))
    return _kernels.vectors_gram(chol2, Z)


def sample_wishart(params: WishartParams, rng: RngSpec, method: str = "auto") -> np.ndarray:
    """One Wishart draw from a fresh generator at the given RngSpec."""
    return sample_wishart_batch(params, 1, rng.generator(), method)[0]


def sample_haar_batch(N: int, count: int, gen: np.random.Generator) -> np.ndarray:
    G = gen.standard_normal((count, N, N))
    return _kernels.haar_orthogonalize(G)


def sample_haar_orthogonal(N: int, rng: RngSpec) -> np.ndarray:
    """One Haar-orthogonal N x N matrix (QR of a Gaussian matrix, sign-fixed)."""
    if N < 1:
        raise ValueError("N must be positive")
    return sample_haar_batch(N, 1, rng.generator())[0]


# ------------------------------------------------------------ accumulation


@dataclass
class _Acc:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    rejected: int = 0

    def add_chunk(self, values: np.ndarray, rejected: int = 0) -> None:
        m = values.size
        self.rejected += rejected
        if m == 0:
            return
        mean = float(values.mean())
        m2 = float(((values - mean) ** 2).sum())
        self.merge(_Acc(count=m, mean=mean, m2=m2))

    def merge(self, other: "_Acc") -> None:
        if other.count == 0:
            self.rejected += other.rejected
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            self.rejected += other.rejected
            return
        n1, n2 = self.count, other.count
        delta = other.mean - self.mean
        tot = n1 + n2
        self.mean += delta * n2 / tot
        self.m2 += other.m2 + delta * delta * n1 * n2 / tot
        self.count = tot
        self.rejected += other.rejected


def _finalize(acc: _Acc, target: float, label: str) -> SampleStats:
    if acc.count > 1:
        stderr = sqrt(acc.m2 / (acc.count - 1) / acc.count)
    else:
        stderr = 0.0
    if stderr > 0:
        z = (acc.mean - target) / stderr
    else:
        z = 0.0 if acc.mean == target else float("inf")
    return SampleStats(
        count=acc.count, mean=acc.mean, stderr=stderr, target=target, zscore=z,
        rejected=acc.rejected, label=label,
    )


def _pairwise_merge(per_stream: list[list[_Acc]]) -> list[_Acc]:
    work = per_stream
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            left, right = work[i], work[i + 1]
            for a, b in zip(left, right):
                a.merge(b)
            nxt.append(left)
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0]


def _split_counts(total: int, streams: int) -> list[int]:
    base, extra = divmod(total, streams)
    return [base + (1 if i < extra else 0) for i in range(streams)]


def estimate(
    descriptors: Sequence,
    params: WishartParams,
    sample_count: int,
    rng: RngSpec,
    method: str = "auto",
    chunk: int = DEFAULT_CHUNK,
    streams: int = 1,
    threads: int = 1,
) -> list[SampleStats]:
    """Estimate each descriptor's moment over ``sample_count`` draws.

    Inverse-moment descriptors additionally require gamma > order, one unit
    beyond the existence threshold, so the empirical variance is usable;
    near-singular draws (condition above 1e12) are rejected and counted.
    """
    if sample_count < 1000:
        raise ValueError("sample_count must be at least 1000")
    descriptors = list(descriptors)
    need_inverse = any(getattr(d, "inverse", False) for d in descriptors)
    if need_inverse:
        gamma = params.gamma
        worst = max(d.order for d in descriptors if getattr(d, "inverse", False))
        if not gamma > Fraction(worst):
            raise DomainError(
                f"inverse-moment estimation needs gamma > n, got gamma={gamma} for degree {worst}"
            )
    targets = [float(d.target(params)) for d in descriptors]

    def run_stream(spec: RngSpec, count: int) -> list[_Acc]:
        gen = spec.generator()
        accs = [_Acc() for _ in descriptors]
        left = count
        while left > 0:
            m = min(chunk, left)
            left -= m
            W = sample_wishart_batch(params, m, gen, method)
            Winv = None
            rejected = 0
            if need_inverse:
                inv, cond = _kernels.inverse_and_cond(W)
                mask = cond < COND_LIMIT
                rejected = int(m - mask.sum())
                Winv = inv[mask] if rejected else inv
            for desc, acc in zip(descriptors, accs):
                if getattr(desc, "inverse", False):
                    acc.add_chunk(desc.values(Winv), rejected=rejected)
                else:
                    acc.add_chunk(desc.values(W))
        return accs

    counts = _split_counts(sample_count, streams)
    specs = [RngSpec(rng.seed, rng.stream + i) for i in range(streams)]
    if threads > 1 and streams > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_stream = list(pool.map(run_stream, specs, counts))
    else:
        per_stream = [run_stream(s, c) for s, c in zip(specs, counts)]
    merged = _pairwise_merge(per_stream)
    return [_finalize(acc, t, d.label) for acc, t, d in zip(merged, targets, descriptors)]


def estimate_haar(
    index_pairs: Sequence[tuple[Sequence[int], Sequence[int]]],
    N: int,
    sample_count: int,
    rng: RngSpec,
    chunk: int = DEFAULT_CHUNK,
    streams: int = 1,
    threads: int = 1,
) -> list[SampleStats]:
    """Estimate E[prod O[i_k, j_k]] for each (i, j) pair list against the
    exact Weingarten-sum value."""
    if sample_count < 1000:
        raise ValueError("sample_count must be at least 1000")
    pairs = [(tuple(i), tuple(j)) for i, j in index_pairs]
    targets = [float(wishart.haar_moment(i, j, N)) for i, j in pairs]
    labels = [f"prod O[{i},{j}]" for i, j in pairs]

    def run_stream(spec: RngSpec, count: int) -> list[_Acc]:
        gen = spec.generator()
        accs = [_Acc() for _ in pairs]
        left = count
        while left > 0:
            m = min(chunk, left)
            left -= m
            Q = sample_haar_batch(N, m, gen)
            for (i_idx, j_idx), acc in zip(pairs, accs):
                vals = np.ones(m)
                for a, b in zip(i_idx, j_idx):
                    vals *= Q[:, a - 1, b - 1]
                acc.add_chunk(vals)
        return accs

    counts = _split_counts(sample_count, streams)
    specs = [RngSpec(rng.seed, rng.stream + i) for i in range(streams)]
    if threads > 1 and streams > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_stream = list(pool.map(run_stream, specs, counts))
    else:
        per_stream = [run_stream(s, c) for s, c in zip(specs, counts)]
    merged = _pairwise_merge(per_stream)
    return [_finalize(acc, t, lab) for acc, t, lab in zip(merged, targets, labels)]
