"""Partitions, permutations and symmetric-group character arithmetic.

Everything here is exact: integer partitions are plain tuples, permutations
are immutable one-line words, and character values come out of a memoized
Murnaghan-Nakayama recursion as Python ints.
"""

from __future__ import annotations

from functools import cache
from math import factorial, prod
from typing import Iterable, Iterator

Partition = tuple[int, ...]


def check_partition(parts: Iterable[int]) -> Partition:
    """Validate and normalize a weakly decreasing sequence of positive parts."""
    t = tuple(int(p) for p in parts)
    for i, p in enumerate(t):
        if p < 1:
            raise ValueError(f"partition parts must be positive, got {t}")
        if i and t[i - 1] < p:
            raise ValueError(f"partition parts must be weakly decreasing, got {t}")
    return t


def weight(parts: Partition) -> int:
    return sum(parts)


@cache
def partitions_of(n: int) -> tuple[Partition, ...]:
    """All partitions of n in reverse-lexicographic order, e.g. (3), (2,1), (1,1,1)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return tuple(_partitions_bounded(n, n))


def _partitions_bounded(n: int, max_part: int) -> Iterator[Partition]:
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in _partitions_bounded(n - k, k):
            yield (k,) + rest


def multiplicities(rho: Partition) -> dict[int, int]:
    m: dict[int, int] = {}
    for r in rho:
        m[r] = m.get(r, 0) + 1
    return m


def centralizer_order(rho: Partition) -> int:
    """Order of the centralizer of a permutation with cycle type rho:
    the product over part sizes r of r**m_r * m_r!."""
    return prod(r**m * factorial(m) for r, m in multiplicities(rho).items())


def conjugate(parts: Partition) -> Partition:
    if not parts:
        return ()
    return tuple(sum(1 for p in parts if p > i) for i in range(parts[0]))


def doubled(parts: Partition) -> Partition:
    """The partition with every part doubled."""
    return tuple(2 * p for p in parts)


def hook_dim(parts: Partition) -> int:
    """Number of standard Young tableaux of the given shape (hook-length formula)."""
    parts = check_partition(parts) if parts else ()
    if not parts:
        return 1
    conj = conjugate(parts)
    dim = factorial(sum(parts))
    for i, row in enumerate(parts):
        for j in range(row):
            dim //= row - j + conj[j] - i - 1
    return dim


def hook_dim_doubled(parts: Partition) -> int:
    """Tableau count of the doubled shape: hook_dim(2*lambda)."""
    return hook_dim(doubled(parts))


def content_product(parts: Partition, z):
    """Product over Young-diagram boxes (i, j) of (z + 2j - i - 1), rows/cols 1-based.

    For the empty partition this is the empty product 1.  Exact whenever z is.
    """
    out = 1
    for i, row in enumerate(parts, start=1):
        for j in range(1, row + 1):
            out = out * (z + 2 * j - i - 1)
    return out


class Perm:
    """A permutation of {1, ..., m} in one-line notation.

    ``images[i-1]`` is the image of i.  Composition is the usual left action:
    ``(p * q)(i) == p(q(i))``.
    """

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        imgs = tuple(images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValueError(f"not a bijection of 1..{len(imgs)}: {imgs}")
        object.__setattr__(self, "images", imgs)
        object.__setattr__(self, "_hash", hash(imgs))

    def __setattr__(self, name, value):
        raise AttributeError("Perm is immutable")

    @classmethod
    def identity(cls, m: int) -> "Perm":
        return cls(range(1, m + 1))

    @classmethod
    def from_cycles(cls, m: int, cycles: Iterable[Iterable[int]]) -> "Perm":
        imgs = list(range(1, m + 1))
        for cyc in cycles:
            cyc = list(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                imgs[a - 1] = b
        return cls(imgs)

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Perm") -> "Perm":
        if self.size != other.size:
            raise ValueError("size mismatch")
        return Perm(self.images[j - 1] for j in other.images)

    def inverse(self) -> "Perm":
        inv = [0] * self.size
        for i, v in enumerate(self.images, start=1):
            inv[v - 1] = i
        return Perm(inv)

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycle decomposition, fixed points included; each cycle starts at its
        smallest element, cycles ordered by that element."""
        seen = [False] * self.size
        out = []
        for start in range(1, self.size + 1):
            if seen[start - 1]:
                continue
            cyc = [start]
            seen[start - 1] = True
            v = self(start)
            while v != start:
                cyc.append(v)
                seen[v - 1] = True
                v = self(v)
            out.append(tuple(cyc))
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Perm) and self.images == other.images

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Perm{self.images}"


def cycle_type(pi: Perm) -> Partition:
    """Sorted cycle lengths of pi as a partition of its ground-set size."""
    return tuple(sorted((len(c) for c in pi.cycles()), reverse=True))


def num_cycles(pi: Perm) -> int:
    return len(pi.cycles())


@cache
def character(lam: Partition, rho: Partition) -> int:
    """Irreducible character of S_n for shape lam on the class of cycle type rho.

    Murnaghan-Nakayama recursion over border strips, driven on beta-numbers
    (first-column hook lengths); memoized on (shape, remaining cycle lengths).
    """
    if sum(lam) != sum(rho):
        raise ValueError(f"weight mismatch: |{lam}| != |{rho}|")
    if not lam:
        return 1
    r, rest = rho[0], rho[1:]
    ell = len(lam)
    beta = [lam[i] + (ell - 1 - i) for i in range(ell)]
    beta_set = set(beta)
    total = 0
    for i, b in enumerate(beta):
        nb = b - r
        if nb < 0 or nb in beta_set:
            continue
        height = sum(1 for c in beta if nb < c < b)
        new_beta = sorted((nb if k == i else c for k, c in enumerate(beta)), reverse=True)
        new_lam = tuple(c - (ell - 1 - k) for k, c in enumerate(new_beta))
        while new_lam and new_lam[-1] == 0:
            new_lam = new_lam[:-1]
        total += (-1) ** height * character(new_lam, rest)
    return total
