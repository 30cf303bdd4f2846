"""Perfect matchings of {1,...,2n}, coset types and the hyperoctahedral group.

A matching is stored through its canonical sequence (m(1),...,m(2n)) with
m(2k-1) < m(2k) and m(1) < m(3) < ... < m(2n-1); read as one-line notation
this embeds the matching into S_{2n}.  The coset type of g in S_{2n} is the
partition of n formed by the halved component sizes of the graph whose edges
are the base pairs {2k-1, 2k} together with the image pairs {g(2k-1), g(2k)}.
"""

from __future__ import annotations

from functools import cache
from math import factorial
from typing import Iterable, Iterator

from .symcomb import Partition, Perm, centralizer_order, check_partition

MAX_MATCHING_DEGREE = 8
MAX_HYPEROCT_DEGREE = 5


class SizeLimitError(ValueError):
    """Requested enumeration exceeds the library's hard size guard."""


class Matching:
    """A perfect matching on {1, ..., 2n} in canonical sequence form."""

    __slots__ = ("seq",)

    def __init__(self, seq: Iterable[int]):
        s = tuple(seq)
        if len(s) % 2 or sorted(s) != list(range(1, len(s) + 1)):
            raise ValueError(f"not a sequence over 1..2n: {s}")
        for k in range(0, len(s), 2):
            if s[k] > s[k + 1]:
                raise ValueError(f"pair ({s[k]},{s[k+1]}) not increasing")
            if k and s[k - 2] > s[k]:
                raise ValueError("pair openers must increase")
        object.__setattr__(self, "seq", s)

    def __setattr__(self, name, value):
        raise AttributeError("Matching is immutable")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Iterable[int]]) -> "Matching":
        canon = sorted(tuple(sorted(p)) for p in pairs)
        return cls(x for pair in canon for x in pair)

    @property
    def n(self) -> int:
        return len(self.seq) // 2

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple((self.seq[k], self.seq[k + 1]) for k in range(0, len(self.seq), 2))

    def as_perm(self) -> Perm:
        return Perm(self.seq)

    def __eq__(self, other) -> bool:
        return isinstance(other, Matching) and self.seq == other.seq

    def __hash__(self) -> int:
        return hash(self.seq)

    def __repr__(self) -> str:
        return f"Matching{self.pairs}"


def matching_count(n: int) -> int:
    """(2n-1)!! pairings of a 2n-set."""
    out = 1
    for k in range(2 * n - 1, 0, -2):
        out *= k
    return out


def iter_matchings(n: int) -> Iterator[Matching]:
    """Yield all matchings of {1,...,2n} in lexicographic canonical order."""

    def rec(free: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if not free:
            yield ()
            return
        a = free[0]
        for i in range(1, len(free)):
            b = free[i]
            for rest in rec(free[1:i] + free[i + 1 :]):
                yield (a, b) + rest

    for seq in rec(tuple(range(1, 2 * n + 1))):
        yield Matching(seq)


def enumerate_matchings(n: int) -> list[Matching]:
    if not 1 <= n <= MAX_MATCHING_DEGREE:
        raise SizeLimitError(f"matching enumeration supports 1 <= n <= {MAX_MATCHING_DEGREE}, got {n}")
    return list(iter_matchings(n))


def _type_of_pairs(pairs: tuple[tuple[int, int], ...]) -> Partition:
    # Components of the graph on [2n] with base edges {2k-1, 2k} plus the pairs:
    # every vertex has one partner of each kind, so components are closed walks.
    partner: dict[int, int] = {}
    for a, b in pairs:
        partner[a] = b
        partner[b] = a
    seen: set[int] = set()
    halves = []
    for start in partner:
        if start in seen:
            continue
        size = 0
        v = start
        while v not in seen:
            seen.add(v)
            w = partner[v]
            seen.add(w)
            size += 2
            v = w + 1 if w % 2 else w - 1
        halves.append(size // 2)
    return tuple(sorted(halves, reverse=True))


@cache
def matchings_with_type(n: int) -> tuple[tuple[tuple[tuple[int, int], ...], Partition], ...]:
    """All matchings of {1,...,2n} as (pairs, coset type), cached for n <= 6."""
    if not 1 <= n <= 6:
        raise SizeLimitError("cached matching/coset-type table supports 1 <= n <= 6")
    return tuple((m.pairs, _type_of_pairs(m.pairs)) for m in iter_matchings(n))


def iter_matchings_with_type(n: int) -> Iterator[tuple[tuple[tuple[int, int], ...], Partition]]:
    """Stream (pairs, coset type) over all matchings; cached table when small."""
    if n <= 6:
        yield from matchings_with_type(n)
    else:
        for m in iter_matchings(n):
            yield m.pairs, _type_of_pairs(m.pairs)


def coset_type(g: Perm) -> Partition:
    """Halved component sizes (sorted descending) of the pairing graph of g."""
    m = g.size
    if m % 2:
        raise ValueError("coset type needs an even-sized ground set")
    n = m // 2
    parent = list(range(m + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for k in range(1, n + 1):
        union(2 * k - 1, 2 * k)
        union(g(2 * k - 1), g(2 * k))
    sizes: dict[int, int] = {}
    for v in range(1, m + 1):
        r = find(v)
        sizes[r] = sizes.get(r, 0) + 1
    return tuple(sorted((s // 2 for s in sizes.values()), reverse=True))


def kappa(g: Perm) -> int:
    """Number of components of the pairing graph; the length of the coset type."""
    return len(coset_type(g))


@cache
def hyperoctahedral(n: int) -> tuple[Perm, ...]:
    """All 2^n n! elements of H_n inside S_{2n}, in sorted one-line order.

    Generated by the pair swaps (2k-1, 2k) and the block swaps
    (2i-1, 2j-1)(2i, 2j); closure by breadth-first search.
    """
    if not 1 <= n <= MAX_HYPEROCT_DEGREE:
        raise SizeLimitError(f"hyperoctahedral enumeration supports 1 <= n <= {MAX_HYPEROCT_DEGREE}, got {n}")
    m = 2 * n
    gens = [Perm.from_cycles(m, [(2 * k - 1, 2 * k)]) for k in range(1, n + 1)]
    gens += [
        Perm.from_cycles(m, [(2 * i - 1, 2 * j - 1), (2 * i, 2 * j)])
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
    ]
    seen = {Perm.identity(m)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = s * g
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    assert len(seen) == 2**n * factorial(n)
    return tuple(sorted(seen, key=lambda p: p.images))


def is_hyperoctahedral(g: Perm) -> bool:
    n = g.size // 2
    return coset_type(g) == (1,) * n


def double_coset_size(rho: Partition) -> int:
    """Number of elements of S_{2n} with coset type rho:
    (2^n n!)^2 / (2^len(rho) * centralizer_order(rho))."""
    rho = check_partition(rho)
    n = sum(rho)
    num = (2**n * factorial(n)) ** 2
    den = 2 ** len(rho) * centralizer_order(rho)
    assert num % den == 0
    return num // den


def paired_perm(pi: Perm) -> Perm:
    """Lift pi in S_n to S_{2n}: odd slots follow pi (2j-1 -> 2*pi(j)-1),
    even slots stay fixed.  The lift of a cycle-type-rho permutation has
    coset type rho."""
    n = pi.size
    imgs = [0] * (2 * n)
    for j in range(1, n + 1):
        imgs[2 * j - 2] = 2 * pi(j) - 1
        imgs[2 * j - 1] = 2 * j
    return Perm(imgs)


@cache
def coset_representative(rho: Partition) -> Perm:
    """A deterministic element of S_{2n} with the given coset type: the paired
    lift of the permutation whose cycles are consecutive blocks of sizes rho."""
    rho = check_partition(rho)
    cycles = []
    start = 1
    for r in rho:
        cycles.append(tuple(range(start, start + r)))
        start += r
    return paired_perm(Perm.from_cycles(sum(rho), cycles))
