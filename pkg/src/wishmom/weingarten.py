"""Zonal spherical functions, orthogonal Weingarten functions and tables.

All values are exact rationals.  A function on S_{2n} that is invariant under
the hyperoctahedral group on both sides is stored by its values on coset
types; convolution of two such functions reduces to a finite weighted sum
over perfect matchings, with the full |S_{2n}| sum kept as a cross-check for
small degrees.

The Weingarten function Wg(rho; z) is the deg-n rational function whose
convolution against z**kappa inverts to (2^n n!)^2 times the algebra unit;
it is evaluated here through its expansion over zonal spherical functions.
The inverse-Wishart variant is the same object at z = -2*gamma rescaled by
(-1)^n 2^n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache
from math import factorial
from pathlib import Path
from typing import Mapping

from . import __version__
from .matchgroup import (
    SizeLimitError,
    coset_representative,
    coset_type,
    hyperoctahedral,
    iter_matchings,
    matching_count,
)
from .symcomb import (
    Partition,
    Perm,
    centralizer_order,
    character,
    check_partition,
    content_product,
    cycle_type,
    doubled,
    hook_dim_doubled,
    partitions_of,
)

MAX_ZONAL_DEGREE = 5
TABLE_SCHEMA = 1


class PoleError(ValueError):
    """Evaluation point makes some C_lambda vanish; carries the offending shapes."""

    def __init__(self, z, shapes: tuple[Partition, ...]):
        self.z = z
        self.shapes = shapes
        super().__init__(f"content product vanishes at z={z} for shapes {list(shapes)}")


def _check_degree(n: int) -> None:
    if not 1 <= n <= MAX_ZONAL_DEGREE:
        raise SizeLimitError(f"zonal machinery supports 1 <= n <= {MAX_ZONAL_DEGREE}, got {n}")


def zonal_spherical_at(lam: Partition, g: Perm) -> Fraction:
    """Defining average of the doubled-shape character over the coset g H_n."""
    n = sum(lam)
    _check_degree(n)
    if g.size != 2 * n:
        raise ValueError("permutation size must be 2n")
    lam2 = doubled(lam)
    total = 0
    for zeta in hyperoctahedral(n):
        total += character(lam2, cycle_type(g * zeta))
    return Fraction(total, 2**n * factorial(n))


@cache
def _coset_class_histogram(n: int, rho: Partition) -> tuple[tuple[Partition, int], ...]:
    # cycle-type multiset of {g_rho * zeta : zeta in H_n}; shared by every lambda
    g = coset_representative(rho)
    hist: dict[Partition, int] = {}
    for zeta in hyperoctahedral(n):
        t = cycle_type(g * zeta)
        hist[t] = hist.get(t, 0) + 1
    return tuple(sorted(hist.items()))


@cache
def zonal_spherical(lam: Partition, rho: Partition) -> Fraction:
    """Zonal spherical function value on the double coset of type rho."""
    lam = check_partition(lam) if lam else ()
    rho = check_partition(rho) if rho else ()
    n = sum(lam)
    if n != sum(rho):
        raise ValueError(f"weight mismatch: |{lam}| != |{rho}|")
    _check_degree(n)
    lam2 = doubled(lam)
    total = sum(count * character(lam2, t) for t, count in _coset_class_histogram(n, rho))
    return Fraction(total, 2**n * factorial(n))


def _pole_shapes(n: int, z: Fraction, max_len: int | None = None) -> tuple[Partition, ...]:
    shapes = partitions_of(n)
    if max_len is not None:
        shapes = tuple(s for s in shapes if len(s) <= max_len)
    return tuple(s for s in shapes if content_product(s, z) == 0)


def weingarten(rho: Partition, z) -> Fraction:
    """Orthogonal Weingarten value Wg(rho; z), exact in the rational point z."""
    rho = check_partition(rho)
    n = sum(rho)
    _check_degree(n)
    z = Fraction(z)
    bad = _pole_shapes(n, z)
    if bad:
        raise PoleError(z, bad)
    total = Fraction(0)
    for lam in partitions_of(n):
        total += Fraction(hook_dim_doubled(lam)) / content_product(lam, z) * zonal_spherical(lam, rho)
    return total / matching_count(n)


def weingarten_truncated(rho: Partition, N: int) -> Fraction:
    """Weingarten sum restricted to shapes with at most N rows, evaluated at z=N.

    Coincides with ``weingarten(rho, N)`` whenever N >= n, and stays defined
    for 1 <= N < n where the full sum has poles.
    """
    rho = check_partition(rho)
    n = sum(rho)
    _check_degree(n)
    if N < 1:
        raise ValueError("N must be a positive integer")
    total = Fraction(0)
    for lam in partitions_of(n):
        if len(lam) > N:
            continue
        total += Fraction(hook_dim_doubled(lam)) / content_product(lam, Fraction(N)) * zonal_spherical(lam, rho)
    return total / matching_count(n)


def inv_wishart_weingarten(rho: Partition, gamma) -> Fraction:
    """Coefficient kernel for inverse-Wishart moments: (-1)^n 2^n Wg(rho; -2*gamma)."""
    rho = check_partition(rho)
    n = sum(rho)
    gamma = Fraction(gamma)
    return (-1) ** n * 2**n * weingarten(rho, -2 * gamma)


@dataclass
class BiinvariantFn:
    """A two-sided H_n-invariant function on S_{2n}, stored by coset type."""

    n: int
    values: dict[Partition, Fraction]

    def __post_init__(self):
        want = set(partitions_of(self.n))
        if set(self.values) != want:
            raise ValueError(f"values must cover all partitions of {self.n}")

    def value(self, rho: Partition) -> Fraction:
        return self.values[tuple(rho)]

    def __call__(self, g: Perm) -> Fraction:
        return self.values[coset_type(g)]


def hecke_unit(n: int) -> BiinvariantFn:
    """Unit of the convolution algebra: (2^n n!)^-1 on H_n, zero elsewhere."""
    unit = Fraction(1, 2**n * factorial(n))
    vals = {rho: (unit if rho == (1,) * n else Fraction(0)) for rho in partitions_of(n)}
    return BiinvariantFn(n, vals)


def zonal_fn(lam: Partition) -> BiinvariantFn:
    n = sum(lam)
    return BiinvariantFn(n, {rho: zonal_spherical(lam, rho) for rho in partitions_of(n)})


def kappa_power_fn(n: int, z) -> BiinvariantFn:
    """The function g -> z**kappa(g), i.e. z**len(rho) on coset type rho."""
    z = Fraction(z)
    return BiinvariantFn(n, {rho: z ** len(rho) for rho in partitions_of(n)})


def weingarten_fn(n: int, z) -> BiinvariantFn:
    return BiinvariantFn(n, {rho: weingarten(rho, z) for rho in partitions_of(n)})


@cache
def _convolution_kernel(n: int, full: bool) -> dict[Partition, tuple[tuple[Partition, Partition, int], ...]]:
    """Weights w such that (f1 * f2)(g_rho) = sum w * f1[t1] * f2[t2].

    The reduced kernel runs over the (2n-1)!! matching coset representatives
    with multiplicity |H_n|; the full kernel runs over all of S_{2n} and is
    kept only as a small-degree oracle.
    """
    out: dict[Partition, tuple[tuple[Partition, Partition, int], ...]] = {}
    reps = {rho: coset_representative(rho) for rho in partitions_of(n)}
    if full:
        if n > 3:
            raise SizeLimitError("full-group convolution supports n <= 3")
        from itertools import permutations

        elements = [Perm(p) for p in permutations(range(1, 2 * n + 1))]
        types = {g: coset_type(g) for g in elements}
        for rho, g_rho in reps.items():
            hist: dict[tuple[Partition, Partition], int] = {}
            for gp in elements:
                key = (types[g_rho * gp.inverse()], types[gp])
                hist[key] = hist.get(key, 0) + 1
            out[rho] = tuple((t1, t2, w) for (t1, t2), w in sorted(hist.items()))
    else:
        order_h = 2**n * factorial(n)
        pairs = []
        for m in iter_matchings(n):
            p = m.as_perm()
            pairs.append((p, coset_type(p.inverse())))
        for rho, g_rho in reps.items():
            hist = {}
            for p, t2 in pairs:
                key = (coset_type(g_rho * p), t2)
                hist[key] = hist.get(key, 0) + order_h
            out[rho] = tuple((t1, t2, w) for (t1, t2), w in sorted(hist.items()))
    return out


def biinvariant_convolve(f1: BiinvariantFn, f2: BiinvariantFn, method: str = "reduced") -> BiinvariantFn:
    """Convolution (f1 * f2)(g) = sum over g' of f1(g g'^-1) f2(g')."""
    if f1.n != f2.n:
        raise ValueError(f"degree mismatch: {f1.n} != {f2.n}")
    n = f1.n
    _check_degree(n)
    if method not in ("reduced", "full"):
        raise ValueError("method must be 'reduced' or 'full'")
    kernel = _convolution_kernel(n, method == "full")
    vals = {}
    for rho, rows in kernel.items():
        vals[rho] = sum((w * f1.values[t1] * f2.values[t2] for t1, t2, w in rows), Fraction(0))
    return BiinvariantFn(n, vals)


def zonal_eval(lam: Partition, pvals: Mapping[int, object]):
    """Zonal polynomial of shape lam evaluated at given power sums.

    pvals maps r -> value of the r-th power sum for r = 1..n; the result is
    2^n n! * sum over rho of 2^-len(rho) / z_rho * omega(lam, rho) * prod pvals.
    Exact when the inputs are exact.
    """
    lam = check_partition(lam) if lam else ()
    n = sum(lam)
    if n == 0:
        return Fraction(1)
    _check_degree(n)
    missing = [r for r in range(1, n + 1) if r not in pvals]
    if missing:
        raise ValueError(f"missing power-sum values for r={missing}")
    total = 0
    for rho in partitions_of(n):
        coef = Fraction(2**n * factorial(n), 2 ** len(rho) * centralizer_order(rho)) * zonal_spherical(lam, rho)
        term = coef
        for part in rho:
            term = term * pvals[part]
        total = total + term
    return total


@dataclass
class WeingartenTable:
    """Weingarten values for every coset type of one degree at one point."""

    n: int
    z: Fraction
    entries: dict[Partition, Fraction]
    provenance: dict = field(default_factory=dict)


def build_table(n: int, z) -> WeingartenTable:
    """Tabulate Wg(rho; z) over all rho of weight n, in reverse-lex order."""
    _check_degree(n)
    z = Fraction(z)
    entries = {rho: weingarten(rho, z) for rho in partitions_of(n)}
    # provenance is deliberately clock-free so rebuilds are byte-identical
    prov = {"generator": "wishmom", "version": __version__, "schema": TABLE_SCHEMA}
    return WeingartenTable(n=n, z=z, entries=entries, provenance=prov)


def table_to_json(table: WeingartenTable) -> str:
    doc = {
        "n": table.n,
        "z": {"num": str(table.z.numerator), "den": str(table.z.denominator)},
        "entries": [
            {"rho": list(rho), "value": {"num": str(v.numerator), "den": str(v.denominator)}}
            for rho, v in table.entries.items()
        ],
        "provenance": table.provenance,
    }
    return json.dumps(doc, indent=2) + "\n"


def table_from_json(text: str) -> WeingartenTable:
    doc = json.loads(text)
    z = Fraction(int(doc["z"]["num"]), int(doc["z"]["den"]))
    entries = {
        tuple(e["rho"]): Fraction(int(e["value"]["num"]), int(e["value"]["den"]))
        for e in doc["entries"]
    }
    return WeingartenTable(n=int(doc["n"]), z=z, entries=entries, provenance=doc.get("provenance", {}))


def table_path(cache_dir: str | Path, n: int, z) -> Path:
    z = Fraction(z)
    return Path(cache_dir) / "tables" / "wg_o" / f"n{n}" / f"z_{z.numerator}_{z.denominator}.json"


def save_table(table: WeingartenTable, cache_dir: str | Path) -> Path:
    path = table_path(cache_dir, table.n, table.z)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table_to_json(table))
    return path


def load_table(cache_dir: str | Path, n: int, z) -> WeingartenTable | None:
    path = table_path(cache_dir, n, z)
    if not path.exists():
        return None
    return table_from_json(path.read_text())
