"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on identical pre-drawn inputs under both backends and
then times an end-to-end estimator pass.  Select a single backend run with
WW_BACKEND; by default this script times both.

    python benchmarks/bench_kernels.py [--samples N]
"""

import argparse
import os
import time
from fractions import Fraction

import numpy as np

SAMPLES = 200_000
D = 3


def time_call(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(name, samples):
    os.environ["WW_BACKEND"] = name
    from wishmom import _kernels
    from wishmom.montecarlo import EntryProduct, RngSpec, TracePower, estimate
    from wishmom.wishart import WishartParams

    rng = np.random.default_rng(0)
    a = rng.normal(size=(D, D))
    sigma = a @ a.T + D * np.eye(D)
    chol2 = np.linalg.cholesky(sigma / 2)
    dof = 5.0 - np.arange(D)
    chis = rng.chisquare(dof, size=(samples, D))
    normals = rng.standard_normal((samples, D * (D - 1) // 2))
    Z = rng.standard_normal((samples // 4, D, 6))
    G = rng.standard_normal((samples // 4, D, D))

    # first call pays any JIT compilation; warm up before timing
    W = _kernels.bartlett_gram(chol2, chis[:64], normals[:64])
    _kernels.vectors_gram(chol2, Z[:64])
    _kernels.inverse_and_cond(W)
    _kernels.haar_orthogonalize(G[:64])

    rows = {}
    rows["bartlett_gram"] = time_call(_kernels.bartlett_gram, chol2, chis, normals)
    rows["vectors_gram"] = time_call(_kernels.vectors_gram, chol2, Z)
    Wfull = _kernels.bartlett_gram(chol2, chis, normals)
    rows["inverse_and_cond"] = time_call(_kernels.inverse_and_cond, Wfull)
    rows["haar_orthogonalize"] = time_call(_kernels.haar_orthogonalize, G)

    params = WishartParams(d=D, beta=Fraction(5, 2), sigma=sigma)
    descs = [EntryProduct((1, 2)), EntryProduct((1, 1, 2, 2)), TracePower(2)]
    t0 = time.perf_counter()
    estimate(descs, params, samples, RngSpec(1234), streams=4)
    rows["estimate end-to-end"] = time.perf_counter() - t0
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--samples", type=int, default=SAMPLES)
    args = parser.parse_args()

    results = {}
    for backend in ("numpy", "numba"):
        try:
            results[backend] = bench_backend(backend, args.samples)
        except RuntimeError as exc:
            print(f"skipping {backend}: {exc}")

    kernels = list(next(iter(results.values())))
    width = max(len(k) for k in kernels)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in results)
    print(f"\nsamples = {args.samples}, d = {D}")
    print(header)
    print("-" * len(header))
    for k in kernels:
        cells = "  ".join(f"{results[b][k] * 1e3:9.1f}ms" for b in results)
        print(f"{k:<{width}}  {cells}")
    if len(results) == 2:
        print("\nspeedup (numpy / numba):")
        for k in kernels:
            print(f"  {k:<{width}}  {results['numpy'][k] / results['numba'][k]:5.2f}x")


if __name__ == "__main__":
    main()
