"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat R]

Each kernel is timed on both backends with identical inputs; the outputs
are checked for equality before timings are reported. The Python backend
caches the transposition neighbour table, so table-based kernels are timed
both warm (cache filled) and cold; the compiled kernels keep no table.
"""
import argparse
import timeit

import numpy as np

from snf import kernels


def _cold(mod):
    """Drop the Python backend's cached neighbour table (no-op when compiled)."""
    clear = getattr(getattr(mod, "_cached_table", None), "cache_clear", None)
    if clear is not None:
        clear()


def cases(rng):
    member7 = rng.random(5040) < 0.5
    L12 = rng.random((12, 12)) < 0.3
    A12 = rng.random((12, 12))
    from snf import isoperimetry as iso
    masks3 = iso._neighbor_masks(3)
    masks4 = iso._neighbor_masks(4)
    return [
        ("lex_unrank_all(8)", lambda k: k.lex_unrank_all(8)),
        ("neighbor_table(7) warm", lambda k: k.neighbor_table(7)),
        ("neighbor_table(7) cold", lambda k: (_cold(k), k.neighbor_table(7))[1]),
        ("edge_boundary(n=7) warm", lambda k: k.edge_boundary(member7, 7)),
        ("edge_boundary(n=7) cold", lambda k: (_cold(k), k.edge_boundary(member7, 7))[1]),
        ("diagonal_large_counts(m=12)", lambda k: k.diagonal_large_counts(L12)),
        ("permanent(m=12)", lambda k: k.permanent(A12)),
        ("exhaustive_scan(n=3)", lambda k: k.exhaustive_boundary_scan(masks3)),
        ("exhaustive_scan(n=4) sizes", lambda k: k.exhaustive_boundary_scan(masks4[:16])),
    ]


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-9)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the Python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} " + " ".join(f"{b:>12s}" for b in sorted(backends)) + "  speedup")
    for name, fn in cases(rng):
        times = {}
        outs = {}
        for b, mod in sorted(backends.items()):
            outs[b] = fn(mod)
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        if len(outs) == 2:
            assert _same(outs["cython"], outs["python"]), name
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:32s} " + " ".join(f"{times[b]*1e3:10.2f}ms" for b in sorted(times))
              + f"  {speed:7.1f}x")


if __name__ == "__main__":
    main()
