"""Time the compiled and numpy kernels on the workloads the package actually runs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--threads T]
"""
import argparse
import timeit
import warnings

import numpy as np

from spinsim import _pykernels, lattice, meanfield

try:
    from spinsim import _ckernels
except ImportError:
    _ckernels = None


def workloads():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lattice.ConvergenceWarning)
        fcc = lattice.LatticeSpec("fcc", field_dir=(1, 1, 1), r_max=12)
        zb = lattice.LatticeSpec("zincblende", field_dir=(1, 1, 1), r_max=12)
        table = lattice.coupling_table(zb, "IS")
        ii = lattice.coupling_table(fcc, "II")
    grid = meanfield.bz_grid(24)
    field = np.asarray(fcc.field, dtype=float)
    return {
        "k3 (fcc, r_max 12)": lambda mod, t: mod.k3_contributions(
            np.ascontiguousarray(ii.offsets), np.ascontiguousarray(ii.g), field, t),
        "fourier (24^3 grid, zincblende)": lambda mod, t: mod.fourier_sum(
            grid, np.ascontiguousarray(table.offsets), np.ascontiguousarray(table.g), t),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    print(f"{'workload':34s} {'backend':8s} {'best [s]':>10s} {'speed-up':>9s}")
    for name, fn in workloads().items():
        base = None
        for label, mod in backends:
            best = min(timeit.repeat(lambda: fn(mod, args.threads), number=1,
                                     repeat=args.repeat))
            base = base or best
            print(f"{name:34s} {label:8s} {best:10.4f} {base / best:9.2f}")


if __name__ == "__main__":
    main()
