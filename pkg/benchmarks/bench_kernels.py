"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Times the midpoint reconstruction sweep (both operators over dyadic grids)
and a batch of box-confined Newton solves, and checks that both backends
return identical reconstruction arrays.
"""

import argparse
import timeit

import numpy as np

from harmonic_kit import _pykernels, geometry

try:
    from harmonic_kit import _ckernels
except ImportError:
    _ckernels = None


def recon_sweep(k):
    def run():
        for grid in GRIDS:
            f = np.sin(grid)
            k.linear_midpoints(grid, f)
            k.pph_midpoints(grid, f, k.CLIP, 2.0)
            k.pph_midpoints(grid, f, k.TRANSLATE, 2.0)
    return run


def newton_batch(k, scenes, starts):
    def run():
        for args, lo, hi, x0s in zip(*scenes):
            for x0 in x0s[:starts]:
                k.newton_surfaces(*args, x0, lo, hi, 1e-10, 1e-12, 100, 30)
    return run


def build_scenes(count, starts, seed=0):
    rng = np.random.default_rng(seed)
    systems, los, his, x0s = [], [], [], []
    for i in range(count):
        n = int(rng.integers(2, 7))
        scene = geometry.build_scene(rng.uniform(0.5, 10, n), rng.uniform(0.05, 1, n), ("thm3", "thm4")[i % 2])
        lo, hi = geometry.prism_box(scene)
        systems.append(geometry._system(scene))
        los.append(lo)
        his.append(hi)
        x0s.append([geometry.random_interior_start(scene, rng) for _ in range(starts)])
    return systems, los, his, x0s


GRIDS = [np.linspace(0.6, 2.5, 16 * 2**k + 1) for k in range(12)]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--scenes", type=int, default=100)
    p.add_argument("--starts", type=int, default=20)
    args = p.parse_args()

    backends = {"python": _pykernels}
    if _ckernels is None:
        print("compiled extension not built; timing the fallback only")
    else:
        backends["cython"] = _ckernels
        for grid in GRIDS:
            f = np.sin(grid)
            assert np.array_equal(_ckernels.pph_midpoints(grid, f), _pykernels.pph_midpoints(grid, f))

    scenes = build_scenes(args.scenes, args.starts)
    nodes = sum(g.size for g in GRIDS)
    print(f"reconstruction sweep: {len(GRIDS)} grids, {nodes} nodes, 3 operators")
    print(f"newton batch: {args.scenes} scenes x {args.starts} starts")
    results = {}
    for name, k in backends.items():
        results[name] = (
            min(timeit.repeat(recon_sweep(k), number=1, repeat=args.repeat)),
            min(timeit.repeat(newton_batch(k, scenes, args.starts), number=1, repeat=args.repeat)),
        )
    print(f"{'backend':<8} {'recon [ms]':>12} {'newton [ms]':>12}")
    for name, (r, n) in results.items():
        print(f"{name:<8} {1e3 * r:12.2f} {1e3 * n:12.2f}")
    if len(results) == 2:
        (pr, pn), (cr, cn) = results["python"], results["cython"]
        print(f"speedup  {pr / cr:11.1f}x {pn / cn:11.1f}x")


if __name__ == "__main__":
    main()
