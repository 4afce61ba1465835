"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fascopula import _backend
from fascopula.fas import FasConfig, NakagamiMarginal, fas_cdf, jakes_correlation
from fascopula.mvn import MvnOptions, _reorder_cholesky, _richtmyer


def cases():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(1_000_000)
    u = rng.random(1_000_000)
    y = rng.random(200_000)
    R = jakes_correlation(FasConfig(6, 2.0))
    C, b = _reorder_cholesky(R, np.full(6, 0.2))
    C, b = np.ascontiguousarray(C), np.ascontiguousarray(b)
    gen, shift = _richtmyer(5), rng.random(5)
    marg = NakagamiMarginal(1.5, 1.0)
    opts = MvnOptions(abs_tol=1e-6)
    return {
        "norm_cdf 1e6": lambda k: k.norm_cdf(x),
        "norm_quantile 1e6": lambda k: k.norm_quantile(u),
        "inv_reg_gamma 1e6": lambda k: k.inv_reg_gamma(1.5, u),
        "genz_sum K=6 2e5": lambda k: k.genz_sum(C, b, gen, shift, 0, 200_000),
        "inversion_count 2e5": lambda k: k.inversion_count(y),
        "fas_cdf K=6": lambda k: fas_cdf(0.9, FasConfig(6, 2.0), marg, opts),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = _backend.available()
    print(f"backends: {', '.join(names)}")
    print(f"{'kernel':<22}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for label, fn in cases().items():
        best = {}
        for name in names:
            with _backend.use_backend(name):
                k = _backend.kernels
                best[name] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        row = f"{label:<22}" + "".join(f"{best[n] * 1e3:>10.1f}ms" for n in names)
        if len(names) > 1:
            row += f"{best['python'] / best['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
