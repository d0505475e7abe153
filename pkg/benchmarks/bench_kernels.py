"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Each case runs once per available implementation; the table reports the
best wall time and the speedup of the compiled kernels.  Outputs are also
compared, since the two implementations must agree bit for bit.
"""
import argparse
import time

import numpy as np

from parityformer import kernels
from parityformer.construction import build_parity_spec
from parityformer.verification import exhaustive_verify


def _cases():
    rng = np.random.default_rng(0)
    scores = rng.normal(size=(400, 400)) * 1e6
    values = rng.normal(size=(400, 16))
    spec = build_parity_spec()
    return [
        ("attention 400x400, d=16", lambda: kernels.attention(scores, values)),
        ("margin sweep n=200", lambda: kernels.margin_sweep(200, 0.01, 3.0e7)),
        ("audit scan n=300", lambda: kernels.lemma2_scan(300, 1, 100, 0.01)),
        ("exhaustive n<=10", lambda: exhaustive_verify(spec, 10).passed),
    ]


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    impls = sorted(kernels.implementations())
    print(f"implementations: {', '.join(impls)}")
    print(f"{'case':28}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}  same")
    for label, fn in _cases():
        times, outputs = {}, {}
        for name in impls:
            with kernels.use(name):
                best = float("inf")
                for _ in range(args.repeat):
                    t0 = time.perf_counter()
                    outputs[name] = fn()
                    best = min(best, time.perf_counter() - t0)
            times[name] = best
        row = f"{label:28}" + "".join(f"{times[n] * 1e3:10.1f}ms" for n in impls)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:9.1f}x"
            row += "  yes" if _same(outputs["python"], outputs["cython"]) else "  NO"
        print(row)


if __name__ == "__main__":
    main()
