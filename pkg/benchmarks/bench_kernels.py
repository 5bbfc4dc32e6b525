"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from hololoop import gatelog, kernels, loopsynth


def cases():
    rng = np.random.default_rng(0)
    out = {}
    for n in (4, 16, 32):
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = (z + z.conj().T) / 2
        out[f"jacobi_eigh n={n}"] = lambda m, h=h: m.jacobi_eigh(h)
    plan = loopsynth.plan_doubled(gatelog.gate_spec("cnot"))
    for steps in (1024, 8192):
        f = loopsynth.frames(plan, np.arange(steps + 1) / steps)
        out[f"overlap_product N={steps}"] = lambda m, f=f: m.overlap_product(f)
    f = loopsynth.frames(plan, (np.arange(4000) + 0.5) / 4000)
    psi = plan.E.copy()
    phase = np.exp(-1j * 0.01)
    out["projector_steps N=4000"] = lambda m, f=f: m.projector_steps(psi.copy(), f, phase)
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = sorted(kernels.BACKENDS)
    print(f"{'case':28s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases().items():
        best = {}
        for b in backends:
            mod = kernels.BACKENDS[b]
            fn(mod)  # warm-up
            best[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        line = f"{name:28s}" + "".join(f"{best[b] * 1e3:10.3f}ms" for b in backends)
        if "cython" in best:
            line += f"{best['python'] / best['cython']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
