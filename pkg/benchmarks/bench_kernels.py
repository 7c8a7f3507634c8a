"""Compiled vs NumPy trial kernels.

Times each kernel on the same channel batch and the full estimator loop
under both backends, and checks that they agree.

    python3 benchmarks/bench_kernels.py [--trials N] [--relays N] [--repeat K]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from selrelay.chanmodel import NetworkConfig, Scheme, rng_stream, sample_channels
from selrelay.kernels import _fallback

try:
    from selrelay.kernels import _core
except ImportError:
    _core = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(n, relays, repeat):
    cfg = NetworkConfig(relays, 10.0, 10.0)
    batch = sample_channels(rng_stream(1), cfg, n)
    noise = rng_stream(1, 0, 1).standard_normal((n, 3)) * np.sqrt(0.5)
    noise0 = np.ascontiguousarray(noise[:, 0])
    beta, best, g1 = _fallback.effective_snr(batch.g0, batch.sr, batch.rd, Scheme.SCR.code)
    cases = {
        "effective_snr": lambda m: m.effective_snr(batch.g0, batch.sr, batch.rd, Scheme.SCR.code),
        "conditional_ber": lambda m: m.conditional_ber(beta),
        "genie_errors": lambda m: m.genie_errors(beta, noise0),
        "df_errors": lambda m: m.df_errors(batch.g0, batch.sr, batch.rd, best, g1, noise, Scheme.SCR.code),
    }
    print(f"kernels, {n} trials, N_R={relays} (best of {repeat})")
    print(f"  {'kernel':<16s} {'numpy ms':>10s} {'compiled ms':>12s} {'speedup':>8s}")
    for name, call in cases.items():
        t_py = _best(lambda: call(_fallback), repeat)
        if _core is None:
            print(f"  {name:<16s} {1e3 * t_py:10.2f} {'n/a':>12s}")
            continue
        t_c = _best(lambda: call(_core), repeat)
        print(f"  {name:<16s} {1e3 * t_py:10.2f} {1e3 * t_c:12.2f} {t_py / t_c:7.2f}x")
    if _core is not None:
        a = np.asarray(_core.conditional_ber(beta))
        b = _fallback.conditional_ber(beta)
        d1 = np.asarray(_core.df_errors(batch.g0, batch.sr, batch.rd, best, g1, noise, Scheme.SCR.code)).sum()
        d2 = _fallback.df_errors(batch.g0, batch.sr, batch.rd, best, g1, noise, Scheme.SCR.code).sum()
        print(f"  max rel diff conditional_ber {np.max(np.abs(a - b) / b):.1e}; df error counts {d1} vs {d2}")


_END_TO_END = """
import time
from selrelay import kernels
from selrelay.chanmodel import NetworkConfig, Scheme
from selrelay.montecarlo import SimMode, estimate_ber
cfg = NetworkConfig({relays}, 10.0, 10.0)
t = time.perf_counter()
r = estimate_ber(Scheme.SCR, SimMode.SYMBOL_DF, cfg, {n}, 1)
print(kernels.BACKEND, time.perf_counter() - t, r.estimate)
"""


def bench_end_to_end(n, relays):
    print(f"estimate_ber SCR SYMBOL_DF, {n} trials, N_R={relays}")
    for pure in ("0", "1"):
        env = dict(os.environ, SELRELAY_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", _END_TO_END.format(relays=relays, n=n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<9s} {float(out[1]):7.3f} s  estimate {float(out[2]):.6e}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=1 << 20)
    p.add_argument("--relays", type=int, default=4)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    bench_kernels(args.trials, args.relays, args.repeat)
    bench_end_to_end(4 * args.trials, args.relays)


if __name__ == "__main__":
    main()
