"""numba vs numpy kernels: RK4 frame paths, Durand-Kerner roots, batched SL2 exponentials.

    python benchmarks/bench_backends.py [--repeat 5] [--json out.json]

Both backends are imported directly, so ARTIFACT_NO_NUMBA does not matter here.
Prints best-of-N wall time per kernel and the max difference between the two outputs.
"""
import argparse
import json
import time

import numpy as np

from artifact import _kernels_nb as nb
from artifact import _kernels_np as npk
from artifact.fixtures import load_fixture
from artifact.zeroflow import default_lambda_samples


def best(fn, repeat):
    fn()                                    # warm up (jit compile, caches)
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t)
    return min(ts), out


def case_rk4(k, lines=41, steps=40, sub=4):
    zeta = load_fixture("genus1")
    lams = default_lambda_samples("cmc", 1.0)
    C = np.repeat(zeta.c[None], lines, 0)
    F = np.broadcast_to(np.eye(2, dtype=complex), (lines, len(lams), 2, 2)).copy()
    G = np.zeros((lines, 2, 2), complex)
    return lambda: k.rk4_path(C, F, G, -1, 0, lams, 1.0, 0.0125, steps, sub, 1, 0, 0.0, 1.0)[1]


def case_roots(k, deg=12, count=200):
    rng = np.random.default_rng(7)
    polys = rng.normal(size=(count, deg + 1)) + 1j * rng.normal(size=(count, deg + 1))
    polys[:, -1] = 1
    z0 = (0.4 + 0.9j) ** np.arange(deg)

    def run():
        return np.array([np.sort_complex(k.dk_roots(p, z0.copy(), 1e-14, 500)[0]) for p in polys])
    return run


def case_expm(k, n=200_000):
    rng = np.random.default_rng(3)
    A = rng.normal(size=(n, 2, 2)) + 1j * rng.normal(size=(n, 2, 2))
    A[:, 1, 1] = -A[:, 0, 0]
    return lambda: k.expm_sl2_batch(A)


CASES = {"rk4_path": case_rk4, "dk_roots": case_roots, "expm_sl2": case_expm}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    rows = []
    print(f"{'kernel':10s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, make in CASES.items():
        t_nb, o_nb = best(make(nb), args.repeat)
        t_np, o_np = best(make(npk), args.repeat)
        diff = float(np.max(np.abs(np.asarray(o_nb) - np.asarray(o_np))))
        rows.append({"kernel": name, "numba": t_nb, "numpy": t_np, "speedup": t_np / t_nb, "max_diff": diff})
        print(f"{name:10s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f} {diff:10.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
