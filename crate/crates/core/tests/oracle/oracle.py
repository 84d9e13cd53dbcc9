"""Brute-force reference values, written to frozen.json.

Every quantity is computed from its definition by enumerating all cubes of
the grid; nothing here shares code with the Rust crate. Run from this
directory:

    python3 oracle.py > frozen.json
"""

import itertools
import json
import math
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).resolve().parent


def cubes(n, dim):
    """All axis-parallel grid cubes inside [0, n)^dim as (anchor, side)."""
    for side in range(1, n + 1):
        for anchor in itertools.product(range(n - side + 1), repeat=dim):
            yield anchor, side


def dyadic_cubes(n, dim):
    side = n
    while side >= 1:
        for anchor in itertools.product(range(0, n, side), repeat=dim):
            yield anchor, side
        side //= 2


def block(a, anchor, side):
    return a[tuple(slice(s, s + side) for s in anchor)]


def maximal(f, cube_list):
    """Largest mean of |f| over the listed cubes containing each cell."""
    g = np.abs(f)
    out = np.zeros_like(g)
    for anchor, side in cube_list:
        sl = tuple(slice(s, s + side) for s in anchor)
        out[sl] = np.maximum(out[sl], g[sl].mean())
    return out


def fujii_wilson(w, family):
    dim, n = w.ndim, w.shape[0]
    all_cubes = list(cubes(n, dim)) if family == "all" else list(dyadic_cubes(n, dim))
    best = 0.0
    for anchor, side in all_cubes:
        mask = np.zeros_like(w)
        mask[tuple(slice(s, s + side) for s in anchor)] = 1.0
        # the maximal function ranges over every cube of the grid
        m = maximal(w * mask, all_cubes)
        best = max(best, block(m, anchor, side).sum() / block(w, anchor, side).sum())
    return best


def a1(w):
    m = maximal(w, list(cubes(w.shape[0], w.ndim)))
    return float((m / w).max())


def bmo(f, family):
    cl = cubes(f.shape[0], f.ndim) if family == "all" else dyadic_cubes(f.shape[0], f.ndim)
    best = 0.0
    for anchor, side in cl:
        b = block(f, anchor, side)
        best = max(best, float(np.abs(b - b.mean()).mean()))
    return best


def centers(n, dim):
    c = (np.arange(n) + 0.5) / n
    return np.meshgrid(*([c] * dim), indexing="ij")


def power_weight(n, dim, a, center):
    xs = centers(n, dim)
    d = np.sqrt(sum((x - c) ** 2 for x, c in zip(xs, center)))
    return np.maximum(d, 0.5 / n) ** a


def two_valued(n, dim, k):
    w = np.ones((n,) * dim)
    w[n // 2 :] = k
    return w


def llogl(w):
    m = maximal(w, list(cubes(w.shape[0], w.ndim)))
    wq = w.mean()
    rhs = ((1.0 + np.maximum(np.log(w / wq), 0.0)) * w).mean()
    return float(m.mean() / rhs)


def main():
    out = {}
    out["fw_two_valued_d1_n16_k8_all"] = fujii_wilson(two_valued(16, 1, 8.0), "all")
    out["fw_two_valued_d2_n8_k8_all"] = fujii_wilson(two_valued(8, 2, 8.0), "all")
    out["fw_power_a1_d1_n64_all"] = fujii_wilson(power_weight(64, 1, 1.0, [0.5]), "all")
    out["fw_power_a4_d1_n64_all"] = fujii_wilson(power_weight(64, 1, 4.0, [0.5]), "all")
    out["fw_power_a1_d1_n64_dyadic"] = fujii_wilson(power_weight(64, 1, 1.0, [0.5]), "dyadic")

    f = np.loadtxt(HERE / "random_dyadic_bmo.csv")
    out["bmo_random_dyadic_seed42_n64_all"] = bmo(f, "all")
    out["bmo_random_dyadic_seed42_n64_dyadic"] = bmo(f, "dyadic")

    spike = np.zeros(32)
    spike[16] = 32.0
    m = maximal(spike, list(cubes(32, 1)))
    w = np.maximum(np.sqrt(m), 1e-12)
    out["a1_family_center_d1_n32_delta_half"] = a1(w)

    w = np.ones(16)
    w[5] = 100.0
    out["llogl_spike_d1_n16_cell5_h100_whole"] = llogl(w)

    out = {k: float(v) for k, v in out.items()}
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
