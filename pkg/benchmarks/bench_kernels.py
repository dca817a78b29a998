"""Compare the numba and numpy kernel backends on identical inputs.

    python benchmarks/bench_kernels.py [--realizations 2000] [--repeat 5]

Kernel timings call both implementations directly in one process. The
end-to-end rows run ``simulate`` in a subprocess with and without
NETSHARE_DISABLE_NUMBA=1, so they include sampling and dispatch overhead.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from netshare import _kernels
from netshare.channel import FadingModel, sample_power_fade
from netshare.pointprocess import Window, sample_ppp_block


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(x, y, rtol=1e-12, atol=0) for x, y in zip(a, b))


def bench_kernels(n_real, repeat):
    rng = np.random.default_rng(1)
    window = Window.for_densities((1.0, 1.0))
    block = sample_ppp_block((1.0, 1.0), window, n_real, rng)
    fades = sample_power_fade(FadingModel(band_mode="selective"), len(block.op), 2, rng)
    args = (block.x, block.y, block.op, block.offsets)
    rows = []

    def pair(label, nb, npy):
        t_np, r_np = _best_of(npy, repeat)
        if _kernels.HAVE_NUMBA:
            nb()  # compile outside the timing
            t_nb, r_nb = _best_of(nb, repeat)
            same = _same(r_nb, r_np)
        else:
            t_nb, same = float("nan"), None
        rows.append((label, t_np, t_nb, same))

    mask = np.ones((len(block.op), 2), dtype=bool)
    for sharing in ("none", "spectrum", "full"):
        code = _kernels.SHARING_CODES[sharing]
        f = fades if code >= 2 else fades[:, :1]
        pair(f"sinr/{sharing}",
             lambda: _kernels.block_sinr_numba(*args, mask, f, 0, code, 4.0, 0.0) if _kernels.HAVE_NUMBA else None,
             lambda: _kernels.block_sinr_numpy(*args, mask, f, 0, code, 4.0, 0.0))
    for rs in (0.3, 0.66):
        pair(f"exclusion/R={rs}",
             lambda: _kernels.exclusion_mask_numba(*args, 2, rs) if _kernels.HAVE_NUMBA else None,
             lambda: _kernels.exclusion_mask_numpy(*args, 2, rs))
    return rows


_E2E = """
import time
from netshare.simulator import Scenario, simulate
from netshare.channel import FadingModel
sc = Scenario(sharing="{sharing}", fading=FadingModel(band_mode="selective"), coordination_radius={rs})
simulate(sc, 1000, 0)
t0 = time.perf_counter()
simulate(sc, {n}, 0)
print(time.perf_counter() - t0)
"""


def bench_end_to_end(n, sharing, rs):
    out = {}
    for label, flag in (("numpy", "1"), ("numba", "0")):
        env = dict(os.environ, NETSHARE_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", _E2E.format(sharing=sharing, rs=rs, n=n)],
                             env=env, capture_output=True, text=True, check=True)
        out[label] = float(res.stdout.strip().splitlines()[-1])
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--realizations", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--skip-e2e", action="store_true")
    a = p.parse_args(argv)

    print(f"kernels, {a.realizations} realisations per block (best of {a.repeat})")
    print(f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  match")
    for label, t_np, t_nb, same in bench_kernels(a.realizations, a.repeat):
        print(f"{label:<20}{1e3 * t_np:>12.1f}{1e3 * t_nb:>12.1f}{t_np / t_nb:>10.1f}  {same}")

    if not a.skip_e2e:
        print(f"\nsimulate(), {a.realizations} realisations, selective fading")
        print(f"{'scenario':<20}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
        for sharing, rs in (("none", 0.0), ("full", 0.0), ("spectrum", 0.47)):
            t = bench_end_to_end(a.realizations, sharing, rs)
            label = f"{sharing}" + (f"/R={rs}" if rs else "")
            print(f"{label:<20}{t['numpy']:>12.2f}{t['numba']:>12.2f}{t['numpy'] / t['numba']:>10.1f}")


if __name__ == "__main__":
    main()
