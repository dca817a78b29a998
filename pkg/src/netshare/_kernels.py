"""Monte-Carlo inner loops.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with the same contract. The numba path is used when numba imports
and ``NETSHARE_DISABLE_NUMBA`` is unset (or ``0``); set it to ``1`` to force
the numpy path. Random numbers are always drawn outside the kernels, so both
paths consume identical inputs.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.spatial import cKDTree

SHARING_CODES = {"none": 0, "infrastructure": 1, "spectrum": 2, "full": 3}

_disabled = os.environ.get("NETSHARE_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by NETSHARE_DISABLE_NUMBA")
    import numba
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


# --------------------------------------------------------------------------
# numpy reference path


def exclusion_mask_numpy(x, y, op, offsets, n_ops, radius):
    mask = np.ones((len(op), n_ops), dtype=bool)
    for j in range(len(offsets) - 1):
        s, e = offsets[j], offsets[j + 1]
        xy = np.column_stack([x[s:e], y[s:e]])
        o = op[s:e]
        for n in range(n_ops):
            own = o == n
            if not own.any() or own.all():
                continue
            hits = cKDTree(xy[own]).query_ball_point(xy[~own], r=radius, return_length=True)
            mask[s:e][np.flatnonzero(~own), n] = hits == 0
    return mask


def block_sinr_numpy(x, y, op, offsets, mask, fades, served, sharing, alpha, noise):
    n_real = len(offsets) - 1
    n_ops = mask.shape[1]
    sinr = np.zeros((n_real, n_ops))
    serving = np.full(n_real, -1, dtype=np.int64)
    dist = np.zeros(n_real)
    half = -0.5 * alpha
    pooled = sharing >= 2
    for j in range(n_real):
        s, e = offsets[j], offsets[j + 1]
        d2 = x[s:e] ** 2 + y[s:e] ** 2
        o = op[s:e]
        cand = d2 if sharing in (1, 3) else np.where(o == served, d2, np.inf)
        if len(cand) == 0 or not np.isfinite(cand.min()):
            continue
        b = int(np.argmin(cand))
        serving[j] = o[b]
        dist[j] = np.sqrt(d2[b])
        pl = 1.0 / (d2 * d2) if alpha == 4.0 else d2**half
        f = fades[s:e]
        m = mask[s:e]
        if not pooled:
            k = o[b]
            col = k if f.shape[1] > 1 else 0
            p = f[:, col] * pl
            others = o == k
            others[b] = False
            sinr[j, k] = p[b] / (noise + p[others].sum())
        else:
            use = m[b]
            eta = use.sum()
            for k in range(n_ops):
                if not use[k]:
                    continue
                col = k if f.shape[1] > 1 else 0
                p = f[:, col] * pl
                intf = m[:, k].copy()
                intf[b] = False
                sinr[j, k] = p[b] / (eta * noise + p[intf].sum())
    return sinr, serving, dist


# --------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _exclusion_mask_nb(x, y, op, offsets, n_ops, radius):
        n = len(op)
        mask = np.ones((n, n_ops), dtype=np.bool_)
        r2 = radius * radius
        for j in range(len(offsets) - 1):
            s, e = offsets[j], offsets[j + 1]
            m = e - s
            if m == 0:
                continue
            x0 = x[s:e].min()
            y0 = y[s:e].min()
            span = max(x[s:e].max() - x0, y[s:e].max() - y0)
            # cells no smaller than the radius, and at most ~4 cells per point
            h = max(radius, 0.5 * span / np.sqrt(m))
            ncol = np.int64(span / h) + 1
            head = np.full(ncol * ncol, -1, dtype=np.int64)
            nxt = np.empty(m, dtype=np.int64)
            cell = np.empty(m, dtype=np.int64)
            for i in range(m):
                cx = min(np.int64((x[s + i] - x0) / h), ncol - 1)
                cy = min(np.int64((y[s + i] - y0) / h), ncol - 1)
                c = cx * ncol + cy
                cell[i] = c
                nxt[i] = head[c]
                head[c] = i
            for i in range(m):
                gi = s + i
                oi = op[gi]
                cx = cell[i] // ncol
                cy = cell[i] % ncol
                for ax in range(max(cx - 1, 0), min(cx + 2, ncol)):
                    for ay in range(max(cy - 1, 0), min(cy + 2, ncol)):
                        t = head[ax * ncol + ay]
                        while t >= 0:
                            gk = s + t
                            ok = op[gk]
                            if ok != oi and mask[gi, ok]:
                                ddx = x[gi] - x[gk]
                                ddy = y[gi] - y[gk]
                                if ddx * ddx + ddy * ddy <= r2:
                                    mask[gi, ok] = False
                            t = nxt[t]
        return mask

    @numba.njit(cache=True, nogil=True, error_model="numpy")
    def _block_sinr_nb(x, y, op, offsets, mask, fades, served, sharing, alpha, noise):
        n_real = len(offsets) - 1
        n_ops = mask.shape[1]
        sinr = np.zeros((n_real, n_ops))
        serving = np.full(n_real, -1, dtype=np.int64)
        dist = np.zeros(n_real)
        half = -0.5 * alpha
        pooled = sharing >= 2
        any_op = sharing == 1 or sharing == 3
        multi = fades.shape[1] > 1
        quartic = alpha == 4.0
        intf = np.zeros(n_ops)
        for j in range(n_real):
            s, e = offsets[j], offsets[j + 1]
            b = -1
            best = np.inf
            for i in range(s, e):
                if any_op or op[i] == served:
                    d2 = x[i] * x[i] + y[i] * y[i]
                    if d2 < best:
                        best = d2
                        b = i
            if b < 0:
                continue
            kb = op[b]
            serving[j] = kb
            dist[j] = np.sqrt(best)
            intf[:] = 0.0
            for i in range(s, e):
                if i == b:
                    continue
                d2 = x[i] * x[i] + y[i] * y[i]
                pl = 1.0 / (d2 * d2) if quartic else d2**half
                if pooled:
                    for k in range(n_ops):
                        if mask[i, k]:
                            intf[k] += fades[i, k if multi else 0] * pl
                elif op[i] == kb:
                    intf[kb] += fades[i, kb if multi else 0] * pl
            plb = 1.0 / (best * best) if quartic else best**half
            if pooled:
                eta = 0
                for k in range(n_ops):
                    if mask[b, k]:
                        eta += 1
                for k in range(n_ops):
                    if mask[b, k]:
                        sinr[j, k] = fades[b, k if multi else 0] * plb / (eta * noise + intf[k])
            else:
                sinr[j, kb] = fades[b, kb if multi else 0] * plb / (noise + intf[kb])
        return sinr, serving, dist


def exclusion_mask_numba(x, y, op, offsets, n_ops, radius):
    return _exclusion_mask_nb(x, y, op, offsets, n_ops, radius)


def block_sinr_numba(x, y, op, offsets, mask, fades, served, sharing, alpha, noise):
    return _block_sinr_nb(x, y, op, offsets, np.ascontiguousarray(mask),
                          np.ascontiguousarray(fades, dtype=np.float64),
                          int(served), int(sharing), float(alpha), float(noise))


BACKEND = "numba" if HAVE_NUMBA else "numpy"


def exclusion_mask(x, y, op, offsets, n_ops, radius):
    """``mask[i, k]`` is False when point ``i`` of another operator lies within
    ``radius`` of some operator-``k`` point of the same realisation."""
    fn = exclusion_mask_numba if HAVE_NUMBA else exclusion_mask_numpy
    return fn(x, y, op, offsets, int(n_ops), float(radius))


def block_sinr(x, y, op, offsets, mask, fades, served, sharing, alpha, noise):
    """Per-band SINR at the origin for every realisation of a block.

    ``fades`` has one column (flat, or scenarios without pooled spectrum)
    or one column per band. Returns ``(sinr, serving_operator, serving_distance)``;
    ``serving_operator`` is -1 where the realisation had no eligible
    transmitter.
    """
    fn = block_sinr_numba if HAVE_NUMBA else block_sinr_numpy
    return fn(x, y, op, offsets, mask, fades, served, sharing, alpha, noise)
