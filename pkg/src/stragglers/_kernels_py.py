"""Vectorized numpy implementation of the per-chunk job simulation.

Same contract as the compiled ``_kernels.simulate_chunk``: ``x`` holds the k
original lifetimes per run, ``y`` the lifetimes of every copy that could be
started at the delay (layout documented in ``simulator.extra_columns``).
Outputs are written into the preallocated arrays.
"""
import numpy as np

MODE_NONE, MODE_REPLICATE, MODE_CODE = 0, 1, 2


def simulate_chunk(x, y, mode, c, n, delta, relaunch, lat, cc, cn, nrel):
    runs, k = x.shape
    early = x < delta
    R = early.sum(axis=1)
    done = R == k

    # jobs finishing before the delay never see redundancy
    lat[:] = x.max(axis=1)
    cc[:] = x.sum(axis=1)
    cn[:] = cc
    nrel[:] = 0
    rows = np.flatnonzero(~done)
    if rows.size == 0:
        return
    xs, ys, es = x[rows], y[rows], early[rows]
    if mode == MODE_CODE:
        _coded(xs, ys, es, R[rows], k, n, delta, relaunch, rows, lat, cc, cn)
    else:
        _replicated(xs, ys, es, k, c, delta, relaunch, rows, lat, cc, cn)
    if relaunch:
        nrel[rows] = k - R[rows]


def _replicated(xs, ys, es, k, c, delta, relaunch, rows, lat, cc, cn):
    w = c + 1 if relaunch else c
    copies = ys.reshape(len(rows), k, w)
    first = copies.min(axis=2)
    if relaunch:
        fin = delta + first
        c_cancel = delta + (c + 1) * first
        c_full = delta + copies.sum(axis=2)
    else:
        fin = np.minimum(xs, delta + first)
        c_cancel = fin + c * (fin - delta)
        c_full = xs + copies.sum(axis=2)
    fin = np.where(es, xs, fin)
    lat[rows] = fin.max(axis=1)
    cc[rows] = np.where(es, xs, c_cancel).sum(axis=1)
    cn[rows] = np.where(es, xs, c_full).sum(axis=1)


def _coded(xs, ys, es, R, k, n, delta, relaunch, rows, lat, cc, cn):
    m = len(rows)
    parity = ys[:, k:] if relaunch else ys
    if relaunch:
        orig_fin = delta + ys[:, :k]
        orig_start = np.full((m, k), delta)
    else:
        orig_fin = xs
        orig_start = np.zeros((m, k))
    # tasks already finished before the delay are not in the running set
    orig_fin = np.where(es, np.inf, orig_fin)
    fin = np.concatenate([orig_fin, delta + parity], axis=1)
    start = np.concatenate([orig_start, np.full(parity.shape, delta)], axis=1)
    need = k - R
    T = np.take_along_axis(np.sort(fin, axis=1), (need - 1)[:, None], axis=1)[:, 0]
    running = np.isfinite(fin)
    pre = np.where(es, xs, delta if relaunch else 0.0).sum(axis=1)
    lat[rows] = T
    cc[rows] = pre + np.where(running, np.minimum(fin, T[:, None]) - start, 0.0).sum(axis=1)
    cn[rows] = pre + np.where(running, fin - start, 0.0).sum(axis=1)
