"""Compiled inner loop of the tabulated engine."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def tabulate(agents, obs, nobs, pool, npool, offsets, sig, q, tie_eps, tie_z):
    """Estimate decision tables from forward runs.

    ``sig`` has shape ``(n, R)`` and holds signals drawn under theta = 1; the
    theta = 0 runs use the complementary bits. Returns flat per-cell arrays
    (actions, posteriors, counts under each theta) indexed through
    ``offsets``. Pooled neighbours contribute their number of 1-actions,
    shifted above the individually observed bits. A cell whose smoothed posterior lies within ``tie_z``
    standard errors of 1/2 is treated as a tie.
    """
    n, R = sig.shape
    total = offsets[-1]
    actions = np.zeros(total, dtype=np.uint8)
    post = np.zeros(total, dtype=np.float64)
    c1 = np.zeros(total, dtype=np.float64)
    c0 = np.zeros(total, dtype=np.float64)
    # Complemented signals make every table antisymmetric (by induction over
    # agents), so theta = 0 actions are 1 - theta = 1 actions and the theta = 0
    # count of a cell is the theta = 1 count of its complement.
    act = np.zeros((n, R), dtype=np.uint8)
    keys = np.empty(R, dtype=np.int64)
    for v in agents:
        m = nobs[v]
        off = offsets[v]
        size = offsets[v + 1] - off
        low = (np.int64(1) << (m + 1)) - 1
        # column-at-a-time passes keep the inner loops contiguous
        for r in range(R):
            keys[r] = sig[v, r]
        for j in range(m):
            row = act[obs[v, j]]
            for r in range(R):
                keys[r] |= np.int64(row[r]) << (j + 1)
        for j in range(npool[v]):
            row = act[pool[v, j]]
            for r in range(R):
                keys[r] += np.int64(row[r]) << (m + 1)
        for r in range(R):
            c1[off + keys[r]] += 1.0
        for k in range(size):
            comp = (~k & low) + ((npool[v] - (k >> (m + 1))) << (m + 1))
            c0[off + k] = c1[off + comp]
        for k in range(size):
            band = tie_eps
            if size == 2:
                p = q if k == 1 else 1.0 - q
            else:
                cnt = c1[off + k] + c0[off + k] + 2.0
                p = (c1[off + k] + 1.0) / cnt
                band = max(tie_eps, tie_z * 0.5 / np.sqrt(cnt))
            post[off + k] = p
            if p > 0.5 + band:
                actions[off + k] = 1
            elif p < 0.5 - band:
                actions[off + k] = 0
            else:
                actions[off + k] = k & 1
        for r in range(R):
            act[v, r] = actions[off + keys[r]]
    return actions, post, c1, c0


@njit(cache=True)
def replay(agents, obs, nobs, pool, npool, offsets, actions, signals):
    """Actions for each row of ``signals`` (shape ``(rows, n)``)."""
    rows, n = signals.shape
    out = np.zeros((rows, n), dtype=np.uint8)
    for r in range(rows):
        for v in agents:
            k = np.int64(signals[r, v])
            for j in range(nobs[v]):
                k |= np.int64(out[r, obs[v, j]]) << (j + 1)
            c = np.int64(0)
            for j in range(npool[v]):
                c += out[r, pool[v, j]]
            k += c << (nobs[v] + 1)
            out[r, v] = actions[offsets[v] + k]
    return out
