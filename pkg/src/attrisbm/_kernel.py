"""Hot loop of the message-passing sweep, JIT-compiled with numba.

Message storage: for node i, slots indptr[i]..indptr[i+1] hold the incoming
messages; slot p carries the message from neighbors[p] into the slot's owner,
and twin[p] is the slot of the reverse direction. The kernel visits nodes in
the given order and, per node, recomputes all outgoing messages from fresh
incoming values (asynchronous schedule), refreshes the node's marginal and
applies the incremental field update.

Returns (last_delta, err_kind, err_a, err_b); err_kind 0 is success, 1 is a
message-normalizer underflow on edge err_a -> err_b, 2 is a marginal
underflow at node err_a.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def sweep_kernel(indptr, neighbors, twin, attrs, caff, prior, h, msg, marginals,
                 order, inv_n, damping):
    K = prior.shape[0]
    R = prior.shape[1]
    delta = 0.0
    for oi in range(order.shape[0]):
        i = order[oi]
        ri = attrs[i]
        start = indptr[i]
        deg = indptr[i + 1] - start

        base = np.empty(K)
        for k in range(K):
            base[k] = prior[k, ri] * math.exp(-h[k, ri])

        if deg > 0:
            # edge terms: t[s, k] = sum_kl c[(kl, r_l), (k, r_i)] * msg_in[s, kl]
            t = np.empty((deg, K))
            for s in range(deg):
                rl = attrs[neighbors[start + s]]
                for k in range(K):
                    acc = 0.0
                    for kl in range(K):
                        acc += caff[kl, rl, k, ri] * msg[start + s, kl]
                    t[s, k] = acc

            # running products are renormalized to stay scaled at any degree;
            # the scale factors cancel when each message is normalized
            pre = np.empty((deg + 1, K))
            suf = np.empty((deg + 1, K))
            for k in range(K):
                pre[0, k] = 1.0
                suf[deg, k] = 1.0
            for s in range(deg):
                zp = 0.0
                for k in range(K):
                    pre[s + 1, k] = pre[s, k] * t[s, k]
                    zp += pre[s + 1, k]
                if not (zp > 0.0 and np.isfinite(zp)):
                    return delta, 1, i, neighbors[start + s]
                for k in range(K):
                    pre[s + 1, k] /= zp
            for s in range(deg - 1, -1, -1):
                zs = 0.0
                for k in range(K):
                    suf[s, k] = suf[s + 1, k] * t[s, k]
                    zs += suf[s, k]
                if not (zs > 0.0 and np.isfinite(zs)):
                    return delta, 1, i, neighbors[start + s]
                for k in range(K):
                    suf[s, k] /= zs

            for s in range(deg):
                z = 0.0
                out = np.empty(K)
                for k in range(K):
                    val = base[k] * pre[s, k] * suf[s + 1, k]
                    out[k] = val
                    z += val
                if not (z > 0.0 and np.isfinite(z)):
                    return delta, 1, i, neighbors[start + s]
                q = twin[start + s]
                for k in range(K):
                    newv = out[k] / z
                    if damping > 0.0:
                        newv = (1.0 - damping) * newv + damping * msg[q, k]
                    dv = abs(newv - msg[q, k])
                    if dv > delta:
                        delta = dv
                    msg[q, k] = newv

            z = 0.0
            mar = np.empty(K)
            for k in range(K):
                val = base[k] * pre[deg, k]
                mar[k] = val
                z += val
        else:
            z = 0.0
            mar = np.empty(K)
            for k in range(K):
                mar[k] = base[k]
                z += base[k]
        if not (z > 0.0 and np.isfinite(z)):
            return delta, 2, i, -1
        for k in range(K):
            mar[k] /= z

        # incremental field update for the marginal change at node i
        for k in range(K):
            for r in range(R):
                acc = 0.0
                for k2 in range(K):
                    acc += caff[k, r, k2, ri] * (mar[k2] - marginals[i, k2])
                h[k, r] += inv_n * acc
        for k in range(K):
            marginals[i, k] = mar[k]

    return delta, 0, -1, -1
