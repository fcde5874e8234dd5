"""Reference belief propagation for the plain (attribute-free) block model.

Independent pure-Python implementation used to check that the attributed
engine collapses to standard SBM message passing when R = 1. It mirrors the
engine's schedule contract (same seed streams, same node orders, prior-plus-
uniform-noise initialization, incremental field with an exact end-of-sweep
refresh) so trajectories are comparable one sweep at a time.
"""
from __future__ import annotations

import math

import numpy as np

from attrisbm.rng import STREAM_BP_INIT, STREAM_BP_SCHEDULE, RngSeed


class ReferenceSbmBP:
    def __init__(self, n, edges, cmat, prior, seed, perturbation=0.1):
        self.n = n
        self.K = len(prior)
        self.cmat = np.asarray(cmat, dtype=np.float64)
        self.prior = np.asarray(prior, dtype=np.float64)

        adj = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        self.adj = [sorted(nbrs) for nbrs in adj]
        indptr = [0]
        for i in range(n):
            indptr.append(indptr[-1] + len(self.adj[i]))
        self.indptr = indptr
        self.slot = {}
        for i in range(n):
            for s, l in enumerate(self.adj[i]):
                self.slot[(l, i)] = indptr[i] + s  # message l -> i lives in i's range

        master = RngSeed(seed)
        rng = master.stream(STREAM_BP_INIT)
        nmsg = indptr[-1]
        prior_cols = np.tile(self.prior, (nmsg, 1))
        prior_cols += rng.random((nmsg, self.K)) * perturbation
        self.msg = prior_cols / prior_cols.sum(axis=1, keepdims=True)
        marginals = np.tile(self.prior, (n, 1))
        marginals += rng.random((n, self.K)) * perturbation
        self.marginals = marginals / marginals.sum(axis=1, keepdims=True)
        self.schedule = master.stream(STREAM_BP_SCHEDULE)
        self.h = self._field_from_scratch()
        self.last_delta = math.inf

    def _field_from_scratch(self):
        sums = self.marginals.sum(axis=0)[None, :]
        caff4 = self.cmat.reshape(self.K, 1, self.K, 1)
        return np.einsum("krms,sm->kr", caff4, sums) / self.n

    def sweep(self):
        K = self.K
        delta = 0.0
        order = self.schedule.permutation(self.n).astype(np.int64)
        for i in order:
            nbrs = self.adj[i]
            deg = len(nbrs)
            base = np.empty(K)
            for k in range(K):
                base[k] = self.prior[k] * math.exp(-self.h[k, 0])
            if deg > 0:
                t = np.empty((deg, K))
                for s, l in enumerate(nbrs):
                    m_in = self.msg[self.slot[(l, i)]]
                    for k in range(K):
                        acc = 0.0
                        for kl in range(K):
                            acc += self.cmat[kl, k] * m_in[kl]
                        t[s, k] = acc
                pre = np.empty((deg + 1, K))
                suf = np.empty((deg + 1, K))
                pre[0, :] = 1.0
                suf[deg, :] = 1.0
                for s in range(deg):
                    zp = 0.0
                    for k in range(K):
                        pre[s + 1, k] = pre[s, k] * t[s, k]
                        zp += pre[s + 1, k]
                    for k in range(K):
                        pre[s + 1, k] /= zp
                for s in range(deg - 1, -1, -1):
                    zs = 0.0
                    for k in range(K):
                        suf[s, k] = suf[s + 1, k] * t[s, k]
                        zs += suf[s, k]
                    for k in range(K):
                        suf[s, k] /= zs
                for s, l in enumerate(nbrs):
                    out = np.empty(K)
                    z = 0.0
                    for k in range(K):
                        val = base[k] * pre[s, k] * suf[s + 1, k]
                        out[k] = val
                        z += val
                    q = self.slot[(i, l)]
                    for k in range(K):
                        newv = out[k] / z
                        dv = abs(newv - self.msg[q, k])
                        if dv > delta:
                            delta = dv
                        self.msg[q, k] = newv
                mar = np.empty(K)
                z = 0.0
                for k in range(K):
                    val = base[k] * pre[deg, k]
                    mar[k] = val
                    z += val
            else:
                mar = base.copy()
                z = 0.0
                for k in range(K):
                    z += mar[k]
            for k in range(K):
                mar[k] /= z
            for k in range(K):
                acc = 0.0
                for k2 in range(K):
                    acc += self.cmat[k, k2] * (mar[k2] - self.marginals[i, k2])
                self.h[k, 0] += (1.0 / self.n) * acc
            for k in range(K):
                self.marginals[i, k] = mar[k]
        self.h = self._field_from_scratch()
        self.last_delta = delta
        return delta
