"""Reachability kernels used by the oracle.

Every kernel exists twice: a numba ``@njit`` loop (``*_jit``) and a
vectorized numpy version (``*_np``). The public names dispatch on
``crdtkit._jit.JIT_DISABLED`` so both paths stay importable and testable.
"""

import numpy as np

from crdtkit import _jit
from crdtkit._jit import njit


@njit(cache=True)
def closure_jit(adj):
    n = adj.shape[0]
    reach = adj.copy()
    for k in range(n):
        for i in range(n):
            if reach[i, k]:
                for j in range(n):
                    if reach[k, j]:
                        reach[i, j] = True
    return reach


def closure_np(adj):
    reach = adj.copy()
    for k in range(reach.shape[0]):
        col = reach[:, k]
        if col.any():
            reach |= np.outer(col, reach[k, :])
    return reach


@njit(cache=True)
def followed_jit(reach, src, dst, src_key, dst_key):
    out = np.zeros(src.shape[0], dtype=np.bool_)
    for a in range(src.shape[0]):
        for b in range(dst.shape[0]):
            if src_key[a] == dst_key[b] and reach[src[a], dst[b]]:
                out[a] = True
                break
    return out


def followed_np(reach, src, dst, src_key, dst_key):
    if src.shape[0] == 0 or dst.shape[0] == 0:
        return np.zeros(src.shape[0], dtype=np.bool_)
    same = src_key[:, None] == dst_key[None, :]
    return (reach[np.ix_(src, dst)] & same).any(axis=1)


@njit(cache=True)
def preceded_by_all_jit(reach, src, dst, src_key, dst_key):
    out = np.ones(src.shape[0], dtype=np.bool_)
    for a in range(src.shape[0]):
        for b in range(dst.shape[0]):
            if src_key[a] == dst_key[b] and not reach[dst[b], src[a]]:
                out[a] = False
                break
    return out


def preceded_by_all_np(reach, src, dst, src_key, dst_key):
    if src.shape[0] == 0 or dst.shape[0] == 0:
        return np.ones(src.shape[0], dtype=np.bool_)
    same = src_key[:, None] == dst_key[None, :]
    before = reach[np.ix_(dst, src)].T
    return ~(same & ~before).any(axis=1)


def transitive_closure(adj):
    """Boolean reachability matrix (strict: no implicit reflexive edges)."""
    adj = np.ascontiguousarray(adj, dtype=np.bool_)
    if _jit.JIT_DISABLED:
        return closure_np(adj)
    return closure_jit(adj)


def _idx(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def followed_by_same_key(reach, src, dst, src_key, dst_key):
    """For each ``src[a]``: is there a ``dst[b]`` with equal key and src -> dst?"""
    args = (reach, _idx(src), _idx(dst), _idx(src_key), _idx(dst_key))
    if _jit.JIT_DISABLED:
        return followed_np(*args)
    return followed_jit(*args)


def preceded_by_all_same_key(reach, src, dst, src_key, dst_key):
    """For each ``src[a]``: does every ``dst[b]`` with equal key reach it?"""
    args = (reach, _idx(src), _idx(dst), _idx(src_key), _idx(dst_key))
    if _jit.JIT_DISABLED:
        return preceded_by_all_np(*args)
    return preceded_by_all_jit(*args)
