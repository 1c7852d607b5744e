"""Bitset kernels over the complete binary tree of a fixed depth.

Binary nodes are encoded as ``(value, length)`` with ``value`` the bits read
as a big-endian integer.  Two layouts are used:

* leaf masks: ``2**depth`` booleans, one per node of length ``depth``
  (equivalently one per basic clopen piece of that depth);
* tree masks: heap layout of all nodes of length ``<= depth``; the node
  ``(v, l)`` sits at index ``2**l - 1 + v``.

Each kernel has a numba ``@njit`` version and a pure numpy version.  The
numpy path is selected with ``OFFBRANCH_DISABLE_NUMBA=1`` or when numba is
missing.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("OFFBRANCH_DISABLE_NUMBA", "") not in ("1", "true", "yes")

# heap layouts beyond this are refused; 2**23 booleans is already 8 MB
MAX_DEPTH = 22


def encode(stems) -> tuple[np.ndarray, np.ndarray]:
    """Pack binary nodes into ``(values, lengths)`` int64 arrays."""
    stems = list(stems)
    values = np.zeros(len(stems), dtype=np.int64)
    lengths = np.zeros(len(stems), dtype=np.int64)
    for k, s in enumerate(stems):
        v = 0
        for bit in s:
            v = (v << 1) | bit
        values[k] = v
        lengths[k] = len(s)
    return values, lengths


def heap_index(sigma) -> int:
    v = 0
    for bit in sigma:
        v = (v << 1) | bit
    return (1 << len(sigma)) - 1 + v


def heap_node(index: int) -> tuple[int, ...]:
    index = int(index)
    length = (index + 1).bit_length() - 1
    v = index - ((1 << length) - 1)
    return tuple((v >> (length - 1 - i)) & 1 for i in range(length))


def _check_depth(depth: int) -> None:
    if depth < 0 or depth > MAX_DEPTH:
        raise ValueError(f"depth {depth} outside [0, {MAX_DEPTH}]")


# --- numpy path -----------------------------------------------------------


def _np_leaf_mask(values, lengths, depth):
    leaves = np.arange(1 << depth, dtype=np.int64)
    out = np.zeros(1 << depth, dtype=np.bool_)
    for v, l in zip(values, lengths):
        if l <= depth:
            out |= (leaves >> (depth - l)) == v
        else:
            # a stem longer than the window still meets one leaf's subtree
            out[v >> (l - depth)] = True
    return out


def _np_tree_mask(values, lengths, depth):
    out = np.zeros((1 << (depth + 1)) - 1, dtype=np.bool_)
    for lev in range(depth + 1):
        lo = (1 << lev) - 1
        vs = np.arange(1 << lev, dtype=np.int64)
        row = np.zeros(1 << lev, dtype=np.bool_)
        for v, l in zip(values, lengths):
            if l <= lev:
                row |= (vs >> (lev - l)) == v
            else:
                row[v >> (l - lev)] = True
        out[lo : lo + (1 << lev)] = row
    return out


def _np_split_counts(mask, depth):
    n = mask.shape[0]
    counts = np.full(n, -1, dtype=np.int64)
    splits = np.zeros(n, dtype=np.bool_)
    inner = (1 << depth) - 1
    idx = np.arange(inner)
    splits[:inner] = mask[:inner] & mask[2 * idx + 1] & mask[2 * idx + 2]
    if n and mask[0]:
        counts[0] = 0
    for lev in range(1, depth + 1):
        lo = (1 << lev) - 1
        hi = lo + (1 << lev)
        child = np.arange(lo, hi)
        parent = (child - 1) // 2
        c = counts[parent] + splits[parent].astype(np.int64)
        counts[lo:hi] = np.where(mask[lo:hi] & (counts[parent] >= 0), c, -1)
    return counts


# --- numba path -----------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_leaf_mask(values, lengths, depth):
        out = np.zeros(1 << depth, dtype=np.bool_)
        for k in range(values.shape[0]):
            v = values[k]
            l = lengths[k]
            if l <= depth:
                shift = depth - l
                lo = v << shift
                for leaf in range(lo, lo + (1 << shift)):
                    out[leaf] = True
            else:
                out[v >> (l - depth)] = True
        return out

    @njit(cache=True)
    def _nb_tree_mask(values, lengths, depth):
        out = np.zeros((1 << (depth + 1)) - 1, dtype=np.bool_)
        for k in range(values.shape[0]):
            v = values[k]
            l = lengths[k]
            top = l if l < depth else depth
            # prefixes of the stem
            for lev in range(top + 1):
                out[(1 << lev) - 1 + (v >> (l - lev))] = True
            # the full subtree above the stem
            for lev in range(l + 1, depth + 1):
                shift = lev - l
                lo = (1 << lev) - 1 + (v << shift)
                for j in range(lo, lo + (1 << shift)):
                    out[j] = True
        return out

    @njit(cache=True)
    def _nb_split_counts(mask, depth):
        n = mask.shape[0]
        counts = np.full(n, -1, dtype=np.int64)
        inner = (1 << depth) - 1
        if n > 0 and mask[0]:
            counts[0] = 0
        for i in range(inner):
            if counts[i] < 0:
                continue
            split = mask[2 * i + 1] and mask[2 * i + 2]
            c = counts[i] + (1 if split else 0)
            if mask[2 * i + 1]:
                counts[2 * i + 1] = c
            if mask[2 * i + 2]:
                counts[2 * i + 2] = c
        return counts


def leaf_mask(stems, depth: int, *, use_numba: bool | None = None) -> np.ndarray:
    """Leaves of depth ``depth`` lying in the union of the intervals of ``stems``."""
    _check_depth(depth)
    values, lengths = encode(stems)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return _nb_leaf_mask(values, lengths, depth)
    return _np_leaf_mask(values, lengths, depth)


def tree_mask(stems, depth: int, *, use_numba: bool | None = None) -> np.ndarray:
    """Heap mask of nodes of length ``<= depth`` comparable with some stem."""
    _check_depth(depth)
    values, lengths = encode(stems)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return _nb_tree_mask(values, lengths, depth)
    return _np_tree_mask(values, lengths, depth)


def split_counts(mask: np.ndarray, depth: int, *, use_numba: bool | None = None) -> np.ndarray:
    """Number of splitting proper ancestors of each node of a tree mask.

    Absent nodes get ``-1``; so do nodes cut off from the root.  A node
    splits when both children are present, which is only detectable below
    ``depth``.
    """
    _check_depth(depth)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return _nb_split_counts(mask, depth)
    return _np_split_counts(mask, depth)
