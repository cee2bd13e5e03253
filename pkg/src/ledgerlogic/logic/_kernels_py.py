"""Pure-Python tree closure kernels (fallback for the compiled ``_kernels``).

Every kernel takes a ``parent`` index array of a tree whose nodes are stored
in breadth-first order (so ``parent[i] < i``, root has ``-1``) and a 0/1 mask,
and returns a new 0/1 ``uint8`` array.
"""

import numpy as np


def diamond_up(parent, mask):
    """Some prolongation (the node included) is in the mask."""
    out = [int(x) for x in mask]
    par = parent.tolist()
    for i in range(len(out) - 1, 0, -1):
        if out[i]:
            out[par[i]] = 1
    return np.array(out, dtype=np.uint8)


def box_down(parent, mask):
    """Every prolongation (the node included) is in the mask."""
    out = [int(x) for x in mask]
    par = parent.tolist()
    for i in range(len(out) - 1, 0, -1):
        if not out[i]:
            out[par[i]] = 0
    return np.array(out, dtype=np.uint8)


def diamond_down(parent, mask):
    """Some prefix (the node included) is in the mask."""
    out = [int(x) for x in mask]
    par = parent.tolist()
    for i in range(1, len(out)):
        if out[par[i]]:
            out[i] = 1
    return np.array(out, dtype=np.uint8)


def box_up(parent, mask):
    """Every prefix (the node included) is in the mask."""
    out = [int(x) for x in mask]
    par = parent.tolist()
    for i in range(1, len(out)):
        if not out[par[i]]:
            out[i] = 0
    return np.array(out, dtype=np.uint8)


def next_exists(parent, mask):
    m = [int(x) for x in mask]
    out = [0] * len(m)
    par = parent.tolist()
    for i in range(1, len(m)):
        if m[i]:
            out[par[i]] = 1
    return np.array(out, dtype=np.uint8)


def next_all(parent, mask):
    m = [int(x) for x in mask]
    out = [1] * len(m)
    par = parent.tolist()
    for i in range(1, len(m)):
        if not m[i]:
            out[par[i]] = 0
    return np.array(out, dtype=np.uint8)


def prev_exists(parent, mask):
    m = [int(x) for x in mask]
    par = parent.tolist()
    out = [0] * len(m)
    for i in range(1, len(m)):
        out[i] = m[par[i]]
    return np.array(out, dtype=np.uint8)


def prev_all(parent, mask):
    m = [int(x) for x in mask]
    par = parent.tolist()
    out = [1] * len(m)
    for i in range(1, len(m)):
        out[i] = m[par[i]]
    return np.array(out, dtype=np.uint8)
