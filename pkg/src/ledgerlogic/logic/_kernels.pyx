# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled tree closure kernels; see ``_kernels_py`` for the contract."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t
ctypedef cnp.uint8_t flag_t


def diamond_up(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.array(mask, dtype=np.uint8, copy=True)
    cdef flag_t[::1] out = out_arr
    for i in range(n - 1, 0, -1):
        if out[i]:
            out[parent[i]] = 1
    return out_arr


def box_down(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.array(mask, dtype=np.uint8, copy=True)
    cdef flag_t[::1] out = out_arr
    for i in range(n - 1, 0, -1):
        if not out[i]:
            out[parent[i]] = 0
    return out_arr


def diamond_down(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.array(mask, dtype=np.uint8, copy=True)
    cdef flag_t[::1] out = out_arr
    for i in range(1, n):
        if out[parent[i]]:
            out[i] = 1
    return out_arr


def box_up(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.array(mask, dtype=np.uint8, copy=True)
    cdef flag_t[::1] out = out_arr
    for i in range(1, n):
        if not out[parent[i]]:
            out[i] = 0
    return out_arr


def next_exists(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef flag_t[::1] out = out_arr
    for i in range(1, n):
        if mask[i]:
            out[parent[i]] = 1
    return out_arr


def next_all(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.ones(n, dtype=np.uint8)
    cdef flag_t[::1] out = out_arr
    for i in range(1, n):
        if not mask[i]:
            out[parent[i]] = 0
    return out_arr


def prev_exists(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef flag_t[::1] out = out_arr
    for i in range(1, n):
        out[i] = mask[parent[i]]
    return out_arr


def prev_all(const idx_t[::1] parent, const flag_t[::1] mask):
    cdef Py_ssize_t n = mask.shape[0], i
    out_arr = np.ones(n, dtype=np.uint8)
    cdef flag_t[::1] out = out_arr
    for i in range(1, n):
        out[i] = mask[parent[i]]
    return out_arr
