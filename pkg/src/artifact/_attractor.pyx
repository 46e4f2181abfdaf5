# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled attractor kernel; see _attractor_py for the contract."""

from array import array


def attractor(const int[:] succ_ptr, const int[:] succ_idx,
              const int[:] pred_ptr, const int[:] pred_idx,
              const unsigned char[:] owner, const unsigned char[:] active,
              const unsigned char[:] target, int player):
    cdef Py_ssize_t n = owner.shape[0]
    cdef Py_ssize_t v, w, i, head = 0, tail = 0
    cdef int c
    attr_obj = bytearray(n)
    cdef unsigned char[:] attr = attr_obj
    rank_obj = array("i", [-1]) * n
    count_obj = array("i", [0]) * n
    queue_obj = array("i", [0]) * (n if n > 0 else 1)
    strat_obj = array("i", [-1]) * n
    cdef int[:] rank = rank_obj
    cdef int[:] count = count_obj
    cdef int[:] queue = queue_obj
    cdef int[:] strategy = strat_obj

    for v in range(n):
        if not active[v]:
            continue
        if target[v]:
            attr[v] = 1
            rank[v] = 0
            queue[tail] = v
            tail += 1
        elif owner[v] != player:
            c = 0
            for i in range(succ_ptr[v], succ_ptr[v + 1]):
                if active[succ_idx[i]]:
                    c += 1
            count[v] = c
    while head < tail:
        w = queue[head]
        head += 1
        for i in range(pred_ptr[w], pred_ptr[w + 1]):
            v = pred_idx[i]
            if not active[v] or attr[v]:
                continue
            if owner[v] != player:
                count[v] -= 1
                if count[v] > 0:
                    continue
            attr[v] = 1
            rank[v] = rank[w] + 1
            queue[tail] = v
            tail += 1
    for v in range(n):
        if attr[v] and rank[v] > 0 and owner[v] == player:
            for i in range(succ_ptr[v], succ_ptr[v + 1]):
                w = succ_idx[i]
                if active[w] and attr[w] and rank[w] < rank[v]:
                    if strategy[v] < 0 or w < strategy[v]:
                        strategy[v] = w
    return attr_obj, strat_obj
