"""Pure-Python attractor kernel; same contract as the compiled one."""

from array import array
from collections import deque


def attractor(succ_ptr, succ_idx, pred_ptr, pred_idx, owner, active, target, player):
    """Attractor of ``target`` for ``player`` inside the ``active`` subarena.

    All sequences are indexed by vertex number. ``owner[v]`` is 0 for Éloïse
    and 1 for Abelard. Returns ``(attr, strategy)``: ``attr`` is a bytearray
    mask and ``strategy[v]`` is, for a vertex of ``player`` attracted in at
    least one step, its lowest-numbered active successor of smaller rank
    (``-1`` elsewhere).
    """
    n = len(owner)
    attr = bytearray(n)
    rank = array("i", [-1]) * n
    count = array("i", [0]) * n
    queue = deque()
    for v in range(n):
        if not active[v]:
            continue
        if target[v]:
            attr[v] = 1
            rank[v] = 0
            queue.append(v)
        elif owner[v] != player:
            c = 0
            for i in range(succ_ptr[v], succ_ptr[v + 1]):
                if active[succ_idx[i]]:
                    c += 1
            count[v] = c
    while queue:
        w = queue.popleft()
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
            queue.append(v)
    strategy = array("i", [-1]) * n
    for v in range(n):
        if attr[v] and rank[v] > 0 and owner[v] == player:
            for i in range(succ_ptr[v], succ_ptr[v + 1]):
                w = succ_idx[i]
                if active[w] and attr[w] and rank[w] < rank[v]:
                    if strategy[v] < 0 or w < strategy[v]:
                        strategy[v] = w
    return attr, strategy
