"""Integer s-t max-flow with search-tree reuse (Boykov-Kolmogorov).

Terminal arcs are folded into a per-node residual ``tr`` (positive: residual
capacity from the source, negative: residual capacity to the sink), the way
vision graph-cut codes usually store them.  Capacities must be Python ints;
callers scale rationals by a common denominator first.
"""
from __future__ import annotations

from collections import deque

TERMINAL = -1
ORPHAN = -2
FREE = -3
_INF = float("inf")


class FlowNetwork:
    """Directed network on ``n`` inner nodes plus implicit source and sink.

    Arc ``a`` and its reverse ``a ^ 1`` are stored side by side.
    """

    def __init__(self, n: int):
        self.n = n
        self.tr = [0] * n
        self.adj = [[] for _ in range(n)]
        self.head = []
        self.cap = []
        self.flow = 0
        self._solved = False

    def add_tweights(self, i: int, cap_source: int, cap_sink: int):
        if cap_source < 0 or cap_sink < 0:
            raise ValueError("terminal capacities must be nonnegative")
        delta = self.tr[i]
        if delta > 0:
            cap_source += delta
        else:
            cap_sink -= delta
        self.flow += min(cap_source, cap_sink)
        self.tr[i] = cap_source - cap_sink

    def add_edge(self, i: int, j: int, cap: int, rev_cap: int = 0):
        if cap < 0 or rev_cap < 0:
            raise ValueError("arc capacities must be nonnegative")
        a = len(self.head)
        self.head.extend((j, i))
        self.cap.extend((cap, rev_cap))
        self.adj[i].append(a)
        self.adj[j].append(a + 1)

    def maxflow(self) -> int:
        if self._solved:
            return self.flow
        n = self.n
        tr, adj, head, cap = self.tr, self.adj, self.head, self.cap
        parent = [FREE] * n
        is_sink = [False] * n
        ts = [0] * n
        dist = [0] * n
        active = deque()
        queued = [False] * n
        orphans = deque()

        def set_active(j):
            if not queued[j]:
                queued[j] = True
                active.append(j)

        for i in range(n):
            if tr[i] != 0:
                parent[i] = TERMINAL
                is_sink[i] = tr[i] < 0
                dist[i] = 1
                set_active(i)

        time = 0
        current = None
        while True:
            i = current
            if i is not None and parent[i] == FREE:
                i = None
            if i is None:
                while active:
                    i = active.popleft()
                    queued[i] = False
                    if parent[i] != FREE:
                        break
                    i = None
                if i is None:
                    break

            # growth
            mid = None
            if not is_sink[i]:
                for a in adj[i]:
                    if cap[a]:
                        j = head[a]
                        pj = parent[j]
                        if pj == FREE:
                            is_sink[j] = False
                            parent[j] = a ^ 1
                            ts[j] = ts[i]
                            dist[j] = dist[i] + 1
                            set_active(j)
                        elif is_sink[j]:
                            mid = a
                            break
                        elif ts[j] <= ts[i] and dist[j] > dist[i]:
                            parent[j] = a ^ 1
                            ts[j] = ts[i]
                            dist[j] = dist[i] + 1
            else:
                for a in adj[i]:
                    if cap[a ^ 1]:
                        j = head[a]
                        pj = parent[j]
                        if pj == FREE:
                            is_sink[j] = True
                            parent[j] = a ^ 1
                            ts[j] = ts[i]
                            dist[j] = dist[i] + 1
                            set_active(j)
                        elif not is_sink[j]:
                            mid = a ^ 1
                            break
                        elif ts[j] <= ts[i] and dist[j] > dist[i]:
                            parent[j] = a ^ 1
                            ts[j] = ts[i]
                            dist[j] = dist[i] + 1

            time += 1
            if mid is None:
                current = None
                continue
            current = i

            # augmentation along source-path + mid + sink-path
            bottleneck = cap[mid]
            k = head[mid ^ 1]
            while parent[k] != TERMINAL:
                a = parent[k]
                if cap[a ^ 1] < bottleneck:
                    bottleneck = cap[a ^ 1]
                k = head[a]
            if tr[k] < bottleneck:
                bottleneck = tr[k]
            k = head[mid]
            while parent[k] != TERMINAL:
                a = parent[k]
                if cap[a] < bottleneck:
                    bottleneck = cap[a]
                k = head[a]
            if -tr[k] < bottleneck:
                bottleneck = -tr[k]

            cap[mid ^ 1] += bottleneck
            cap[mid] -= bottleneck
            k = head[mid ^ 1]
            while True:
                a = parent[k]
                if a == TERMINAL:
                    break
                cap[a] += bottleneck
                cap[a ^ 1] -= bottleneck
                if not cap[a ^ 1]:
                    parent[k] = ORPHAN
                    orphans.appendleft(k)
                k = head[a]
            tr[k] -= bottleneck
            if not tr[k]:
                parent[k] = ORPHAN
                orphans.appendleft(k)
            k = head[mid]
            while True:
                a = parent[k]
                if a == TERMINAL:
                    break
                cap[a ^ 1] += bottleneck
                cap[a] -= bottleneck
                if not cap[a]:
                    parent[k] = ORPHAN
                    orphans.appendleft(k)
                k = head[a]
            tr[k] += bottleneck
            if not tr[k]:
                parent[k] = ORPHAN
                orphans.appendleft(k)
            self.flow += bottleneck

            # adoption
            while orphans:
                o = orphans.popleft()
                sink_side = is_sink[o]
                best, d_min = None, _INF
                for a0 in adj[o]:
                    if not (cap[a0] if sink_side else cap[a0 ^ 1]):
                        continue
                    j = head[a0]
                    if is_sink[j] != sink_side or parent[j] == FREE:
                        continue
                    d = 0
                    k = j
                    while True:
                        if ts[k] == time:
                            d += dist[k]
                            break
                        a = parent[k]
                        d += 1
                        if a == TERMINAL:
                            ts[k] = time
                            dist[k] = 1
                            break
                        if a == ORPHAN:
                            d = _INF
                            break
                        k = head[a]
                    if d < _INF:
                        if d < d_min:
                            best, d_min = a0, d
                        k = j
                        while ts[k] != time:
                            ts[k] = time
                            dist[k] = d
                            d -= 1
                            k = head[parent[k]]
                if best is not None:
                    parent[o] = best
                    ts[o] = time
                    dist[o] = d_min + 1
                    continue
                for a0 in adj[o]:
                    j = head[a0]
                    pj = parent[j]
                    if is_sink[j] != sink_side or pj == FREE:
                        continue
                    if cap[a0] if sink_side else cap[a0 ^ 1]:
                        set_active(j)
                    if pj != TERMINAL and pj != ORPHAN and head[pj] == o:
                        parent[j] = ORPHAN
                        orphans.append(j)
                parent[o] = FREE

        self._solved = True
        return self.flow

    def source_side(self) -> list:
        """Nodes reachable from the source in the residual graph.

        This is the unique minimal source set among all minimum cuts, which
        makes the cut canonical regardless of augmentation order.
        """
        self.maxflow()
        seen = [False] * self.n
        stack = [i for i in range(self.n) if self.tr[i] > 0]
        for i in stack:
            seen[i] = True
        while stack:
            i = stack.pop()
            for a in self.adj[i]:
                if self.cap[a] > 0:
                    j = self.head[a]
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
        return seen
