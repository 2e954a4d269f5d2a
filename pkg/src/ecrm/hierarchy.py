"""Label hierarchies: rooted DAGs with arcs oriented parent -> child."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class HierarchyDag:
    """A directed acyclic graph over ``d`` label nodes.

    Arcs are ``(parent, child)`` pairs with 0-based node ids.  A label
    vector ``y`` in ``{0,1}^d`` is feasible when every active node has all
    of its parents active.
    """

    d: int
    arcs: tuple[tuple[int, int], ...]
    _parents: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _topo: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __init__(self, d: int, arcs) -> None:
        if d < 1:
            raise ValueError("hierarchy needs at least one node")
        arcs = tuple((int(p), int(c)) for p, c in arcs)
        for p, c in arcs:
            if not (0 <= p < d and 0 <= c < d):
                raise ValueError(f"arc ({p},{c}) references a node outside 0..{d - 1}")
            if p == c:
                raise ValueError(f"self-loop at node {p}")
        parents = [[] for _ in range(d)]
        children = [[] for _ in range(d)]
        for p, c in arcs:
            parents[c].append(p)
            children[p].append(c)
        topo = _topological_order(d, parents, children)
        if topo is None:
            raise ValueError("hierarchy contains a cycle")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "_parents", tuple(tuple(ps) for ps in parents))
        object.__setattr__(self, "_children", tuple(tuple(cs) for cs in children))
        object.__setattr__(self, "_topo", tuple(topo))

    def parents(self, j: int) -> tuple[int, ...]:
        return self._parents[j]

    def children(self, j: int) -> tuple[int, ...]:
        return self._children[j]

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.d) if not self._parents[j])

    @property
    def topological_order(self) -> tuple[int, ...]:
        return self._topo

    def ancestors(self, j: int) -> tuple[int, ...]:
        """All strict ancestors of ``j`` (deduplicated, unordered)."""
        seen: set[int] = set()
        stack = list(self._parents[j])
        while stack:
            k = stack.pop()
            if k not in seen:
                seen.add(k)
                stack.extend(self._parents[k])
        return tuple(sorted(seen))

    @property
    def is_arborescence(self) -> bool:
        """True when there is a single root and every other node has one parent."""
        if len(self.roots) != 1:
            return False
        return all(len(self._parents[j]) == 1 for j in range(self.d) if j != self.roots[0])


def _topological_order(d, parents, children):
    indeg = [len(ps) for ps in parents]
    order = [j for j in range(d) if indeg[j] == 0]
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                order.append(v)
    return order if len(order) == d else None
