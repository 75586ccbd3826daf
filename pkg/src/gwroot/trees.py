"""Rooted and free trees with stable integer node ids.

A rooted tree keeps an explicit root and ordered child lists; a free tree is
the same vertex set with the root forgotten, only adjacency left.  Node ids
are 0-based and never change under forgetting or re-rooting, so quantities
computed for different rootings of one free tree can be compared id by id.

Interchange formats (JSON):
  rooted  {"n": n, "parent": [-1, p1, ...]}   parents in preorder indexing
  free    {"n": n, "edges": [[u, v], ...]}    u < v, edges sorted
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .distribution import OffspringDistribution
from .errors import InvalidSequenceError, NodeOutOfRangeError


@dataclass(frozen=True)
class RootedTree:
    """Tree with a distinguished root; children[v] lists v's children."""

    n: int
    root: int
    children: Tuple[Tuple[int, ...], ...]

    def parent_array(self) -> List[int]:
        parent = [-1] * self.n
        for v, kids in enumerate(self.children):
            for c in kids:
                parent[c] = v
        return parent

    def preorder(self) -> List[int]:
        order = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(self.children[v]))
        return order

    def degree_sequence(self) -> Tuple[int, ...]:
        """Numbers of children in preorder; the decode counterpart lives in
        the sampler module."""
        return tuple(len(self.children[v]) for v in self.preorder())

    def tree_degree(self, v: int) -> int:
        return len(self.children[v])


@dataclass(frozen=True)
class FreeTree:
    """Unrooted tree as sorted adjacency lists."""

    n: int
    neighbors: Tuple[Tuple[int, ...], ...]

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def edges(self) -> List[Tuple[int, int]]:
        out = [
            (v, w) for v in range(self.n) for w in self.neighbors[v] if v < w
        ]
        out.sort()
        return out


def forget_root(tree: RootedTree) -> FreeTree:
    """Drop the root, keeping ids; the caller remembers tree.root if needed."""
    adj: List[List[int]] = [[] for _ in range(tree.n)]
    for v, kids in enumerate(tree.children):
        for c in kids:
            adj[v].append(c)
            adj[c].append(v)
    return FreeTree(tree.n, tuple(tuple(sorted(a)) for a in adj))


def free_tree_from_edges(n: int, edges: Iterable[Sequence[int]]) -> FreeTree:
    """Build a free tree from an edge list, validating shape and connectivity."""
    adj: List[List[int]] = [[] for _ in range(n)]
    count = 0
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise InvalidSequenceError(f"bad edge ({u}, {v}) for n = {n}")
        adj[u].append(v)
        adj[v].append(u)
        count += 1
    if count != n - 1:
        raise InvalidSequenceError(f"{count} edges, expected {n - 1}")
    # Connectivity check; n-1 edges + connected = tree.
    seen = [False] * n
    stack = [0]
    seen[0] = True
    reached = 1
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                reached += 1
                stack.append(w)
    if reached != n:
        raise InvalidSequenceError("edge list is not connected")
    return FreeTree(n, tuple(tuple(sorted(a)) for a in adj))


def reroot(free: FreeTree, u: int) -> RootedTree:
    """Orient the free tree away from u; children listed in id order."""
    if not (0 <= u < free.n):
        raise NodeOutOfRangeError(f"node {u} outside 0..{free.n - 1}")
    children: List[Tuple[int, ...]] = [() for _ in range(free.n)]
    parent = [-1] * free.n
    order = [u]
    seen = [False] * free.n
    seen[u] = True
    for v in order:
        kids = [w for w in free.neighbors[v] if not seen[w]]
        for w in kids:
            seen[w] = True
            parent[w] = v
        children[v] = tuple(kids)
        order.extend(kids)
    return RootedTree(free.n, u, tuple(children))


def degree_census(free: FreeTree) -> Counter:
    """Graph-degree counts {degree: how many nodes}."""
    return Counter(len(a) for a in free.neighbors)


def degree_census_rooted(tree: RootedTree) -> Counter:
    """Child-count (tree-degree) counts {count: how many nodes}."""
    return Counter(len(kids) for kids in tree.children)


def weighted_sum_W(
    free: FreeTree,
    dist: OffspringDistribution,
    exact: bool = False,
) -> Union[float, Fraction]:
    """Sum over nodes of ratio(graph degree).

    This is the normaliser of the root posterior; for a tree drawn from the
    conditioned process it concentrates around n.  Returns inf when some node
    has a special graph degree.  With exact=True (rational-backed laws only)
    the sum is a Fraction.
    """
    table = dist.ratio_table()
    if exact:
        if not dist.is_rational:
            raise InvalidSequenceError("exact W needs a rational-backed distribution")
        total = Fraction(0)
        for a in free.neighbors:
            d = len(a)
            if d < table.size and table.special[d]:
                return math.inf
            q = table.lookup_exact(d)
            total += q
        return total
    total_f = 0.0
    for a in free.neighbors:
        d = len(a)
        if d < table.size and table.special[d]:
            return math.inf
        total_f += table.lookup_value(d)
    return total_f


# -- JSON interchange -------------------------------------------------------


def rooted_to_json(tree: RootedTree) -> Dict:
    """Serialise with preorder indexing so parent[i] < i always holds."""
    order = tree.preorder()
    pos = {v: i for i, v in enumerate(order)}
    parent_of = tree.parent_array()
    parents = [-1] + [pos[parent_of[v]] for v in order[1:]]
    return {"n": tree.n, "parent": parents}


def rooted_from_json(data: Dict) -> RootedTree:
    n = int(data.get("n", -1))
    parents = data.get("parent")
    if n < 1 or not isinstance(parents, list) or len(parents) != n:
        raise InvalidSequenceError("rooted tree JSON needs n >= 1 and a parent list of length n")
    if parents[0] != -1:
        raise InvalidSequenceError("parent[0] must be -1")
    children: List[List[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        p = int(parents[i])
        if not (0 <= p < i):
            raise InvalidSequenceError(f"parent[{i}] = {p} violates preorder indexing")
        children[p].append(i)
    return RootedTree(n, 0, tuple(tuple(kids) for kids in children))


def free_to_json(free: FreeTree) -> Dict:
    return {"n": free.n, "edges": [[u, v] for u, v in free.edges()]}


def free_from_json(data: Dict) -> FreeTree:
    n = int(data.get("n", -1))
    edges = data.get("edges")
    if n < 1 or not isinstance(edges, list):
        raise InvalidSequenceError("free tree JSON needs n >= 1 and an edge list")
    return free_tree_from_edges(n, edges)
