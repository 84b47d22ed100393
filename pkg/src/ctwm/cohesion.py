"""Cohesive sets, decisive links, and reachability on influence networks.

A node set M is cohesive when every member places at least half of its
weight inside M, and maximally cohesive when additionally no outside node
places strictly more than half of its weight into M.  Comparisons against
1/2 are exact: ties at exactly one half carry meaning and must not be
perturbed by tolerances.

A link (i, j) is decisive when some subset of i's out-neighborhood crosses
the one-half threshold only with j included; dropping all indecisive links
yields the decisive graph, whose reachability structure governs whether
consensus is generically possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DegreeTooLargeError, EmptySetError, IncompleteReportError, NotCohesiveError
from .net import InfluenceMatrix

MAX_EXACT_DEGREE = 25
_MEET_IN_MIDDLE_DEGREE = 20


def _as_members(members: Iterable[int], n: int) -> tuple[int, ...]:
    mem = tuple(sorted({int(i) for i in members}))
    if not mem:
        raise EmptySetError("cohesiveness is undefined for the empty set")
    if mem[0] < 0 or mem[-1] >= n:
        raise ValueError(f"node indices {mem} out of range for n={n}")
    return mem


def in_set_mass(members: Iterable[int], W: InfluenceMatrix) -> np.ndarray:
    """For each member i, the total weight i assigns inside the set."""
    mem = _as_members(members, W.n)
    cols = np.asarray(mem, dtype=int)
    return W.weights[np.ix_(cols, cols)].sum(axis=1)


def is_cohesive(members: Iterable[int], W: InfluenceMatrix) -> bool:
    """True iff every member has in-set weight >= 1/2 (exact comparison)."""
    return bool((in_set_mass(members, W) >= 0.5).all())


def is_maximal_cohesive(members: Iterable[int], W: InfluenceMatrix) -> bool:
    """True iff no outside node assigns strictly more than 1/2 to the set.

    The set itself must be cohesive (NotCohesiveError otherwise).
    """
    mem = _as_members(members, W.n)
    if not is_cohesive(mem, W):
        raise NotCohesiveError(f"set {mem} is not cohesive")
    outside = np.setdiff1d(np.arange(W.n), mem, assume_unique=False)
    if outside.size == 0:
        return True
    mass = W.weights[np.ix_(outside, np.asarray(mem))].sum(axis=1)
    return bool((mass <= 0.5).all())


def cohesive_closure(members: Iterable[int], W: InfluenceMatrix) -> frozenset[int]:
    """Smallest maximal cohesive superset of a cohesive set.

    Repeatedly absorbs any outside node assigning strictly more than 1/2
    to the current set; the add rule is monotone, so the fixed point does
    not depend on absorption order.
    """
    mem = _as_members(members, W.n)
    if not is_cohesive(mem, W):
        raise NotCohesiveError(f"set {mem} is not cohesive")
    current = set(mem)
    while True:
        outside = [i for i in range(W.n) if i not in current]
        if not outside:
            break
        cols = np.asarray(sorted(current))
        mass = W.weights[np.ix_(np.asarray(outside), cols)].sum(axis=1)
        newcomers = [i for i, m in zip(outside, mass) if m > 0.5]
        if not newcomers:
            break
        current.update(newcomers)
    return frozenset(current)


@dataclass(frozen=True)
class CohesionReport:
    """Inclusion-minimal cohesive sets plus global-maximality verdict.

    complete is False when enumeration stopped at the subset budget; the
    listed sets are then a subset of the true family.
    """

    n: int
    minimal_cohesive_sets: tuple[frozenset[int], ...]
    only_global_maximal: bool
    complete: bool

    def to_json_dict(self) -> dict:
        return {
            "minimal_cohesive_sets": [sorted(s) for s in self.minimal_cohesive_sets],
            "only_global_maximal": self.only_global_maximal,
            "complete": self.complete,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    def require_complete(self) -> "CohesionReport":
        if not self.complete:
            raise IncompleteReportError("enumeration was budget-truncated")
        return self


def enumerate_minimal_cohesive(W: InfluenceMatrix, limit: int | None = None) -> CohesionReport:
    """Enumerate all inclusion-minimal cohesive sets of G(W).

    Depth-first search over subsets in increasing cardinality with two
    prunes: supersets of already-found minimal sets, and partial sets in
    which some member can no longer reach half mass even if every
    remaining node joins.  `limit` caps explored subsets; on exhaustion a
    partial report is returned with complete=False.

    only_global_maximal is True iff the full node set is the only maximal
    cohesive set, decided by checking that every minimal set's closure is
    the full set.
    """
    n = W.n
    rows = [list(map(float, r)) for r in W.weights]
    # suffix[i][j] = total weight i assigns to nodes j..n-1
    suffix = []
    for i in range(n):
        acc = [0.0] * (n + 1)
        for j in range(n - 1, -1, -1):
            acc[j] = acc[j + 1] + rows[i][j]
        suffix.append(acc)

    found: list[int] = []
    found_members: list[tuple[int, ...]] = []
    explored = 0
    truncated = False
    # Pruning slack: incremental sums may differ from the final exact check
    # in the last ulps; never prune a set that could still pass.
    slack = 1e-9

    def superset_of_found(mask: int) -> bool:
        return any(f & mask == f for f in found)

    def dfs(members: list[int], mask: int, inw: list[float], start: int, k: int) -> bool:
        nonlocal explored, truncated
        explored += 1
        if limit is not None and explored > limit:
            truncated = True
            return False
        if len(members) == k:
            if all(v >= 0.5 for v in inw) and not superset_of_found(mask):
                found.append(mask)
                found_members.append(tuple(members))
            return True
        need = k - len(members)
        for j in range(start, n - need + 1):
            bit = 1 << j
            new_mask = mask | bit
            if superset_of_found(new_mask):
                continue
            new_inw = [v + rows[m][j] for v, m in zip(inw, members)]
            j_inw = sum(rows[j][m] for m in members) + rows[j][j]
            new_inw.append(j_inw)
            pool = j + 1
            if all(v + suffix[m][pool] >= 0.5 - slack
                   for v, m in zip(new_inw, members + [j])):
                if not dfs(members + [j], new_mask, new_inw, pool, k):
                    return False
        return True

    done = True
    for k in range(1, n + 1):
        if not dfs([], 0, [], 0, k):
            done = False
            break

    sets = tuple(frozenset(m) for m in found_members)
    sets = tuple(sorted(sets, key=lambda s: (len(s), sorted(s))))
    complete = done and not truncated
    only_global = complete and all(
        len(cohesive_closure(s, W)) == n for s in sets
    )
    return CohesionReport(
        n=n,
        minimal_cohesive_sets=sets,
        only_global_maximal=only_global,
        complete=complete,
    )


@dataclass(frozen=True)
class DecisiveGraph:
    """Directed graph keeping only the decisive links of G(W)."""

    n: int
    edges: frozenset[tuple[int, int]]

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)


def decisive_links(W: InfluenceMatrix) -> DecisiveGraph:
    """Classify every positive-weight link of G(W) as decisive or not.

    (i, j) is decisive iff some subset S of i's other out-neighbors has
    total weight strictly inside (1/2 - w_ij, 1/2).  Exhaustive subset
    sums decide this up to out-degree 20; meet-in-the-middle handles
    degrees 21..25; beyond that DegreeTooLargeError is raised.
    """
    n = W.n
    edges = set()
    for i in range(n):
        nbrs = np.flatnonzero(W.weights[i] > 0.0)
        d = nbrs.size
        if d > MAX_EXACT_DEGREE:
            raise DegreeTooLargeError(f"node {i} has out-degree {d} > {MAX_EXACT_DEGREE}")
        wts = W.weights[i, nbrs]
        if d <= _MEET_IN_MIDDLE_DEGREE:
            hits = _decisive_by_enumeration(wts)
        else:
            hits = [_decisive_meet_in_middle(wts, b) for b in range(d)]
        for b, hit in enumerate(hits):
            if hit:
                edges.add((i, int(nbrs[b])))
    return DecisiveGraph(n=n, edges=frozenset(edges))


def _decisive_by_enumeration(wts: np.ndarray) -> list[bool]:
    """For each neighbor b: does some subset of the others sum into (1/2 - w_b, 1/2)?"""
    d = wts.size
    sums = np.zeros(1)
    for w in wts:  # subset-sum table indexed by bitmask
        sums = np.concatenate([sums, sums + w])
    masks = np.arange(1 << d)
    out = []
    for b in range(d):
        others = sums[(masks >> b) & 1 == 0]
        lo = 0.5 - wts[b]
        out.append(bool(((others > lo) & (others < 0.5)).any()))
    return out


def _decisive_meet_in_middle(wts: np.ndarray, b: int) -> bool:
    others = np.delete(wts, b)
    half = others.size // 2
    left, right = others[:half], others[half:]

    def subset_sums(arr):
        s = np.zeros(1)
        for w in arr:
            s = np.concatenate([s, s + w])
        return s

    right_sums = np.sort(subset_sums(right))
    lo = 0.5 - wts[b]
    for a in subset_sums(left):
        i0 = np.searchsorted(right_sums, lo - a, side="right")
        i1 = np.searchsorted(right_sums, 0.5 - a, side="left")
        if i1 > i0:
            return True
    return False


def has_globally_reachable_node(g: DecisiveGraph) -> bool:
    """True iff some node is reachable from every node.

    Equivalent to the strongly-connected-component condensation having
    exactly one sink component; the globally reachable nodes are exactly
    that sink's members.
    """
    comp = _scc_ids(g.n, g.edges)
    n_comps = max(comp) + 1 if comp else 0
    is_sink = [True] * n_comps
    for (a, b) in g.edges:
        if comp[a] != comp[b]:
            is_sink[comp[a]] = False
    return int(np.sum(is_sink)) == 1


def _scc_ids(n: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    """Tarjan strongly-connected components, iterative; returns component id per node."""
    adj = [[] for _ in range(n)]
    for (a, b) in edges:
        adj[a].append(b)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    n_comps = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ei = work[-1]
            if ei == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while ei < len(adj[v]):
                w = adj[v][ei]
                ei += 1
                if index[w] == -1:
                    work[-1] = (v, ei)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comps
                    if w == v:
                        break
                n_comps += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comp
