"""Pinning control: feasibility, minimal pinning sets, simulation check.

Steering the group to an external opinion u succeeds from every initial
condition iff every cohesive set contains a pinned node.  Since every
cohesive set contains an inclusion-minimal one, feasibility and the
minimal pinning set reduce to a hitting-set problem over the minimal
cohesive sets alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cohesion import CohesionReport
from .dynamics import PinningConfig, integrate_batch, pinned_rhs
from .net import InfluenceMatrix


def pinning_feasible(pinned, report: CohesionReport):
    """Whether a pinned set intersects every (minimal) cohesive set.

    Returns (True, None) on success, else (False, witness) where witness
    is a missed minimal cohesive set.  Requires a complete report.
    """
    report.require_complete()
    p = frozenset(int(i) for i in pinned)
    for s in report.minimal_cohesive_sets:
        if not (p & s):
            return False, s
    return True, None


@dataclass(frozen=True)
class PinningSolution:
    """A pinning set, its size, and whether minimality was certified."""

    pinned: frozenset[int]
    size: int
    certified_optimal: bool
    uncovered_witness: frozenset[int] | None = None

    def to_json_dict(self) -> dict:
        return {
            "pinned": sorted(self.pinned),
            "size": self.size,
            "certified_optimal": self.certified_optimal,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def minimal_pinning_set(report: CohesionReport, budget: int | None = None) -> PinningSolution:
    """Exact minimum hitting set over the minimal cohesive sets.

    Branch and bound seeded with the greedy cover (repeatedly pin the node
    hitting the most uncovered sets).  Branches on the smallest uncovered
    set; the lower bound is the size of a greedily packed disjoint
    subfamily.  Ties between equal-size optima resolve to the
    lexicographically smallest sorted node tuple.  `budget` caps explored
    search nodes; on exhaustion the best incumbent found so far (at worst
    the greedy seed) is returned with certified_optimal=False.
    """
    report.require_complete()
    sets = [frozenset(s) for s in report.minimal_cohesive_sets]
    if not sets:
        return PinningSolution(pinned=frozenset(), size=0, certified_optimal=True)

    greedy = _greedy_hitting(sets)
    best: list[tuple[int, ...]] = [tuple(sorted(greedy))]
    explored = 0
    truncated = False

    def lower_bound(uncovered: list[frozenset]) -> int:
        taken: list[frozenset] = []
        for s in sorted(uncovered, key=lambda s: (len(s), sorted(s))):
            if all(not (s & t) for t in taken):
                taken.append(s)
        return len(taken)

    def search(chosen: set[int], uncovered: list[frozenset]) -> bool:
        nonlocal explored, truncated
        explored += 1
        if budget is not None and explored > budget:
            truncated = True
            return False
        if not uncovered:
            cand = tuple(sorted(chosen))
            inc = best[0]
            if len(cand) < len(inc) or (len(cand) == len(inc) and cand < inc):
                best[0] = cand
            return True
        if len(chosen) + lower_bound(uncovered) > len(best[0]):
            return True
        branch = min(uncovered, key=lambda s: (len(s), sorted(s)))
        for node in sorted(branch):
            rest = [s for s in uncovered if node not in s]
            if not search(chosen | {node}, rest):
                return False
        return True

    certified = search(set(), sets)
    pinned = frozenset(best[0])
    return PinningSolution(pinned=pinned, size=len(pinned),
                           certified_optimal=certified and not truncated)


def _greedy_hitting(sets: list[frozenset]) -> set[int]:
    uncovered = list(sets)
    chosen: set[int] = set()
    while uncovered:
        counts: dict[int, int] = {}
        for s in uncovered:
            for node in s:
                counts[node] = counts.get(node, 0) + 1
        node = min(counts, key=lambda v: (-counts[v], v))
        chosen.add(node)
        uncovered = [s for s in uncovered if node not in s]
    return chosen


def verify_pinning_by_simulation(W: InfluenceMatrix, cfg: PinningConfig, trials: int,
                                 tol: float, *, t_max: float = 500.0, step: float = 0.02,
                                 spread: float = 5.0, seed: int = 0) -> float:
    """Fraction of random starts whose pinned dynamics reach the target opinion.

    Draws `trials` initial conditions uniformly from [u - spread, u + spread]^n
    and integrates the pinned dynamics until every trajectory comes within
    `tol` of u*1 in max norm or t_max elapses.  Expected 1.0 exactly when
    pinning is feasible.
    """
    rng = np.random.default_rng(seed)
    u = cfg.target
    X0 = u + spread * (2.0 * rng.random((trials, W.n)) - 1.0)
    out = integrate_batch(X0, lambda X: pinned_rhs(X, W, cfg),
                          step=step, t_max=t_max, eq_tol=1e-12,
                          target=u, target_tol=tol)
    return float(out.reached_target.mean())
