"""Opinion dynamics: vector fields, fixed-step integration, equilibrium reports.

The free dynamics relax every opinion toward its weighted median,
x' = Med(x; W) - x.  Pinned nodes are additionally attracted to an external
target opinion.  Equilibria are exactly the states whose level sets, taken
from the top down, are all maximal cohesive sets; the classifier clusters a
state into levels and tests that prefix property.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .cohesion import is_cohesive, is_maximal_cohesive
from .errors import ConfigError, DimensionMismatchError, NonFiniteStateError
from .median import median_operator
from .net import InfluenceMatrix


def ctwm_rhs(x, W: InfluenceMatrix) -> np.ndarray:
    """Right-hand side Med(x; W) - x; accepts a state (n,) or a batch (m, n)."""
    X = np.asarray(x, dtype=float)
    return median_operator(X, W) - X


@dataclass(frozen=True)
class PinningConfig:
    """Pinned node set with per-node attraction strengths and a target opinion.

    gamma_i must be positive (at most 1) exactly for pinned nodes and zero
    elsewhere.  An empty pinned set with all-zero gamma reduces the pinned
    dynamics to the free dynamics.
    """

    pinned: frozenset[int]
    gamma: np.ndarray
    target: float

    def __post_init__(self):
        pinned = frozenset(int(i) for i in self.pinned)
        g = np.ascontiguousarray(np.asarray(self.gamma, dtype=float))
        if g.ndim != 1:
            raise ConfigError("gamma must be a 1-d vector")
        if pinned and (min(pinned) < 0 or max(pinned) >= g.size):
            raise ConfigError(f"pinned nodes {sorted(pinned)} out of range for n={g.size}")
        for i in range(g.size):
            if i in pinned:
                if not 0.0 < g[i] <= 1.0:
                    raise ConfigError(f"gamma[{i}]={g[i]!r} must lie in (0, 1] for a pinned node")
            elif g[i] != 0.0:
                raise ConfigError(f"gamma[{i}]={g[i]!r} must be 0 for an unpinned node")
        g.flags.writeable = False
        object.__setattr__(self, "pinned", pinned)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "target", float(self.target))

    @classmethod
    def uniform(cls, pinned: Iterable[int], n: int, gamma: float = 0.5,
                target: float = 0.0) -> "PinningConfig":
        """Constant attraction strength `gamma` on every pinned node."""
        pinned = frozenset(int(i) for i in pinned)
        g = np.zeros(n)
        for i in pinned:
            g[i] = gamma
        return cls(pinned=pinned, gamma=g, target=target)


def pinned_rhs(x, W: InfluenceMatrix, cfg: PinningConfig, form: str = "blend") -> np.ndarray:
    """Right-hand side of the externally pinned dynamics.

    form="blend" (default): x_i' = g_i u + (1 - g_i) Med_i(x; W) - x_i, so
    each pinned node relaxes toward the convex blend of the target u and
    its weighted median, and u*1 is an equilibrium.

    form="injection": x_i' = g_i u + (1 - g_i) (Med_i(x; W) - x_i), a
    variant that scales the median relaxation and injects a constant
    source; u*1 is then an equilibrium only for u = 0.  Exposed for
    comparison, not used by default.

    With gamma identically zero both forms reduce exactly to ctwm_rhs.
    """
    X = np.asarray(x, dtype=float)
    if X.shape[-1] != W.n or cfg.gamma.size != W.n:
        raise DimensionMismatchError(
            f"state shape {X.shape} / gamma size {cfg.gamma.size} do not match n={W.n}")
    med = median_operator(X, W)
    g = cfg.gamma
    u = cfg.target
    if form == "blend":
        return g * u + (1.0 - g) * med - X
    if form == "injection":
        return g * u + (1.0 - g) * (med - X)
    raise ConfigError(f"unknown pinned form {form!r}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of one integration run.

    residual is the final infinity norm of the vector field; converged
    means the residual stayed below the equilibrium tolerance at three
    consecutive sample times (or was exactly zero at the start).
    """

    times: np.ndarray
    states: np.ndarray
    converged: bool
    residual: float

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path, meta: dict | None = None) -> None:
        """Write `t,x_0,...,x_{n-1}` rows; meta entries become `# key: value` lines."""
        n = self.states.shape[1]
        lines = []
        for key, value in (meta or {}).items():
            lines.append(f"# {key}: {json.dumps(value)}")
        lines.append("t," + ",".join(f"x_{i}" for i in range(n)))
        for t, row in zip(self.times, self.states):
            lines.append(format(t, ".17g") + "," + ",".join(format(v, ".17g") for v in row))
        Path(path).write_text("\n".join(lines) + "\n")


MAX_STEP = 0.1
_CONSECUTIVE_SAMPLES = 3


def _check_step(step: float, eq_tol: float) -> None:
    if not 0.0 < step <= MAX_STEP:
        raise ConfigError(f"step must lie in (0, {MAX_STEP}], got {step}")
    if eq_tol <= 0.0:
        raise ConfigError(f"eq_tol must be positive, got {eq_tol}")


def _rk4_step(rhs: Callable, X: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(X)
    k2 = rhs(X + 0.5 * h * k1)
    k3 = rhs(X + 0.5 * h * k2)
    k4 = rhs(X + h * k3)
    return X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(x0, rhs: Callable, *, step: float = 0.01, t_max: float = 100.0,
              eq_tol: float = 1e-9, sample_stride: int = 10,
              method: str = "rk4") -> Trajectory:
    """Advance x' = rhs(x) with the classical four-stage fixed-step scheme.

    Stops once the residual max-norm of rhs stays below eq_tol at three
    consecutive sample times (converged) or at t_max (not converged).
    States are recorded every `sample_stride` steps plus the final state.
    method="euler" switches to the explicit Euler fallback used for
    cross-checking; the vector field is continuous but nonsmooth, so no
    derivatives of rhs are ever required.
    """
    _check_step(step, eq_tol)
    if sample_stride < 1:
        raise ConfigError(f"sample_stride must be >= 1, got {sample_stride}")
    if method not in ("rk4", "euler"):
        raise ConfigError(f"unknown method {method!r}")
    x = np.array(x0, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatchError(f"x0 must be 1-d, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise NonFiniteStateError("initial state contains non-finite entries")

    times = [0.0]
    states = [x.copy()]
    residual = float(np.abs(rhs(x)).max())
    if residual == 0.0:
        return Trajectory(np.asarray(times), np.asarray(states), True, residual)

    n_steps = int(np.ceil(t_max / step - 1e-9))
    consecutive = 1 if residual < eq_tol else 0
    converged = False
    for k in range(1, n_steps + 1):
        x = _rk4_step(rhs, x, step) if method == "rk4" else x + step * rhs(x)
        if k % sample_stride == 0 or k == n_steps:
            if not np.isfinite(x).all():
                raise NonFiniteStateError(f"non-finite state at t={k * step}")
            times.append(k * step)
            states.append(x.copy())
            residual = float(np.abs(rhs(x)).max())
            consecutive = consecutive + 1 if residual < eq_tol else 0
            if consecutive >= _CONSECUTIVE_SAMPLES:
                converged = True
                break
    return Trajectory(np.asarray(times), np.asarray(states), converged, residual)


@dataclass(frozen=True)
class BatchOutcome:
    """Final states of a batch integration plus per-trajectory verdicts."""

    final: np.ndarray
    converged: np.ndarray
    residual: np.ndarray
    t_end: float
    max_dev: np.ndarray | None = None
    reached_target: np.ndarray | None = None


def integrate_batch(X0, rhs: Callable, *, step: float = 0.01, t_max: float = 100.0,
                    eq_tol: float = 1e-9, check_stride: int = 10,
                    reference=None, target: float | None = None,
                    target_tol: float = 0.0) -> BatchOutcome:
    """Integrate many trajectories of the same vector field in lockstep.

    All trajectories advance until every one has converged (residual below
    eq_tol at three consecutive checks, or exactly zero at the start) or
    t_max is reached.  Optionally tracks the running max-norm deviation
    from a reference state (checked every step) and whether each
    trajectory ever came within target_tol of the constant state target*1
    (checked every `check_stride` steps); once every trajectory has
    reached the target the run stops early.
    """
    _check_step(step, eq_tol)
    X = np.array(X0, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatchError(f"X0 must be 2-d, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise NonFiniteStateError("initial states contain non-finite entries")
    m = X.shape[0]

    ref = None if reference is None else np.asarray(reference, dtype=float)
    max_dev = None if ref is None else np.abs(X - ref).max(axis=1)
    reached = None if target is None else np.zeros(m, dtype=bool)

    res = np.abs(rhs(X)).max(axis=1)
    converged = res == 0.0
    consecutive = (res < eq_tol).astype(int)
    if target is not None:
        reached |= np.abs(X - target).max(axis=1) < target_tol

    n_steps = int(np.ceil(t_max / step - 1e-9))
    t_end = 0.0
    if not (converged.all() and (reached is None or reached.all())):
        for k in range(1, n_steps + 1):
            X = _rk4_step(rhs, X, step)
            t_end = k * step
            if max_dev is not None:
                np.maximum(max_dev, np.abs(X - ref).max(axis=1), out=max_dev)
            if k % check_stride == 0 or k == n_steps:
                if not np.isfinite(X).all():
                    raise NonFiniteStateError(f"non-finite state at t={t_end}")
                res = np.abs(rhs(X)).max(axis=1)
                consecutive = np.where(res < eq_tol, consecutive + 1, 0)
                converged |= consecutive >= _CONSECUTIVE_SAMPLES
                if reached is not None:
                    reached |= np.abs(X - target).max(axis=1) < target_tol
                    if reached.all():
                        break
                if converged.all():
                    break
    return BatchOutcome(final=X, converged=converged, residual=res, t_end=t_end,
                        max_dev=max_dev, reached_target=reached)


def order_statistics(x, cluster_tol: float = 0.0):
    """Cluster a state into decreasing opinion levels.

    Values within cluster_tol of each other, transitively along the sorted
    sequence (single linkage), share a level; cluster_tol=0 gives exact
    distinctness.  Returns (levels, level_sets): levels is a decreasing
    array of cluster means and level_sets[k] holds the node indices at
    levels[k].
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"state must be a nonempty vector, got shape {v.shape}")
    order = np.argsort(-v, kind="stable")
    sv = v[order]
    breaks = np.flatnonzero(sv[:-1] - sv[1:] > cluster_tol) + 1
    bounds = np.concatenate([[0], breaks, [v.size]])
    levels = []
    level_sets = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        levels.append(float(sv[a:b].mean()))
        level_sets.append(frozenset(int(i) for i in order[a:b]))
    return np.asarray(levels), level_sets


class EquilibriumClass(str, Enum):
    CONSENSUS = "consensus"
    DISAGREEMENT = "disagreement_equilibrium"
    NOT_EQUILIBRIUM = "not_equilibrium"


@dataclass(frozen=True)
class EquilibriumReport:
    """Clustered levels of a state and the prefix maximal-cohesiveness tests."""

    levels: tuple[float, ...]
    level_sets: tuple[frozenset[int], ...]
    prefix_maximal: tuple[bool, ...]
    classification: EquilibriumClass

    def to_json_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "level_sets": [sorted(s) for s in self.level_sets],
            "prefix_maximal": list(self.prefix_maximal),
            "classification": self.classification.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def classify_equilibrium(x, W: InfluenceMatrix,
                         cluster_tol: float = 1e-5) -> EquilibriumReport:
    """Decide whether a state is a consensus, a disagreement equilibrium, or neither.

    The state is an equilibrium iff each top-down prefix of its level sets
    is a maximal cohesive set; a single level is a consensus.
    """
    levels, level_sets = order_statistics(x, cluster_tol)
    prefix: set[int] = set()
    prefix_maximal = []
    for s in level_sets:
        prefix |= s
        prefix_maximal.append(
            is_cohesive(prefix, W) and is_maximal_cohesive(prefix, W))
    if len(levels) == 1:
        cls = EquilibriumClass.CONSENSUS
    elif all(prefix_maximal):
        cls = EquilibriumClass.DISAGREEMENT
    else:
        cls = EquilibriumClass.NOT_EQUILIBRIUM
    return EquilibriumReport(
        levels=tuple(float(v) for v in levels),
        level_sets=tuple(level_sets),
        prefix_maximal=tuple(prefix_maximal),
        classification=cls,
    )
