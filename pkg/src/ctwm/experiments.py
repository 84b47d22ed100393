"""Monte-Carlo sweeps of the minimal pinning number over network families.

For each parameter value (link probability for Erdos-Renyi, rewiring
probability for Watts-Strogatz) a batch of random networks is generated,
their minimal cohesive sets enumerated, and the exact minimal pinning
number solved; per-parameter sample statistics summarize how resilience
to external manipulation depends on network structure.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cohesion import enumerate_minimal_cohesive
from .control import minimal_pinning_set
from .errors import ConfigError
from .net import GraphGenConfig, GraphModel, gen_network

CI95_FACTOR = 1.96


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a network family, parameter grid, and replicate count."""

    family: GraphModel
    n: int
    params: tuple[float, ...]
    replicates: int
    seed: int = 0
    mean_out_degree: int | None = None
    enumeration_budget: int | None = 2_000_000

    def __post_init__(self):
        object.__setattr__(self, "family", GraphModel(self.family))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if not self.params:
            raise ConfigError("params must be nonempty")
        for p in self.params:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"sweep parameter {p} outside [0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "family": self.family.value,
            "n": self.n,
            "params": list(self.params),
            "replicates": self.replicates,
            "seed": self.seed,
            "mean_out_degree": self.mean_out_degree,
            "enumeration_budget": self.enumeration_budget,
        }


@dataclass(frozen=True)
class SweepPoint:
    """Statistics of the minimal pinning number at one parameter value."""

    param: float
    mean: float
    sd: float
    ci95: float
    truncated_count: int


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    points: tuple[SweepPoint, ...]

    def to_csv(self, path, meta: dict | None = None) -> None:
        """Write `param,mean,sd,ci95,truncated_count` rows, `# `-prefixed metadata first."""
        lines = [f"# config: {json.dumps(self.config.to_json_dict())}"]
        for key, value in (meta or {}).items():
            lines.append(f"# {key}: {json.dumps(value)}")
        lines.append("param,mean,sd,ci95,truncated_count")
        for pt in self.points:
            lines.append(f"{pt.param:.17g},{pt.mean:.17g},{pt.sd:.17g},{pt.ci95:.17g},{pt.truncated_count}")
        Path(path).write_text("\n".join(lines) + "\n")


def replicate_seed(master: int, param_index: int, replicate_index: int) -> int:
    """Derive an independent 64-bit seed for one sweep replicate."""
    ss = np.random.SeedSequence((master, param_index, replicate_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_replicate(args) -> int | None:
    """Pinning number of one generated network, or None when enumeration truncated."""
    family, n, param, degree, seed, budget = args
    cfg = GraphGenConfig(model=family, n=n, p=param, seed=seed, mean_out_degree=degree)
    report = enumerate_minimal_cohesive(gen_network(cfg), limit=budget)
    if not report.complete:
        return None
    return minimal_pinning_set(report).size


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> SweepResult:
    """Run every replicate of every sweep point; deterministic for a fixed config.

    Replicates are seeded independently from (seed, param index, replicate
    index), so the result does not depend on execution order or on `jobs`.
    Budget-truncated replicates are counted per point and excluded from
    the statistics rather than silently dropped.
    """
    degree = cfg.mean_out_degree if cfg.family is GraphModel.WATTS_STROGATZ else None
    tasks = [
        (cfg.family, cfg.n, param, degree,
         replicate_seed(cfg.seed, pi, ri), cfg.enumeration_budget)
        for pi, param in enumerate(cfg.params)
        for ri in range(cfg.replicates)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_replicate, tasks, chunksize=4))
    else:
        outcomes = [_run_replicate(t) for t in tasks]

    points = []
    for pi, param in enumerate(cfg.params):
        chunk = outcomes[pi * cfg.replicates:(pi + 1) * cfg.replicates]
        sizes = np.asarray([s for s in chunk if s is not None], dtype=float)
        truncated = sum(1 for s in chunk if s is None)
        if sizes.size == 0:
            points.append(SweepPoint(param, float("nan"), float("nan"), float("nan"), truncated))
            continue
        mean = float(sizes.mean())
        sd = float(sizes.std(ddof=1)) if sizes.size > 1 else 0.0
        ci95 = CI95_FACTOR * sd / float(np.sqrt(sizes.size))
        points.append(SweepPoint(param, mean, sd, ci95, truncated))
    return SweepResult(config=cfg, points=tuple(points))


def trend_violations(result: SweepResult) -> list[tuple[float, float]]:
    """Consecutive sweep points whose means decrease with non-overlapping CIs."""
    out = []
    pts = result.points
    for a, b in zip(pts[:-1], pts[1:]):
        if b.mean < a.mean and (a.mean - a.ci95) > (b.mean + b.ci95):
            out.append((a.param, b.param))
    return out
