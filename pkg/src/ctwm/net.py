"""Influence matrices: validation, random network generation, and file I/O.

An influence matrix is a row-stochastic nonnegative matrix W; entry w_ij is
the weight node i assigns to node j.  Networks are generated as directed
Erdos-Renyi or Watts-Strogatz graphs whose edges carry independent uniform
weights on (0, 1] before row normalization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    EmptyInputError,
    MatrixParseError,
    NegativeEntryError,
    NonSquareError,
    ZeroRowError,
)

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class InfluenceMatrix:
    """Row-stochastic weight matrix over n nodes; immutable after construction."""

    weights: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.weights, dtype=float))
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise EmptyInputError("influence matrix needs at least one node")
        neg = np.argwhere(arr < 0.0)
        if neg.size:
            i, j = map(int, neg[0])
            raise NegativeEntryError(i, j, float(arr[i, j]))
        sums = arr.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad.size:
            i = int(bad[0])
            if sums[i] == 0.0:
                raise ZeroRowError(i)
            raise ConfigError(f"row {i} sums to {sums[i]!r}, not 1 within {ROW_SUM_TOL}")
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def row(self, i: int) -> np.ndarray:
        return self.weights[i]


def validate_and_normalize(raw) -> InfluenceMatrix:
    """Check a raw nonnegative matrix and divide each row by its row sum.

    Raises NonSquareError, NegativeEntryError, or ZeroRowError when the raw
    matrix cannot define an influence network.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInputError("influence matrix needs at least one node")
    neg = np.argwhere(arr < 0.0)
    if neg.size:
        i, j = map(int, neg[0])
        raise NegativeEntryError(i, j, float(arr[i, j]))
    positive = (arr > 0.0).any(axis=1)
    if not positive.all():
        raise ZeroRowError(int(np.flatnonzero(~positive)[0]))
    return InfluenceMatrix(arr / arr.sum(axis=1, keepdims=True))


class GraphModel(str, Enum):
    ERDOS_RENYI = "er"
    WATTS_STROGATZ = "ws"


@dataclass(frozen=True)
class GraphGenConfig:
    """Parameters for one random network draw.

    p is the link probability for Erdos-Renyi and the rewiring probability
    for Watts-Strogatz; mean_out_degree applies to Watts-Strogatz only and
    must be a positive even integer below n.
    """

    model: GraphModel
    n: int
    p: float
    seed: int = 0
    mean_out_degree: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", GraphModel(self.model))
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")
        if self.model is GraphModel.WATTS_STROGATZ:
            k = self.mean_out_degree
            if k is None or k <= 0 or k % 2 != 0:
                raise ConfigError(f"mean_out_degree must be a positive even integer, got {k}")
            if k >= self.n:
                raise ConfigError(f"mean_out_degree must be < n, got {k} >= {self.n}")


_ER_RESAMPLE_TRIES = 1000


def gen_network(cfg: GraphGenConfig) -> InfluenceMatrix:
    """Draw a random influence network; identical seeds give identical matrices.

    Every present edge receives an independent weight uniform on (0, 1],
    rows are then normalized.  Erdos-Renyi draws are resampled (up to a
    bounded number of tries) until every node has an out-neighbor, since a
    node listening only to itself can never be influenced and would distort
    low-density sweeps; any node still without out-edges (e.g. at p = 0)
    receives a self-loop of weight 1 so that W stays row-stochastic.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    if cfg.model is GraphModel.ERDOS_RENYI:
        present = _er_topology(rng, n, cfg.p)
    else:
        present = _ws_topology(rng, n, cfg.mean_out_degree, cfg.p)
    weights = 1.0 - rng.random((n, n))  # uniform on (0, 1]
    w = np.where(present, weights, 0.0)
    for i in np.flatnonzero(~(w > 0.0).any(axis=1)):
        w[i, i] = 1.0
    return InfluenceMatrix(w / w.sum(axis=1, keepdims=True))


def _er_topology(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """Directed edges present independently with prob p, conditioned on no empty row."""
    if p == 0.0:
        return np.zeros((n, n), dtype=bool)
    for _ in range(_ER_RESAMPLE_TRIES):
        present = rng.random((n, n)) < p
        np.fill_diagonal(present, False)
        if present.any(axis=1).all():
            break
    return present


def _ws_topology(rng: np.random.Generator, n: int, k: int, p: float) -> np.ndarray:
    """Ring lattice with the k nearest clockwise out-neighbors, rewired with prob p.

    The one-sided ring keeps every out-degree exactly k while remaining
    fully directed; each edge's target is rewired with probability p to a
    uniformly random non-self, non-duplicate node.
    """
    present = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for d in range(1, k + 1):
            present[i, (i + d) % n] = True
    for i in range(n):
        for d in range(1, k + 1):
            t = (i + d) % n
            if rng.random() < p:
                present[i, t] = False
                candidates = np.flatnonzero(~present[i])
                candidates = candidates[candidates != i]
                if candidates.size:
                    present[i, candidates[rng.integers(candidates.size)]] = True
                else:
                    present[i, t] = True
    return present


def save_matrix(m: InfluenceMatrix, path, meta: dict | None = None) -> None:
    """Write a matrix to CSV (default) or, for .json paths, a JSON wrapper.

    CSV holds n lines of n comma-separated decimal fields with no header;
    the JSON wrapper is {"n": ..., "weights": [[...]], "meta": {...}}.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = {"n": m.n, "weights": m.weights.tolist(), "meta": meta or {}}
        path.write_text(json.dumps(doc, indent=1) + "\n")
    else:
        lines = [",".join(format(x, ".17g") for x in row) for row in m.weights]
        path.write_text("\n".join(lines) + "\n")


def load_matrix(path) -> InfluenceMatrix:
    """Read a matrix written by save_matrix (CSV or JSON wrapper).

    Rows already stochastic within tolerance are kept bit-exact, so a
    save/load round trip reproduces the matrix to full precision; raw
    nonnegative rows are normalized.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(path.read_text())
            arr = np.asarray(doc["weights"], dtype=float)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MatrixParseError(f"invalid JSON matrix file {path}: {exc}") from exc
        if arr.ndim != 2:
            raise MatrixParseError("JSON weights must be a matrix of numbers")
        if "n" in doc and doc["n"] != arr.shape[0]:
            raise MatrixParseError(f"declared n={doc['n']} but weights have {arr.shape[0]} rows")
    else:
        arr = _parse_csv_matrix(path)
    return _wrap_loaded(arr)


def _parse_csv_matrix(path: Path) -> np.ndarray:
    rows = []
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines:
        raise MatrixParseError(f"empty matrix file {path}")
    width = len(lines[0].split(","))
    for i, line in enumerate(lines):
        fields = line.split(",")
        if len(fields) != width:
            raise MatrixParseError(f"expected {width} fields, got {len(fields)}", row=i)
        row = []
        for j, field in enumerate(fields):
            try:
                row.append(float(field))
            except ValueError as exc:
                raise MatrixParseError(f"invalid number {field.strip()!r}", row=i, col=j) from exc
        rows.append(row)
    return np.asarray(rows, dtype=float)


def _wrap_loaded(arr: np.ndarray) -> InfluenceMatrix:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise MatrixParseError(f"matrix must be square, got shape {arr.shape}")
    sums = arr.sum(axis=1)
    if np.abs(sums - 1.0).max() <= ROW_SUM_TOL:
        return InfluenceMatrix(arr)
    return validate_and_normalize(arr)
