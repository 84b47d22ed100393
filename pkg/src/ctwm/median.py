"""Weighted-median operator with closest-to-anchor tie-breaking.

A value x* among a tuple is a weighted median when the total weight strictly
below and strictly above x* are each at most 1/2.  The median is unique
unless some value z splits the weights exactly in half (mass below z equal
to mass at-or-above z, both 1/2); then the medians form an interval between
a smallest and a largest value and the operator picks the one closest to an
anchor opinion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    NonFiniteStateError,
    WeightSumError,
)
from .net import ROW_SUM_TOL, InfluenceMatrix


@dataclass(frozen=True)
class MedianResult:
    """Selected weighted median plus the tie interval [smallest, largest].

    smallest == largest exactly when the median is unique.
    """

    value: float
    smallest: float
    largest: float

    @property
    def unique(self) -> bool:
        return self.smallest == self.largest


def weighted_median(values, weights, anchor: float, tol: float = 0.0) -> MedianResult:
    """Weighted median of `values` under `weights`, tie-broken toward `anchor`.

    Weights must be nonnegative and sum to 1 within 1e-12.  The cumulative
    half-mass comparisons are exact by default; `tol` loosens them for
    near-degenerate user-supplied weights.

    When medians are not unique, the returned value is the median closest
    to the anchor: the anchor itself when it is one of the values inside
    the tie interval, otherwise the nearer interval endpoint.
    """
    vals = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise EmptyInputError("values must be a nonempty 1-d sequence")
    if w.shape != vals.shape:
        raise WeightSumError(f"got {w.size} weights for {vals.size} values")
    if (w < 0.0).any():
        j = int(np.flatnonzero(w < 0.0)[0])
        raise WeightSumError(f"negative weight {w[j]!r} at position {j}")
    total = float(w.sum())
    if abs(total - 1.0) > ROW_SUM_TOL:
        raise WeightSumError(f"weights sum to {total!r}, not 1 within {ROW_SUM_TOL}")

    lo, hi = _median_bounds(vals[None, :], w[None, None, :], tol=tol)
    smallest, largest = float(lo[0, 0]), float(hi[0, 0])
    if smallest <= anchor <= largest and (vals == anchor).any():
        value = float(anchor)
    elif abs(anchor - smallest) <= abs(anchor - largest):
        value = smallest
    else:
        value = largest
    return MedianResult(value=value, smallest=smallest, largest=largest)


def median_operator(x, W: InfluenceMatrix) -> np.ndarray:
    """Per-node weighted medians of the opinion vector x under W.

    Component i is the weighted median of x under row i of W, tie-broken
    toward x_i.  Accepts a single state of shape (n,) or a batch (m, n);
    the batch form applies the operator to each row independently.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.ndim != 2 or X2.shape[1] != W.n:
        raise DimensionMismatchError(f"state shape {X.shape} does not match n={W.n}")
    lo, hi = _median_bounds(X2, W.weights[:, None, :])
    med = np.clip(X2, lo, hi)
    return med[0] if single else med


def _median_bounds(X: np.ndarray, Wrows: np.ndarray, tol: float = 0.0):
    """Smallest/largest weighted medians for every (state, weight-row) pair.

    X has shape (m, n); Wrows has shape (r, 1, n) or (r, m, n) and row
    weights are broadcast over states.  Returns (lo, hi), each of shape
    (m, r): the extreme medians of state s under weight row i.  For the
    full operator r == n and the caller pairs row i with component i.
    """
    m, n = X.shape
    perm = np.argsort(X, axis=1, kind="stable")
    xs = np.take_along_axis(X, perm, axis=1)  # (m, n) sorted states

    # Gather each weight row in sorted-state order, then cumulative masses.
    Wp = np.take_along_axis(np.broadcast_to(Wrows, (Wrows.shape[0], m, n)), perm[None, :, :], axis=2)
    prefix = np.cumsum(Wp, axis=2)
    suffix = np.cumsum(Wp[:, :, ::-1], axis=2)[:, :, ::-1]

    # Runs of equal values: mass strictly below / above a value needs the
    # first and last position of its tied run.
    idx = np.arange(n)
    new_run = np.empty((m, n), dtype=bool)
    new_run[:, 0] = True
    new_run[:, 1:] = xs[:, 1:] != xs[:, :-1]
    run_start = np.maximum.accumulate(np.where(new_run, idx, 0), axis=1)
    end_run = np.empty((m, n), dtype=bool)
    end_run[:, -1] = True
    end_run[:, :-1] = new_run[:, 1:]
    run_end = np.minimum.accumulate(np.where(end_run, idx, n - 1)[:, ::-1], axis=1)[:, ::-1]

    s_grid = np.arange(m)[:, None]
    below = np.where(run_start > 0, prefix[:, s_grid, np.maximum(run_start - 1, 0)], 0.0)
    above = np.where(run_end < n - 1, suffix[:, s_grid, np.minimum(run_end + 1, n - 1)], 0.0)

    ok = (below <= 0.5 + tol) & (above <= 0.5 + tol)  # (r, m, n) median candidates
    has = ok.any(axis=2)
    if not has.all():
        # Row sums may miss 1 by up to 1e-12; an exact half-mass tie can then
        # leave no candidate.  Retry with matching slack; anything beyond that
        # means the input was not a finite state under stochastic weights.
        if tol > 10 * ROW_SUM_TOL or not np.isfinite(X).all():
            raise NonFiniteStateError("no weighted-median candidate for some component")
        return _median_bounds(X, Wrows, tol=tol + ROW_SUM_TOL)
    first = np.argmax(ok, axis=2)  # (r, m)
    last = n - 1 - np.argmax(ok[:, :, ::-1], axis=2)
    lo = np.take_along_axis(xs, first.T, axis=1)  # (m, r)
    hi = np.take_along_axis(xs, last.T, axis=1)
    return lo, hi
