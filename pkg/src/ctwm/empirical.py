"""Inertia-model fitting on round-structured estimation data.

Participants answer questions in three rounds, revising after seeing peers'
estimates.  The update models fit here blend a participant's own previous
estimate with a group aggregate,

    x_i(t+1) = g * x_i(t) + (1 - g) * A(x(t)),

where A is the unweighted median or average over the experiment's
participants and g is the per-participant, per-transition inertia
coefficient, estimated by least squares on a training prefix of the
questions and evaluated on held-out ones.  A Wilcoxon signed-rank test
compares paired prediction errors between model variants.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AllZeroDifferencesError, MissingRoundError

logger = logging.getLogger(__name__)

ROUNDS = 3
N_TRANSITIONS = ROUNDS - 1


@dataclass(frozen=True, eq=False)
class ExperimentData:
    """One experiment: ordered questions, participants, complete 3-round records."""

    name: str
    participants: tuple[str, ...]
    questions: tuple[str, ...]
    estimates: dict[tuple[str, str], tuple[float, float, float]]  # (participant, question)

    def rounds(self, participant: str, question: str) -> tuple[float, float, float]:
        return self.estimates[(participant, question)]


@dataclass(frozen=True, eq=False)
class EstimationDataset:
    experiments: tuple[ExperimentData, ...]

    def scaled(self, c: float) -> "EstimationDataset":
        """Copy with every estimate multiplied by c (unit-change helper)."""
        exps = []
        for e in self.experiments:
            est = {k: tuple(c * v for v in vals) for k, vals in e.estimates.items()}
            exps.append(ExperimentData(e.name, e.participants, e.questions, est))
        return EstimationDataset(tuple(exps))


def _question_order(labels: list[str]) -> list[str]:
    """Numeric order when all labels are numbers, else first-appearance order."""
    seen = list(dict.fromkeys(labels))
    try:
        return sorted(seen, key=float)
    except ValueError:
        return seen


def load_dataset(path) -> EstimationDataset:
    """Read `experiment,participant,question,round,estimate` CSV rows.

    Rounds are 1..3; any (participant, question) record missing one of the
    three rounds is excluded and logged.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"experiment", "participant", "question", "round", "estimate"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise MissingRoundError(f"dataset must have columns {sorted(needed)}")
        for rec in reader:
            rows.append((rec["experiment"], rec["participant"], rec["question"],
                         int(rec["round"]), float(rec["estimate"])))

    by_exp: dict[str, dict[tuple[str, str], dict[int, float]]] = {}
    for exp, part, q, rnd, est in rows:
        if not 1 <= rnd <= ROUNDS:
            raise MissingRoundError(f"round {rnd} outside 1..{ROUNDS}")
        by_exp.setdefault(exp, {}).setdefault((part, q), {})[rnd] = est

    experiments = []
    for exp in sorted(by_exp):
        complete = {}
        for (part, q), rounds in by_exp[exp].items():
            if len(rounds) == ROUNDS:
                complete[(part, q)] = tuple(rounds[r] for r in range(1, ROUNDS + 1))
            else:
                logger.warning("excluding %s/%s/%s: rounds %s incomplete",
                               exp, part, q, sorted(rounds))
        participants = tuple(sorted({p for (p, _) in complete}))
        questions = tuple(_question_order([q for (_, q) in complete]))
        experiments.append(ExperimentData(exp, participants, questions, complete))
    return EstimationDataset(tuple(experiments))


def save_dataset(data: EstimationDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "participant", "question", "round", "estimate"])
        for e in data.experiments:
            for q in e.questions:
                for p in e.participants:
                    if (p, q) in e.estimates:
                        for r, v in enumerate(e.estimates[(p, q)], start=1):
                            writer.writerow([e.name, p, q, r, format(v, ".17g")])


def _aggregate(values: np.ndarray, aggregator: str) -> float:
    if aggregator == "median":
        return float(np.median(values))
    if aggregator == "average":
        return float(np.mean(values))
    raise ValueError(f"unknown aggregator {aggregator!r}")


def _round_panel(exp: ExperimentData, q: str):
    """Participants answering question q, with their (rounds,) estimate rows."""
    present = [p for p in exp.participants if (p, q) in exp.estimates]
    return present, np.asarray([exp.estimates[(p, q)] for p in present])


@dataclass(frozen=True, eq=False)
class FitResult:
    """Per-(experiment, participant, transition) inertia coefficients in [0, 1]."""

    aggregator: str
    train_count: int
    include_self: bool
    gamma: dict[tuple[str, str, int], float]
    train_sse: dict[tuple[str, str, int], float]

    def zeroed(self) -> "FitResult":
        """No-inertia baseline: every coefficient forced to 0."""
        return FitResult(self.aggregator, self.train_count, self.include_self,
                         {k: 0.0 for k in self.gamma}, dict(self.train_sse))

    def to_json_dict(self) -> dict:
        return {
            "aggregator": self.aggregator,
            "train_count": self.train_count,
            "include_self": self.include_self,
            "gamma": {"/".join((e, p, str(t))): g for (e, p, t), g in sorted(self.gamma.items())},
        }


def fit_inertia(data: EstimationDataset, aggregator: str = "median",
                train_count: int = 20, include_self: bool = True) -> FitResult:
    """Least-squares inertia coefficients on the first train_count questions.

    For participant i and transition t -> t+1 the closed form is
    g = sum(a_q b_q) / sum(a_q^2) with a_q = x_i(t) - A(x(t)) and
    b_q = x_i(t+1) - A(x(t)), clipped to [0, 1]; a degenerate
    sum(a_q^2) = 0 yields g = 0 (logged when some b_q is nonzero).
    """
    gammas: dict[tuple[str, str, int], float] = {}
    sses: dict[tuple[str, str, int], float] = {}
    for exp in data.experiments:
        train_qs = exp.questions[:train_count]
        panels = {q: _round_panel(exp, q) for q in train_qs}
        for part in exp.participants:
            for t in range(N_TRANSITIONS):
                a, b = [], []
                for q in train_qs:
                    if (part, q) not in exp.estimates:
                        continue
                    present, panel = panels[q]
                    i = present.index(part)
                    col = panel[:, t]
                    agg_vals = col if include_self else np.delete(col, i)
                    ref = _aggregate(agg_vals, aggregator)
                    a.append(panel[i, t] - ref)
                    b.append(panel[i, t + 1] - ref)
                a = np.asarray(a)
                b = np.asarray(b)
                denom = float(np.dot(a, a))
                if denom == 0.0:
                    if b.size and np.any(b != 0.0):
                        logger.warning("degenerate fit for %s/%s/t%d: no own-offset "
                                       "signal, coefficient set to 0", exp.name, part, t)
                    g = 0.0
                else:
                    g = float(np.clip(np.dot(a, b) / denom, 0.0, 1.0))
                gammas[(exp.name, part, t)] = g
                sses[(exp.name, part, t)] = float(np.sum((b - g * a) ** 2))
    return FitResult(aggregator, train_count, include_self, gammas, sses)


@dataclass(frozen=True, eq=False)
class ScoreReport:
    """Held-out prediction errors of one fitted model."""

    errors: tuple[float, ...]
    mean_error: float
    median_error: float

    def to_json_dict(self) -> dict:
        return {
            "n_predictions": len(self.errors),
            "mean_error": self.mean_error,
            "median_error": self.median_error,
        }


def predict_and_score(data: EstimationDataset, fit: FitResult,
                      holdout: range | None = None,
                      scales: dict[str, float] | None = None) -> ScoreReport:
    """Score one-step predictions on held-out questions.

    holdout gives question positions (default: everything after the
    training prefix) and must be disjoint from the training questions.
    Each error is |predicted - actual| divided by the question's known
    answer range when one is supplied in `scales`, else taken raw.
    """
    errors = []
    for exp in data.experiments:
        positions = holdout if holdout is not None else range(fit.train_count, len(exp.questions))
        for pos in positions:
            if pos >= len(exp.questions):
                raise MissingRoundError(
                    f"holdout position {pos} beyond the {len(exp.questions)} questions of {exp.name}")
            if pos < fit.train_count:
                raise MissingRoundError(f"holdout position {pos} overlaps the training prefix")
            q = exp.questions[pos]
            present, panel = _round_panel(exp, q)
            scale = (scales or {}).get(q, 1.0)
            for i, part in enumerate(present):
                for t in range(N_TRANSITIONS):
                    col = panel[:, t]
                    agg_vals = col if fit.include_self else np.delete(col, i)
                    ref = _aggregate(agg_vals, fit.aggregator)
                    g = fit.gamma[(exp.name, part, t)]
                    predicted = g * panel[i, t] + (1.0 - g) * ref
                    errors.append(abs(predicted - panel[i, t + 1]) / scale)
    arr = np.asarray(errors)
    return ScoreReport(errors=tuple(float(e) for e in arr),
                       mean_error=float(arr.mean()) if arr.size else 0.0,
                       median_error=float(np.median(arr)) if arr.size else 0.0)


_EXACT_LIMIT = 20


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # rank sum of positive differences
    p_value: float
    n_nonzero: int
    method: str

    def to_json_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "n_nonzero": self.n_nonzero, "method": self.method}


def wilcoxon_signed_rank(paired_a, paired_b) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped.  Up to 20 nonzero pairs the null
    distribution is enumerated exactly over all sign assignments (average
    ranks for tied magnitudes); above that a normal approximation with
    tie correction is used.
    """
    a = np.asarray(paired_a, dtype=float)
    b = np.asarray(paired_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired samples must be equal-length vectors, got {a.shape} vs {b.shape}")
    d = a - b
    d = d[d != 0.0]
    m = d.size
    if m == 0:
        raise AllZeroDifferencesError("all paired differences are zero")
    ranks = _average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())

    if m <= _EXACT_LIMIT:
        signs = (np.arange(1 << m)[:, None] >> np.arange(m)) & 1  # all sign assignments
        totals = signs @ ranks
        n_total = totals.size
        p_low = np.count_nonzero(totals <= w_plus) / n_total
        p_high = np.count_nonzero(totals >= w_plus) / n_total
        p = min(1.0, 2.0 * min(p_low, p_high))
        method = "exact"
    else:
        mu = m * (m + 1) / 4.0
        var = m * (m + 1) * (2 * m + 1) / 24.0
        _, counts = np.unique(ranks, return_counts=True)
        var -= float(((counts ** 3 - counts) / 48.0).sum())
        z = (w_plus - mu) / math.sqrt(var)
        p = math.erfc(abs(z) / math.sqrt(2.0))
        method = "normal"
    return WilcoxonResult(statistic=w_plus, p_value=float(p), n_nonzero=m, method=method)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1, ties sharing the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    sv = values[order]
    i = 0
    while i < sv.size:
        j = i
        while j + 1 < sv.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def synthesize_dataset(seed: int, *, n_experiments: int = 18, n_questions: int = 30,
                       gamma: float = 0.3, noise_sigma: float = 0.0,
                       aggregator: str = "median") -> EstimationDataset:
    """Generate data that follows the inertia update rule exactly (plus noise).

    Experiments alternate between 5 and 6 participants; first-round
    estimates are uniform on [0, 1] and later rounds apply the update with
    the given coefficient and additive Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    experiments = []
    for e in range(n_experiments):
        n_part = 5 + (e % 2)
        participants = tuple(f"p{i}" for i in range(n_part))
        questions = tuple(str(q) for q in range(n_questions))
        estimates = {}
        for q in questions:
            x = rng.random(n_part)
            rounds = [x]
            for _ in range(N_TRANSITIONS):
                ref = _aggregate(rounds[-1], aggregator)
                nxt = gamma * rounds[-1] + (1.0 - gamma) * ref
                if noise_sigma > 0.0:
                    nxt = nxt + noise_sigma * rng.standard_normal(n_part)
                rounds.append(nxt)
            panel = np.column_stack(rounds)
            for i, p in enumerate(participants):
                estimates[(p, q)] = tuple(float(v) for v in panel[i])
        experiments.append(ExperimentData(f"exp{e}", participants, questions, estimates))
    return EstimationDataset(tuple(experiments))


def fit_report(data: EstimationDataset, aggregator: str = "median",
               train_count: int = 20, include_self: bool = True,
               scales: dict[str, float] | None = None) -> dict:
    """Fit, score against the no-inertia baseline, and test the paired errors."""
    fit = fit_inertia(data, aggregator=aggregator, train_count=train_count,
                      include_self=include_self)
    scored = predict_and_score(data, fit, scales=scales)
    baseline = predict_and_score(data, fit.zeroed(), scales=scales)
    try:
        test = wilcoxon_signed_rank(scored.errors, baseline.errors).to_json_dict()
    except AllZeroDifferencesError:
        test = None
    return {
        "fit": fit.to_json_dict(),
        "with_inertia": scored.to_json_dict(),
        "no_inertia": baseline.to_json_dict(),
        "wilcoxon_vs_baseline": test,
    }
