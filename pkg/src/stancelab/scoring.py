"""Official-style scoring, confusion matrices, fold plans, significance tests.

The headline metric is the macro-average of the Favor and Against F1
scores; None participates in the confusion matrix (and hurts precision when
mispredicted) but its own F1 is excluded from the average. Overall scores
pool instances across topics; per-topic scores restrict to one topic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import CANONICAL_LABELS, CorpusError, LabeledInstance, StanceLabel

_LABEL_INDEX = {label: i for i, label in enumerate(CANONICAL_LABELS)}


@dataclass(frozen=True)
class TopicScores:
    f_favor: float
    f_against: float

    @property
    def f_avg(self) -> float:
        return (self.f_favor + self.f_against) / 2.0


@dataclass(frozen=True)
class EvalReport:
    per_topic: dict[str, TopicScores]
    overall: TopicScores
    confusion: np.ndarray  # 3x3 ints, [gold][pred] in canonical order
    counts: dict[str, int]


def confusion(
    gold: Sequence[StanceLabel], pred: Sequence[StanceLabel]
) -> np.ndarray:
    """3x3 count matrix, [gold][pred], canonical order on both axes."""
    if len(gold) != len(pred):
        raise ValueError("gold and pred differ in length")
    matrix = np.zeros((3, 3), dtype=np.int64)
    for g, p in zip(gold, pred):
        matrix[_LABEL_INDEX[g], _LABEL_INDEX[p]] += 1
    return matrix


def _f1(matrix: np.ndarray, label: StanceLabel) -> float:
    i = _LABEL_INDEX[label]
    tp = float(matrix[i, i])
    predicted = float(matrix[:, i].sum())
    actual = float(matrix[i, :].sum())
    precision = tp / predicted if predicted > 0 else 0.0
    recall = tp / actual if actual > 0 else 0.0
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _scores(matrix: np.ndarray) -> TopicScores:
    return TopicScores(
        f_favor=_f1(matrix, StanceLabel.FAVOR),
        f_against=_f1(matrix, StanceLabel.AGAINST),
    )


def score_semeval(
    gold: Sequence[StanceLabel],
    pred: Sequence[StanceLabel],
    topics: Sequence[str],
) -> EvalReport:
    """Score predictions: pooled overall plus per-topic breakdowns."""
    if not (len(gold) == len(pred) == len(topics)):
        raise ValueError("gold, pred, and topics differ in length")
    if not gold:
        raise ValueError("nothing to score")
    pooled = confusion(gold, pred)
    per_topic: dict[str, TopicScores] = {}
    counts: dict[str, int] = {}
    for topic in dict.fromkeys(topics):
        mask = [t == topic for t in topics]
        sub_gold = [g for g, m in zip(gold, mask) if m]
        sub_pred = [p for p, m in zip(pred, mask) if m]
        per_topic[topic] = _scores(confusion(sub_gold, sub_pred))
        counts[topic] = len(sub_gold)
    return EvalReport(
        per_topic=per_topic,
        overall=_scores(pooled),
        confusion=pooled,
        counts=counts,
    )


def minority_recall_flags(matrix: np.ndarray) -> list[StanceLabel]:
    """Polarized classes present in gold but never correctly predicted."""
    collapsed = []
    for label in (StanceLabel.AGAINST, StanceLabel.FAVOR):
        i = _LABEL_INDEX[label]
        if matrix[i, :].sum() > 0 and matrix[i, i] == 0:
            collapsed.append(label)
    return collapsed


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple[int, ...]

    def fold_indices(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.assignments) if f == fold]


def kfold(n: int, k: int, seed: int) -> FoldPlan:
    """Seeded shuffle then round-robin assignment; sizes differ by <= 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError(f"cannot split {n} instances into {k} folds")
    order = np.random.default_rng(seed).permutation(n)
    assignments = [0] * n
    for pos, idx in enumerate(order):
        assignments[idx] = pos % k
    return FoldPlan(k=k, assignments=tuple(assignments))


# ---------------------------------------------------------------------------
# Significance tests.


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta (modified Lentz).
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            break
    return h


def _reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, dof: int) -> float:
    """P(|T| >= t) for Student's t with dof degrees of freedom."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    return _reg_inc_beta(dof / 2.0, 0.5, dof / (dof + t * t))


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-tailed paired Student t-test p-value on per-unit differences."""
    if len(a) != len(b):
        raise ValueError("samples differ in length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 pairs")
    diffs = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    sd = float(diffs.std(ddof=1))
    if sd == 0.0:
        raise ValueError("degenerate difference vector")
    t = float(diffs.mean()) / (sd / math.sqrt(n))
    return student_t_two_sided_p(t, n - 1)


@dataclass(frozen=True)
class UTestResult:
    p_value: float
    u: float
    method: str  # "exact" | "normal"


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> UTestResult:
    """Two-sided Mann-Whitney U test.

    Exact enumeration over rank assignments when both samples have at most
    8 values; otherwise a tie-corrected normal approximation.
    """
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("samples must be non-empty")
    pooled = list(a) + list(b)
    ranks = _midranks(pooled)
    mu = n1 * n2 / 2.0
    u1 = sum(ranks[:n1]) - n1 * (n1 + 1) / 2.0
    if max(n1, n2) <= 8:
        observed = abs(u1 - mu)
        hits = 0
        total = 0
        base = n1 * (n1 + 1) / 2.0
        for subset in combinations(range(n1 + n2), n1):
            u = sum(ranks[i] for i in subset) - base
            total += 1
            if abs(u - mu) >= observed - 1e-9:
                hits += 1
        return UTestResult(p_value=hits / total, u=u1, method="exact")
    n = n1 + n2
    tie_term = 0.0
    seen: dict[float, int] = {}
    for v in pooled:
        seen[v] = seen.get(v, 0) + 1
    for count in seen.values():
        tie_term += count**3 - count
    sigma_sq = (n1 * n2 / 12.0) * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma_sq <= 0.0:
        return UTestResult(p_value=1.0, u=u1, method="normal")
    z = (u1 - mu) / math.sqrt(sigma_sq)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return UTestResult(p_value=min(p, 1.0), u=u1, method="normal")


# ---------------------------------------------------------------------------
# Prediction files and report rendering.


def write_predictions(
    path: str | Path,
    instances: Iterable[LabeledInstance],
    predictions: Sequence[StanceLabel],
) -> None:
    """TSV with columns ID, Target, Gold, Pred."""
    instances = list(instances)
    if len(instances) != len(predictions):
        raise ValueError("instances and predictions differ in length")
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("ID\tTarget\tGold\tPred\n")
        for inst, pred in zip(instances, predictions):
            fh.write(
                f"{inst.tweet_id}\t{inst.topic}\t{inst.label.value}\t{pred.value}\n"
            )


def read_predictions(
    path: str | Path,
) -> tuple[list[str], list[str], list[StanceLabel], list[StanceLabel]]:
    """Read a predictions TSV; returns (ids, topics, gold, pred)."""
    path = Path(path)
    ids: list[str] = []
    topics: list[str] = []
    gold: list[StanceLabel] = []
    pred: list[StanceLabel] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1:
                continue
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise CorpusError(
                    f"{path.name}: expected 4 fields at line {lineno}"
                )
            try:
                g = StanceLabel.parse(fields[2])
                p = StanceLabel.parse(fields[3])
            except CorpusError as exc:
                raise CorpusError(f"{path.name}: {exc} at line {lineno}") from None
            ids.append(fields[0])
            topics.append(fields[1])
            gold.append(g)
            pred.append(p)
    return ids, topics, gold, pred


def read_label_lines(path: str | Path) -> list[StanceLabel]:
    """Parallel predictions-only file: one stance label per line."""
    labels: list[StanceLabel] = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                labels.append(StanceLabel.parse(text))
            except CorpusError as exc:
                raise CorpusError(f"{path.name}: {exc} at line {lineno}") from None
    return labels


def render_report(report: EvalReport, title: str = "") -> str:
    """Fixed-width table: per-topic rows then the pooled overall row."""
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'Topic':<32}{'N':>6}{'F_favor':>10}{'F_against':>11}{'F_avg':>9}")
    for topic, scores in report.per_topic.items():
        lines.append(
            f"{topic:<32}{report.counts[topic]:>6}"
            f"{scores.f_favor:>10.4f}{scores.f_against:>11.4f}{scores.f_avg:>9.4f}"
        )
    total = int(report.confusion.sum())
    o = report.overall
    lines.append(
        f"{'Overall':<32}{total:>6}{o.f_favor:>10.4f}{o.f_against:>11.4f}{o.f_avg:>9.4f}"
    )
    lines.append("")
    lines.append("Confusion (rows gold, cols pred): "
                 + " ".join(label.value for label in CANONICAL_LABELS))
    for i, label in enumerate(CANONICAL_LABELS):
        row = " ".join(f"{int(v):>6}" for v in report.confusion[i])
        lines.append(f"{label.value:>8} {row}")
    return "\n".join(lines) + "\n"


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic", "f_favor", "f_against", "f_avg"])
        for topic, scores in report.per_topic.items():
            writer.writerow(
                [topic, f"{scores.f_favor:.4f}", f"{scores.f_against:.4f}",
                 f"{scores.f_avg:.4f}"]
            )
        o = report.overall
        writer.writerow(
            ["OVERALL", f"{o.f_favor:.4f}", f"{o.f_against:.4f}", f"{o.f_avg:.4f}"]
        )


def write_confusion_csv(matrix: np.ndarray, path: str | Path) -> None:
    names = [label.value for label in CANONICAL_LABELS]
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("gold_pred," + ",".join(names) + "\n")
        for i, name in enumerate(names):
            fh.write(name + "," + ",".join(str(int(v)) for v in matrix[i]) + "\n")
