"""Post-hoc analyses: network overlap, influential features, user consistency."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Dataset, StanceLabel, UserNetworkProfile
from .linsvm import LinearModel, class_weights


def jaccard(a: Iterable, b: Iterable) -> float:
    """|a n b| / |a u b|, with 0.0 for two empty sets."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return len(sa & sb) / union


@dataclass(frozen=True)
class OverlapDistribution:
    """Per-user Jaccard scores between two profile sets."""

    pair_name: str
    values: tuple[float, ...]
    excluded: int  # users with both sets empty
    bin_width: float = 5.0

    def histogram(self) -> list[tuple[float, float, int]]:
        """(bin_low, bin_high, count) over percentage bins of [0, 100]."""
        edges: list[float] = []
        low = 0.0
        while low < 100.0 - 1e-9:
            edges.append(low)
            low += self.bin_width
        bins = [(lo, min(lo + self.bin_width, 100.0), 0) for lo in edges]
        counts = [0] * len(bins)
        for value in self.values:
            pct = value * 100.0
            slot = min(int(pct // self.bin_width), len(bins) - 1)
            counts[slot] += 1
        return [(lo, hi, c) for (lo, hi, _), c in zip(bins, counts)]


def network_overlap(
    profiles: Mapping[str, UserNetworkProfile],
    pair: tuple[str, str],
    bin_width: float = 5.0,
) -> OverlapDistribution:
    """Per-user Jaccard similarity between two named profile sets.

    Users with both sets empty are excluded from the distribution and
    counted separately.
    """
    if not profiles:
        raise ValueError("no profiles to analyze")
    field_a, field_b = pair
    values: list[float] = []
    excluded = 0
    for user_id in sorted(profiles):
        profile = profiles[user_id]
        set_a = profile.set_for(field_a)
        set_b = profile.set_for(field_b)
        if not set_a and not set_b:
            excluded += 1
            continue
        values.append(jaccard(set_a, set_b))
    return OverlapDistribution(
        pair_name=f"{field_a} vs {field_b}",
        values=tuple(values),
        excluded=excluded,
        bin_width=bin_width,
    )


@dataclass(frozen=True)
class RankedFeatures:
    label: StanceLabel
    topic: str
    entries: tuple[tuple[str, float], ...]  # weight desc, then feature asc


def top_features(
    model: LinearModel, cls: StanceLabel, topic: str, n: int
) -> RankedFeatures:
    """Top n features by signed weight toward the class."""
    if n < 1:
        raise ValueError("n must be >= 1")
    weights = class_weights(model, cls)
    ordered = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
    return RankedFeatures(label=cls, topic=topic, entries=tuple(ordered[:n]))


def _strip_namespace(feature: str) -> str:
    return feature.split(":", 1)[1] if ":" in feature else feature


def _topn_set(ranking: RankedFeatures, n: int) -> set[str]:
    return {_strip_namespace(f) for f, _ in ranking.entries[:n]}


def topn_overlap_curve(
    ranked_a: RankedFeatures,
    ranked_b: RankedFeatures,
    ranked_c: RankedFeatures | None = None,
    n_max: int = 1000,
) -> list[tuple[int, float]]:
    """Jaccard of top-N feature sets for N = 1..n_max.

    Feature namespaces are stripped first, so rankings from different
    families compare raw account/domain strings. With three rankings the
    value is the mean of the three pairwise similarities.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rankings = [ranked_a, ranked_b] + ([ranked_c] if ranked_c else [])
    if any(not r.entries for r in rankings):
        raise ValueError("empty ranking")
    curve: list[tuple[int, float]] = []
    for n in range(1, n_max + 1):
        tops = [_topn_set(r, n) for r in rankings]
        if len(tops) == 2:
            value = jaccard(tops[0], tops[1])
        else:
            value = (
                jaccard(tops[0], tops[1])
                + jaccard(tops[0], tops[2])
                + jaccard(tops[1], tops[2])
            ) / 3.0
        curve.append((n, value))
    return curve


@dataclass(frozen=True)
class ConsistencyReport:
    """Per-author prediction uniformity, over authors with >= 2 instances
    on one topic. Buckets mirror the fixed / fixed-polarized-plus-none /
    mixed split."""

    uniform: int
    polarized_plus_none: int
    mixed: int
    groups: dict[tuple[str, str], str]  # (author, topic) -> bucket

    @property
    def total(self) -> int:
        return self.uniform + self.polarized_plus_none + self.mixed


def user_consistency(
    dataset: Dataset, predictions: Sequence[StanceLabel]
) -> ConsistencyReport:
    if len(predictions) != len(dataset.instances):
        raise ValueError("predictions not aligned with dataset instances")
    by_group: dict[tuple[str, str], list[StanceLabel]] = defaultdict(list)
    for inst, pred in zip(dataset.instances, predictions):
        by_group[(inst.author_id, inst.topic)].append(pred)
    uniform = polarized_plus_none = mixed = 0
    groups: dict[tuple[str, str], str] = {}
    for key, preds in by_group.items():
        if len(preds) < 2:
            continue
        distinct = set(preds)
        if len(distinct) == 1:
            bucket = "uniform"
            uniform += 1
        elif StanceLabel.FAVOR in distinct and StanceLabel.AGAINST in distinct:
            bucket = "mixed"
            mixed += 1
        else:
            bucket = "polarized_plus_none"
            polarized_plus_none += 1
        groups[key] = bucket
    return ConsistencyReport(
        uniform=uniform,
        polarized_plus_none=polarized_plus_none,
        mixed=mixed,
        groups=groups,
    )


# ---------------------------------------------------------------------------
# CSV emitters.


def write_overlap_csv(dist: OverlapDistribution, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low", "bin_high", "count"])
        for lo, hi, count in dist.histogram():
            writer.writerow([f"{lo:g}", f"{hi:g}", count])


def write_curves_csv(
    curves: Mapping[str, Sequence[tuple[int, float]]], path: str | Path
) -> None:
    """Rows (N, pair, jaccard), one block per named curve."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "pair", "jaccard"])
        for pair in sorted(curves):
            for n, value in curves[pair]:
                writer.writerow([n, pair, f"{value:.6f}"])


def write_rankings_csv(
    rankings: Sequence[RankedFeatures], path: str | Path
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "feature", "weight", "class", "topic"])
        for ranking in rankings:
            for rank, (feature, weight) in enumerate(ranking.entries, start=1):
                writer.writerow(
                    [rank, feature, f"{weight:.6f}", ranking.label.value,
                     ranking.topic]
                )


def write_consistency_csv(
    reports: Mapping[str, ConsistencyReport], path: str | Path
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "groups", "uniform", "polarized_plus_none", "mixed"])
        for name in sorted(reports):
            r = reports[name]
            writer.writerow([name, r.total, r.uniform, r.polarized_plus_none, r.mixed])
