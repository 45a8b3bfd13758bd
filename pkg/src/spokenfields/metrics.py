"""Scoring, dataset splitting, and summary statistics.

Scoring is binary at the sample level: a prediction is correct (TP) when it
is equivalent to the gold value under the canonical comparison, incorrect
(FP) when present but wrong, and missing (FN) when empty. Precision, recall,
and F1 use the standard definitions; accuracy is TP over all scored samples.

Splitting takes each ratio's floor and hands the remainder to train first,
so 1055 samples at (0.7, 0.15, 0.15) give 739/158/158. Length statistics
are measured in characters (population standard deviation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .domain import EntityValue, FormatError, LabeledSample, Split, values_equivalent
from .seeding import rng_for


class InvalidRatiosError(ValueError):
    """Split ratios must be positive and sum to 1."""


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0

    @property
    def accuracy(self) -> float:
        total = self.tp + self.fp + self.fn
        return self.tp / total if total else 0.0

    def to_json_obj(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


def score(predictions: Iterable[tuple[str | None, EntityValue]]) -> Metrics:
    """Score (predicted, gold) pairs; None or empty predictions count FN,
    non-equivalent ones FP."""
    tp = fp = fn = 0
    for predicted, gold in predictions:
        if predicted is None or not str(predicted).strip():
            fn += 1
            continue
        try:
            equivalent = values_equivalent(gold.kind, str(predicted), gold.canonical)
        except FormatError:
            equivalent = False
        if equivalent:
            tp += 1
        else:
            fp += 1
    return Metrics(tp=tp, fp=fp, fn=fn)


def split_sizes(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Floor each ratio's share and give the remainder to train first."""
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise InvalidRatiosError(f"ratios must be three positives, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidRatiosError(f"ratios must sum to 1, got {sum(ratios)}")
    sizes = [int(n * r) for r in ratios]
    remainder = n - sum(sizes)
    order = (0, 1, 2)  # train, valid, test
    for i in range(remainder):
        sizes[order[i % 3]] += 1
    return sizes[0], sizes[1], sizes[2]


def split(
    samples: Sequence[LabeledSample],
    ratios: tuple[float, float, float] = (0.7, 0.15, 0.15),
    seed: int = 0,
) -> tuple[list[LabeledSample], list[LabeledSample], list[LabeledSample]]:
    """Seeded disjoint train/valid/test partition, stratified so no entity
    value ends up only in the test split."""
    n_train, n_valid, n_test = split_sizes(len(samples), ratios)
    rng = rng_for(seed, "split")
    order = list(range(len(samples)))
    rng.shuffle(order)

    assignment: dict[int, Split] = {}
    for pos, idx in enumerate(order):
        if pos < n_train:
            assignment[idx] = Split.TRAIN
        elif pos < n_train + n_valid:
            assignment[idx] = Split.VALID
        else:
            assignment[idx] = Split.TEST

    by_value: dict[str, list[int]] = {}
    for idx, sample in enumerate(samples):
        by_value.setdefault(sample.transcript.value.canonical, []).append(idx)
    train_counts: dict[str, int] = {}
    for idx, assigned in assignment.items():
        if assigned is Split.TRAIN:
            value = samples[idx].transcript.value.canonical
            train_counts[value] = train_counts.get(value, 0) + 1

    for value in sorted(by_value):
        idxs = by_value[value]
        if all(assignment[i] is Split.TEST for i in idxs):
            donor = next(
                (
                    i
                    for i in order
                    if assignment[i] is Split.TRAIN
                    and train_counts.get(samples[i].transcript.value.canonical, 0) > 1
                ),
                None,
            )
            if donor is None:
                continue
            moved = idxs[0]
            assignment[moved], assignment[donor] = Split.TRAIN, Split.TEST
            donor_value = samples[donor].transcript.value.canonical
            train_counts[donor_value] -= 1
            train_counts[value] = train_counts.get(value, 0) + 1

    def relabel(idx: int) -> LabeledSample:
        sample = samples[idx]
        return LabeledSample(
            transcript=sample.transcript,
            validated=sample.validated,
            split=assignment[idx],
        )

    train = [relabel(i) for i in range(len(samples)) if assignment[i] is Split.TRAIN]
    valid = [relabel(i) for i in range(len(samples)) if assignment[i] is Split.VALID]
    test = [relabel(i) for i in range(len(samples)) if assignment[i] is Split.TEST]
    return train, valid, test


@dataclass(frozen=True)
class DatasetStats:
    num_samples: int
    split_counts: dict
    num_tags_used: int
    tag_occurrences: int
    num_unique_values: int
    avg_len_chars: float
    std_len_chars: float

    def to_json_obj(self) -> dict:
        return {
            "num_samples": self.num_samples,
            "split_counts": dict(self.split_counts),
            "num_tags_used": self.num_tags_used,
            "tag_occurrences": self.tag_occurrences,
            "num_unique_values": self.num_unique_values,
            "avg_len_chars": self.avg_len_chars,
            "std_len_chars": self.std_len_chars,
        }


def dataset_stats(samples: Sequence[LabeledSample]) -> DatasetStats:
    """Direct-count statistics over a sample set; lengths in characters."""
    split_counts = {s.value: 0 for s in Split}
    tags: set[str] = set()
    tag_occurrences = 0
    values: set[str] = set()
    lengths: list[int] = []
    for sample in samples:
        split_counts[sample.split.value] += 1
        tags.update(sample.transcript.variation_tags)
        tag_occurrences += len(sample.transcript.variation_tags)
        values.add(sample.transcript.value.canonical)
        lengths.append(len(sample.transcript.text))
    if lengths:
        avg = sum(lengths) / len(lengths)
        std = math.sqrt(sum((x - avg) ** 2 for x in lengths) / len(lengths))
    else:
        avg = std = 0.0
    return DatasetStats(
        num_samples=len(samples),
        split_counts=split_counts,
        num_tags_used=len(tags),
        tag_occurrences=tag_occurrences,
        num_unique_values=len(values),
        avg_len_chars=avg,
        std_len_chars=std,
    )


def metrics_table(rows: dict[str, Metrics]) -> str:
    """Aligned text table of accuracy and F1 per entity."""
    header = f"{'Entity':<16} {'Acc':>8} {'F1':>8} {'P':>8} {'R':>8} {'TP':>6} {'FP':>6} {'FN':>6}"
    lines = [header, "-" * len(header)]
    for name, m in rows.items():
        lines.append(
            f"{name:<16} {m.accuracy:>8.4f} {m.f1:>8.4f} {m.precision:>8.4f} "
            f"{m.recall:>8.4f} {m.tp:>6} {m.fp:>6} {m.fn:>6}"
        )
    return "\n".join(lines)
