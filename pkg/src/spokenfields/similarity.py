"""Synthetic-to-real transcript similarity, grouped by tag overlap.

For each real transcript: classify its variation tags, generate a synthetic
counterpart embedding the same entity value under a planned tag set, embed
both texts, and take the cosine. Scores aggregate per entity kind and per
overlap category between the real tags and the synthetic tags: match
(identical sets), superset (synthetic adds types), subset (a non-empty
proper subset), null overlap (disjoint), and - outside the four usual
categories - partial (overlapping without containment), reported
separately.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .domain import EntityValue, LabeledSample
from .providers import (
    ChatProvider,
    EmbeddingProvider,
    EmbeddingVector,
    ProviderError,
    UsageError,
)
from .render import RenderRequest, conflicting_pair, render
from .seeding import rng_for
from .taxonomy import NOT_LISTED, VariationRegistry, classify, default_registry


class DimensionMismatchError(ValueError):
    pass


class ZeroVectorError(ValueError):
    pass


class OverlapCategory(str, Enum):
    MATCH = "match"
    SUPERSET = "superset"
    SUBSET = "subset"
    NULL_OVERLAP = "null_overlap"
    UNCATEGORIZED = "uncategorized"


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """cos(theta) between two embedding vectors."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError(f"{a.dimension} != {b.dimension}")
    norm_a = math.sqrt(sum(x * x for x in a.values))
    norm_b = math.sqrt(sum(x * x for x in b.values))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVectorError("cosine undefined for zero vectors")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    return dot / (norm_a * norm_b)


def overlap_category(real_tags: set[str], synth_tags: set[str]) -> OverlapCategory:
    """Relation between the real transcript's tags and the synthetic's."""
    if not real_tags:
        raise ValueError("real transcript tags must be non-empty")
    real, synth = set(real_tags), set(synth_tags)
    if real == synth:
        return OverlapCategory.MATCH
    if synth > real:
        return OverlapCategory.SUPERSET
    if synth and synth < real:
        return OverlapCategory.SUBSET
    if not real & synth:
        return OverlapCategory.NULL_OVERLAP
    return OverlapCategory.UNCATEGORIZED


@dataclass(frozen=True)
class PairRecord:
    kind: str
    real_text: str
    synth_text: str
    real_tags: frozenset[str]
    synth_tags: frozenset[str]
    category: OverlapCategory
    score: float


@dataclass
class BucketStats:
    scores: list[float] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.scores)

    @property
    def mean(self) -> float:
        return sum(self.scores) / len(self.scores) if self.scores else 0.0

    @property
    def std(self) -> float:
        if not self.scores:
            return 0.0
        mu = self.mean
        return math.sqrt(sum((x - mu) ** 2 for x in self.scores) / len(self.scores))


@dataclass
class SimilarityReport:
    buckets: dict = field(default_factory=dict)  # (kind, category) -> BucketStats
    records: list = field(default_factory=list)
    skipped: int = 0

    def add(self, record: PairRecord) -> None:
        self.records.append(record)
        self.buckets.setdefault((record.kind, record.category), BucketStats()).scores.append(
            record.score
        )

    def to_json_obj(self) -> dict:
        out: dict = {"skipped": self.skipped, "buckets": {}}
        for (kind, category), stats in sorted(
            self.buckets.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
        ):
            out["buckets"].setdefault(kind, {})[category.value] = {
                "mean": stats.mean,
                "std": stats.std,
                "n": stats.n,
            }
        return out

    def text_table(self) -> str:
        kinds = sorted({kind for kind, _ in self.buckets})
        header = f"{'Overlap':<16}" + "".join(f"{k:>24}" for k in kinds)
        lines = [header, "-" * len(header)]
        for category in OverlapCategory:
            cells = []
            for kind in kinds:
                stats = self.buckets.get((kind, category))
                cells.append(
                    f"{stats.mean:.2f}±{stats.std:.2f} (n={stats.n})" if stats else "-"
                )
            if any(c != "-" for c in cells):
                lines.append(f"{category.value:<16}" + "".join(f"{c:>24}" for c in cells))
        return "\n".join(lines)


@dataclass(frozen=True)
class SimilarityConfig:
    seed: int = 0
    tag_mode: str = "rule"
    overlap_cycle: tuple[str, ...] = ("match", "superset", "subset", "null_overlap")


# synthesizer(value, tags, seed) -> synthetic transcript text
Synthesizer = Callable[[EntityValue, tuple[str, ...], int], str]


def renderer_synthesizer(registry: VariationRegistry | None = None) -> Synthesizer:
    def synthesize(value: EntityValue, tags: tuple[str, ...], seed: int) -> str:
        return render(RenderRequest(value=value, variation_ids=tags, seed=seed), registry).text

    return synthesize


def _compatible_subset(kind: str, wanted: Sequence[str], limit: int = 3) -> tuple[str, ...]:
    chosen: list[str] = []
    for vid in wanted:
        if vid == NOT_LISTED:
            continue
        if len(chosen) == limit:
            break
        if all(not conflicting_pair(kind, vid, c) for c in chosen):
            chosen.append(vid)
    return tuple(chosen)


def _plan_tags(
    real_tags: set[str],
    category: str,
    kind: str,
    registry: VariationRegistry,
    rng,
) -> tuple[str, ...]:
    """A renderable tag set standing in the requested overlap relation to
    the real tags (falls back toward match when the relation is
    unreachable, e.g. subset of a single tag)."""
    usable = sorted(set(registry.ids_for_kind(kind)))
    real = sorted(t for t in real_tags if t in usable)
    if not real:
        real = [rng.choice(usable)]
    if category == "match":
        return _compatible_subset(kind, real)
    if category == "superset":
        extras = [v for v in usable if v not in real]
        rng.shuffle(extras)
        for extra in extras:
            candidate = _compatible_subset(kind, real + [extra])
            if len(candidate) > len(_compatible_subset(kind, real)):
                return candidate
        return _compatible_subset(kind, real)
    if category == "subset":
        if len(real) >= 2:
            return _compatible_subset(kind, real[:-1])
        return _compatible_subset(kind, real)
    if category == "null_overlap":
        others = [v for v in usable if v not in real]
        rng.shuffle(others)
        for other in others:
            candidate = _compatible_subset(kind, [other])
            if candidate:
                return candidate
        return _compatible_subset(kind, real)
    raise ValueError(f"unknown overlap category {category!r}")


def pair_and_score(
    real_samples: Sequence[LabeledSample],
    embed_provider: EmbeddingProvider,
    chat_provider: ChatProvider | None = None,
    config: SimilarityConfig = SimilarityConfig(),
    registry: VariationRegistry | None = None,
    synthesizer: Synthesizer | None = None,
) -> SimilarityReport:
    """Pair each real transcript with a synthetic counterpart of the same
    value and report cosine similarity per overlap category per kind."""
    reg = registry or default_registry()
    synthesize = synthesizer or renderer_synthesizer(reg)
    report = SimilarityReport()
    rng = rng_for(config.seed, "similarity")

    for index, sample in enumerate(real_samples):
        value = sample.transcript.value
        text = sample.transcript.text
        try:
            real_tags = classify(
                text, value.kind, mode=config.tag_mode, provider=chat_provider, registry=reg
            )
            planned = config.overlap_cycle[index % len(config.overlap_cycle)]
            synth_tags = _plan_tags(real_tags, planned, value.kind, reg, rng)
            if not synth_tags:
                report.skipped += 1
                continue
            synth_text = synthesize(value, synth_tags, rng.randrange(1_000_000))
            vectors = embed_provider.embed([text, synth_text])
            score = cosine(vectors[0], vectors[1])
        except (ProviderError, UsageError):
            report.skipped += 1
            continue
        report.add(
            PairRecord(
                kind=value.kind,
                real_text=text,
                synth_text=synth_text,
                real_tags=frozenset(real_tags),
                synth_tags=frozenset(synth_tags),
                category=overlap_category(real_tags, set(synth_tags)),
                score=score,
            )
        )
    return report


def report_to_json(report: SimilarityReport) -> str:
    return json.dumps(report.to_json_obj(), indent=2, ensure_ascii=False)
