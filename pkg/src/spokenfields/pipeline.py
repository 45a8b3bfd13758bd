"""The generation pipeline: seeded value generation, provider-backed
transcript generation, coverage balancing, and recursive regeneration until
every (value, variation) pair holds the target number of validated samples
or the round budget runs out.

Nothing unvalidated ever reaches the output; pairs whose transcripts keep
failing validation are re-prompted in later rounds, and any remaining
shortfall is reported rather than papered over.
"""

from __future__ import annotations

import json
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .domain import (
    EntityValue,
    FieldSpec,
    FormatError,
    LabeledSample,
    Provenance,
    Transcript,
)
from .providers import (
    ChatProvider,
    ChatRequest,
    MalformedOutputError,
    ProviderError,
    Shape,
)
from .taxonomy import NOT_LISTED, VariationRegistry, default_registry
from .validate import ValidationOutcome, validate


class EmptyResultError(RuntimeError):
    """Every provider-generated value was malformed and got dropped."""


Validator = Callable[[str, EntityValue, FieldSpec], ValidationOutcome]


@dataclass(frozen=True)
class GenerationConfig:
    spec: FieldSpec
    num_values: int = 5
    target_per_pair: int = 3
    max_rounds: int = 6
    provider_mode: str = "mock"
    seed: int = 0
    parallelism: int = 1

    def __post_init__(self):
        if self.num_values < 1:
            raise ValueError("num_values must be >= 1")
        if self.target_per_pair < 1:
            raise ValueError("target_per_pair must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.provider_mode not in ("mock", "live"):
            raise ValueError("provider_mode must be mock or live")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


class CoverageLedger:
    """Validated-transcript counts per (value canonical, variation id)."""

    def __init__(self, values: Sequence[str], variation_ids: Sequence[str]):
        self.counts: dict[tuple[str, str], int] = {
            (v, vid): 0 for v in values for vid in variation_ids
        }

    def credit(self, value: str, vid: str) -> None:
        key = (value, vid)
        if key in self.counts:
            self.counts[key] += 1

    def count(self, value: str, vid: str) -> int:
        return self.counts.get((value, vid), 0)

    def spread(self) -> tuple[int, int]:
        if not self.counts:
            return (0, 0)
        values = list(self.counts.values())
        return (min(values), max(values))


def balance_plan(
    ledger: CoverageLedger, target: int
) -> list[tuple[str, str, int]]:
    """Pairs still under target, largest deficit first, deterministic."""
    if target < 1:
        raise ValueError("target must be >= 1")
    plan = [
        (value, vid, target - count)
        for (value, vid), count in ledger.counts.items()
        if count < target
    ]
    plan.sort(key=lambda item: (-item[2], item[0], item[1]))
    return plan


# ---------------------------------------------------------------------------
# Provider-facing operations


def _values_prompt(spec: FieldSpec, n: int) -> ChatRequest:
    return ChatRequest(
        system_text=(
            "You generate plausible sample values for structured fields "
            "collected over the phone."
        ),
        user_text=(
            "Input Fields:\n"
            f"- Field Name: {spec.field_name}\n"
            f"- Field Description: {spec.description}\n"
            f"- Question: {spec.question}\n"
            f"- Expected Output Type: {spec.output_type}\n"
            f"- Number of Values: {n}\n"
            f"- Kind: {spec.kind}\n\n"
            'Output Format (JSON): { "values": [ "value_1", "value_2", ... ] }\n'
            "Return only valid JSON - no markdown, no extra text."
        ),
        expected_shape=Shape.VALUES_PAYLOAD,
    )


def generate_values(
    spec: FieldSpec, n: int, provider: ChatProvider
) -> list[EntityValue]:
    """Distinct, canonicalizable values for the field; malformed provider
    entries are dropped, and an all-malformed batch raises EmptyResultError."""
    if n < 1:
        raise ValueError("n must be >= 1")
    raw_values = provider.chat(_values_prompt(spec, n))
    out: list[EntityValue] = []
    seen: set[str] = set()
    for raw in raw_values:
        try:
            value = EntityValue.from_raw(spec.kind, raw)
        except FormatError:
            continue
        if value.canonical not in seen:
            seen.add(value.canonical)
            out.append(value)
        if len(out) == n:
            break
    if not out:
        raise EmptyResultError(f"no usable values for {spec.field_name!r}")
    return out


def _transcripts_prompt(
    value: EntityValue,
    variation_ids: Sequence[str],
    existing: Sequence[str],
    spec: FieldSpec,
    instructions: Sequence[str],
    count: int,
    attempt: int,
) -> ChatRequest:
    existing_json = json.dumps(list(existing)[-200:], ensure_ascii=False)
    return ChatRequest(
        system_text=(
            "You write natural spoken phone-call transcripts that verbalize "
            "a target value with requested linguistic variations."
        ),
        user_text=(
            "Input Fields:\n"
            f"- Question: {spec.question}\n"
            f"- Output Type: {spec.output_type}\n"
            f"- Target Value: {value.canonical}\n"
            f"- Existing Transcripts: {existing_json}\n"
            f"- Variation Types: {', '.join(variation_ids)}\n"
            f"- Variation Instructions: {' | '.join(instructions)}\n"
            f"- Kind: {value.kind}\n"
            f"- Count: {count}\n"
            f"- Attempt: {attempt}\n\n"
            "Task: Generate additional natural spoken transcripts that "
            "verbalize the target value without altering its meaning.\n"
            "Key Constraints: always express the target value in natural "
            "spoken form; for dates include both spoken and digit-only "
            "formats; for names add a realistic last name to the first "
            "name.\n"
            "Variation Type Assignment: assign one or more variation types "
            f"per transcript from the list above; use \"{NOT_LISTED}\" if "
            "the transcript doesn't match any type.\n"
            "Diversity Rule: be creative in how the value is spoken, but do "
            "not change what the value is.\n"
            'Output Format (JSON): { "transcripts": [ { "transcript": '
            '"spoken response", "variation_types": ["type1"] } ] }\n'
            "Return only valid JSON - no markdown, no extra text."
        ),
        expected_shape=Shape.TRANSCRIPTS_PAYLOAD,
    )


def generate_transcripts(
    value: EntityValue,
    variation_ids: Sequence[str],
    existing: Sequence[str],
    provider: ChatProvider,
    spec: FieldSpec,
    count: int = 1,
    attempt: int = 0,
    registry: VariationRegistry | None = None,
) -> list[tuple[str, set[str]]]:
    """Candidate (text, tags) pairs for one value; tags outside the registry
    map to not_listed, verbatim duplicates of existing texts are dropped."""
    reg = registry or default_registry()
    known = set(reg.ids_for_kind(value.kind))
    for vid in variation_ids:
        if vid not in known:
            raise ValueError(f"variation {vid!r} not in registry for {value.kind!r}")
    instructions = [reg.get(vid).instruction for vid in variation_ids]
    request = _transcripts_prompt(
        value, variation_ids, existing, spec, instructions, count, attempt
    )
    payload = provider.chat(request)
    existing_set = set(existing)
    out: list[tuple[str, set[str]]] = []
    for text, tags in payload:
        if not text or text in existing_set:
            continue
        mapped = {t if t in reg else NOT_LISTED for t in tags} or {NOT_LISTED}
        out.append((text, mapped))
    return out


# ---------------------------------------------------------------------------
# The recursive pipeline


@dataclass
class PipelineReport:
    rounds_used: int = 0
    target_per_pair: int = 0
    generated: int = 0
    invalid: int = 0
    duplicates: int = 0
    provider_failures: int = 0
    pair_counts: dict = field(default_factory=dict)
    shortfalls: list = field(default_factory=list)

    @property
    def invalid_rate(self) -> float:
        return self.invalid / self.generated if self.generated else 0.0

    def to_json_obj(self) -> dict:
        return {
            "rounds_used": self.rounds_used,
            "target_per_pair": self.target_per_pair,
            "generated": self.generated,
            "invalid": self.invalid,
            "invalid_rate": self.invalid_rate,
            "duplicates": self.duplicates,
            "provider_failures": self.provider_failures,
            "pair_counts": {f"{v}|{vid}": c for (v, vid), c in sorted(self.pair_counts.items())},
            "shortfalls": [
                {"value": v, "variation": vid, "deficit": d} for v, vid, d in self.shortfalls
            ],
        }


def _oracle_validator(text: str, truth: EntityValue, spec: FieldSpec) -> ValidationOutcome:
    return validate(text, truth, spec, mode="oracle")


def run_pipeline(
    config: GenerationConfig,
    provider: ChatProvider,
    validator: Validator | None = None,
    registry: VariationRegistry | None = None,
) -> tuple[list[LabeledSample], PipelineReport]:
    """Generate values, then recursively generate and validate transcripts
    per (value, variation) pair until coverage is balanced at the target.

    Every emitted sample is validated. With the mock provider and a fixed
    seed the output is byte-reproducible.
    """
    reg = registry or default_registry()
    spec = config.spec
    validator = validator or _oracle_validator
    variation_ids = reg.ids_for_kind(spec.kind)

    values = generate_values(spec, config.num_values, provider)
    by_canonical = {v.canonical: v for v in values}
    ledger = CoverageLedger(sorted(by_canonical), variation_ids)
    report = PipelineReport(target_per_pair=config.target_per_pair)

    samples: list[LabeledSample] = []
    texts_by_value: dict[str, list[str]] = defaultdict(list)
    attempts: dict[tuple[str, str], int] = defaultdict(int)
    provenance = (
        Provenance.RULE_RENDERED if config.provider_mode == "mock" else Provenance.LLM_GENERATED
    )

    for round_no in range(1, config.max_rounds + 1):
        plan = balance_plan(ledger, config.target_per_pair)
        if not plan:
            break
        report.rounds_used = round_no
        round_failures = 0

        def run_pair(item: tuple[str, str, int]):
            canonical, vid, deficit = item
            value = by_canonical[canonical]
            return generate_transcripts(
                value,
                [vid],
                texts_by_value[canonical],
                provider,
                spec,
                count=deficit,
                attempt=attempts[(canonical, vid)],
                registry=reg,
            )

        if config.parallelism > 1 and config.provider_mode == "live":
            with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
                fetched = list(pool.map(lambda it: _safe(run_pair, it), plan))
        else:
            fetched = [_safe(run_pair, item) for item in plan]

        for item, result in zip(plan, fetched):
            canonical, vid, deficit = item
            attempts[(canonical, vid)] += deficit
            if isinstance(result, Exception):
                round_failures += 1
                report.provider_failures += 1
                continue
            value = by_canonical[canonical]
            for text, tags in result:
                report.generated += 1
                if text in texts_by_value[canonical]:
                    report.duplicates += 1
                    continue
                outcome = validator(text, value, spec)
                if not outcome.valid:
                    report.invalid += 1
                    continue
                # retention clamp: keep earliest, discard extras once any
                # tag the sample would credit is already at target+1
                cap = config.target_per_pair + 1
                if any(
                    ledger.count(canonical, tag) >= cap
                    for tag in tags
                    if (canonical, tag) in ledger.counts
                ):
                    continue
                transcript = Transcript(
                    text=text,
                    value=value,
                    variation_tags=frozenset(tags),
                    provenance=provenance,
                )
                samples.append(LabeledSample(transcript=transcript, validated=True))
                texts_by_value[canonical].append(text)
                for tag in tags:
                    ledger.credit(canonical, tag)

        if round_no == 1 and round_failures == len(plan) and not samples:
            raise ProviderError("provider failed permanently in round 1")

    report.pair_counts = dict(ledger.counts)
    report.shortfalls = balance_plan(ledger, config.target_per_pair)
    return samples, report


def _safe(fn, item):
    try:
        return fn(item)
    except (ProviderError, MalformedOutputError) as exc:
        return exc
