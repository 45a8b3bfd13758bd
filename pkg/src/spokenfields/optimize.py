"""Mini-batch stochastic prompt ascent for extraction instructions.

Each iteration scores the live candidates on a seeded mini-batch, collects
failure cases of the current best, asks a mutator for revised instructions
given those failures, and keeps the best-scoring pool. The base instruction
is never evicted, so the returned candidate can only match or beat it on
the validation set.

This is a deliberately simple loop: stochastic mini-batch sampling plus
introspective mutation plus ascent. It does not reproduce any external
optimizer's internals.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Sequence

from .domain import FieldSpec, LabeledSample
from .metrics import Metrics, score
from .providers import ChatProvider, ChatRequest, MalformedOutputError, ProviderError, Shape
from .seeding import rng_for

# extractor(instruction, spec, transcript_text) -> predicted value or None
Extractor = Callable[[str, FieldSpec, str], str | None]
# mutator(instruction, failures, count) -> revised instructions
FailureCase = tuple[str, str, str]  # (transcript, gold, predicted)
Mutator = Callable[[str, list[FailureCase], int], list[str]]

_FAILURE_LIMIT = 10
_FAILURE_BYTE_BUDGET = 2048


@dataclass
class PromptCandidate:
    instruction: str
    candidate_id: str = ""
    lineage: str | None = None
    depth: int = 0
    created: int = 0
    train_score: float | None = None
    valid_score: float | None = None
    dataset_fingerprint: str | None = None

    def __post_init__(self):
        if not self.instruction:
            raise ValueError("instruction must be non-empty")
        if not self.candidate_id:
            digest = hashlib.sha256(self.instruction.encode("utf-8")).hexdigest()[:12]
            self.candidate_id = f"cand-{digest}"


@dataclass(frozen=True)
class OptimizerConfig:
    batch_size: int = 8
    iterations: int = 5
    pool_size: int = 6
    mutation_count: int = 2
    seed: int = 0

    def __post_init__(self):
        if min(self.batch_size, self.iterations, self.pool_size) < 1:
            raise ValueError("batch_size, iterations, and pool_size must be >= 1")
        if self.mutation_count < 0:
            raise ValueError("mutation_count must be >= 0")


def dataset_fingerprint(samples: Sequence[LabeledSample]) -> str:
    h = hashlib.sha256()
    for sample in samples:
        h.update(sample.transcript.text.encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()[:16]


def evaluate_prompt(
    candidate: PromptCandidate,
    samples: Sequence[LabeledSample],
    extractor: Extractor,
    spec: FieldSpec,
) -> Metrics:
    """Run the extractor with the candidate's instruction over samples."""
    pairs = []
    for sample in samples:
        predicted = extractor(candidate.instruction, spec, sample.transcript.text)
        pairs.append((predicted, sample.transcript.value))
    return score(pairs)


def _failures(
    candidate: PromptCandidate,
    batch: Sequence[LabeledSample],
    extractor: Extractor,
    spec: FieldSpec,
) -> list[FailureCase]:
    out: list[FailureCase] = []
    used = 0
    for sample in batch:
        predicted = extractor(candidate.instruction, spec, sample.transcript.text)
        gold = sample.transcript.value
        wrong = predicted is None or not _matches(predicted, gold)
        if not wrong:
            continue
        case = (
            sample.transcript.text[:160],
            gold.canonical,
            "" if predicted is None else str(predicted)[:80],
        )
        size = sum(len(part) for part in case)
        if used + size > _FAILURE_BYTE_BUDGET or len(out) >= _FAILURE_LIMIT:
            break
        used += size
        out.append(case)
    return out


def _matches(predicted: str, gold) -> bool:
    from .domain import FormatError, values_equivalent

    try:
        return values_equivalent(gold.kind, str(predicted), gold.canonical)
    except FormatError:
        return False


def provider_mutator(provider: ChatProvider) -> Mutator:
    """Adapt a chat backend into a mutator: it sees the instruction and the
    failure cases and proposes revised instructions."""

    def mutate(instruction: str, failures: list[FailureCase], count: int) -> list[str]:
        cases = "\n".join(
            f"- transcript: {t!r} expected: {g!r} got: {p!r}" for t, g, p in failures
        )
        request = ChatRequest(
            system_text=(
                "You improve extraction instructions. Given an instruction "
                "and failure cases, propose revised instructions that would "
                "fix the failures. Return JSON {\"values\": [...]}."
            ),
            user_text=(
                f"Current instruction:\n{instruction}\n\n"
                f"Failure cases:\n{cases or '(none)'}\n\n"
                f"Propose {count} revised instructions. "
                'Output Format (JSON): { "values": ["instruction", ...] }\n'
                "Return only valid JSON - no markdown, no extra text."
            ),
            expected_shape=Shape.VALUES_PAYLOAD,
        )
        return [str(v) for v in provider.chat(request)][:count]

    return mutate


def _rank_key(candidate: PromptCandidate):
    return (
        -(candidate.valid_score or 0.0),
        candidate.depth,
        len(candidate.instruction),
        candidate.created,
    )


def _batch_key(scored: dict[str, float]):
    def key(candidate: PromptCandidate):
        return (
            -scored.get(candidate.candidate_id, 0.0),
            len(candidate.instruction),
            candidate.created,
        )

    return key


def optimize(
    base_instruction: str,
    trainset: Sequence[LabeledSample],
    validset: Sequence[LabeledSample],
    extractor: Extractor,
    mutator: Mutator,
    config: OptimizerConfig,
    spec: FieldSpec,
) -> tuple[PromptCandidate, list[dict]]:
    """Ascend from the base instruction; returns the best candidate by
    validation score plus a full trace (one record per candidate
    evaluation, plus per-iteration and final summaries)."""
    if not base_instruction:
        raise ValueError("base instruction must be non-empty")
    if config.batch_size > len(trainset):
        raise ValueError("batch_size exceeds trainset size")

    rng = rng_for(config.seed, "optimize")
    train_fp = dataset_fingerprint(trainset)
    valid_fp = dataset_fingerprint(validset)

    base = PromptCandidate(instruction=base_instruction, created=0)
    pool: list[PromptCandidate] = [base]
    created = 1
    trace: list[dict] = []
    running_best = 0.0

    def valid_score_of(candidate: PromptCandidate) -> float:
        if candidate.valid_score is None or candidate.dataset_fingerprint != valid_fp:
            metrics = evaluate_prompt(candidate, validset, extractor, spec)
            candidate.valid_score = metrics.accuracy
            candidate.dataset_fingerprint = valid_fp
        return candidate.valid_score

    def record_evaluation(iteration: int, candidate: PromptCandidate, batch_score: float):
        trace.append(
            {
                "iteration": iteration,
                "event": "evaluation",
                "candidate_id": candidate.candidate_id,
                "instruction": candidate.instruction,
                "lineage": candidate.lineage,
                "batch_score": batch_score,
            }
        )

    for iteration in range(1, config.iterations + 1):
        batch = rng.sample(list(trainset), config.batch_size)
        scored: dict[str, float] = {}
        for candidate in pool:
            metrics = evaluate_prompt(candidate, batch, extractor, spec)
            scored[candidate.candidate_id] = metrics.accuracy
            candidate.train_score = metrics.accuracy
            record_evaluation(iteration, candidate, metrics.accuracy)
        best = min(pool, key=_batch_key(scored))

        if config.mutation_count > 0:
            failures = _failures(best, batch, extractor, spec)
            try:
                proposals = mutator(best.instruction, failures, config.mutation_count)
            except (ProviderError, MalformedOutputError) as exc:
                trace.append(
                    {
                        "iteration": iteration,
                        "event": "mutator_error",
                        "error": str(exc),
                        "running_best_valid": running_best,
                    }
                )
                continue
            known = {c.instruction for c in pool}
            for proposal in proposals:
                if not proposal or proposal in known:
                    continue
                known.add(proposal)
                mutant = PromptCandidate(
                    instruction=proposal,
                    lineage=best.candidate_id,
                    depth=best.depth + 1,
                    created=created,
                )
                created += 1
                metrics = evaluate_prompt(mutant, batch, extractor, spec)
                scored[mutant.candidate_id] = metrics.accuracy
                mutant.train_score = metrics.accuracy
                record_evaluation(iteration, mutant, metrics.accuracy)
                pool.append(mutant)

        survivors = sorted(pool, key=_batch_key(scored))[: config.pool_size]
        if not any(c is base for c in survivors):
            survivors = survivors[: config.pool_size - 1] + [base]
        pool = survivors

        iter_best = min(pool, key=_batch_key(scored))
        running_best = max(running_best, valid_score_of(iter_best))
        trace.append(
            {
                "iteration": iteration,
                "event": "iteration",
                "pool": [
                    {
                        "candidate_id": c.candidate_id,
                        "instruction": c.instruction,
                        "lineage": c.lineage,
                        "batch_score": scored.get(c.candidate_id),
                    }
                    for c in pool
                ],
                "best_candidate": iter_best.candidate_id,
                "best_valid_score": iter_best.valid_score,
                "running_best_valid": running_best,
                "train_fingerprint": train_fp,
            }
        )

    for candidate in pool:
        valid_score_of(candidate)
    winner = min(pool, key=_rank_key)
    trace.append(
        {
            "iteration": config.iterations,
            "event": "final",
            "winner": winner.candidate_id,
            "instruction": winner.instruction,
            "valid_score": winner.valid_score,
            "running_best_valid": max(running_best, winner.valid_score or 0.0),
        }
    )
    return winner, trace


def trace_to_jsonl(trace: list[dict]) -> str:
    return "\n".join(json.dumps(record, ensure_ascii=False) for record in trace) + "\n"
