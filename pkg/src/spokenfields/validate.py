"""Transcript validation: is the ground-truth value recoverable?

Three modes. Oracle mode runs the deterministic spoken-form parser and
checks equivalence; provider mode asks a chat backend for a strict
true/false verdict; both mode takes their conjunction and flags
disagreement. Oracle is the default for tests, both for live generation:
the deterministic side bounds false positives without adding noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .domain import EntityValue, FieldSpec, FormatError, values_equivalent
from .parse import extract
from .providers import ChatProvider, ChatRequest, MalformedOutputError, Shape


class ValidationMode(str, Enum):
    ORACLE = "oracle"
    PROVIDER = "provider"
    BOTH = "both"


class JudgeMalformedError(MalformedOutputError):
    """Provider judge returned neither true nor false after retries."""


@dataclass(frozen=True)
class ValidationOutcome:
    valid: bool
    extracted: EntityValue | None
    mode: ValidationMode
    disagreement: bool = False

    def __post_init__(self):
        if self.disagreement and self.valid:
            raise ValueError("disagreement implies valid=False")


_JUDGE_SYSTEM = (
    "You verify phone-call transcripts. Determine if the ground truth value "
    "can be extracted from the transcript. If the transcript contains the "
    "value (even with corrections) answer true; if it is vague or does not "
    "contain the value answer false; if the value is mentioned at any point "
    "answer true. Accept continuous digit formats (01-15-2024 spoken as "
    "01152024 or 11524) and spoken digit sequences. Output: true or false."
)


def judge_prompt(transcript: str, truth: EntityValue, spec: FieldSpec) -> ChatRequest:
    return ChatRequest(
        system_text=_JUDGE_SYSTEM,
        user_text=(
            f"Transcript: {transcript}\n"
            f"Ground Truth: {truth.canonical}\n"
            f"Action Name: {spec.field_name}\n"
            f"Kind: {spec.kind}\n"
            f"Field Name: {spec.field_name}"
        ),
        expected_shape=Shape.BOOLEAN_VERDICT,
        temperature=0.0,
        top_p=1.0,
    )


def _oracle_verdict(transcript: str, truth: EntityValue, spec: FieldSpec) -> tuple[bool, EntityValue | None]:
    extracted = extract(spec, transcript)
    if extracted is None:
        return False, None
    try:
        return values_equivalent(spec.kind, extracted.canonical, truth.canonical), extracted
    except FormatError:
        return False, extracted


def validate(
    transcript: str,
    truth: EntityValue,
    spec: FieldSpec,
    mode: ValidationMode | str = ValidationMode.ORACLE,
    provider: ChatProvider | None = None,
) -> ValidationOutcome:
    """Decide whether the transcript embeds the truth value recoverably."""
    mode = ValidationMode(mode)
    if mode in (ValidationMode.PROVIDER, ValidationMode.BOTH) and provider is None:
        raise ValueError(f"{mode.value} mode needs a chat provider")

    oracle_ok, extracted = (None, None)
    if mode in (ValidationMode.ORACLE, ValidationMode.BOTH):
        oracle_ok, extracted = _oracle_verdict(transcript, truth, spec)

    provider_ok = None
    if mode in (ValidationMode.PROVIDER, ValidationMode.BOTH):
        verdict = provider.chat(judge_prompt(transcript, truth, spec))
        if not isinstance(verdict, bool):
            raise JudgeMalformedError(f"judge returned {verdict!r}")
        provider_ok = verdict

    if mode is ValidationMode.ORACLE:
        return ValidationOutcome(valid=oracle_ok, extracted=extracted, mode=mode)
    if mode is ValidationMode.PROVIDER:
        return ValidationOutcome(valid=provider_ok, extracted=None, mode=mode)
    disagreement = oracle_ok != provider_ok
    return ValidationOutcome(
        valid=bool(oracle_ok and provider_ok),
        extracted=extracted,
        mode=mode,
        disagreement=disagreement,
    )
