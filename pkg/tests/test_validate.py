import pytest

from spokenfields.domain import EntityValue
from spokenfields.render import RenderRequest, corpus, render
from spokenfields.validate import (
    JudgeMalformedError,
    ValidationMode,
    ValidationOutcome,
    validate,
)

ZIP = EntityValue.from_raw("zip_code", "12345")


class StubJudge:
    def __init__(self, verdict):
        self.verdict = verdict
        self.requests = []

    def chat(self, request):
        self.requests.append(request)
        return self.verdict


# Validation-prompt examples.
def test_oracle_accepts_spoken_value(zip_spec):
    outcome = validate("My zip is one two three four five", ZIP, zip_spec, "oracle")
    assert outcome.valid
    assert outcome.extracted is not None
    assert outcome.extracted.canonical == "12345"


def test_oracle_rejects_vague_answer(zip_spec):
    outcome = validate("I don't know", ZIP, zip_spec, "oracle")
    assert not outcome.valid
    assert outcome.extracted is None


def test_oracle_accepts_corrected_value(zip_spec):
    truth = EntityValue.from_raw("zip_code", "90210")
    outcome = validate("seven oh ... no, nine oh two one oh", truth, zip_spec, "oracle")
    assert outcome.valid


def test_oracle_accepts_date_format_variants(dob_spec):
    truth = EntityValue.from_raw("date_of_birth", "01-15-2024")
    assert validate("zero one one five two zero two four", truth, dob_spec, "oracle").valid
    assert validate("11524", truth, dob_spec, "oracle").valid


def test_oracle_is_deterministic(zip_spec):
    results = {
        validate("one two three four five", ZIP, zip_spec, "oracle").valid for _ in range(5)
    }
    assert results == {True}


def test_oracle_validates_all_renderer_output(zip_spec, dob_spec, name_spec):
    specs = {"zip_code": zip_spec, "date_of_birth": dob_spec, "person_name": name_spec}
    for kind, spec in specs.items():
        for transcript in corpus(kind, per_variation=2, seed=17):
            outcome = validate(transcript.text, transcript.value, spec, "oracle")
            assert outcome.valid, (kind, transcript.text)


def test_provider_mode_uses_judge(zip_spec):
    judge = StubJudge(True)
    outcome = validate("whatever", ZIP, zip_spec, "provider", judge)
    assert outcome.valid
    assert outcome.mode is ValidationMode.PROVIDER
    assert judge.requests and judge.requests[0].temperature == 0.0
    assert judge.requests[0].top_p == 1.0


def test_provider_mode_requires_provider(zip_spec):
    with pytest.raises(ValueError):
        validate("x", ZIP, zip_spec, "provider")


def test_judge_malformed_verdict(zip_spec):
    judge = StubJudge("perhaps")
    with pytest.raises(JudgeMalformedError):
        validate("x", ZIP, zip_spec, "provider", judge)


def test_both_mode_agreement(zip_spec):
    judge = StubJudge(True)
    outcome = validate("one two three four five", ZIP, zip_spec, "both", judge)
    assert outcome.valid and not outcome.disagreement


def test_both_mode_disagreement_flags_and_fails(zip_spec):
    judge = StubJudge(False)  # oracle says yes, judge says no
    outcome = validate("one two three four five", ZIP, zip_spec, "both", judge)
    assert not outcome.valid
    assert outcome.disagreement


def test_both_mode_rejects_when_both_reject(zip_spec):
    judge = StubJudge(False)
    outcome = validate("I don't know", ZIP, zip_spec, "both", judge)
    assert not outcome.valid
    assert not outcome.disagreement


def test_outcome_invariant():
    with pytest.raises(ValueError):
        ValidationOutcome(valid=True, extracted=None, mode=ValidationMode.BOTH, disagreement=True)


def test_mock_judge_matches_oracle(zip_spec):
    from spokenfields.providers import MockChatProvider

    provider = MockChatProvider(seed=0)
    for text, expected in (
        ("My zip is one two three four five", True),
        ("I don't know", False),
    ):
        outcome = validate(text, ZIP, zip_spec, "both", provider)
        assert outcome.valid is expected
        assert not outcome.disagreement


def test_validation_of_bare_reversed_render_fails(zip_spec):
    # the bare table form of `reversed` is unrecoverable by design; the
    # pipeline relies on validation to reject it and re-prompt
    bare = render(RenderRequest(ZIP, ("reversed",), seed=0))
    assert bare.text == "five four three two one"
    assert not validate(bare.text, ZIP, zip_spec, "oracle").valid
    cued = render(RenderRequest(ZIP, ("reversed",), seed=1))
    assert validate(cued.text, ZIP, zip_spec, "oracle").valid
