"""Acceptance criteria, one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` for the per-criterion
report. Every tolerance is pinned here; nothing is deferred.
"""

import random
import time

import pytest

from spokenfields.domain import (
    EntityValue,
    FieldSpec,
    FormatError,
    LabeledSample,
    values_equivalent,
)
from spokenfields.metrics import score, split, split_sizes
from spokenfields.optimize import OptimizerConfig, optimize
from spokenfields.parse import extract, parse_number_words
from spokenfields.pipeline import GenerationConfig, run_pipeline
from spokenfields.providers import (
    EmbeddingVector,
    MalformedOutputError,
    MockChatProvider,
    MockEmbeddingProvider,
    Shape,
    parse_shape,
)
from spokenfields.render import corpus
from spokenfields.similarity import OverlapCategory, SimilarityConfig, cosine, pair_and_score
from spokenfields.taxonomy import classify
from spokenfields.validate import validate

SPECS = {
    kind: FieldSpec(field_name=kind, kind=kind, output_type="string", question="q", description="d")
    for kind in ("zip_code", "date_of_birth", "person_name")
}


def _report(name: str, detail: str):
    print(f"ACCEPTANCE PASS - {name}: {detail}")


def test_criterion_1_round_trip_oracle_suite():
    """render -> extract -> values_equivalent over every applicable
    (kind x variation x 20 seeded values); 100% pass, under 10 s."""
    started = time.monotonic()
    cases = failures = 0
    for kind, spec in SPECS.items():
        for transcript in corpus(kind, per_variation=20, seed=0):
            cases += 1
            got = extract(spec, transcript.text)
            ok = got is not None and values_equivalent(
                kind, got.canonical, transcript.value.canonical
            )
            if not ok:
                failures += 1
    elapsed = time.monotonic() - started
    assert cases == (35 + 29 + 29) * 20 == 1860
    assert failures == 0
    assert elapsed < 10.0
    _report("criterion 1 round-trip", f"{cases} cases, 0 failures, {elapsed:.2f}s")


# Concrete examples quoted from the prompt boxes and appendix tables.
_ZIP_EXTRACTIONS = [
    ("one two three four five", "12345"),
    ("um, it's one two three four five", "12345"),
    ("it's one two three four five", "12345"),
    ("please, it's one two three four five", "12345"),
    ("definitely one two three four five", "12345"),
    ("I think it's one two three four five", "12345"),
    ("onetwothreefourfive", "12345"),
    ("carefully, one two three four five", "12345"),
    ("one two three four five, is that right?", "12345"),
    ("one two three four five, does that make sense?", "12345"),
    ("yes, one two three four five", "12345"),
    ("confirmed, one two three four five", "12345"),
    ("the number is one two three four five", "12345"),
    ("the digits are one two three four five", "12345"),
    ("yeah, it's one two three four five", "12345"),
    ("one two three, one two three, four five", "12345"),
    ("one two, pause, three four five", "12345"),
    ("twelve thirty-four five", "12345"),
    ("one twenty-three forty-five", "12345"),
    ("twelve three four five", "12345"),
    ("one two... three four... five", "12345"),
    ("one two, one two, three four five", "12345"),
    ("one... two... three... four... five", "12345"),
    ("um, one two three, you know, four five", "12345"),
    ("one-two-three-four-five", "12345"),
    ("It is nine double one oh one", "91101"),
]

_NUMBER_WORD_VECTORS = [
    ("nine double one oh one", "91101"),
    ("seven oh ... no, nine oh two one oh", "90210"),
    ("one two three... no wait, four five", "1245"),
    ("three hundred two five", "30025"),
    ("thirty two five eight", "3258"),
]

_DOB_EXTRACTIONS = [
    ("1267", "01-02-1967"),
    ("one two six seven", "01-02-1967"),
    ("32584", "03-25-1984"),
    ("five one seven eight two", "05-17-1982"),
    ("120285", "12-02-1985"),
    ("one two zero two eight five", "12-02-1985"),
    ("12021947", "12-02-1947"),
    ("one two zero two one nine four seven", "12-02-1947"),
    ("January second, nineteen ninety", "01-02-1990"),
    ("January zero two, nineteen ninety", "01-02-1990"),
    ("uh, zero one zero two one nine nine zero", "01-02-1990"),
    ("please, one five, eighty five", "01-05-1985"),
    ("January fifth, 1989", "01-05-1989"),
    ("1589", "01-05-1989"),
    ("March third, nineteen seventy-five", "03-03-1975"),
    ("three three seventy-five", "03-03-1975"),
    ("zero three zero three one nine seven five", "03-03-1975"),
]

_NAME_EXTRACTIONS = [
    "John Smith",
    "My name is John Smith",
    "Smith, John",
    "Mr. John Smith",
    "John Michael Smith",
    "John Smith Jr.",
    "James—no, I mean John Smith",
    "John, that's J-O-H-N Smith",
    "O'Connor, John",
    "John Smith-Jones",
    "Johnny",
    "It is John.",
]

def test_criterion_2_paper_example_vectors():
    cases = 0
    for text, expected in _ZIP_EXTRACTIONS:
        got = extract(SPECS["zip_code"], text)
        assert got is not None and got.canonical == expected, (text, got)
        cases += 1
    for text, digits in _NUMBER_WORD_VECTORS:
        assert parse_number_words(text) == digits, text
        cases += 1
    for text, expected in _DOB_EXTRACTIONS:
        got = extract(SPECS["date_of_birth"], text)
        assert got is not None and got.canonical == expected, (text, got)
        cases += 1
    for text in _NAME_EXTRACTIONS:
        got = extract(SPECS["person_name"], text)
        assert got is not None and got.canonical == "John", (text, got)
        cases += 1
    # validation-prompt verdicts
    zip_value = EntityValue.from_raw("zip_code", "12345")
    assert validate("My zip is one two three four five", zip_value, SPECS["zip_code"]).valid
    assert not validate("I don't know", zip_value, SPECS["zip_code"]).valid
    assert validate(
        "seven oh ... no, nine oh two one oh",
        EntityValue.from_raw("zip_code", "90210"),
        SPECS["zip_code"],
    ).valid
    cases += 3
    # validation-prompt date equivalences
    assert values_equivalent("date_of_birth", "01-15-2024", "01152024")
    assert values_equivalent("date_of_birth", "01-15-2024", "11524")
    cases += 2
    # initials-format table row: the bare form is not deterministically
    # recoverable; its contract is classification containment
    assert "name_with_initials" in classify("J. M. Smith", "person_name")
    assert "reversed" in classify("five four three two one", "zip_code")
    cases += 2
    assert cases >= 30
    _report("criterion 2 paper vectors", f"{cases} exact cases")


def test_criterion_3_metric_correctness():
    rng = random.Random(12345)
    f1_check = score([("12345", EntityValue.from_raw("zip_code", "12345")),
                      ("99999", EntityValue.from_raw("zip_code", "12345"))])
    assert abs(f1_check.f1 - 2 / 3) < 1e-12
    trials = 1000
    for _ in range(trials):
        pairs = []
        for _ in range(rng.randrange(0, 25)):
            gold = EntityValue.from_raw("zip_code", f"{rng.randrange(100000):05d}")
            roll = rng.random()
            if roll < 0.25:
                predicted = None
            elif roll < 0.55:
                predicted = gold.canonical
            elif roll < 0.8:
                predicted = f"{rng.randrange(100000):05d}"
            else:
                predicted = "garbage"
            pairs.append((predicted, gold))
        result = score(pairs)
        tp = fp = fn = 0
        for predicted, gold in pairs:
            if predicted is None or not predicted.strip():
                fn += 1
                continue
            try:
                ok = values_equivalent(gold.kind, predicted, gold.canonical)
            except FormatError:
                ok = False
            if ok:
                tp += 1
            else:
                fp += 1
        assert (result.tp, result.fp, result.fn) == (tp, fp, fn)
        total = tp + fp + fn
        if total:
            assert abs(result.accuracy - tp / total) < 1e-12
        if tp:
            p, r = tp / (tp + fp), tp / (tp + fn)
            assert abs(result.f1 - 2 * p * r / (p + r)) < 1e-12
    _report("criterion 3 metrics", f"{trials} randomized trials vs brute force, F1 spot check 1e-12")


def test_criterion_4_split_contract():
    assert split_sizes(1055, (0.7, 0.15, 0.15)) == (739, 158, 158)
    sizes_5635 = split_sizes(5635, (0.7, 0.15, 0.15))
    paper_5635 = (3944, 845, 846)
    deltas = [a - b for a, b in zip(sizes_5635, paper_5635)]
    assert sum(sizes_5635) == 5635
    assert all(abs(d) <= 1 for d in deltas)
    discrepancy = (
        f"5635 -> {sizes_5635} vs paper {paper_5635} (deltas {deltas}; "
        "floor+train-first rule, recorded not hidden)"
    )

    rng = random.Random(4)
    for _ in range(100):
        n = rng.randrange(1, 2000)
        values = max(1, rng.randrange(1, 20))
        samples = []
        for i in range(n):
            value = EntityValue.from_raw("zip_code", f"{(i % values) * 211 % 100000:05d}")
            from spokenfields.domain import Provenance, Transcript

            samples.append(
                LabeledSample(
                    transcript=Transcript(
                        text=f"sample {i}",
                        value=value,
                        variation_tags=frozenset({"casual"}),
                        provenance=Provenance.RULE_RENDERED,
                    ),
                    validated=True,
                )
            )
        seed = rng.randrange(1000)
        train, valid, test = split(samples, (0.7, 0.15, 0.15), seed=seed)
        # disjoint cover
        assert len(train) + len(valid) + len(test) == n
        texts = [s.transcript.text for part in (train, valid, test) for s in part]
        assert len(set(texts)) == n
        # deterministic
        again = split(samples, (0.7, 0.15, 0.15), seed=seed)
        assert [s.transcript.text for s in again[0]] == [s.transcript.text for s in train]
    _report("criterion 4 split", f"1055->739/158/158 exact; {discrepancy}; 100 random sizes")


def test_criterion_5_balance_property():
    seeds = range(20)
    for seed in seeds:
        config = GenerationConfig(
            spec=SPECS["zip_code"],
            num_values=5,
            target_per_pair=3,
            max_rounds=8,
            seed=seed,
        )
        samples, report = run_pipeline(config, MockChatProvider(seed=seed))
        counts = report.pair_counts.values()
        assert max(counts) - min(counts) <= 1, (seed, report.shortfalls)
        assert all(s.validated for s in samples)
    _report("criterion 5 balance", "20 seeds, 5 values x 35 variations, target 3, spread <= 1")


def test_criterion_6_optimizer_property():
    from tests.test_optimize import appending_mutator, keyword_extractor, _samples

    trainset = _samples(40)
    validset = _samples(30, prefix="so the digits are")
    for seed in range(20):
        config = OptimizerConfig(
            batch_size=8, iterations=5, pool_size=5, mutation_count=3, seed=seed
        )
        winner, trace = optimize(
            "Extract exactly 5 numeric values",
            trainset,
            validset,
            keyword_extractor,
            appending_mutator,
            config,
            SPECS["zip_code"],
        )
        series = [r["running_best_valid"] for r in trace if "running_best_valid" in r]
        assert series == sorted(series), seed
        assert max(series) >= 0.9, (seed, series)
    base = "Extract the value"
    config = OptimizerConfig(batch_size=8, iterations=3, pool_size=4, mutation_count=0, seed=0)
    winner, _ = optimize(
        base, trainset, validset, keyword_extractor, appending_mutator, config, SPECS["zip_code"]
    )
    assert winner.instruction == base
    _report("criterion 6 optimizer", "20 seeds reach 0.9 within 5 iterations; no-op returns base")


def test_criterion_7_cosine_properties():
    rng = random.Random(77)
    for _ in range(1000):
        dim = rng.randrange(2, 12)
        a = EmbeddingVector(tuple(rng.uniform(-3, 3) for _ in range(dim)), "t")
        b = EmbeddingVector(tuple(rng.uniform(-3, 3) for _ in range(dim)), "t")
        if not any(a.values) or not any(b.values):
            continue
        assert abs(cosine(a, b) - cosine(b, a)) < 1e-12
        scale = rng.uniform(0.1, 9.0)
        scaled = EmbeddingVector(tuple(x * scale for x in b.values), "t")
        assert abs(cosine(a, scaled) - cosine(a, b)) < 1e-9
        assert abs(cosine(a, a) - 1.0) < 1e-9

    samples = []
    for kind in SPECS:
        samples.extend(
            LabeledSample(transcript=t, validated=True)
            for t in corpus(kind, per_variation=3, seed=7)[:70]
        )
    assert len(samples) >= 200
    report = pair_and_score(
        samples, MockEmbeddingProvider(), config=SimilarityConfig(seed=3)
    )
    for kind in SPECS:
        match = report.buckets[(kind, OverlapCategory.MATCH)]
        null = report.buckets[(kind, OverlapCategory.NULL_OVERLAP)]
        assert match.mean >= null.mean, kind
    _report("criterion 7 cosine", "1000 vectors; match >= null_overlap per kind on 210 pairs")


def test_criterion_8_offline_determinism(tmp_path):
    from spokenfields.cli import main

    outputs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        code = main(
            [
                "pipeline",
                "--kind",
                "zip_code",
                "--mode",
                "mock",
                "--seed",
                "1234",
                "--num-values",
                "3",
                "--target",
                "2",
                "--out-dir",
                str(out_dir),
            ]
        )
        assert code == 0
        outputs.append((out_dir / "dataset.jsonl").read_bytes())
    assert outputs[0] == outputs[1]
    _report("criterion 8 determinism", f"two mock runs byte-identical ({len(outputs[0])} bytes)")


def test_criterion_9_robustness():
    rng = random.Random(31337)
    alphabet = (
        "one two three four five six seven eight nine zero oh double "
        "no wait I mean um uh John Smith January second 12345 12-02-1947 "
        "... , - ' é世界\U0001f600\t"
    ).split(" ") + [" ", "...", ",", "—", chr(0)]
    cases = 0
    for _ in range(10_000):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 30)))
        parse_number_words(text)
        for spec in SPECS.values():
            extract(spec, text)
        cases += 1

    with pytest.raises(MalformedOutputError):
        parse_shape("**here is your json**", Shape.VALUES_PAYLOAD)
    with pytest.raises(MalformedOutputError):
        parse_shape('{"values": "not-a-list"}', Shape.VALUES_PAYLOAD)
    with pytest.raises(MalformedOutputError):
        parse_shape("maybe", Shape.BOOLEAN_VERDICT)
    _report("criterion 9 robustness", f"{cases} fuzz cases; malformed payloads rejected")
