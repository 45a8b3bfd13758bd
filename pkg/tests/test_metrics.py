import random

import pytest

from spokenfields.domain import (
    EntityValue,
    LabeledSample,
    Provenance,
    Split,
    Transcript,
)
from spokenfields.metrics import (
    InvalidRatiosError,
    Metrics,
    dataset_stats,
    metrics_table,
    score,
    split,
    split_sizes,
)


def _gold(canonical="12345"):
    return EntityValue.from_raw("zip_code", canonical)


# -- score ----------------------------------------------------------------------


def test_score_perfect():
    pairs = [("12345", _gold())] * 4
    result = score(pairs)
    assert (result.tp, result.fp, result.fn) == (4, 0, 0)
    assert result.precision == result.recall == result.f1 == result.accuracy == 1.0


def test_score_f1_two_thirds():
    pairs = [("12345", _gold()), ("99999", _gold())]
    result = score(pairs)
    assert (result.tp, result.fp, result.fn) == (1, 1, 0)
    assert result.precision == 0.5
    assert result.recall == 1.0
    assert abs(result.f1 - 2 / 3) < 1e-12


def test_score_all_empty():
    pairs = [(None, _gold()), ("", _gold()), ("   ", _gold())]
    result = score(pairs)
    assert (result.tp, result.fp, result.fn) == (0, 0, 3)
    assert result.precision == result.recall == result.f1 == 0.0


def test_score_equivalence_not_string_equality():
    gold = EntityValue.from_raw("date_of_birth", "01-15-2024")
    result = score([("11524", gold), ("01152024", gold)])
    assert result.tp == 2


def test_score_unparseable_prediction_is_fp():
    result = score([("not a zip", _gold())])
    assert result.fp == 1


def test_score_matches_brute_force_recount():
    from spokenfields.domain import FormatError, values_equivalent

    rng = random.Random(0)
    for _ in range(200):
        pairs = []
        for _ in range(rng.randrange(0, 30)):
            gold = _gold(f"{rng.randrange(0, 100000):05d}")
            roll = rng.random()
            if roll < 0.3:
                predicted = None
            elif roll < 0.6:
                predicted = gold.canonical
            else:
                predicted = f"{rng.randrange(0, 100000):05d}"
            pairs.append((predicted, gold))
        result = score(pairs)
        tp = fp = fn = 0
        for predicted, gold in pairs:
            if predicted is None or not str(predicted).strip():
                fn += 1
            else:
                try:
                    ok = values_equivalent(gold.kind, predicted, gold.canonical)
                except FormatError:
                    ok = False
                tp, fp = (tp + 1, fp) if ok else (tp, fp + 1)
        assert (result.tp, result.fp, result.fn) == (tp, fp, fn)


def test_f1_edge_properties():
    assert Metrics(tp=0, fp=5, fn=5).f1 == 0.0
    assert Metrics(tp=3, fp=0, fn=0).f1 == 1.0
    assert 0 < Metrics(tp=3, fp=1, fn=0).f1 < 1


def test_metrics_table_renders():
    table = metrics_table({"zip_code": Metrics(tp=9, fp=1, fn=0)})
    assert "zip_code" in table and "Acc" in table and "F1" in table


# -- split -----------------------------------------------------------------------


def _samples(n, num_values=10):
    out = []
    for i in range(n):
        value = EntityValue.from_raw("zip_code", f"{(i % num_values) * 137 % 100000:05d}")
        transcript = Transcript(
            text=f"transcript number {i}",
            value=value,
            variation_tags=frozenset({"casual"}),
            provenance=Provenance.RULE_RENDERED,
        )
        out.append(LabeledSample(transcript=transcript, validated=True))
    return out


def test_split_sizes_table_rows():
    assert split_sizes(1055, (0.7, 0.15, 0.15)) == (739, 158, 158)
    assert split_sizes(1000, (0.7, 0.15, 0.15)) == (700, 150, 150)
    assert split_sizes(10, (0.7, 0.15, 0.15)) == (8, 1, 1)


def test_split_sizes_5635_documented_discrepancy():
    # The dataset table reports 3944/845/846 for 5635; the floor+train-first
    # rule lands one sample differently. Divergence is at most 1 per split.
    sizes = split_sizes(5635, (0.7, 0.15, 0.15))
    assert sum(sizes) == 5635
    paper = (3944, 845, 846)
    assert all(abs(a - b) <= 1 for a, b in zip(sizes, paper))


def test_split_sizes_bad_ratios():
    with pytest.raises(InvalidRatiosError):
        split_sizes(100, (0.5, 0.2, 0.2))
    with pytest.raises(InvalidRatiosError):
        split_sizes(100, (0.7, 0.3, 0.0))


def test_split_partition_properties():
    rng = random.Random(1)
    for _ in range(25):
        n = rng.randrange(1, 400)
        samples = _samples(n)
        train, valid, test = split(samples, (0.7, 0.15, 0.15), seed=rng.randrange(100))
        assert len(train) + len(valid) + len(test) == n
        texts = [s.transcript.text for part in (train, valid, test) for s in part]
        assert sorted(texts) == sorted(s.transcript.text for s in samples)
        assert all(s.split is Split.TRAIN for s in train)
        assert all(s.split is Split.VALID for s in valid)
        assert all(s.split is Split.TEST for s in test)


def test_split_deterministic():
    samples = _samples(100)
    first = split(samples, seed=5)
    second = split(samples, seed=5)
    assert [s.transcript.text for s in first[0]] == [s.transcript.text for s in second[0]]


def test_split_seed_changes_assignment():
    samples = _samples(100)
    a = {s.transcript.text for s in split(samples, seed=1)[0]}
    b = {s.transcript.text for s in split(samples, seed=2)[0]}
    assert a != b


def test_split_stratified_no_value_only_in_test():
    rng = random.Random(7)
    for trial in range(20):
        samples = _samples(rng.randrange(20, 200), num_values=rng.randrange(2, 12))
        train, valid, test = split(samples, seed=trial)
        outside = {
            s.transcript.value.canonical for part in (train, valid) for s in part
        }
        for sample in test:
            assert sample.transcript.value.canonical in outside


# -- dataset_stats ------------------------------------------------------------


def test_dataset_stats_empty():
    stats = dataset_stats([])
    assert stats.num_samples == 0
    assert stats.tag_occurrences == 0
    assert stats.avg_len_chars == 0.0
    assert stats.std_len_chars == 0.0


def test_dataset_stats_hand_count():
    value = EntityValue.from_raw("zip_code", "12345")
    one = LabeledSample(
        transcript=Transcript(
            text="x" * 40, value=value, variation_tags=frozenset({"a"}),
            provenance=Provenance.REAL,
        )
    )
    two = LabeledSample(
        transcript=Transcript(
            text="y" * 44, value=value, variation_tags=frozenset({"a", "b"}),
            provenance=Provenance.REAL,
        )
    )
    stats = dataset_stats([one, two])
    assert stats.num_samples == 2
    assert stats.avg_len_chars == 42.0
    assert stats.std_len_chars == 2.0
    assert stats.tag_occurrences == 3
    assert stats.num_tags_used == 2
    assert stats.num_unique_values == 1


def test_dataset_stats_on_pipeline_output(zip_spec):
    from spokenfields.pipeline import GenerationConfig, run_pipeline
    from spokenfields.providers import MockChatProvider
    from spokenfields.taxonomy import Category, VariationRegistry, VariationType

    registry = VariationRegistry(
        [
            VariationType("casual", Category.GENERAL, "Use relaxed language.", "it's one two"),
            VariationType("formal", Category.GENERAL, "Use formal language.", "the number is one"),
            VariationType("polite", Category.GENERAL, "Use polite language.", "please, one two"),
        ]
    )
    config = GenerationConfig(spec=zip_spec, num_values=2, target_per_pair=2, seed=1)
    samples, _ = run_pipeline(config, MockChatProvider(seed=1), registry=registry)
    stats = dataset_stats(samples)
    assert stats.num_samples == 12
    assert stats.tag_occurrences >= 12
    assert stats.num_unique_values == 2
    assert stats.split_counts["unassigned"] == 12
