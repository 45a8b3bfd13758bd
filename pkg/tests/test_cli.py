import json

import pytest

from spokenfields.cli import main
from spokenfields.domain import dump_jsonl
from spokenfields.pipeline import GenerationConfig, run_pipeline
from spokenfields.providers import MockChatProvider


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_split_total_reproduces_table_row(capsys):
    code, out, _ = run_cli(capsys, "split", "--total", "1055", "--ratios", "0.7,0.15,0.15")
    assert code == 0
    assert json.loads(out) == {"train": 739, "valid": 158, "test": 158}


def test_pipeline_mock_byte_identical(tmp_path, capsys):
    for name in ("a", "b"):
        code, _, err = run_cli(
            capsys,
            "pipeline",
            "--kind",
            "zip_code",
            "--mode",
            "mock",
            "--seed",
            "7",
            "--num-values",
            "2",
            "--target",
            "2",
            "--out-dir",
            str(tmp_path / name),
        )
        assert code == 0, err
    first = (tmp_path / "a" / "dataset.jsonl").read_bytes()
    second = (tmp_path / "b" / "dataset.jsonl").read_bytes()
    assert first == second
    manifest = json.loads((tmp_path / "a" / "run_manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["command"] == "pipeline"
    assert "config_hash" in manifest


def test_gen_values_mock(capsys):
    code, out, _ = run_cli(
        capsys, "gen-values", "--kind", "zip_code", "--mode", "mock", "--seed", "3", "--count", "4"
    )
    assert code == 0
    values = json.loads(out)["values"]
    assert len(values) == 4 and all(len(v) == 5 for v in values)


def test_gen_transcripts_mock(capsys):
    code, out, _ = run_cli(
        capsys,
        "gen-transcripts",
        "--kind",
        "zip_code",
        "--value",
        "12345",
        "--variations",
        "digit_by_digit",
        "--count",
        "2",
    )
    assert code == 0
    lines = [json.loads(l) for l in out.strip().splitlines()]
    assert len(lines) == 2
    assert all("one two three four five" in l["transcript"] for l in lines)


def _write_dataset(tmp_path, seed=5):
    from spokenfields.cli import _field_spec

    spec = _field_spec({"field": {}}, type("A", (), {"kind": "zip_code"}))
    config = GenerationConfig(spec=spec, num_values=2, target_per_pair=2, seed=seed)
    samples, _ = run_pipeline(config, MockChatProvider(seed=seed))
    path = tmp_path / "data.jsonl"
    with open(path, "w", encoding="utf-8") as fp:
        dump_jsonl(samples, fp)
    return path, samples


def test_stats_command(tmp_path, capsys):
    path, samples = _write_dataset(tmp_path)
    code, out, _ = run_cli(capsys, "stats", "--in", str(path))
    assert code == 0
    stats = json.loads(out)
    assert stats["num_samples"] == len(samples)


def test_split_command_writes_parts(tmp_path, capsys):
    path, samples = _write_dataset(tmp_path)
    out_dir = tmp_path / "splits"
    code, _, err = run_cli(
        capsys, "split", "--in", str(path), "--seed", "1", "--out-dir", str(out_dir)
    )
    assert code == 0
    sizes = json.loads(err.strip().splitlines()[-1])
    assert sizes["train"] + sizes["valid"] + sizes["test"] == len(samples)
    assert (out_dir / "train.jsonl").exists()
    assert (out_dir / "run_manifest.json").exists()


def test_extract_and_score_round_trip(tmp_path, capsys):
    path, samples = _write_dataset(tmp_path)
    code, out, _ = run_cli(capsys, "extract", "--kind", "zip_code", "--in", str(path))
    assert code == 0
    pred_path = tmp_path / "pred.jsonl"
    pred_path.write_text(out, encoding="utf-8")
    code, out, err = run_cli(capsys, "score", "--pred", str(pred_path), "--gold", str(path))
    assert code == 0
    metrics = json.loads(out)
    assert metrics["overall"]["accuracy"] == 1.0  # oracle extractor on validated data
    assert metrics["zip_code"]["f1"] == 1.0
    assert "Acc" in err and "zip_code" in err


def test_validate_command(tmp_path, capsys):
    path, samples = _write_dataset(tmp_path)
    code, out, _ = run_cli(capsys, "validate", "--mode", "oracle", "--in", str(path))
    assert code == 0
    outcomes = [json.loads(l) for l in out.strip().splitlines()]
    assert len(outcomes) == len(samples)
    assert all(o["valid"] for o in outcomes)


def test_optimize_command_mock(tmp_path, capsys):
    path, _ = _write_dataset(tmp_path)
    out_dir = tmp_path / "opt"
    code, out, _ = run_cli(
        capsys,
        "optimize",
        "--kind",
        "zip_code",
        "--train",
        str(path),
        "--valid",
        str(path),
        "--base",
        "Extract exactly 5 numeric digits",
        "--out-dir",
        str(out_dir),
        "--seed",
        "2",
    )
    assert code == 0
    assert (out_dir / "optimized_prompt.txt").exists()
    assert (out_dir / "optimizer_trace.jsonl").exists()
    result = json.loads(out)
    assert result["valid_score"] == 1.0  # oracle-backed extraction


def test_similarity_command(tmp_path, capsys):
    path, _ = _write_dataset(tmp_path)
    code, out, err = run_cli(capsys, "similarity", "--in", str(path), "--seed", "3")
    assert code == 0
    report = json.loads(out)
    assert "zip_code" in report["buckets"]
    assert "match" in err


def test_usage_error_exit_code(capsys):
    assert run_cli(capsys, "split", "--ratios", "0.5,0.2")[0] == 1
    assert run_cli(capsys, "gen-values", "--mode", "live")[0] == 1  # no providers configured


def test_data_error_exit_code(tmp_path, capsys):
    gold, _ = _write_dataset(tmp_path)
    pred = tmp_path / "short.jsonl"
    pred.write_text('{"predicted": "12345"}\n', encoding="utf-8")
    code, _, err = run_cli(capsys, "score", "--pred", str(pred), "--gold", str(gold))
    assert code == 3
    assert "data error" in err


def test_data_error_on_malformed_jsonl(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"no_text_field": 1}\n', encoding="utf-8")
    code, _, err = run_cli(capsys, "stats", "--in", str(bad))
    assert code == 3
    assert "data error" in err


def test_provider_error_exit_code(tmp_path, capsys, monkeypatch):
    config = tmp_path / "live.json"
    config.write_text(
        json.dumps(
            {
                "provider_mode": "live",
                "field": {
                    "field_name": "zip_code",
                    "kind": "zip_code",
                    "output_type": "integer",
                    "question": "q",
                    "description": "d",
                },
                "providers": {
                    "chat": {
                        "backend": "openai_chat",
                        "endpoint": "https://example.invalid/v1/chat",
                        "model": "m",
                        "credential_env": "SPOKENFIELDS_NO_SUCH_CREDENTIAL",
                    }
                },
            }
        ),
        encoding="utf-8",
    )
    code, _, err = run_cli(capsys, "gen-values", "--config", str(config), "--mode", "live")
    assert code == 2
    assert "provider error" in err


def test_toml_config_round_trip(tmp_path, capsys):
    config = tmp_path / "run.toml"
    config.write_text(
        "seed = 4\n"
        'provider_mode = "mock"\n'
        "[field]\n"
        'field_name = "zip_code"\n'
        'kind = "zip_code"\n'
        'output_type = "integer"\n'
        'question = "What is your zip code?"\n'
        'description = "5 digits"\n'
        "[generation]\n"
        "num_values = 2\n"
        "target_per_pair = 2\n",
        encoding="utf-8",
    )
    out_dir = tmp_path / "out"
    code, _, err = run_cli(
        capsys, "pipeline", "--config", str(config), "--out-dir", str(out_dir)
    )
    assert code == 0, err
    assert (out_dir / "dataset.jsonl").exists()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
