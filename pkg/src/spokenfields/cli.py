"""Command-line entry point.

Every stage of the pipeline is exposed as a subcommand, and every
subcommand runs fully offline in mock mode. Data crosses the boundary as
JSONL on stdin/stdout or files; diagnostics go to stderr. Each run drops a
machine-readable manifest (config hash, seed, versions) next to its
outputs so results are reproducible from config + seed alone.

Exit codes: 0 success, 1 usage error, 2 provider failure, 3 data-format
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .domain import (
    EntityValue,
    FieldSpec,
    FormatError,
    LabeledSample,
    UnknownKindError,
    load_jsonl,
)
from .metrics import InvalidRatiosError, dataset_stats, metrics_table, score, split
from .optimize import OptimizerConfig, optimize, provider_mutator, trace_to_jsonl
from .parse import extract as oracle_extract
from .pipeline import GenerationConfig, generate_transcripts, generate_values, run_pipeline
from .providers import (
    ChatRequest,
    HttpProvider,
    MalformedOutputError,
    MockChatProvider,
    MockEmbeddingProvider,
    ProviderError,
    ProviderProfile,
    Shape,
    UsageError,
)
from .similarity import SimilarityConfig, pair_and_score, report_to_json
from .validate import ValidationMode, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROVIDER = 2
EXIT_DATA = 3


class _CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _CliUsageError(message)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise _CliUsageError(f"config file not found: {path}")
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".toml":
        try:
            import tomllib  # type: ignore[import-not-found]
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _field_spec(config: dict, args) -> FieldSpec:
    section = dict(config.get("field", {}))
    if getattr(args, "kind", None):
        section.setdefault("kind", args.kind)
        section.setdefault("field_name", args.kind)
    defaults = {
        "zip_code": ("integer", "What is your zip code?", "Zip code is a 5 digit number, with optional 4 digit add on code"),
        "date_of_birth": ("date", "What is your date of birth?", "Date of birth in MM-DD-YYYY format"),
        "person_name": ("string", "Could you tell me your name please?", "The caller's first name"),
    }
    kind = section.get("kind")
    if kind is None:
        raise _CliUsageError("no field kind configured (use [field] in config or --kind)")
    if kind in defaults:
        output_type, question, description = defaults[kind]
        section.setdefault("output_type", output_type)
        section.setdefault("question", question)
        section.setdefault("description", description)
        section.setdefault("field_name", kind)
    return FieldSpec(
        field_name=section["field_name"],
        kind=section["kind"],
        output_type=section["output_type"],
        question=section["question"],
        description=section["description"],
    )


def _chat_provider(config: dict, mode: str, seed: int):
    if mode == "mock":
        return MockChatProvider(seed=seed)
    section = config.get("providers", {}).get("chat")
    if not section:
        raise _CliUsageError("live mode needs [providers.chat] in the config")
    return HttpProvider(ProviderProfile(**section))


def _embed_provider(config: dict, mode: str):
    if mode == "mock":
        return MockEmbeddingProvider()
    section = config.get("providers", {}).get("embedding")
    if not section:
        raise _CliUsageError("live mode needs [providers.embedding] in the config")
    return HttpProvider(ProviderProfile(**section))


def _write_manifest(out_dir: Path, command: str, config: dict, seed: int, outputs: list[str]):
    manifest = {
        "command": command,
        "seed": seed,
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode("utf-8")
        ).hexdigest(),
        "package_version": __version__,
        "python_version": sys.version.split()[0],
        "outputs": outputs,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "run_manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _read_samples(path: str | None):
    if path is None or path == "-":
        return list(load_jsonl(sys.stdin))
    with open(path, encoding="utf-8") as fp:
        return list(load_jsonl(fp))


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise InvalidRatiosError(f"expected three ratios, got {text!r}")
    return parts[0], parts[1], parts[2]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen_values(args) -> int:
    config = _load_config(args.config)
    spec = _field_spec(config, args)
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    provider = _chat_provider(config, args.mode or config.get("provider_mode", "mock"), seed)
    values = generate_values(spec, args.count, provider)
    print(json.dumps({"values": [v.canonical for v in values]}, ensure_ascii=False))
    return EXIT_OK


def _cmd_gen_transcripts(args) -> int:
    config = _load_config(args.config)
    spec = _field_spec(config, args)
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    provider = _chat_provider(config, args.mode or config.get("provider_mode", "mock"), seed)
    value = EntityValue.from_raw(spec.kind, args.value)
    variations = [v.strip() for v in args.variations.split(",") if v.strip()]
    results = generate_transcripts(
        value, variations, [], provider, spec, count=args.count
    )
    for text, tags in results:
        print(json.dumps({"transcript": text, "variation_types": sorted(tags)}, ensure_ascii=False))
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    config = _load_config(args.config)
    spec = _field_spec(config, args)
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    mode = args.mode or config.get("provider_mode", "mock")
    gen_section = config.get("generation", {})
    gen_config = GenerationConfig(
        spec=spec,
        num_values=args.num_values or gen_section.get("num_values", 5),
        target_per_pair=args.target or gen_section.get("target_per_pair", 3),
        max_rounds=gen_section.get("max_rounds", 8),
        provider_mode=mode,
        seed=seed,
        parallelism=config.get("parallelism", 1),
    )
    provider = _chat_provider(config, mode, seed)
    validator = None
    if mode == "live":
        # deterministic oracle + judge conjunction bounds false positives
        def validator(text, truth, spec_):
            return validate(text, truth, spec_, ValidationMode.BOTH, provider)

    samples, report = run_pipeline(gen_config, provider, validator)

    out_dir = Path(args.out_dir or config.get("output_dir", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset_path = out_dir / "dataset.jsonl"
    with open(dataset_path, "w", encoding="utf-8") as fp:
        from .domain import dump_jsonl

        dump_jsonl(samples, fp)
    report_path = out_dir / "pipeline_report.json"
    report_path.write_text(
        json.dumps(report.to_json_obj(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    _write_manifest(out_dir, "pipeline", config, seed, [str(dataset_path), str(report_path)])
    print(
        f"wrote {len(samples)} samples to {dataset_path} "
        f"(rounds={report.rounds_used}, invalid_rate={report.invalid_rate:.4f})",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = _load_config(args.config)
    mode = ValidationMode(args.mode)
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    provider = None
    if mode in (ValidationMode.PROVIDER, ValidationMode.BOTH):
        provider = _chat_provider(config, args.provider_mode or config.get("provider_mode", "mock"), seed)
    for sample in _read_samples(args.input):
        spec = _field_spec({"field": {}}, argparse.Namespace(kind=sample.transcript.value.kind))
        outcome = validate(
            sample.transcript.text, sample.transcript.value, spec, mode, provider
        )
        print(
            json.dumps(
                {
                    "text": sample.transcript.text,
                    "valid": outcome.valid,
                    "extracted": outcome.extracted.canonical if outcome.extracted else None,
                    "mode": outcome.mode.value,
                    "disagreement": outcome.disagreement,
                },
                ensure_ascii=False,
            )
        )
    return EXIT_OK


def _cmd_split(args) -> int:
    ratios = _parse_ratios(args.ratios)
    if args.total is not None:
        from .metrics import split_sizes

        n_train, n_valid, n_test = split_sizes(args.total, ratios)
        print(json.dumps({"train": n_train, "valid": n_valid, "test": n_test}))
        return EXIT_OK
    samples = _read_samples(args.input)
    train, valid, test = split(samples, ratios, args.seed or 0)
    out_dir = Path(args.out_dir or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    from .domain import dump_jsonl

    outputs = []
    for name, part in (("train", train), ("valid", valid), ("test", test)):
        path = out_dir / f"{name}.jsonl"
        with open(path, "w", encoding="utf-8") as fp:
            dump_jsonl(part, fp)
        outputs.append(str(path))
    _write_manifest(out_dir, "split", {"ratios": list(ratios)}, args.seed or 0, outputs)
    print(
        json.dumps({"train": len(train), "valid": len(valid), "test": len(test)}),
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_stats(args) -> int:
    samples = _read_samples(args.input)
    print(json.dumps(dataset_stats(samples).to_json_obj(), indent=2))
    return EXIT_OK


def _cmd_score(args) -> int:
    gold = _read_samples(args.gold)
    predictions: list[str | None] = []
    with open(args.pred, encoding="utf-8") as fp:
        for line in fp:
            line = line.strip()
            if not line:
                predictions.append(None)
                continue
            try:
                obj = json.loads(line)
                predictions.append(obj.get("predicted") if isinstance(obj, dict) else str(obj))
            except json.JSONDecodeError:
                predictions.append(line)
    if len(predictions) != len(gold):
        raise FormatError("score", args.pred, "prediction/gold line counts differ")
    pairs = [(p, g.transcript.value) for p, g in zip(predictions, gold)]
    by_kind: dict[str, list] = {}
    for pair in pairs:
        by_kind.setdefault(pair[1].kind, []).append(pair)
    rows = {kind: score(kind_pairs) for kind, kind_pairs in sorted(by_kind.items())}
    overall = score(pairs)
    report = {kind: m.to_json_obj() for kind, m in rows.items()}
    report["overall"] = overall.to_json_obj()
    print(json.dumps(report, indent=2))
    if len(rows) > 1:
        rows["overall"] = overall
    print(metrics_table(rows or {"overall": overall}), file=sys.stderr)
    return EXIT_OK


def _cmd_extract(args) -> int:
    config = _load_config(args.config)
    spec = _field_spec(config, args)
    if args.input and args.input != "-":
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    else:
        lines = sys.stdin.read().splitlines()
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            text = obj["text"] if isinstance(obj, dict) else str(obj)
        except json.JSONDecodeError:
            text = line
        value = oracle_extract(spec, text)
        print(json.dumps({"predicted": value.canonical if value else None}, ensure_ascii=False))
    return EXIT_OK


def _oracle_extractor(instruction: str, spec: FieldSpec, text: str) -> str | None:
    value = oracle_extract(spec, text)
    return value.canonical if value else None


def _live_extractor(provider):
    def run(instruction: str, spec: FieldSpec, text: str) -> str | None:
        request = ChatRequest(
            system_text=instruction,
            user_text=(
                f"Question: {spec.question}\n"
                f"Field Type: {spec.output_type}\n"
                f"Field Description: {spec.description}\n"
                f"Transcript: {text}\n"
                "Return only the extracted value. Do not include any "
                "symbols, labels, or extra text."
            ),
            expected_shape=Shape.FREE_TEXT,
        )
        answer = str(provider.chat(request)).strip()
        return answer or None

    return run


def _cmd_optimize(args) -> int:
    config = _load_config(args.config)
    spec = _field_spec(config, args)
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    mode = args.mode or config.get("provider_mode", "mock")
    trainset = _read_samples(args.train)
    validset = _read_samples(args.valid)
    section = config.get("optimizer", {})
    opt_config = OptimizerConfig(
        batch_size=min(section.get("batch_size", 8), len(trainset)),
        iterations=section.get("iterations", 5),
        pool_size=section.get("pool_size", 6),
        mutation_count=section.get("mutation_count", 2),
        seed=seed,
    )
    provider = _chat_provider(config, mode, seed)
    extractor = _oracle_extractor if mode == "mock" else _live_extractor(provider)
    mutator = provider_mutator(provider)
    winner, trace = optimize(
        args.base, trainset, validset, extractor, mutator, opt_config, spec
    )
    out_dir = Path(args.out_dir or config.get("output_dir", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    prompt_path = out_dir / "optimized_prompt.txt"
    prompt_path.write_text(winner.instruction + "\n", encoding="utf-8")
    trace_path = out_dir / "optimizer_trace.jsonl"
    trace_path.write_text(trace_to_jsonl(trace), encoding="utf-8")
    _write_manifest(out_dir, "optimize", config, seed, [str(prompt_path), str(trace_path)])
    print(
        json.dumps({"instruction": winner.instruction, "valid_score": winner.valid_score}),
    )
    return EXIT_OK


def _cmd_similarity(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    mode = args.mode or config.get("provider_mode", "mock")
    samples = _read_samples(args.input)
    embed_provider = _embed_provider(config, mode)
    chat_provider = _chat_provider(config, mode, seed) if args.tag_mode == "provider" else None
    report = pair_and_score(
        samples,
        embed_provider,
        chat_provider,
        SimilarityConfig(seed=seed, tag_mode=args.tag_mode),
    )
    print(report_to_json(report))
    print(report.text_table(), file=sys.stderr)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="spokenfields", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, kind_opt=True):
        p.add_argument("--config", help="TOML or JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--mode", choices=["mock", "live"], default=None)
        if kind_opt:
            p.add_argument("--kind", choices=["zip_code", "date_of_birth", "person_name"])

    p = sub.add_parser("gen-values", help="generate entity values")
    common(p)
    p.add_argument("--count", type=int, default=5)
    p.set_defaults(func=_cmd_gen_values)

    p = sub.add_parser("gen-transcripts", help="generate transcripts for one value")
    common(p)
    p.add_argument("--value", required=True)
    p.add_argument("--variations", required=True, help="comma-separated variation ids")
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=_cmd_gen_transcripts)

    p = sub.add_parser("pipeline", help="run the full generation pipeline")
    common(p)
    p.add_argument("--num-values", type=int, default=None)
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("validate", help="validate transcripts against truths")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", choices=["oracle", "provider", "both"], default="oracle")
    p.add_argument("--provider-mode", choices=["mock", "live"], default=None)
    p.add_argument("--in", dest="input", default="-")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("split", help="train/valid/test split")
    p.add_argument("--in", dest="input", default="-")
    p.add_argument("--ratios", default="0.7,0.15,0.15")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--total", type=int, default=None, help="just print sizes for N samples")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--in", dest="input", default="-")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("score", help="score predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("extract", help="run the reference extractor")
    common(p)
    p.add_argument("--in", dest="input", default="-")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("optimize", help="optimize an extraction instruction")
    common(p)
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--base", required=True, help="base extraction instruction")
    p.add_argument("--out-dir")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("similarity", help="synthetic-to-real similarity report")
    common(p, kind_opt=False)
    p.add_argument("--in", dest="input", default="-")
    p.add_argument("--tag-mode", choices=["rule", "provider"], default="rule")
    p.set_defaults(func=_cmd_similarity)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, InvalidRatiosError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (
        MalformedOutputError,
        FormatError,
        UnknownKindError,
        KeyError,
        json.JSONDecodeError,
    ) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
