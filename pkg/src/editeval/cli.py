"""Command-line pipeline: parse, extract, evaluate, analyze, report.

Exit codes: 0 success, 1 usage error, 2 data error.  Every successful run
writes ``config.json`` (resolved options plus sha256 digests of the input
files) into the output directory; data errors write ``error.json`` there
instead.  Outputs carry no timestamps and sort all JSON keys, so rerunning
a stage over unchanged inputs reproduces its artifacts byte for byte.

Option values resolve in order: command line, then the JSON object in
``--config`` (keys named like the long options, underscores for dashes),
then built-in defaults.  The extract dictionary additionally falls back to
the ``EDITEVAL_DICTIONARY`` environment variable and finally to the bundled
word list.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .analysis import (
    compare,
    confidence_correlation,
    layer_sweep,
    layer_sweep_rows,
    restrict_to_common_sids,
)
from .corpus import (
    pre_edit_from_text,
    read_canonical_jsonl,
    read_corpus,
    write_canonical_jsonl,
)
from .errors import (
    AlignmentError,
    EditEvalError,
    EmptyInputError,
    EmptyResultError,
    MissingLayerError,
    SchemaViolationError,
)
from .io_utils import (
    read_json,
    read_jsonl,
    sha256_file,
    write_csv,
    write_json,
    write_jsonl,
)
from .metrics import ExampleMetrics, aggregate_table, evaluate_example
from .rationales import (
    Dictionary,
    EditType,
    ExtractionStats,
    build_rationale_dataset,
    extract_from_sentences,
    read_rationale_jsonl,
    write_rationale_jsonl,
)
from .scores import (
    AGG_ATTENTION,
    AGG_GRAD_MAGNITUDE,
    AGG_GRAD_SIGNED,
    AGGREGATIONS,
    METHOD_ATTENTION,
    aggregate_attention,
    aggregate_gradient,
    read_score_file,
)

DICTIONARY_ENV_VAR = "EDITEVAL_DICTIONARY"

COMPARISON_FIELDS = (
    "group", "baseline", "edit_type", "label_slice", "n_examples",
    "mean_rr", "mean_auprc", "mean_top1",
    "delta_rr", "delta_auprc", "delta_top1",
)
CONFIDENCE_FIELDS = (
    "group", "mode", "edit_type", "n_examples", "n_attended", "n_other",
    "mean_prob_attended", "mean_prob_other", "relative_gain",
)
LAYERS_FIELDS = ("model_id", "aggregation", "layer", "metric", "value")


class UsageError(Exception):
    """Bad invocation (unknown option value, bad config file); exits 1."""


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1; argparse's default of 2 is reserved for data.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# Per-subcommand defaults; anything here may also come from --config.
_OPTION_DEFAULTS: dict[str, dict] = {
    "parse": {"mode": "lenient"},
    "extract": {
        "mode": "lenient",
        "format": "markup",
        "dictionary": None,
        "max_edit_distance": None,
        "edit_types": "spelling,deleted",
    },
    "evaluate": {
        "aggregations": ",".join(AGGREGATIONS),
        "magnitude_mode": "word",
        "skip_bad_records": False,
    },
    "analyze": {"layer": None, "baseline": None},
    "report": {"precision": 3},
}

_CHOICES = {
    "mode": ("lenient", "strict"),
    "format": ("markup", "canonical"),
    "magnitude_mode": ("word", "token"),
}


def build_parser() -> _Parser:
    parser = _Parser(
        prog="editeval",
        description=(
            "Extract human edit rationales from sentence-editing markup and "
            "measure how well model token attributions recover them."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "parse", help="parse edit markup into canonical segment JSONL"
    )
    p.add_argument("--corpus", required=True, help="edit-markup corpus file")
    p.add_argument("--mode", choices=_CHOICES["mode"], default=None)

    p = sub.add_parser(
        "extract", help="classify edits and extract the rationale dataset"
    )
    p.add_argument("--corpus", required=True, help="corpus file")
    p.add_argument(
        "--format", choices=_CHOICES["format"], default=None,
        help="corpus file format (default markup)",
    )
    p.add_argument("--mode", choices=_CHOICES["mode"], default=None)
    p.add_argument(
        "--dictionary", default=None,
        help=f"word list file (default: ${DICTIONARY_ENV_VAR} or bundled list)",
    )
    p.add_argument(
        "--max-edit-distance", type=int, default=None,
        help="optional typo-distance cap for spelling pairs",
    )
    p.add_argument(
        "--edit-types", default=None,
        help="comma list of edit types to keep (default spelling,deleted)",
    )

    p = sub.add_parser(
        "evaluate", help="score model rankings against the rationale dataset"
    )
    p.add_argument("--scores", required=True, nargs="+", help="score JSONL files")
    p.add_argument("--rationales", required=True, help="rationale dataset JSONL")
    p.add_argument(
        "--aggregations", default=None,
        help=f"comma list from {{{','.join(AGGREGATIONS)}}} (default all)",
    )
    p.add_argument(
        "--magnitude-mode", choices=_CHOICES["magnitude_mode"], default=None,
        help="where grad_magnitude takes the absolute value (default word)",
    )
    p.add_argument(
        "--skip-bad-records", action="store_true", default=None,
        help="skip and count malformed or unalignable records instead of failing",
    )

    p = sub.add_parser(
        "analyze", help="compare groups, split confidence, sweep layers"
    )
    p.add_argument(
        "--metrics", required=True, nargs="+", help="per-example metrics JSONL files"
    )
    p.add_argument(
        "--layer", type=int, default=None,
        help="attention layer for the comparison (default: deepest available)",
    )
    p.add_argument(
        "--baseline", default=None,
        help="group name to take deltas against (default: first group)",
    )

    p = sub.add_parser("report", help="render analyze output as markdown")
    p.add_argument("--analysis", required=True, help="analyze output directory")
    p.add_argument(
        "--extraction", default=None, help="optional extraction_stats.json to include"
    )
    p.add_argument(
        "--precision", type=int, default=None,
        help="decimal places in the report (default 3)",
    )

    for p in sub.choices.values():
        p.add_argument("--out-dir", required=True, help="output directory")
        p.add_argument(
            "--config", default=None, help="JSON file supplying option defaults"
        )
    return parser


def _resolve_options(args: argparse.Namespace) -> dict:
    defaults = _OPTION_DEFAULTS[args.command]
    from_file: dict = {}
    if args.config is not None:
        try:
            from_file = read_json(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}")
        if not isinstance(from_file, dict):
            raise UsageError(f"config file {args.config} is not a JSON object")
        unknown = set(from_file) - set(defaults)
        if unknown:
            raise UsageError(
                f"config file {args.config} has unknown keys for "
                f"{args.command}: {sorted(unknown)}"
            )

    opts = {}
    for name, default in defaults.items():
        value = getattr(args, name, None)
        if value is None:
            value = from_file.get(name, default)
        if name in _CHOICES and value not in _CHOICES[name]:
            raise UsageError(
                f"{name} must be one of {_CHOICES[name]}, got {value!r}"
            )
        opts[name] = value

    for name in ("max_edit_distance", "layer", "precision"):
        value = opts.get(name)
        if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
            raise UsageError(f"{name} must be an integer, got {value!r}")
    if opts.get("skip_bad_records") not in (None, True, False):
        raise UsageError("skip_bad_records must be a boolean")
    opts["out_dir"] = args.out_dir
    return opts


def _parse_name_list(raw: str, allowed: tuple[str, ...], option: str) -> list[str]:
    names = [part.strip() for part in raw.split(",") if part.strip()]
    bad = [n for n in names if n not in allowed]
    if bad:
        raise UsageError(f"{option} allows {allowed}, got {bad}")
    if not names:
        raise UsageError(f"{option} must name at least one of {allowed}")
    return names


def _write_config(out_dir: Path, command: str, opts: dict, inputs: list) -> None:
    write_json(
        {
            "command": command,
            "package_version": __version__,
            # out_dir is where this file lives; recording it would stop
            # runs into different directories from being byte-identical
            "options": {k: opts[k] for k in sorted(opts) if k != "out_dir"},
            "inputs": [
                {"path": str(p), "sha256": sha256_file(p)} for p in inputs
            ],
        },
        out_dir / "config.json",
    )


def _write_error(out_dir: Path, command: str, exc: BaseException) -> None:
    write_json(
        {
            "command": command,
            "error": type(exc).__name__,
            "message": str(exc),
        },
        out_dir / "error.json",
    )


# -- parse -------------------------------------------------------------------

def _cmd_parse(args, opts, out_dir: Path) -> int:
    corpus = Path(args.corpus)
    sentences, report = read_corpus(corpus, opts["mode"])
    if not sentences:
        raise EmptyResultError(f"no sentence records parsed from {corpus}")
    n = write_canonical_jsonl(sentences, out_dir / "corpus.jsonl")
    report_dict = report.to_json_dict()
    report_dict["n_parsed"] = n
    write_json(report_dict, out_dir / "parse_report.json")
    _write_config(out_dir, "parse", {**opts, "corpus": str(corpus)}, [corpus])
    return 0


# -- extract -----------------------------------------------------------------

def _bundled_dictionary_path() -> Path:
    return Path(str(resources.files("editeval").joinpath(
        "data/reference_dictionary.txt"
    )))


def _cmd_extract(args, opts, out_dir: Path) -> int:
    corpus = Path(args.corpus)
    dict_path = opts["dictionary"] or os.environ.get(DICTIONARY_ENV_VAR)
    dict_path = Path(dict_path) if dict_path else _bundled_dictionary_path()
    try:
        dictionary = Dictionary.from_file(dict_path)
    except ValueError as exc:
        raise EmptyInputError(str(exc)) from exc

    type_names = _parse_name_list(
        opts["edit_types"], (EditType.SPELLING.value, EditType.DELETED.value),
        "edit-types",
    )
    edit_types = [EditType(name) for name in type_names]

    stats = ExtractionStats()
    if opts["format"] == "canonical":
        sentences = list(read_canonical_jsonl(corpus))
        stats.n_records = len(sentences)
        records = list(
            extract_from_sentences(
                sentences,
                dictionary,
                max_edit_distance=opts["max_edit_distance"],
                edit_types=edit_types,
                stats=stats,
            )
        )
    else:
        records = list(
            build_rationale_dataset(
                corpus,
                dictionary,
                parser_mode=opts["mode"],
                max_edit_distance=opts["max_edit_distance"],
                edit_types=edit_types,
                stats=stats,
            )
        )
    if not records:
        raise EmptyResultError(f"no rationales extracted from {corpus}")

    write_rationale_jsonl(records, out_dir / "rationales.jsonl")
    write_json(stats.to_json_dict(), out_dir / "extraction_stats.json")
    _write_config(
        out_dir,
        "extract",
        {**opts, "corpus": str(corpus), "dictionary": str(dict_path)},
        [corpus, dict_path],
    )
    return 0


# -- evaluate ----------------------------------------------------------------

def _metric_rows_for_record(record, rationales, sentence_cache, aggs, magnitude_mode):
    rationale = rationales.get(record.sid)
    if rationale is None:
        raise AlignmentError(
            f"score record sid {record.sid!r} has no rationale"
        )
    sentence = sentence_cache.get(record.sid)
    if sentence is None:
        sentence = pre_edit_from_text(rationale.pre_edit_text)
        sentence_cache[record.sid] = sentence
    rows = []
    if record.method == METHOD_ATTENTION:
        if AGG_ATTENTION in aggs:
            ranking = aggregate_attention(record, sentence)
            rows.append(evaluate_example(record, ranking, rationale.rationale))
    else:
        if AGG_GRAD_SIGNED in aggs:
            ranking = aggregate_gradient(record, sentence, magnitude=False)
            rows.append(evaluate_example(record, ranking, rationale.rationale))
        if AGG_GRAD_MAGNITUDE in aggs:
            ranking = aggregate_gradient(
                record, sentence, magnitude=True, magnitude_mode=magnitude_mode
            )
            rows.append(evaluate_example(record, ranking, rationale.rationale))
    return rows


def _nested_aggregates(rows: list[ExampleMetrics]) -> dict:
    groups: dict[tuple, list[ExampleMetrics]] = {}
    for row in rows:
        key = (row.model_id, row.method, row.aggregation, row.layer)
        groups.setdefault(key, []).append(row)
    nested: dict = {}
    for model_id, method, aggregation, layer in sorted(
        groups, key=lambda k: (k[0], k[1], k[2], k[3] or 0)
    ):
        layer_key = "null" if layer is None else str(layer)
        level = (
            nested.setdefault(model_id, {})
            .setdefault(method, {})
            .setdefault(aggregation, {})
            .setdefault(layer_key, {})
        )
        for agg_row in aggregate_table(
            groups[(model_id, method, aggregation, layer)]
        ):
            level.setdefault(agg_row.edit_type, {})[agg_row.label_slice] = {
                "n_examples": agg_row.n_examples,
                "mean_rr": agg_row.mean_rr,
                "mean_auprc": agg_row.mean_auprc,
                "mean_top1": agg_row.mean_top1,
            }
    return nested


def _cmd_evaluate(args, opts, out_dir: Path) -> int:
    aggs = _parse_name_list(opts["aggregations"], AGGREGATIONS, "aggregations")
    skip = bool(opts["skip_bad_records"])

    rationales = {}
    for record in read_rationale_jsonl(args.rationales):
        if record.sid in rationales:
            raise SchemaViolationError(
                f"duplicate sid {record.sid!r} in rationale dataset"
            )
        rationales[record.sid] = record
    if not rationales:
        raise EmptyInputError(f"rationale dataset {args.rationales} is empty")

    rows: list[ExampleMetrics] = []
    sentence_cache: dict = {}
    schema_errors: list[SchemaViolationError] = []
    skipped: dict[str, int] = {}
    n_records = 0
    for path in args.scores:
        reader = read_score_file(
            path, on_error="skip" if skip else "raise", errors=schema_errors
        )
        for record in reader:
            n_records += 1
            try:
                rows.extend(
                    _metric_rows_for_record(
                        record, rationales, sentence_cache, aggs,
                        opts["magnitude_mode"],
                    )
                )
            except EditEvalError as exc:
                if not skip:
                    raise
                skipped[type(exc).__name__] = skipped.get(type(exc).__name__, 0) + 1
    if schema_errors:
        skipped["SchemaViolationError"] = len(schema_errors)
    if not rows:
        raise EmptyResultError("no examples evaluated")

    write_jsonl((row.to_json_dict() for row in rows), out_dir / "metrics.jsonl")
    write_json(_nested_aggregates(rows), out_dir / "aggregates.json")
    write_json(
        {
            "n_score_records": n_records,
            "n_metric_rows": len(rows),
            "n_examples_skipped": sum(skipped.values()),
            "skipped": dict(sorted(skipped.items())),
        },
        out_dir / "evaluate_report.json",
    )
    _write_config(
        out_dir,
        "evaluate",
        {**opts, "scores": [str(p) for p in args.scores],
         "rationales": str(args.rationales)},
        list(args.scores) + [args.rationales],
    )
    return 0


# -- analyze -----------------------------------------------------------------

def _load_metric_rows(paths) -> list[ExampleMetrics]:
    rows = []
    for path in paths:
        for line_no, obj in read_jsonl(path):
            try:
                rows.append(ExampleMetrics.from_json_dict(obj))
            except (KeyError, TypeError) as exc:
                raise SchemaViolationError(
                    f"{path}: bad metrics row ({exc!r})", line_no
                ) from exc
    return rows


def _comparison_groups(rows, layer_override):
    """Name one comparison group per (model, method, aggregation).

    Attention groups use the requested layer or, by default, the deepest
    layer that model dumped.
    """
    by_key: dict[tuple, list[ExampleMetrics]] = {}
    attn_layers: dict[tuple, set[int]] = {}
    for row in rows:
        by_key.setdefault(
            (row.model_id, row.method, row.aggregation, row.layer), []
        ).append(row)
        if row.method == METHOD_ATTENTION:
            attn_layers.setdefault((row.model_id, row.aggregation), set()).add(
                row.layer
            )
    groups = []
    for model_id, method, aggregation in sorted(
        {(r.model_id, r.method, r.aggregation) for r in rows}
    ):
        if method == METHOD_ATTENTION:
            available = attn_layers[(model_id, aggregation)]
            layer = layer_override if layer_override is not None else max(available)
            if layer not in available:
                raise MissingLayerError(
                    f"layer {layer} not available for {model_id}/{aggregation} "
                    f"(have {sorted(available)})"
                )
            name = f"{model_id}:{method}:{aggregation}:layer{layer}"
            groups.append((name, by_key[(model_id, method, aggregation, layer)]))
        else:
            name = f"{model_id}:{method}:{aggregation}"
            groups.append((name, by_key[(model_id, method, aggregation, None)]))
    return groups


def _cmd_analyze(args, opts, out_dir: Path) -> int:
    rows = _load_metric_rows(args.metrics)
    if not rows:
        raise EmptyInputError("metrics files contain no rows")

    groups = _comparison_groups(rows, opts["layer"])
    restricted = restrict_to_common_sids(groups)
    names = [name for name, _ in restricted]
    baseline = opts["baseline"]
    if baseline is not None:
        if baseline not in names:
            raise UsageError(
                f"--baseline {baseline!r} is not a group; groups are {names}"
            )
        restricted.sort(key=lambda item: item[0] != baseline)

    comparison = compare(restricted, restrict=False)
    comparison_rows = [row.to_json_dict() for row in comparison]
    write_csv(out_dir / "comparison.csv", COMPARISON_FIELDS, comparison_rows)
    write_json(
        {"baseline": restricted[0][0], "rows": comparison_rows},
        out_dir / "comparison.json",
    )

    confidence_rows = []
    confidence_notes = []
    for name, group_rows in restricted:
        try:
            reports = confidence_correlation(group_rows)
        except EmptyInputError:
            confidence_notes.append(
                f"group {name}: no positively-predicted examples"
            )
            continue
        for report in reports:
            confidence_rows.append({"group": name, **report.to_json_dict()})
    write_csv(out_dir / "confidence.csv", CONFIDENCE_FIELDS, confidence_rows)
    write_json(
        {"rows": confidence_rows, "notes": confidence_notes},
        out_dir / "confidence.json",
    )

    sweeps = []
    sweep_notes = []
    long_rows = []
    attn_rows: dict[tuple, list[ExampleMetrics]] = {}
    for row in rows:
        if row.method == METHOD_ATTENTION:
            attn_rows.setdefault((row.model_id, row.aggregation), []).append(row)
    for model_id, aggregation in sorted(attn_rows):
        group_rows = attn_rows[(model_id, aggregation)]
        by_layer: dict[int, set[str]] = {}
        for row in group_rows:
            by_layer.setdefault(row.layer, set()).add(row.sid)
        for layer, sids in sorted(by_layer.items()):
            n_rows = sum(1 for r in group_rows if r.layer == layer)
            if n_rows != len(sids):
                raise AlignmentError(
                    f"{model_id}/{aggregation} layer {layer} has duplicate sids"
                )
        common = set.intersection(*by_layer.values())
        if not common:
            sweep_notes.append(
                f"{model_id}/{aggregation}: layers share no sids, sweep skipped"
            )
            continue
        kept = [r for r in group_rows if r.sid in common]
        try:
            sweep = layer_sweep(kept)
        except MissingLayerError as exc:
            sweep_notes.append(f"{model_id}/{aggregation}: {exc}, sweep skipped")
            continue
        sweeps.append(
            {
                "model_id": sweep.model_id,
                "aggregation": sweep.aggregation,
                "n_layers": sweep.n_layers,
                "n_examples": len(common),
                "best_layer_by_mean_rr": sweep.best_layer("mean_rr"),
                "per_layer": [r.to_json_dict() for r in sweep.per_layer],
            }
        )
        long_rows.extend(layer_sweep_rows(sweep))
    write_csv(out_dir / "layers.csv", LAYERS_FIELDS, long_rows)
    write_json({"sweeps": sweeps, "notes": sweep_notes}, out_dir / "layers.json")

    _write_config(
        out_dir,
        "analyze",
        {**opts, "metrics": [str(p) for p in args.metrics],
         "groups": names, "baseline_used": restricted[0][0]},
        list(args.metrics),
    )
    return 0


# -- report ------------------------------------------------------------------

def _fmt(value, precision: int) -> str:
    if value is None:
        return ""
    return f"{value:.{precision}f}"


def _md_table(headers: list[str], table_rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(headers) + " |"]
    lines.append("|" + "|".join(" --- " for _ in headers) + "|")
    for row in table_rows:
        lines.append("| " + " | ".join(row) + " |")
    return lines


def _cmd_report(args, opts, out_dir: Path) -> int:
    analysis_dir = Path(args.analysis)
    comparison_path = analysis_dir / "comparison.json"
    if not comparison_path.exists():
        raise EmptyInputError(f"{analysis_dir} has no comparison.json")
    comparison = read_json(comparison_path)
    inputs = [comparison_path]
    precision = opts["precision"]

    lines = ["# Evaluation summary", ""]

    if args.extraction:
        stats = read_json(args.extraction)
        inputs.append(Path(args.extraction))
        lines += ["## Rationale extraction", ""]
        lines += _md_table(
            ["records", "parse errors", "spelling", "deleted", "emitted"],
            [[
                str(stats.get("n_records", "")),
                str(stats.get("n_parse_errors", "")),
                str(stats.get("n_spelling", "")),
                str(stats.get("n_deleted", "")),
                str(stats.get("n_emitted", "")),
            ]],
        )
        lines.append("")

    lines += ["## Model comparison", ""]
    lines.append(f"Baseline group: `{comparison['baseline']}`.")
    lines.append("")
    main_rows = [
        r for r in comparison["rows"]
        if r["edit_type"] == "all" and r["label_slice"] == "all"
    ]
    lines += _md_table(
        ["group", "n", "mean RR", "mean AUPRC", "mean top-1",
         "delta RR", "delta AUPRC", "delta top-1"],
        [
            [
                f"`{r['group']}`",
                str(r["n_examples"]),
                _fmt(r["mean_rr"], precision),
                _fmt(r["mean_auprc"], precision),
                _fmt(r["mean_top1"], precision),
                _fmt(r["delta_rr"], precision),
                _fmt(r["delta_auprc"], precision),
                _fmt(r["delta_top1"], precision),
            ]
            for r in main_rows
        ],
    )
    lines.append("")

    slice_rows = [
        r for r in comparison["rows"]
        if r["edit_type"] != "all" or r["label_slice"] != "all"
    ]
    if slice_rows:
        lines += ["### By edit type and prediction outcome", ""]
        lines += _md_table(
            ["group", "edit type", "slice", "n", "mean RR", "mean AUPRC",
             "mean top-1"],
            [
                [
                    f"`{r['group']}`",
                    r["edit_type"],
                    r["label_slice"],
                    str(r["n_examples"]),
                    _fmt(r["mean_rr"], precision),
                    _fmt(r["mean_auprc"], precision),
                    _fmt(r["mean_top1"], precision),
                ]
                for r in slice_rows
            ],
        )
        lines.append("")

    confidence_path = analysis_dir / "confidence.json"
    if confidence_path.exists():
        confidence = read_json(confidence_path)
        inputs.append(confidence_path)
        lines += ["## Confidence when the rationale is attended", ""]
        lines.append(
            "Needs-edit probability among positively-predicted examples, "
            "split by whether the ranking put the rationale on top."
        )
        lines.append("")
        lines += _md_table(
            ["group", "mode", "edit type", "attended n", "other n",
             "attended mean", "other mean", "relative gain"],
            [
                [
                    f"`{r['group']}`",
                    r["mode"],
                    r["edit_type"],
                    str(r["n_attended"]),
                    str(r["n_other"]),
                    _fmt(r["mean_prob_attended"], precision),
                    _fmt(r["mean_prob_other"], precision),
                    ""
                    if r["relative_gain"] is None
                    else f"{r['relative_gain'] * 100:+.1f}%",
                ]
                for r in confidence["rows"]
            ],
        )
        for note in confidence.get("notes", []):
            lines.append(f"- {note}")
        lines.append("")

    layers_path = analysis_dir / "layers.json"
    if layers_path.exists():
        layers = read_json(layers_path)
        inputs.append(layers_path)
        if layers.get("sweeps") or layers.get("notes"):
            lines += ["## Attention layers", ""]
        for sweep in layers.get("sweeps", []):
            lines.append(
                f"`{sweep['model_id']}` ({sweep['aggregation']}): best layer "
                f"{sweep['best_layer_by_mean_rr']} of {sweep['n_layers']} "
                f"by mean RR, over {sweep['n_examples']} examples."
            )
            lines.append("")
            lines += _md_table(
                ["layer", "mean RR", "mean AUPRC", "mean top-1"],
                [
                    [
                        str(r["layer"]),
                        _fmt(r["mean_rr"], precision),
                        _fmt(r["mean_auprc"], precision),
                        _fmt(r["mean_top1"], precision),
                    ]
                    for r in sweep["per_layer"]
                ],
            )
            lines.append("")
        for note in layers.get("notes", []):
            lines.append(f"- {note}")
            lines.append("")

    while lines and lines[-1] == "":
        lines.pop()
    (out_dir / "summary.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_config(
        out_dir,
        "report",
        {**opts, "analysis": str(analysis_dir),
         "extraction": args.extraction and str(args.extraction)},
        inputs,
    )
    return 0


# -- entry point -------------------------------------------------------------

_HANDLERS = {
    "parse": _cmd_parse,
    "extract": _cmd_extract,
    "evaluate": _cmd_evaluate,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = _resolve_options(args)
    except UsageError as exc:
        print(f"editeval {args.command}: error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](args, opts, out_dir)
    except UsageError as exc:
        print(f"editeval {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except EditEvalError as exc:
        _write_error(out_dir, args.command, exc)
        print(f"editeval {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        try:
            _write_error(out_dir, args.command, exc)
        except OSError:
            pass
        print(f"editeval {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
