"""Command-line front end: ``scoredump dump`` and ``scoredump finetune``.

Exit codes: 0 success, 1 usage error, 2 data or checkpoint error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .dumping import METHODS, DumpSpec, dump_scores
from .errors import DumpError
from .training import FinetuneConfig, finetune_small


def parse_layer_selection(text: str):
    """``all``, ``4``, ``2-5`` or ``1,3,5`` -> 1-based layer tuple or None."""
    if text == "all":
        return None
    try:
        if "-" in text and "," not in text:
            low, high = text.split("-", 1)
            layers = tuple(range(int(low), int(high) + 1))
        else:
            layers = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad layer selection: {text!r}")
    if not layers or layers[0] < 1 or list(layers) != sorted(set(layers)):
        raise argparse.ArgumentTypeError(f"bad layer selection: {text!r}")
    return layers


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scoredump",
        description="Dump per-token attribution scores from edit classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    dump = sub.add_parser("dump", help="score a rationale dataset with a checkpoint")
    dump.add_argument("--checkpoint", required=True, help="model directory or hub id")
    dump.add_argument("--rationales", required=True, help="rationale dataset JSONL")
    dump.add_argument("--out", required=True, help="score file to write")
    dump.add_argument(
        "--model-id", default=None, help="defaults to the checkpoint directory name"
    )
    dump.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    dump.add_argument(
        "--layers",
        type=parse_layer_selection,
        default=None,
        help="attention layers: all (default), N, N-M, or a comma list",
    )
    dump.add_argument("--batch-size", type=int, default=8)
    dump.add_argument("--device", default="cpu")
    dump.add_argument("--grad-target", choices=("prob", "loss"), default="prob")

    tune = sub.add_parser(
        "finetune", help="fine-tune a base checkpoint on a parsed corpus"
    )
    tune.add_argument("--base", required=True, help="base model directory or hub id")
    tune.add_argument("--corpus", required=True, help="canonical corpus JSONL")
    tune.add_argument("--out-dir", required=True)
    tune.add_argument("--learning-rate", type=float, default=1e-6)
    tune.add_argument("--batch-size", type=int, default=32)
    tune.add_argument("--epochs", type=int, default=1)
    tune.add_argument("--max-steps", type=int, default=None)
    tune.add_argument("--max-examples", type=int, default=None)
    tune.add_argument("--dev-fraction", type=float, default=0.1)
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--device", default="cpu")
    return parser


def _cmd_dump(args) -> int:
    spec = DumpSpec(
        model_id=args.model_id or Path(args.checkpoint).name,
        checkpoint=Path(args.checkpoint),
        rationales=Path(args.rationales),
        methods=tuple(dict.fromkeys(args.methods)),
        layers=args.layers,
        batch_size=args.batch_size,
        device=args.device,
        grad_target=args.grad_target,
    )
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    report = dump_scores(spec, out)
    report_path = out.with_name(out.stem + ".report.json")
    report_path.write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(
        f"wrote {report.n_records} records for "
        f"{report.n_examples - report.n_skipped} of {report.n_examples} "
        f"examples -> {out}"
    )
    return 0


def _cmd_finetune(args) -> int:
    config = FinetuneConfig(
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        epochs=args.epochs,
        max_steps=args.max_steps,
        max_examples=args.max_examples,
        dev_fraction=args.dev_fraction,
        seed=args.seed,
        device=args.device,
    )
    report = finetune_small(args.base, Path(args.corpus), Path(args.out_dir), config)
    dev = report.dev_metrics
    print(
        f"trained {report.n_steps} steps on {report.n_train} sentences; "
        f"dev f1 {dev['f1']:.3f} (n={dev['n']}) -> {args.out_dir}"
    )
    return 0


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse says 2 for usage; we reserve 2 for data
        return 0 if not exc.code else 1
    try:
        if args.command == "dump":
            return _cmd_dump(args)
        return _cmd_finetune(args)
    except DumpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
