"""Command line: ``dmnet {generate,train,eval,inspect}``.

Settings come from, highest precedence first: command-line flags,
``DMNET_<KEY>`` environment variables, a ``--config`` file of ``key=value``
lines, and built-in defaults. Keys are the field names of
:class:`~dmnet.dmn.DmnConfig` and :class:`~dmnet.train.TrainConfig`.

Exit codes: 0 success, 2 bad configuration or input, 3 I/O failure,
4 vocabulary mismatch between a checkpoint and the data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Sequence

from .checkpoint import load_checkpoint, save_checkpoint
from .data import Story, build_vocab, generate_synthetic, parse_babi, serialize_babi, story_tokens
from .dmn import DmnConfig, DynamicMemoryNetwork
from .errors import ConfigError, ParseError
from .trace import heatmap, trace_record
from .train import TrainConfig, evaluate, train

ENV_PREFIX = "DMNET_"
EXTRA_KEYS = {"task": str, "data": str, "count": int}


class UsageError(Exception):
    code = 2


class IOFailure(Exception):
    code = 3


class VocabMismatch(Exception):
    code = 4


def _converters() -> dict:
    out = dict(EXTRA_KEYS)
    for cls in (DmnConfig, TrainConfig):
        for f in dataclasses.fields(cls):
            typ = str(f.type)
            if typ.startswith("bool"):
                out[f.name] = _to_bool
            elif typ.startswith("int"):
                out[f.name] = _optional(int) if "None" in typ else int
            elif typ.startswith("float"):
                out[f.name] = _optional(float) if "None" in typ else float
            else:
                out[f.name] = str
    return out


def _to_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _optional(conv):
    def parse(text):
        return None if str(text).strip().lower() in ("", "none", "null") else conv(text)
    return parse


CONVERTERS = _converters()


def read_config_file(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            out[key.strip()] = value.strip()
    return out


def resolve_settings(flags: dict, config_path: str | None,
                     environ: dict | None = None) -> dict:
    """Merge defaults < config file < environment < flags and coerce types."""
    environ = os.environ if environ is None else environ
    raw: dict = {}
    if config_path:
        try:
            raw.update(read_config_file(config_path))
        except OSError as exc:
            raise IOFailure(f"cannot read config: {exc}") from None
    for key in CONVERTERS:
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            raw[key] = env
    raw.update({k: v for k, v in flags.items() if v is not None})
    unknown = set(raw) - set(CONVERTERS)
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(sorted(unknown))}")
    out = {}
    for key, value in raw.items():
        try:
            out[key] = CONVERTERS[key](value) if isinstance(value, str) else value
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}") from None
    return out


def _split(settings: dict) -> tuple[DmnConfig, TrainConfig]:
    dmn_keys = {f.name for f in dataclasses.fields(DmnConfig)}
    train_keys = {f.name for f in dataclasses.fields(TrainConfig)}
    dmn = {k: v for k, v in settings.items() if k in dmn_keys}
    if dmn.get("answer_mode") == "per-token":
        dmn.setdefault("fact_unit", "word")
    return (DmnConfig(**dmn),
            TrainConfig(**{k: v for k, v in settings.items() if k in train_keys}))


def load_stories(task: str | None, data: str | None, seed: int, count: int) -> list[Story]:
    if data:
        try:
            with open(data, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise IOFailure(f"cannot read {data}: {exc}") from None
        try:
            stories = parse_babi(text)
        except ParseError as exc:
            raise ConfigError(f"{data}: {exc}") from None
    elif task:
        kind = task.split(":", 1)[1] if task.startswith("synthetic:") else None
        if kind is None:
            raise ConfigError(f"unknown task {task!r}; use synthetic:<kind> or --data")
        stories = generate_synthetic(kind, seed, count)
    else:
        raise ConfigError("give --task or --data")
    if not stories:
        raise ConfigError("no stories in the input")
    return stories


def _emit(record: dict, stream) -> None:
    stream.write(json.dumps(record, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args, out) -> int:
    settings = resolve_settings({"task": args.task, "seed": args.seed, "count": args.count},
                                args.config)
    stories = load_stories(settings.get("task"), None, settings.get("seed", 0),
                           settings.get("count", 1000))
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(serialize_babi(stories))
    except OSError as exc:
        raise IOFailure(f"cannot write {args.out}: {exc}") from None
    out.write(f"wrote {len(stories)} stories to {args.out}\n")
    return 0


def cmd_train(args, out) -> int:
    flags = {
        "task": args.task, "data": args.data, "seed": args.seed, "epochs": args.epochs,
        "T_M": args.passes, "attention_mode": args.attention, "answer_mode": args.answer_mode,
        "count": args.count,
    }
    settings = resolve_settings(flags, args.config)
    dmn_cfg, train_cfg = _split(settings)
    stories = load_stories(settings.get("task"), settings.get("data"), train_cfg.seed,
                           settings.get("count", 1000))
    vocab = build_vocab(stories)
    labels = None
    if dmn_cfg.answer_mode != "sequence":
        labels = sorted({a for s in stories for a in s.answer})
    model = DynamicMemoryNetwork(dmn_cfg, vocab, labels, seed=train_cfg.seed)
    metrics_path = args.metrics or f"{args.out}.metrics.jsonl"
    try:
        mfh = open(metrics_path, "w", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {metrics_path}: {exc}") from None
    with mfh:
        def on_epoch(rec):
            _emit(rec, mfh)
            if args.format == "json":
                _emit(rec, out)
            else:
                out.write(f"epoch {rec['epoch']:>3}  dev_loss {rec['dev_loss']:.4f}  "
                          f"dev_acc {rec['dev_accuracy']:.4f}\n")
        model, metrics = train(model, stories, train_cfg, on_epoch=on_epoch)
        summary = {"best_epoch": metrics.best_epoch,
                   "best_dev_accuracy": metrics.best_dev_accuracy,
                   "stopped_epoch": metrics.stopped_epoch}
        _emit({"summary": summary}, mfh)
    try:
        save_checkpoint(args.out, model, {"train": train_cfg.to_dict()})
    except OSError as exc:
        raise IOFailure(f"cannot write {args.out}: {exc}") from None
    if args.format == "json":
        _emit({"summary": summary, "checkpoint": args.out}, out)
    else:
        out.write(f"saved {args.out} (best dev accuracy {metrics.best_dev_accuracy:.4f} "
                  f"at epoch {metrics.best_epoch})\n")
    return 0


def _load_for_eval(args):
    if not args.ckpt:
        raise ConfigError("--ckpt is required")
    try:
        model, _ = load_checkpoint(args.ckpt)
    except OSError as exc:
        raise IOFailure(f"cannot read checkpoint: {exc}") from None
    except (ParseError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad checkpoint: {exc}") from None
    settings = resolve_settings({"task": args.task, "data": args.data, "seed": args.seed,
                                 "count": args.count}, args.config)
    stories = load_stories(settings.get("task"), settings.get("data"),
                           settings.get("seed", 0), settings.get("count", 1000))
    missing = model.vocab.missing(story_tokens(stories))
    if model.labels is not None:
        missing |= {a for s in stories for a in s.answer} - set(model.labels)
    if missing:
        shown = ", ".join(sorted(missing)[:10])
        raise VocabMismatch(f"{len(missing)} tokens unknown to the checkpoint: {shown}")
    return model, stories


def cmd_eval(args, out) -> int:
    model, stories = _load_for_eval(args)
    res = evaluate(model, stories)
    record = {"accuracy": res.accuracy, "gate_accuracy": res.gate_accuracy, "n": res.n,
              "correct": res.correct}
    if args.format == "text":
        out.write(f"answer accuracy: {res.accuracy:.4f} ({res.correct}/{res.n})\n")
        if res.gate_accuracy is not None:
            out.write(f"gate accuracy:   {res.gate_accuracy:.4f} "
                      f"({res.gate_correct}/{res.gate_total})\n")
    _emit(record, out)
    return 0


def cmd_inspect(args, out) -> int:
    model, stories = _load_for_eval(args)
    if args.limit is not None:
        stories = stories[:args.limit]
    for story in stories:
        record = trace_record(model, story)
        if args.format == "text":
            out.write(heatmap(record) + "\n")
        out.write(record.to_json() + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False):
        p.add_argument("--task", help="synthetic:<single-fact|two-fact|counting|tagging>")
        p.add_argument("--data", help="bAbI-format text file")
        p.add_argument("--config", help="key=value settings file")
        p.add_argument("--seed", type=int)
        p.add_argument("--count", type=int, help="number of synthetic stories")
        p.add_argument("--format", choices=("text", "json"), default="text")

    g = sub.add_parser("generate", help="write a synthetic corpus in bAbI format")
    common(g)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train and write a checkpoint")
    common(t)
    t.add_argument("--epochs", type=int)
    t.add_argument("--passes", type=int, help="maximum episodic passes (T_M)")
    t.add_argument("--attention", choices=("sigmoid-gru", "softmax"))
    t.add_argument("--answer-mode", choices=("sequence", "per-token", "single-class"))
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--metrics", help="per-epoch JSON lines (default <out>.metrics.jsonl)")

    for name, helptext in (("eval", "report accuracy"), ("inspect", "print attention traces")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--ckpt", required=True)
        if name == "inspect":
            p.add_argument("--limit", type=int)
    return parser


COMMANDS = {"generate": cmd_generate, "train": cmd_train, "eval": cmd_eval,
            "inspect": cmd_inspect}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (ConfigError, UsageError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except IOFailure as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except VocabMismatch as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
