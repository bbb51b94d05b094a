"""Command-line surface: synthesis, training, evaluation, parsing."""

import argparse
import json
import logging
import os
import sys

import torch

from .data import (CorpusError, atomic_write_text, load_corpus,
                   prediction_record, serialize_corpus, validate_prediction)
from .evaluation import evaluate_corpus, make_fewshot_split
from .ontology import FKG_RELATIONS, OntologyError, build_fkg, load_ontology
from .synthetic import SyntheticSpec, generate_synthetic
from .training import (CheckpointError, TrainConfig, TrainingError,
                       load_checkpoint, model_from_checkpoint, save_checkpoint,
                       train)


def _setup_logging() -> None:
    level = os.environ.get("FRAMEPARSE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_gen_synthetic(args) -> int:
    spec = SyntheticSpec.from_dict(_read_json(args.spec)) if args.spec \
        else SyntheticSpec()
    if args.seed is not None:
        spec.seed = args.seed
    paths = generate_synthetic(spec, args.out)
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    return 0


def cmd_train(args) -> int:
    cfg = TrainConfig.from_dict(_read_json(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
    ontology = load_ontology(args.ontology)
    train_corpus = load_corpus(args.train, ontology, "train")
    dev_corpus = load_corpus(args.dev, ontology, "dev")
    pretrain = (load_corpus(args.pretrain, ontology, "pretrain")
                if args.pretrain else None)
    ckpt = train(ontology, train_corpus, dev_corpus, cfg,
                 pretrain_corpus=pretrain, log_path=args.log)
    save_checkpoint(ckpt, args.out)
    best = ckpt.metrics.get("best_dev_full_f1")
    print(f"checkpoint: {args.out} (epoch {ckpt.epoch}"
          + (f", dev full F1 {best:.4f})" if best is not None else ")"))
    return 0


def _validate_parses(args) -> int:
    ontology = load_ontology(args.ontology)
    records = violations = 0
    with open(args.parses, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(
                    f"{args.parses}:{line_no}: malformed line: {exc}") from None
            records += 1
            for msg in validate_prediction(rec, ontology):
                violations += 1
                print(f"{args.parses}:{line_no}: {msg}", file=sys.stderr)
    print(f"checked {records} parse records, {violations} violations")
    return 1 if violations else 0


def cmd_eval(args) -> int:
    if args.parses:
        return _validate_parses(args)
    if not (args.ckpt and args.test and args.report):
        print("error: eval needs --ckpt, --test and --report "
              "(or --parses to validate parser output)", file=sys.stderr)
        return 2
    ontology = load_ontology(args.ontology)
    model = model_from_checkpoint(load_checkpoint(args.ckpt), ontology)
    test = load_corpus(args.test, ontology, "test")
    report = evaluate_corpus(model, test, gold_frames=args.gold_frames)
    atomic_write_text(args.report, json.dumps(report.to_dict(), indent=2) + "\n")
    print(report.format_table())
    return 0


def cmd_parse(args) -> int:
    ontology = load_ontology(args.ontology)
    model = model_from_checkpoint(load_checkpoint(args.ckpt), ontology)
    corpus = load_corpus(args.input, ontology, "input")
    lines = []
    with torch.no_grad():
        y = model.node_matrix()
    for inst in corpus.instances:
        result = model.decode(inst, node_matrix=y)
        lines.append(json.dumps(prediction_record(inst, result, model.fkg),
                                ensure_ascii=False))
    atomic_write_text(args.output, "".join(s + "\n" for s in lines))
    print(f"parsed {len(lines)} targets -> {args.output}")
    return 0


def cmd_fewshot_split(args) -> int:
    ontology = load_ontology(args.ontology) if args.ontology else None
    corpus = load_corpus(args.corpus, ontology)
    parts = make_fewshot_split(corpus, set(args.held_lemmas),
                               set(args.held_frames), args.k, seed=args.seed)
    for part in parts:
        path = os.path.join(args.out, f"{part.tag}.jsonl")
        serialize_corpus(part, path)
        print(f"{part.tag}: {len(part)} instances -> {path}")
    return 0


def cmd_inspect_fkg(args) -> int:
    fkg = build_fkg(load_ontology(args.ontology))
    print(f"frames {fkg.num_frames}")
    print(f"frame_elements {fkg.num_fes}")
    print(f"node_count {fkg.node_count}")
    print(f"dummy_index {fkg.dummy_index}")
    for kind in FKG_RELATIONS:
        pairs = len(fkg.edges[kind])
        print(f"edges {kind}: {pairs} directed pairs "
              f"({pairs // 2} undirected)")
    print(f"shared_fe_names {sum(1 for g in fkg.name_groups.values() if len(g) > 1)}")
    return 0


def _k_value(text: str):
    if text == "full":
        return None
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frameparse",
        description="Knowledge-graph-guided frame-semantic parser")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic",
                       help="generate a synthetic ontology and corpora")
    p.add_argument("--spec", help="generator spec JSON (defaults when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("train", help="train a parser")
    p.add_argument("--config", required=True, help="TrainConfig JSON")
    p.add_argument("--ontology", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--pretrain")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--log", help="append JSON progress lines here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint, or validate "
                                    "parser output with --parses")
    p.add_argument("--ckpt")
    p.add_argument("--ontology", required=True)
    p.add_argument("--test")
    p.add_argument("--gold-frames", action="store_true",
                   help="force gold frames in the full-structure pass")
    p.add_argument("--report", help="write the metric report JSON here")
    p.add_argument("--parses", help="parse output file to validate instead")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("parse", help="parse a corpus file")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("fewshot-split",
                       help="carve train/dev/test for the transfer setup")
    p.add_argument("--corpus", required=True)
    p.add_argument("--held-lemmas", nargs="+", required=True,
                   metavar="LEMMA_KEY")
    p.add_argument("--held-frames", nargs="+", required=True, metavar="FRAME")
    p.add_argument("--k", type=_k_value, required=True,
                   help="per-frame cap, or 'full'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--ontology")
    p.set_defaults(func=cmd_fewshot_split)

    p = sub.add_parser("inspect-fkg",
                       help="print knowledge-graph node and edge counts")
    p.add_argument("--ontology", required=True)
    p.set_defaults(func=cmd_inspect_fkg)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OntologyError, CorpusError, TrainingError, CheckpointError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
