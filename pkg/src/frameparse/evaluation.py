"""Metrics (frame accuracy, argument and full-structure P/R/F1) and the
few-shot transfer split protocol."""

import random
from collections import Counter
from dataclasses import dataclass

import torch

from .data import Corpus


def match_arguments(pred, gold) -> int:
    """Size of the multiset intersection of exact-match items."""
    return sum((Counter(pred) & Counter(gold)).values())


def _prf(matched: int, predicted: int, gold: int):
    p = matched / predicted if predicted else 0.0
    r = matched / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def _micro_counts(pairs):
    matched = predicted = gold = 0
    for pred_items, gold_items in pairs:
        matched += match_arguments(pred_items, gold_items)
        predicted += len(pred_items)
        gold += len(gold_items)
    return matched, predicted, gold


def arg_prf(pairs):
    """Micro-averaged P/R/F1 over (predicted items, gold items) pairs.

    Items are (start, end, role node index) triples decoded under the
    gold frame.  Zero predictions give precision 0 by convention.
    """
    return _prf(*_micro_counts(pairs))


def full_structure_prf(quads):
    """Micro P/R/F1 where each target contributes one frame item plus one
    item per argument; arguments match on (span, role node index)."""
    return _prf(*_micro_counts([_full_items(*q) for q in quads]))


def _full_items(pred_frame, pred_args, gold_frame, gold_args):
    pred = [("frame", pred_frame)] + [("arg",) + tuple(a) for a in pred_args]
    gold = [("frame", gold_frame)] + [("arg",) + tuple(a) for a in gold_args]
    return pred, gold


def frame_accuracy(pairs) -> float:
    if not pairs:
        return 0.0
    return sum(1 for p, g in pairs if p == g) / len(pairs)


@dataclass
class MetricReport:
    frame_accuracy: float
    arg: tuple  # (precision, recall, f1)
    full: tuple
    arg_counts: tuple  # (matched, predicted, gold)
    full_counts: tuple
    num_targets: int

    def to_dict(self) -> dict:
        return {"frame_accuracy": self.frame_accuracy,
                "arg": {"precision": self.arg[0], "recall": self.arg[1],
                        "f1": self.arg[2],
                        "matched": self.arg_counts[0],
                        "predicted": self.arg_counts[1],
                        "gold": self.arg_counts[2]},
                "full": {"precision": self.full[0], "recall": self.full[1],
                         "f1": self.full[2],
                         "matched": self.full_counts[0],
                         "predicted": self.full_counts[1],
                         "gold": self.full_counts[2]},
                "num_targets": self.num_targets}

    def format_table(self) -> str:
        rows = [
            ("frame accuracy", f"{self.frame_accuracy:.4f}", "", ""),
            ("argument (gold frame)", f"P={self.arg[0]:.4f}",
             f"R={self.arg[1]:.4f}", f"F1={self.arg[2]:.4f}"),
            ("full structure", f"P={self.full[0]:.4f}",
             f"R={self.full[1]:.4f}", f"F1={self.full[2]:.4f}"),
        ]
        width = max(len(r[0]) for r in rows)
        return "\n".join("  ".join([r[0].ljust(width), *r[1:]]).rstrip()
                         for r in rows)


def evaluate_corpus(model, corpus, gold_frames: bool = False) -> MetricReport:
    """Decode every instance and aggregate all three metric families.

    Argument metrics always force the gold frame; the full-structure pass
    uses the model's own frame choice unless ``gold_frames`` is set.
    """
    instances = list(getattr(corpus, "instances", corpus))
    frame_pairs = []
    arg_pairs = []
    full_quads = []
    with torch.no_grad():
        y = model.node_matrix()
    for inst in instances:
        if inst.gold_frame is None or inst.gold_args is None:
            raise ValueError("evaluation requires gold annotations")
        f_gold = model.fkg.frame_index[inst.gold_frame]
        gold_items = [(s, e, model.fkg.fe_index[(inst.gold_frame, role)])
                      for (s, e), role in inst.gold_args]
        forced = model.decode(inst, frame_override=f_gold, node_matrix=y)
        forced_items = [(a.span[0], a.span[1], a.role_node)
                        for a in forced.args]
        if gold_frames:
            pred_frame, pred_items = f_gold, forced_items
        else:
            free = model.decode(inst, node_matrix=y)
            pred_frame = free.frame_index
            pred_items = [(a.span[0], a.span[1], a.role_node)
                          for a in free.args]
        frame_pairs.append((pred_frame, f_gold))
        arg_pairs.append((forced_items, gold_items))
        full_quads.append((pred_frame, pred_items, f_gold, gold_items))

    arg_counts = _micro_counts(arg_pairs)
    full_counts = _micro_counts([_full_items(*q) for q in full_quads])
    return MetricReport(frame_accuracy=frame_accuracy(frame_pairs),
                        arg=_prf(*arg_counts), full=_prf(*full_counts),
                        arg_counts=arg_counts, full_counts=full_counts,
                        num_targets=len(instances))


def make_fewshot_split(corpus, held_lemmas, held_frames, k, seed: int = 0,
                       dev_fraction: float = 0.1):
    """Carve (train, dev, test) for the frame-transfer experiment.

    ``held_lemmas`` holds lemma keys (``lemma.pos``).  Test collects the
    instances whose target lemma and frame are both held; those instances
    never reach train or dev.  Dev takes a seeded fraction of the
    instances of non-held frames.  Of the remaining held-frame instances
    (evoked by other lemmas), train keeps at most ``k`` per held frame,
    sampled with the seed; ``k=None`` keeps them all.
    """
    if k is not None and k < 0:
        raise ValueError("K must be >= 0, or None to keep all")
    held_lemmas = set(held_lemmas)
    held_frames = set(held_frames)
    instances = list(getattr(corpus, "instances", corpus))

    test, held_pool, seen_pool = [], [], []
    for inst in instances:
        frame_held = inst.gold_frame in held_frames
        if frame_held and inst.lemma_key in held_lemmas:
            test.append(inst)
        elif frame_held:
            held_pool.append(inst)
        else:
            seen_pool.append(inst)

    rng = random.Random(seed)
    order = list(seen_pool)
    rng.shuffle(order)
    n_dev = int(round(dev_fraction * len(order)))
    dev, train = order[:n_dev], order[n_dev:]

    by_frame: dict[str, list] = {}
    for inst in held_pool:
        by_frame.setdefault(inst.gold_frame, []).append(inst)
    for frame in sorted(by_frame):
        group = by_frame[frame]
        if k is None or k >= len(group):
            train.extend(group)
        else:
            train.extend(rng.sample(group, k))

    return (Corpus(train, tag="train"), Corpus(dev, tag="dev"),
            Corpus(test, tag="test"))
