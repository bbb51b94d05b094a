"""Corpus files, instance validation, and prediction records.

Corpora are line-delimited JSON, one annotated sentence per line, with
explicit dependency heads so no parser is needed at runtime.  Spans are
inclusive token-index pairs.
"""

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .ontology import FrameOntology
from .sentence import SentenceInstance

log = logging.getLogger("frameparse.data")


class CorpusError(ValueError):
    pass


@dataclass
class Corpus:
    instances: list
    tag: str = ""
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _walk_to_root(heads: list) -> bool:
    """True when every token reaches the root without revisiting a node."""
    n = len(heads)
    for start in range(n):
        seen = set()
        node = start
        while node != -1:
            if node in seen or not -1 <= heads[node] < n:
                return False
            seen.add(node)
            node = heads[node]
    return True


def validate_instance(inst: SentenceInstance, ontology: FrameOntology | None = None):
    """Return a list of violation strings; empty means the instance is valid."""
    out = []
    n = len(inst.tokens)
    if n == 0:
        out.append("empty sentence")
        return out
    if len(inst.lemmas) != n or len(inst.pos_tags) != n or len(inst.dep_heads) != n:
        out.append("field lengths differ")
        return out
    if inst.dep_heads.count(-1) != 1 or not _walk_to_root(inst.dep_heads):
        out.append("dependency heads do not form a tree")
    ts, te = inst.target
    if not 0 <= ts <= te < n:
        out.append("target span out of range")
    if inst.gold_args is not None:
        if inst.gold_frame is None:
            out.append("gold arguments without a gold frame")
        prev = None
        covered = set()
        for (s, e), role in inst.gold_args:
            if not 0 <= s <= e < n:
                out.append(f"argument span ({s}, {e}) out of range")
                continue
            if prev is not None and (s, e) < prev:
                out.append("gold arguments not in left-to-right order")
            prev = (s, e)
            span = set(range(s, e + 1))
            if covered & span:
                out.append(f"argument span ({s}, {e}) overlaps an earlier one")
            covered |= span
    if ontology is not None and inst.gold_frame is not None:
        try:
            frame = ontology.frames[ontology.frame_index(inst.gold_frame)]
        except KeyError:
            out.append(f"unknown frame {inst.gold_frame!r}")
            frame = None
        if frame is not None and inst.gold_args is not None:
            roles = set(frame.fe_names())
            for _, role in inst.gold_args:
                if role not in roles:
                    out.append(f"role {role!r} not in frame {inst.gold_frame!r}")
    return out


def _as_span(value, what: str):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
        raise CorpusError(f"{what} must be a pair of integers")
    return (value[0], value[1])


def instance_from_dict(obj: dict) -> SentenceInstance:
    """Build an instance from one corpus record, normalizing argument order."""
    if not isinstance(obj, dict):
        raise CorpusError("record is not an object")
    for key in ("tokens", "lemmas", "pos", "heads"):
        if not isinstance(obj.get(key), list):
            raise CorpusError(f"missing or non-list field {key!r}")
    tokens = obj["tokens"]
    if not all(isinstance(t, str) for t in tokens):
        raise CorpusError("tokens must be strings")
    if not all(isinstance(t, str) for t in obj["lemmas"] + obj["pos"]):
        raise CorpusError("lemmas and pos must be strings")
    if not all(isinstance(h, int) and not isinstance(h, bool) for h in obj["heads"]):
        raise CorpusError("heads must be integers")
    target = _as_span(obj.get("target"), "target")
    frame = obj.get("frame")
    if frame is not None and not isinstance(frame, str):
        raise CorpusError("frame must be a string")
    args = obj.get("args")
    gold_args = None
    if args is not None:
        if not isinstance(args, list):
            raise CorpusError("args must be a list")
        gold_args = []
        for entry in args:
            if (not isinstance(entry, (list, tuple)) or len(entry) != 3
                    or not isinstance(entry[2], str)):
                raise CorpusError("each arg must be [start, end, role]")
            gold_args.append((_as_span(entry[:2], "arg span"), entry[2]))
        gold_args.sort(key=lambda a: a[0])
        gold_args = tuple(gold_args)
    return SentenceInstance(tokens=tuple(tokens), lemmas=tuple(obj["lemmas"]),
                            pos_tags=tuple(obj["pos"]),
                            dep_heads=tuple(obj["heads"]), target=target,
                            gold_frame=frame, gold_args=gold_args)


def instance_to_dict(inst: SentenceInstance) -> dict:
    obj = {"tokens": list(inst.tokens), "lemmas": list(inst.lemmas),
           "pos": list(inst.pos_tags), "heads": list(inst.dep_heads),
           "target": list(inst.target)}
    if inst.gold_frame is not None:
        obj["frame"] = inst.gold_frame
    if inst.gold_args is not None:
        obj["args"] = [[s, e, role] for (s, e), role in inst.gold_args]
    return obj


def load_corpus(path, ontology: FrameOntology | None = None,
                tag: str = "") -> Corpus:
    """Read a line-delimited corpus file.

    Malformed lines and frame or role names missing from the ontology are
    errors; instances that fail structural validation (overlapping spans,
    broken trees, bad ranges) are skipped with a warning and counted.
    """
    instances = []
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{line_no}: malformed line: {exc}") from None
            try:
                inst = instance_from_dict(obj)
            except CorpusError as exc:
                raise CorpusError(f"{path}:{line_no}: {exc}") from None
            if ontology is not None and inst.gold_frame is not None:
                try:
                    frame = ontology.frames[ontology.frame_index(inst.gold_frame)]
                except KeyError:
                    raise CorpusError(
                        f"{path}:{line_no}: unknown frame "
                        f"{inst.gold_frame!r}") from None
                if inst.gold_args is not None:
                    roles = set(frame.fe_names())
                    for _, role in inst.gold_args:
                        if role not in roles:
                            raise CorpusError(
                                f"{path}:{line_no}: role {role!r} not in "
                                f"frame {inst.gold_frame!r}")
            violations = validate_instance(inst)
            if violations:
                skipped += 1
                log.warning("%s:%d: skipping instance: %s", path, line_no,
                            "; ".join(violations))
                continue
            instances.append(inst)
    return Corpus(instances=instances, tag=tag, skipped=skipped)


def serialize_corpus(corpus: Corpus, path) -> None:
    lines = [json.dumps(instance_to_dict(inst), ensure_ascii=False)
             for inst in corpus.instances]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def prediction_record(inst: SentenceInstance, result, fkg) -> dict:
    """One serializable parse record for an input sentence."""
    args = []
    for a in result.args:
        role = fkg.fe_labels[a.role_node - fkg.num_frames][1]
        args.append({"span": [a.span[0], a.span[1]], "role": role,
                     "start_prob": a.start_prob, "end_prob": a.end_prob,
                     "role_prob": a.role_prob})
    return {"tokens": list(inst.tokens), "target": list(inst.target),
            "frame": fkg.frame_names[result.frame_index],
            "frame_prob": result.frame_prob, "args": args}


def validate_prediction(record: dict, ontology: FrameOntology) -> list:
    """Check a parse record against the structural decoding guarantees:
    known frame, in-bounds non-overlapping spans, roles of that frame."""
    out = []
    n = len(record.get("tokens", []))
    frame_name = record.get("frame")
    try:
        frame_idx = ontology.frame_index(frame_name)
        roles = set(ontology.frames[frame_idx].fe_names())
    except KeyError:
        frame_idx = None
        roles = set()
        out.append(f"unknown frame {frame_name!r}")
    covered = set()
    for entry in record.get("args", []):
        s, e = entry.get("span", (None, None))
        if not (isinstance(s, int) and isinstance(e, int) and 0 <= s <= e < n):
            out.append(f"argument span {entry.get('span')} out of range")
            continue
        span = set(range(s, e + 1))
        if covered & span:
            out.append(f"argument span ({s}, {e}) overlaps an earlier one")
        covered |= span
        if frame_idx is not None and entry.get("role") not in roles:
            out.append(f"role {entry.get('role')!r} not in frame {frame_name!r}")
    return out
