"""Deterministic synthetic ontologies and corpora for desk-scale runs.

Frames come in families: a few base frames plus derived frames that
relate back to a base parent with positional FE mappings, so all four
knowledge-graph edge sets are populated.  Sentences are template
realizations with chain dependency trees.  The last derived frames form
a designated held family (always related and fully mapped to its
parents, evokable by a shared lemma) for the few-shot transfer setup.
"""

import json
import random
from dataclasses import dataclass, fields
from pathlib import Path

from .data import Corpus, atomic_write_text, instance_to_dict
from .ontology import Frame, FrameElement, FrameOntology, validate_ontology
from .sentence import SentenceInstance

NOUNS = ("cat", "book", "girl", "man", "stone", "letter", "dog", "boy",
         "car", "gift", "coin", "tree", "bird", "house", "apple", "king",
         "ship", "song", "road", "star")
DETERMINERS = ("the", "a")
# One preposition per family FE position >= 2 so the role of a marked
# phrase is recoverable from the surface form.
PREPOSITIONS = ("from", "to", "with", "near", "under", "over", "about",
                "at", "past", "through", "against", "beside", "behind",
                "beyond", "inside", "toward")
ADVERBS = ("today", "quickly", "slowly", "again")
ROLE_POOL = ("Agent", "Theme", "Goal", "Source", "Place", "Instrument",
             "Manner", "Topic", "Recipient", "Donor", "Time", "Path",
             "Reason", "Result", "Material", "Medium", "Degree", "Purpose")
HELD_LEMMA = "vheld"


@dataclass
class SyntheticSpec:
    """Everything the generator needs; the seed fixes all randomness."""

    frame_count: int = 12
    fe_range: tuple = (2, 3)
    relation_density: float = 0.8
    mapping_density: float = 1.0
    template_count: int = 2
    sentence_length: tuple = (5, 12)
    pretrain_instances: int = 0
    train_instances: int = 200
    dev_instances: int = 40
    test_instances: int = 40
    held_frame_count: int = 2
    shared_role_names: bool = True
    core_positions: int | None = None
    arg_prob: float = 0.75
    distractor_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.frame_count < 1 or self.template_count < 1:
            raise ValueError("frame and template counts must be >= 1")
        if self.train_instances < 1:
            raise ValueError("need at least one training instance")
        if min(self.pretrain_instances, self.dev_instances,
               self.test_instances) < 0:
            raise ValueError("instance counts must be >= 0")
        lo, hi = self.fe_range
        if not 1 <= lo <= hi <= len(ROLE_POOL):
            raise ValueError(f"fe_range must fit in 1..{len(ROLE_POOL)}")
        for d in (self.relation_density, self.mapping_density,
                  self.arg_prob, self.distractor_prob):
            if not 0 <= d <= 1:
                raise ValueError("densities and probabilities must be in [0, 1]")
        if self.core_positions is not None and self.core_positions < 0:
            raise ValueError("core_positions must be >= 0")
        if self.held_frame_count < 0:
            raise ValueError("held_frame_count must be >= 0")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["fe_range"] = list(self.fe_range)
        d["sentence_length"] = list(self.sentence_length)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in known}
        for key in ("fe_range", "sentence_length"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def _frame_name(i: int) -> str:
    return f"Frame{i:02d}"


def _build_ontology(spec: SyntheticSpec, rng: random.Random):
    """Create frames, relations, and the lexicon; returns the ontology
    plus bookkeeping (parents, FE counts, lemma lists, held names)."""
    n = spec.frame_count
    base_count = max(1, n // 3)
    derived = list(range(base_count, n))
    if spec.held_frame_count > len(derived):
        raise ValueError("held_frame_count exceeds the derived frames")
    held = set(derived[len(derived) - spec.held_frame_count:])

    parent = {d: (d - base_count) % base_count for d in derived}
    fe_count = {}
    for b in range(base_count):
        fe_count[b] = rng.randint(*spec.fe_range)
    for d in derived:
        fe_count[d] = fe_count[parent[d]]

    # Each family realizes only a fixed subset of its positions >= 2 as
    # arguments; the rest may surface as unannotated distractor phrases.
    core = {}
    for b in range(base_count):
        later = list(range(2, fe_count[b]))
        if spec.core_positions is None or spec.core_positions >= len(later):
            core[b] = tuple(later)
        else:
            core[b] = tuple(sorted(rng.sample(later, spec.core_positions)))
    for d in derived:
        core[d] = core[parent[d]]

    fe_names = {}
    for i in range(n):
        c = fe_count[i]
        if spec.shared_role_names:
            fe_names[i] = tuple(rng.sample(ROLE_POOL, c))
        else:
            fe_names[i] = tuple(f"{ROLE_POOL[j]}{i:02d}" for j in range(c))

    frames = []
    for i in range(n):
        names = fe_names[i]
        fes = []
        for j, name in enumerate(names):
            sibling = names[(j + 1) % len(names)] if len(names) > 1 else None
            definition = (f"The {name} of the situation."
                          if sibling is None else
                          f"The {name} of the situation, often tied to "
                          f"the {sibling}.")
            fes.append(FrameElement(name=name, definition=definition,
                                    mentions=(sibling,) if sibling else ()))
        relations = []
        if i in parent:
            linked = i in held or rng.random() < spec.relation_density
            if linked:
                kind = ("Inheritance" if rng.random() < 0.7
                        else rng.choice(("Using", "Perspective_on")))
                p = parent[i]
                mappings = []
                for j in range(fe_count[i]):
                    if i in held or rng.random() < spec.mapping_density:
                        mappings.append((fe_names[i][j], fe_names[p][j]))
                relations.append((kind, _frame_name(p), tuple(mappings)))
        frames.append(Frame(
            name=_frame_name(i),
            definition=f"A {_frame_name(i)} situation with "
                       f"{len(names)} participants.",
            fes=tuple(fes), relations=tuple(relations)))

    lemmas = {i: [f"v{i:02d}a", f"v{i:02d}b"] for i in range(n)}
    lexicon = {}
    for i in range(n):
        for lemma in lemmas[i]:
            lexicon[f"{lemma}.v"] = (_frame_name(i),)
    if held:
        lexicon[f"{HELD_LEMMA}.v"] = tuple(_frame_name(i) for i in sorted(held))
        for i in held:
            lemmas[i].append(HELD_LEMMA)

    ont = FrameOntology(frames=tuple(frames), lexicon=lexicon)
    validate_ontology(ont)
    family = {i: parent.get(i, i) for i in range(n)}
    return ont, {"parent": parent, "family": family, "fe_names": fe_names,
                 "lemmas": lemmas, "held": sorted(held),
                 "base_count": base_count, "core": core}


def _realize(spec: SyntheticSpec, rng: random.Random, frame: str,
             roles: tuple, core: tuple, lemma: str,
             template: int) -> SentenceInstance:
    """One sentence realizing a family template.

    Family FE position 0 is the subject noun phrase, position 1 the bare
    object noun phrase, and every later position a prepositional phrase
    with its own fixed preposition, so the role of a marked phrase is
    recoverable from the surface.  Positions >= 2 outside the family's
    core subset never carry an argument but may surface as distractor
    phrases, so telling arguments from distractors takes knowing the
    frame.  The template index only permutes the surface order of the
    post-verb phrases; adverbs pad the sentence into the length range.
    """
    c = len(roles)
    tokens, pos = [], []

    def add(words, tags):
        start = len(tokens)
        tokens.extend(words)
        pos.extend(tags)
        return (start, len(tokens) - 1)

    def noun_phrase():
        return add([rng.choice(DETERMINERS), rng.choice(NOUNS)], ["D", "N"])

    def prep_phrase(position):
        return add([PREPOSITIONS[position - 2], rng.choice(DETERMINERS),
                    rng.choice(NOUNS)], ["P", "D", "N"])

    args = [(noun_phrase(), roles[0])]
    verb_at = add([lemma], ["V"])[0]
    rest = [1 + (i + template) % (c - 1) for i in range(c - 1)]
    core_set = set(core)
    for position in rest:
        if position == 1:
            args.append((noun_phrase(), roles[1]))
        elif position in core_set:
            if rng.random() < spec.arg_prob:
                args.append((prep_phrase(position), roles[position]))
        elif rng.random() < spec.distractor_prob:
            prep_phrase(position)
    lo, hi = spec.sentence_length
    while len(tokens) < lo or (len(tokens) < hi and rng.random() < 0.3):
        add([rng.choice(ADVERBS)], ["R"])

    heads = [-1] + list(range(len(tokens) - 1))
    args.sort(key=lambda a: a[0])
    return SentenceInstance(tokens=tuple(tokens), lemmas=tuple(tokens),
                            pos_tags=tuple(pos), dep_heads=tuple(heads),
                            target=(verb_at, verb_at), gold_frame=frame,
                            gold_args=tuple(args))


def build_synthetic(spec: SyntheticSpec):
    """Return (ontology, split corpora, metadata), all seed-determined."""
    rng = random.Random(spec.seed)
    ont, info = _build_ontology(spec, rng)
    n = spec.frame_count

    def make_split(count: int, tag: str) -> Corpus:
        out = []
        for i in range(count):
            f = i % n
            lemma = rng.choice(info["lemmas"][f])
            template = rng.randrange(spec.template_count)
            out.append(_realize(spec, rng, _frame_name(f),
                                info["fe_names"][f], info["core"][f],
                                lemma, template))
        return Corpus(out, tag=tag)

    splits = {}
    if spec.pretrain_instances:
        splits["pretrain"] = make_split(spec.pretrain_instances, "pretrain")
    splits["train"] = make_split(spec.train_instances, "train")
    splits["dev"] = make_split(spec.dev_instances, "dev")
    splits["test"] = make_split(spec.test_instances, "test")

    meta = {"spec": spec.to_dict(),
            "base_frames": [_frame_name(i) for i in range(info["base_count"])],
            "parent": {_frame_name(d): _frame_name(p)
                       for d, p in sorted(info["parent"].items())},
            "core_positions": {_frame_name(i): list(info["core"][i])
                               for i in range(n)},
            "held_frames": [_frame_name(i) for i in info["held"]],
            "held_lemma_keys": ([f"{HELD_LEMMA}.v"] if info["held"] else [])}
    return ont, splits, meta


def _ontology_dict(ont: FrameOntology) -> dict:
    frames = []
    for frame in ont.frames:
        frames.append({
            "name": frame.name,
            "definition": frame.definition,
            "fes": [{"name": fe.name, "definition": fe.definition,
                     "mentions": list(fe.mentions or ())}
                    for fe in frame.fes],
            "relations": [{"kind": kind, "other": other,
                           "fe_mappings": [list(m) for m in mappings]}
                          for kind, other, mappings in frame.relations],
        })
    return {"relation_kinds": list(ont.relation_kinds), "frames": frames,
            "lexicon": {k: list(v) for k, v in sorted(ont.lexicon.items())}}


def generate_synthetic(spec: SyntheticSpec, out_dir) -> dict:
    """Write ontology, corpora, and metadata under ``out_dir``.

    Output bytes are a pure function of the spec.  Returns the path of
    every file written.
    """
    ont, splits, meta = build_synthetic(spec)
    out_dir = Path(out_dir)
    paths = {}

    paths["ontology"] = out_dir / "ontology.json"
    atomic_write_text(paths["ontology"],
                      json.dumps(_ontology_dict(ont), indent=2) + "\n")
    for name, corpus in splits.items():
        paths[name] = out_dir / f"{name}.jsonl"
        lines = [json.dumps(instance_to_dict(inst), ensure_ascii=False)
                 for inst in corpus.instances]
        atomic_write_text(paths[name], "".join(s + "\n" for s in lines))
    paths["meta"] = out_dir / "meta.json"
    atomic_write_text(paths["meta"], json.dumps(meta, indent=2) + "\n")
    return paths
