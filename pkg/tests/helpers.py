"""Shared fixtures-in-code: small ontologies, sentences and random
generators used across the test modules."""

import json
import random

import torch

from frameparse.model import FrameSemanticParser, ModelConfig
from frameparse.ontology import (
    Frame,
    FrameElement,
    FrameOntology,
    build_fkg,
)
from frameparse.sentence import SentenceInstance, Vocabulary


def transfer_ontology():
    """Two related frames: Receiving inherits from Getting and maps its
    Donor onto Getting's Source.  Exercises every graph relation kind:
    one frame-frame edge, one inter-frame FE edge from the mapping, and
    intra-frame FE edges once mentions are derived from definitions."""
    getting = Frame(
        name="Getting",
        definition="A Recipient comes into possession of a Theme.",
        fes=(
            FrameElement("Recipient", "The Recipient ends up with the Theme."),
            FrameElement("Theme", "The object that changes hands."),
            FrameElement("Source", "The Source gives up the Theme."),
        ),
    )
    receiving = Frame(
        name="Receiving",
        definition="A Recipient accepts a Theme from a Donor.",
        fes=(
            FrameElement("Recipient", "The Recipient accepts the Theme."),
            FrameElement("Theme", "The object handed over."),
            FrameElement("Donor", "The Donor hands the Theme over."),
            FrameElement("Role", "The Role relates the Theme to the Donor."),
        ),
        relations=(("Inheritance", "Getting", (("Donor", "Source"),)),),
    )
    return FrameOntology(
        frames=(getting, receiving),
        lexicon={"get.v": ("Getting",), "receive.v": ("Receiving",)},
    )


def transfer_ontology_dict():
    """The same ontology as a plain dict in the on-disk JSON layout."""
    return {
        "relation_kinds": ["Inheritance"],
        "frames": [
            {
                "name": "Getting",
                "definition": "A Recipient comes into possession of a Theme.",
                "fes": [
                    {"name": "Recipient",
                     "definition": "The Recipient ends up with the Theme."},
                    {"name": "Theme",
                     "definition": "The object that changes hands."},
                    {"name": "Source",
                     "definition": "The Source gives up the Theme."},
                ],
                "relations": [],
            },
            {
                "name": "Receiving",
                "definition": "A Recipient accepts a Theme from a Donor.",
                "fes": [
                    {"name": "Recipient",
                     "definition": "The Recipient accepts the Theme."},
                    {"name": "Theme",
                     "definition": "The object handed over."},
                    {"name": "Donor",
                     "definition": "The Donor hands the Theme over."},
                    {"name": "Role",
                     "definition": "The Role relates the Theme to the Donor."},
                ],
                "relations": [
                    {"kind": "Inheritance", "other": "Getting",
                     "fe_mappings": [["Donor", "Source"]]},
                ],
            },
        ],
        "lexicon": {"get.v": ["Getting"], "receive.v": ["Receiving"]},
    }


def write_ontology(path, data=None):
    path.write_text(json.dumps(data if data is not None
                               else transfer_ontology_dict()))
    return path


def receiving_instance():
    """He received the book from her: a target verb with three
    arguments, annotated against the Receiving frame."""
    return SentenceInstance(
        tokens=("He", "received", "the", "book", "from", "her", "."),
        lemmas=("he", "receive", "the", "book", "from", "she", "."),
        pos_tags=("PRP", "VBD", "DT", "NN", "IN", "PRP", "."),
        dep_heads=(1, -1, 3, 1, 1, 4, 1),
        target=(1, 1),
        gold_frame="Receiving",
        gold_args=(((0, 0), "Recipient"), ((2, 3), "Theme"),
                   ((5, 5), "Donor")),
    )


def getting_instance():
    return SentenceInstance(
        tokens=("She", "got", "a", "prize"),
        lemmas=("she", "get", "a", "prize"),
        pos_tags=("PRP", "VBD", "DT", "NN"),
        dep_heads=(1, -1, 3, 1),
        target=(1, 1),
        gold_frame="Getting",
        gold_args=(((0, 0), "Recipient"), ((2, 3), "Theme")),
    )


def fn15_shaped_ontology():
    """An ontology with the full-lexicon node counts: 1019 frames and
    9634 frame elements (463 frames with ten FEs, 556 with nine)."""
    frames = []
    for i in range(1019):
        n_fes = 10 if i < 463 else 9
        fes = tuple(FrameElement(f"E{j}", f"Element {j}.")
                    for j in range(n_fes))
        relations = ()
        if i > 0 and i % 7 == 0:
            relations = (("Inheritance", f"F{i - 1}", ()),)
        frames.append(Frame(f"F{i}", f"Frame {i}.", fes, relations))
    lexicon = {f"w{i}.v": (f"F{i}",) for i in range(0, 1019, 5)}
    return FrameOntology(tuple(frames), lexicon)


ROLE_NAMES = ("Agent", "Theme", "Goal", "Source", "Place", "Topic")
WORDS = ("the", "a", "dog", "cat", "ball", "ran", "saw", "gave", "took",
         "to", "from", "red", "old", "park", "stick")


def random_ontology(rng):
    """A small random ontology: 2-4 frames, 0-3 FEs each, occasional
    inheritance links with partial FE mappings."""
    n_frames = rng.randint(2, 4)
    frames = []
    for i in range(n_frames):
        names = rng.sample(ROLE_NAMES, rng.randint(0, 3))
        fes = []
        for nm in names:
            others = [o for o in names if o != nm]
            if others and rng.random() < 0.5:
                definition = f"The {nm} near the {rng.choice(others)}."
            else:
                definition = f"The {nm}."
            fes.append(FrameElement(nm, definition))
        relations = ()
        if i and rng.random() < 0.6:
            other = rng.randrange(i)
            other_names = [fe.name for fe in frames[other].fes]
            mappings = tuple(
                (nm, rng.choice(other_names))
                for nm in names
                if other_names and rng.random() < 0.5
            )
            relations = (("Inheritance", f"F{other}", mappings),)
        frames.append(Frame(f"F{i}", f"Frame {i}.", tuple(fes), relations))
    lexicon = {}
    for i in range(n_frames):
        targets = {f"F{i}"}
        if rng.random() < 0.3:
            targets.add(f"F{rng.randrange(n_frames)}")
        lexicon[f"v{i}.v"] = tuple(sorted(targets))
    return FrameOntology(tuple(frames), lexicon)


def random_instance(rng, max_len=8, ontology=None):
    """A random sentence over a fixed word list with a random tree and
    target span; no gold annotation."""
    n = rng.randint(1, max_len)
    tokens = tuple(rng.choice(WORDS) for _ in range(n))
    heads = tuple(-1 if i == 0 else rng.randrange(i) for i in range(n))
    s = rng.randrange(n)
    e = min(n - 1, s + (1 if rng.random() < 0.2 else 0))
    lemmas = tokens
    pos = tuple(rng.choice(("NN", "VB", "DT", "IN")) for _ in range(n))
    if ontology is not None and rng.random() < 0.5:
        # make the target resolve through the lexicon sometimes
        key = rng.choice(sorted(ontology.lexicon))
        lemma, _, letter = key.rpartition(".")
        lemmas = lemmas[:s] + (lemma,) + lemmas[s + 1:]
        pos = pos[:s] + (letter.upper() + "B",) + pos[s + 1:]
        e = s
    return SentenceInstance(tokens=tokens, lemmas=lemmas, pos_tags=pos,
                            dep_heads=heads, target=(s, e))


def small_config(rng=None, **overrides):
    base = dict(d_word=12, d_lemma=6, d_pos=4, d_indicator=4, d_hidden=16,
                d_node=8, lstm_layers=1, gcn_layers=1, ffn_layers=2)
    if rng is not None:
        base.update(
            use_fkg=rng.random() < 0.8,
            use_fsg_decoder=rng.random() < 0.8,
            name_sharing=rng.random() < 0.8,
            fi_use_fkg=rng.random() < 0.8,
        )
    base.update(overrides)
    return ModelConfig(**base)


def vocab_for(instances):
    return Vocabulary.build(instances)


def small_parser(ontology, instances, config=None, seed=0,
                 dtype=torch.float32):
    return FrameSemanticParser(ontology, vocab_for(instances),
                               config or small_config(), seed=seed,
                               dtype=dtype)


def seeded(seed):
    return random.Random(seed)
