"""Run the untrained parser end to end on one sentence, with a trace.

Builds the same two-frame ontology as demo 01 directly from objects,
encodes the knowledge graph into node vectors, encodes a sentence, and
steps through the incremental decode: frame distribution first, then a
start / end / role triple per argument until the dummy role closes the
parse.  The weights are random, so the point is the shape of the
computation, not the quality of the labels.
"""

import torch

from frameparse.decoder import decode_structure
from frameparse.model import FrameSemanticParser, ModelConfig
from frameparse.ontology import (
    Frame,
    FrameElement,
    FrameOntology,
    derive_mentions_from_definitions,
)
from frameparse.sentence import SentenceInstance, Vocabulary


def build_ontology():
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
        ),
        relations=(("Inheritance", "Getting", (("Donor", "Source"),)),),
    )
    ont = FrameOntology(
        frames=(getting, receiving),
        lexicon={"get.v": ("Getting",), "receive.v": ("Receiving",)},
    )
    return derive_mentions_from_definitions(ont)


SENTENCE = SentenceInstance(
    tokens=("He", "received", "the", "book", "from", "her", "."),
    lemmas=("he", "receive", "the", "book", "from", "she", "."),
    pos_tags=("PRP", "VBD", "DT", "NN", "IN", "PRP", "."),
    dep_heads=(1, -1, 3, 1, 1, 4, 1),
    target=(1, 1),
)

TRAINING_SENTENCE = SentenceInstance(
    tokens=("She", "got", "a", "prize"),
    lemmas=("she", "get", "a", "prize"),
    pos_tags=("PRP", "VBD", "DT", "NN"),
    dep_heads=(1, -1, 3, 1),
    target=(1, 1),
)


def role_label(fkg, node):
    if node == fkg.dummy_index:
        return "<dummy>"
    frame, fe = fkg.fe_labels[node - fkg.num_frames]
    return f"{frame}.{fe}"


def show(probs, labels):
    return "  ".join(f"{lab} {p:.3f}"
                     for lab, p in zip(labels, probs.tolist()) if p > 0)


def main():
    ont = build_ontology()
    vocab = Vocabulary.build([SENTENCE, TRAINING_SENTENCE])
    model = FrameSemanticParser(ont, vocab, ModelConfig(
        d_word=24, d_lemma=12, d_pos=8, d_indicator=8,
        d_hidden=32, d_node=16), seed=3)
    fkg = model.fkg

    with torch.no_grad():
        y = model.node_matrix()
        h = model.encode_sentence(SENTENCE)
    print(f"knowledge-graph node matrix: {tuple(y.shape)}")
    print(f"token states for {len(SENTENCE)} tokens: {tuple(h.shape)}")

    trace = []
    with torch.no_grad():
        result = decode_structure(model, SENTENCE, trace=trace)
    tokens = SENTENCE.tokens

    kind, frame_probs = trace[0]
    print(f"\n{kind} distribution (lexicon-filtered for "
          f"'{SENTENCE.lemma_key}'):")
    print("  " + show(frame_probs, fkg.frame_names))
    print(f"chosen: {fkg.frame_names[result.frame_index]} "
          f"(p={result.frame_prob:.3f})")

    steps = [trace[1 + 3 * k: 4 + 3 * k] for k in range((len(trace) - 1) // 3)]
    role_labels = [role_label(fkg, fkg.num_frames + i)
                   for i in range(fkg.num_fes + 1)]
    for k, ((_, s_p), (_, e_p), (_, r_p)) in enumerate(steps):
        print(f"\nstep {k + 1}:")
        print(f"  start  {show(s_p, tokens)}")
        print(f"  end    {show(e_p, tokens)}")
        print(f"  role   {show(r_p, role_labels)}")
        if k < len(result.args):
            s, e = result.args[k].span
            print(f"  -> '{' '.join(tokens[s:e + 1])}' as "
                  f"{role_label(fkg, result.args[k].role_node)}")
        else:
            print("  -> dummy role: parse closed")

    print(f"\nfinal structure: {fkg.frame_names[result.frame_index]} with "
          f"{len(result.args)} arguments")


if __name__ == "__main__":
    main()
