"""Build the frame knowledge graph from an ontology file.

Writes a two-frame ontology in the on-disk JSON layout, loads it back,
derives role-to-role mentions from the definitions, and walks through
the node index space and the four edge lists of the resulting graph.
"""

import json
import tempfile
from pathlib import Path

from frameparse.ontology import (
    build_fkg,
    candidate_frames,
    candidate_roles,
    derive_mentions_from_definitions,
    load_ontology,
)

ONTOLOGY = {
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
            ],
            "relations": [
                {"kind": "Inheritance", "other": "Getting",
                 "fe_mappings": [["Donor", "Source"]]},
            ],
        },
    ],
    "lexicon": {"get.v": ["Getting"], "receive.v": ["Receiving"]},
}


def label(fkg, node):
    if node < fkg.num_frames:
        return fkg.frame_names[node]
    if node == fkg.dummy_index:
        return "<dummy>"
    frame, fe = fkg.fe_labels[node - fkg.num_frames]
    return f"{frame}.{fe}"


def main():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "ontology.json"
        path.write_text(json.dumps(ONTOLOGY, indent=2))
        ont = load_ontology(path)
    print(f"loaded {ont.num_frames} frames with {ont.num_fes} roles")

    ont = derive_mentions_from_definitions(ont)
    for frame in ont.frames:
        for fe in frame.fes:
            if fe.mentions:
                print(f"  {frame.name}.{fe.name} mentions {fe.mentions}")

    fkg = build_fkg(ont)
    print(f"\ngraph: {fkg.node_count} nodes "
          f"({fkg.num_frames} frames + {fkg.num_fes} roles + dummy)")
    for node in range(fkg.node_count):
        print(f"  node {node}: {label(fkg, node)}")

    print("\nedges (directed pairs, closed under reversal):")
    for kind, pairs in fkg.edges.items():
        shown = ", ".join(f"{label(fkg, i)}->{label(fkg, j)}"
                          for i, j in pairs[:4])
        more = f" ... {len(pairs)} total" if len(pairs) > 4 else ""
        print(f"  {kind:12s} {shown}{more}")

    print("\nroles sharing a name share one embedding row:")
    for name, nodes in fkg.name_groups.items():
        if len(nodes) > 1:
            print(f"  {name}: nodes {nodes}")

    print("\nlexicon lookups:")
    for key in ("get.v", "receive.v"):
        frames = candidate_frames(ont, key)
        print(f"  {key} -> frames {[fkg.frame_names[f] for f in frames]}")
    roles = candidate_roles(fkg, fkg.frame_index["Receiving"])
    print(f"  Receiving decodes over roles "
          f"{[label(fkg, r) for r in roles]}")


if __name__ == "__main__":
    main()
