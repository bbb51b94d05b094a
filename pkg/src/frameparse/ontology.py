"""Frame ontology loading and the frame knowledge graph built from it.

The ontology file is a JSON document with top-level keys ``frames`` and
``lexicon`` (see README for the full schema).  From a validated ontology we
compile an undirected multi-relational graph whose nodes are all frames,
all frame elements (FEs) and one extra dummy node used to signal the end
of argument decoding.
"""

import json
import re
from dataclasses import dataclass, field, replace

# FrameNet-style relation kinds accepted when the file declares no header.
DEFAULT_RELATION_KINDS = (
    "Inheritance",
    "Perspective_on",
    "Using",
    "Subframe",
    "Precedes",
    "Causative_of",
    "Inchoative_of",
    "See_also",
)

# The four edge sets of the knowledge graph.  Declared relation kinds are
# collapsed into the single FRAME_FRAME edge set.
FRAME_FE = "frame_fe"
FRAME_FRAME = "frame_frame"
INTRA_FE = "intra_fe"
INTER_FE = "inter_fe"
FKG_RELATIONS = (FRAME_FE, FRAME_FRAME, INTRA_FE, INTER_FE)


class OntologyError(ValueError):
    """Raised for unparseable or internally inconsistent ontology files."""


@dataclass(frozen=True)
class FrameElement:
    name: str
    definition: str = ""
    # None means the file did not author a mentions list; an explicit list
    # (possibly empty) always wins over definition scanning.
    mentions: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Frame:
    name: str
    definition: str = ""
    fes: tuple[FrameElement, ...] = ()
    # (kind, other frame name, ((own fe, other fe), ...))
    relations: tuple[tuple[str, str, tuple[tuple[str, str], ...]], ...] = ()

    def fe_names(self) -> list[str]:
        return [fe.name for fe in self.fes]


@dataclass(frozen=True)
class FrameOntology:
    """Validated collection of frames plus the target lexicon.

    Frame order is significant: it fixes the index space 0..|frames|-1 used
    by every model component.
    """

    frames: tuple[Frame, ...]
    lexicon: dict[str, tuple[str, ...]] = field(default_factory=dict)
    relation_kinds: tuple[str, ...] = DEFAULT_RELATION_KINDS

    def frame_index(self, name: str) -> int:
        return self._index[name]

    @property
    def _index(self) -> dict[str, int]:
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {f.name: i for i, f in enumerate(self.frames)}
            self.__dict__["_index_cache"] = idx
        return idx

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def num_fes(self) -> int:
        return sum(len(f.fes) for f in self.frames)


@dataclass(frozen=True)
class FrameKnowledgeGraph:
    """Indexed node set and the four symmetric edge lists.

    Nodes 0..|F|-1 are frames (ontology order), |F|..|F|+|R|-1 are FEs
    (declaration order within each frame), and the last node is the dummy
    termination role.  Edge lists store directed pairs closed under
    reversal, without duplicates or self loops.
    """

    num_frames: int
    num_fes: int
    frame_index: dict[str, int]
    fe_index: dict[tuple[str, str], int]
    edges: dict[str, tuple[tuple[int, int], ...]]
    name_groups: dict[str, tuple[int, ...]]
    frame_names: tuple[str, ...]
    fe_labels: tuple[tuple[str, str], ...]  # node order, (frame, fe name)
    fes_by_frame: tuple[tuple[int, ...], ...]

    @property
    def dummy_index(self) -> int:
        return self.num_frames + self.num_fes

    @property
    def node_count(self) -> int:
        return self.num_frames + self.num_fes + 1

    def neighbors(self, kind: str, node: int) -> list[int]:
        return [j for i, j in self.edges[kind] if i == node]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise OntologyError(msg)


def _parse_fe(obj: dict, frame_name: str) -> FrameElement:
    _require(isinstance(obj, dict) and "name" in obj,
             f"frame {frame_name!r}: FE entry missing 'name'")
    mentions = obj.get("mentions")
    if mentions is not None:
        mentions = tuple(mentions)
    return FrameElement(
        name=obj["name"],
        definition=obj.get("definition", ""),
        mentions=mentions,
    )


def _parse_frame(obj: dict) -> Frame:
    _require(isinstance(obj, dict) and "name" in obj, "frame entry missing 'name'")
    fes = tuple(_parse_fe(fe, obj["name"]) for fe in obj.get("fes", []))
    relations = []
    for rel in obj.get("relations", []):
        _require("kind" in rel and "other" in rel,
                 f"frame {obj['name']!r}: relation needs 'kind' and 'other'")
        mappings = tuple((m[0], m[1]) for m in rel.get("fe_mappings", []))
        relations.append((rel["kind"], rel["other"], mappings))
    return Frame(
        name=obj["name"],
        definition=obj.get("definition", ""),
        fes=fes,
        relations=tuple(relations),
    )


def validate_ontology(ont: FrameOntology) -> None:
    """Check all cross-reference invariants, naming the offending ids."""
    seen = set()
    for frame in ont.frames:
        _require(frame.name not in seen, f"duplicate frame name {frame.name!r}")
        seen.add(frame.name)

        fe_names = set()
        for fe in frame.fes:
            _require(fe.name not in fe_names,
                     f"frame {frame.name!r}: duplicate FE name {fe.name!r}")
            fe_names.add(fe.name)

        for fe in frame.fes:
            for m in fe.mentions or ():
                _require(m in fe_names,
                         f"frame {frame.name!r}: FE {fe.name!r} mentions "
                         f"unknown FE {m!r}")

        for kind, other, mappings in frame.relations:
            _require(kind in ont.relation_kinds,
                     f"frame {frame.name!r}: undeclared relation kind {kind!r}")
            _require(other in ont._index,
                     f"frame {frame.name!r}: relation to unknown frame {other!r}")
            _require(other != frame.name,
                     f"frame {frame.name!r}: relation to itself")
            other_fes = set(ont.frames[ont.frame_index(other)].fe_names())
            for own, theirs in mappings:
                _require(own in fe_names,
                         f"frame {frame.name!r}: mapping names unknown FE {own!r}")
                _require(theirs in other_fes,
                         f"frame {frame.name!r}: mapping to {other!r} names "
                         f"unknown FE {theirs!r}")

    for lemma_key, frame_names in ont.lexicon.items():
        for name in frame_names:
            _require(name in ont._index,
                     f"lexicon entry {lemma_key!r} references unknown frame {name!r}")


def load_ontology(path) -> FrameOntology:
    """Parse and validate an ontology JSON file."""
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise OntologyError(f"cannot parse ontology file {path}: {exc}") from exc

    _require(isinstance(doc, dict) and "frames" in doc,
             "ontology file must be an object with a 'frames' key")
    kinds = tuple(doc.get("relation_kinds", DEFAULT_RELATION_KINDS))
    frames = tuple(_parse_frame(obj) for obj in doc["frames"])
    lexicon = {k: tuple(v) for k, v in doc.get("lexicon", {}).items()}

    ont = FrameOntology(frames=frames, lexicon=lexicon, relation_kinds=kinds)
    ont = _drop_self_mentions(ont)
    validate_ontology(ont)
    return ont


def _drop_self_mentions(ont: FrameOntology) -> FrameOntology:
    frames = []
    for frame in ont.frames:
        fes = tuple(
            fe if fe.mentions is None else
            replace(fe, mentions=tuple(m for m in fe.mentions if m != fe.name))
            for fe in frame.fes
        )
        frames.append(replace(frame, fes=fes))
    return replace(ont, frames=tuple(frames))


def derive_mentions_from_definitions(ont: FrameOntology) -> FrameOntology:
    """Fill unauthored mentions lists by scanning FE definitions.

    A sibling FE name counts as mentioned when it occurs as a whole word,
    case-sensitively, in the definition text.  Self mentions are dropped.
    Hand-authored lists (mentions != None) are kept as is, so the pass is
    idempotent.
    """
    frames = []
    for frame in ont.frames:
        names = frame.fe_names()
        fes = []
        for fe in frame.fes:
            if fe.mentions is not None:
                fes.append(fe)
                continue
            found = tuple(
                other for other in names
                if other != fe.name
                and re.search(rf"\b{re.escape(other)}\b", fe.definition)
            )
            fes.append(replace(fe, mentions=found))
        frames.append(replace(frame, fes=tuple(fes)))
    return replace(ont, frames=tuple(frames))


def _symmetric(pairs: set[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    closed = set()
    for i, j in pairs:
        if i == j:
            continue
        closed.add((i, j))
        closed.add((j, i))
    return tuple(sorted(closed))


def build_fkg(ont: FrameOntology) -> FrameKnowledgeGraph:
    """Compile the knowledge graph from a validated ontology.

    Relation kinds are collapsed: every declared frame relation becomes one
    untyped frame-frame edge, every FE mapping one inter-frame FE-FE edge,
    and every mention one intra-frame FE-FE edge.  The dummy node stays
    isolated under all four relations.
    """
    n_frames = len(ont.frames)
    frame_index = {f.name: i for i, f in enumerate(ont.frames)}

    fe_index: dict[tuple[str, str], int] = {}
    fe_labels: list[tuple[str, str]] = []
    fes_by_frame: list[tuple[int, ...]] = []
    next_id = n_frames
    for frame in ont.frames:
        ids = []
        for fe in frame.fes:
            fe_index[(frame.name, fe.name)] = next_id
            fe_labels.append((frame.name, fe.name))
            ids.append(next_id)
            next_id += 1
        fes_by_frame.append(tuple(ids))

    frame_fe, frame_frame, intra_fe, inter_fe = set(), set(), set(), set()
    for frame in ont.frames:
        fi = frame_index[frame.name]
        for fe in frame.fes:
            frame_fe.add((fi, fe_index[(frame.name, fe.name)]))
            for m in fe.mentions or ():
                intra_fe.add((fe_index[(frame.name, fe.name)],
                              fe_index[(frame.name, m)]))
        for _kind, other, mappings in frame.relations:
            frame_frame.add((fi, frame_index[other]))
            for own, theirs in mappings:
                inter_fe.add((fe_index[(frame.name, own)],
                              fe_index[(other, theirs)]))

    name_groups: dict[str, list[int]] = {}
    for (_frame, fe_name), idx in fe_index.items():
        name_groups.setdefault(fe_name, []).append(idx)

    return FrameKnowledgeGraph(
        num_frames=n_frames,
        num_fes=next_id - n_frames,
        frame_index=frame_index,
        fe_index=fe_index,
        edges={
            FRAME_FE: _symmetric(frame_fe),
            FRAME_FRAME: _symmetric(frame_frame),
            INTRA_FE: _symmetric(intra_fe),
            INTER_FE: _symmetric(inter_fe),
        },
        name_groups={k: tuple(sorted(v)) for k, v in sorted(name_groups.items())},
        frame_names=tuple(f.name for f in ont.frames),
        fe_labels=tuple(fe_labels),
        fes_by_frame=tuple(fes_by_frame),
    )


def candidate_frames(ont: FrameOntology, lemma_key: str) -> list[int]:
    """Frame indices the lexicon allows for a target lemma key.

    Unknown lemmas fall back to the full frame inventory.
    """
    names = ont.lexicon.get(lemma_key)
    if names is None:
        return list(range(len(ont.frames)))
    return sorted(ont.frame_index(n) for n in names)


def candidate_roles(fkg: FrameKnowledgeGraph, frame_index: int) -> list[int]:
    """FE node indices of a frame plus the dummy termination node."""
    if not 0 <= frame_index < fkg.num_frames:
        raise IndexError(f"frame index {frame_index} out of range")
    return list(fkg.fes_by_frame[frame_index]) + [fkg.dummy_index]
