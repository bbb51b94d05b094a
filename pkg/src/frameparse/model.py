"""Full parser: knowledge-graph encoder, sentence encoder, scoring heads."""

from dataclasses import dataclass, fields

import torch
from torch import nn

from . import decoder
from .decoder import HistoryLstm, ParseGraphEncoder, ParseResult, masked_log_softmax
from .knowledge import KnowledgeGraphEncoder, NodeEmbeddingTable, fkg_edge_tensors
from .neural import FeedForward
from .ontology import FKG_RELATIONS, FrameOntology, build_fkg
from .sentence import SentenceEncoder, SentenceInstance, TokenEmbedder, Vocabulary


@dataclass
class ModelConfig:
    """Hyperparameters and ablation switches for the parser."""

    d_word: int = 100
    d_lemma: int = 50
    d_pos: int = 25
    d_indicator: int = 25
    d_hidden: int = 512
    d_node: int = 256
    lstm_layers: int = 2
    gcn_layers: int = 2
    ffn_layers: int = 2
    use_fkg: bool = True
    use_fsg_decoder: bool = True
    name_sharing: bool = True
    fi_use_fkg: bool = True
    fkg_relations: tuple = FKG_RELATIONS

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["fkg_relations"] = list(self.fkg_relations)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in known}
        if "fkg_relations" in kwargs:
            kwargs["fkg_relations"] = tuple(kwargs["fkg_relations"])
        return cls(**kwargs)


class FrameSemanticParser(nn.Module):
    """End-to-end model over a fixed ontology and vocabulary."""

    def __init__(self, ontology: FrameOntology, vocab: Vocabulary,
                 config: ModelConfig | None = None, *, seed: int = 0,
                 dtype: torch.dtype = torch.float32, word_vectors=None):
        super().__init__()
        config = config or ModelConfig()
        for rel in config.fkg_relations:
            if rel not in FKG_RELATIONS:
                raise ValueError(f"unknown knowledge-graph relation: {rel}")
        torch.manual_seed(seed)
        self.ontology = ontology
        self.fkg = build_fkg(ontology)
        self.config = config
        self.seed = seed

        table = NodeEmbeddingTable(self.fkg, config.d_node,
                                   name_sharing=config.name_sharing, seed=seed)
        self.knowledge = KnowledgeGraphEncoder(
            table, config.d_node, num_layers=config.gcn_layers,
            use_rgcn=config.use_fkg)
        self.edge_tensors = fkg_edge_tensors(self.fkg, config.fkg_relations)

        embedder = TokenEmbedder(vocab, config.d_word, config.d_lemma,
                                 config.d_pos, config.d_indicator,
                                 word_vectors=word_vectors)
        self.sentence = SentenceEncoder(embedder, config.d_hidden,
                                        config.d_node,
                                        lstm_layers=config.lstm_layers,
                                        gcn_layers=config.gcn_layers,
                                        ffn_layers=config.ffn_layers)

        if config.use_fsg_decoder:
            self.graph_encoder = ParseGraphEncoder(config.d_node,
                                                   config.gcn_layers)
        else:
            self.graph_encoder = HistoryLstm(config.d_node)

        if config.fi_use_fkg:
            self.frame_head = FeedForward(config.d_node, config.d_node,
                                          config.ffn_layers)
            self.frame_classifier = None
        else:
            self.frame_head = None
            self.frame_classifier = nn.Linear(config.d_node,
                                              self.fkg.num_frames)
        self.start_head = FeedForward(config.d_node, config.d_hidden,
                                      config.ffn_layers)
        self.end_head = FeedForward(config.d_node, config.d_hidden,
                                    config.ffn_layers)
        self.role_head = FeedForward(2 * config.d_node, config.d_node,
                                     config.ffn_layers)
        if dtype is not torch.float32:
            self.to(dtype)

    def node_matrix(self) -> torch.Tensor:
        """Encode the knowledge graph; rows are frame, FE, and dummy nodes."""
        return self.knowledge(self.edge_tensors)

    def encode_sentence(self, inst: SentenceInstance) -> torch.Tensor:
        return self.sentence(inst)

    def span(self, h: torch.Tensor, start: int, end: int) -> torch.Tensor:
        return self.sentence.span(h, start, end)

    def graph_repr(self, features: torch.Tensor) -> torch.Tensor:
        """Summarize the partial parse from its stacked node features."""
        return self.graph_encoder(features)

    def frame_scores(self, pi_t: torch.Tensor, node_matrix: torch.Tensor,
                     candidates=None, log: bool = False) -> torch.Tensor:
        """Frame distribution for a target span representation."""
        if self.frame_head is not None:
            frame_vecs = node_matrix[:self.fkg.num_frames]
            return decoder.identify_frame(pi_t, self.frame_head, frame_vecs,
                                          candidates, log=log)
        logits = self.frame_classifier(pi_t)
        allowed = None
        if candidates is not None:
            if len(candidates) == 0:
                raise ValueError("empty candidate frame list")
            allowed = torch.zeros(logits.shape[0], dtype=torch.bool,
                                  device=logits.device)
            allowed[list(candidates)] = True
        lp = masked_log_softmax(logits, allowed)
        return lp if log else lp.exp()

    def role_vectors(self, node_matrix: torch.Tensor) -> torch.Tensor:
        """FE rows of the node matrix, dummy last."""
        return node_matrix[self.fkg.num_frames:]

    def decode(self, inst: SentenceInstance, frame_override: int | None = None,
               node_matrix: torch.Tensor | None = None,
               trace: list | None = None) -> ParseResult:
        return decoder.decode_structure(self, inst, frame_override=frame_override,
                                        node_matrix=node_matrix, trace=trace)

    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())
