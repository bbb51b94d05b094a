"""Knowledge-enhanced node representations for frames and FEs.

A relational graph convolution stack over the frame knowledge graph turns
randomly initialized node embeddings into representations that mix each
node with its related frames/FEs.  FEs with equal names can share one
underlying embedding parameter.
"""

import torch
from torch import nn

from .neural import RelGraphConv, _edge_tensor
from .ontology import FKG_RELATIONS, FrameKnowledgeGraph


class NodeEmbeddingTable(nn.Module):
    """Base embeddings for every graph node, with optional name sharing.

    With sharing enabled, all FE nodes carrying the same name point at one
    parameter row; frames and the dummy node always own distinct rows.
    Initialization is uniform(-0.1, 0.1) from the given seed.
    """

    def __init__(self, fkg: FrameKnowledgeGraph, d_n: int, *,
                 name_sharing: bool = True, seed: int = 0):
        super().__init__()
        rows = list(range(fkg.num_frames))
        if name_sharing:
            group_row = {}
            for name, members in fkg.name_groups.items():
                group_row[name] = len(rows) + len(group_row)
            for node in range(fkg.num_frames, fkg.num_frames + fkg.num_fes):
                _frame, fe_name = fkg.fe_labels[node - fkg.num_frames]
                rows.append(group_row[fe_name])
            num_params = fkg.num_frames + len(group_row) + 1
        else:
            rows.extend(range(fkg.num_frames, fkg.node_count - 1))
            num_params = fkg.node_count
        rows.append(num_params - 1)  # dummy

        gen = torch.Generator().manual_seed(seed)
        init = torch.empty(num_params, d_n).uniform_(-0.1, 0.1, generator=gen)
        self.weight = nn.Parameter(init)
        self.register_buffer("row_index", torch.tensor(rows, dtype=torch.long))

    def forward(self) -> torch.Tensor:
        return self.weight.index_select(0, self.row_index)


class KnowledgeGraphEncoder(nn.Module):
    """Embedding table plus an optional tanh RGCN stack over the graph.

    When ``use_rgcn`` is off the module owns no convolution weights and
    simply returns the table rows, which is the no-knowledge-graph ablation.
    """

    def __init__(self, embeddings: NodeEmbeddingTable, d_n: int,
                 num_layers: int = 2, relations=FKG_RELATIONS,
                 use_rgcn: bool = True):
        super().__init__()
        self.embeddings = embeddings
        if use_rgcn:
            self.layers = nn.ModuleList(
                RelGraphConv(d_n, d_n, relations, activation=torch.tanh)
                for _ in range(num_layers))
        else:
            self.layers = None

    def forward(self, edges_by_kind: dict) -> torch.Tensor:
        h = self.embeddings()
        if self.layers is None:
            return h
        for layer in self.layers:
            h = layer(h, edges_by_kind)
        return h


def fkg_edge_tensors(fkg: FrameKnowledgeGraph, enabled=FKG_RELATIONS,
                     device=None) -> dict:
    """Precompute per-relation index tensors for the enabled edge sets."""
    out = {}
    for kind in enabled:
        src, dst = _edge_tensor(fkg.edges[kind], device)
        out[kind] = torch.stack([src, dst])
    return out
