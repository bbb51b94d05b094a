"""Differentiable building blocks shared by all encoders and decoders.

Everything here is a plain torch module so reverse-mode autograd provides
parameter gradients; tests check the forward math against brute-force
oracles and the gradients against finite differences.
"""

import torch
from torch import nn


def normalized_adjacency(num_nodes: int, edges, *, dtype=torch.float32,
                         device=None) -> torch.Tensor:
    """Dense symmetric-normalized adjacency with self loops.

    ``edges`` is an iterable of (i, j) pairs of an undirected simple graph;
    each pair is symmetrized.  Returns D^-1/2 (A + I) D^-1/2 where D counts
    degrees of the self-looped graph, so an isolated node gets weight 1 on
    its own diagonal entry.
    """
    adj = torch.eye(num_nodes, dtype=dtype, device=device)
    for i, j in edges:
        if i == j:
            continue
        adj[i, j] = 1.0
        adj[j, i] = 1.0
    deg = adj.sum(dim=1)
    inv_sqrt = deg.pow(-0.5)
    return adj * inv_sqrt[:, None] * inv_sqrt[None, :]


class GraphConv(nn.Module):
    """Single graph convolution layer: act(norm_adj @ H @ W)."""

    def __init__(self, d_in: int, d_out: int, activation=torch.relu):
        super().__init__()
        self.linear = nn.Linear(d_in, d_out, bias=False)
        self.activation = activation

    def forward(self, h: torch.Tensor, norm_adj: torch.Tensor) -> torch.Tensor:
        if h.shape[1] != self.linear.in_features:
            raise ValueError(
                f"expected input dim {self.linear.in_features}, got {h.shape[1]}")
        return self.activation(norm_adj @ self.linear(h))


class GraphConvStack(nn.Module):
    """Stack of GraphConv layers sharing one graph."""

    def __init__(self, d_in: int, d_out: int, num_layers: int = 2,
                 activation=torch.relu):
        super().__init__()
        dims = [d_in] + [d_out] * num_layers
        self.layers = nn.ModuleList(
            GraphConv(dims[i], dims[i + 1], activation) for i in range(num_layers))

    def forward(self, h: torch.Tensor, edges) -> torch.Tensor:
        adj = normalized_adjacency(h.shape[0], edges, dtype=h.dtype,
                                   device=h.device)
        for layer in self.layers:
            h = layer(h, adj)
        return h


class RelGraphConv(nn.Module):
    """Relational graph convolution with per-kind weights and a self term.

    Node update: act(h_i W_self + sum_r mean_{j in N_r(i)} h_j W_r).
    Neighbor features are averaged per relation; a node isolated under
    every relation reduces to act(h_i W_self).
    """

    def __init__(self, d_in: int, d_out: int, relations, activation=torch.tanh):
        super().__init__()
        self.relations = tuple(relations)
        if not self.relations:
            raise ValueError("at least one relation kind required")
        self.self_linear = nn.Linear(d_in, d_out, bias=False)
        self.rel_linear = nn.ModuleDict(
            {kind: nn.Linear(d_in, d_out, bias=False) for kind in self.relations})
        self.activation = activation

    def forward(self, h: torch.Tensor, edges_by_kind: dict) -> torch.Tensor:
        unknown = set(edges_by_kind) - set(self.relations)
        if unknown:
            raise ValueError(f"unknown relation kind(s): {sorted(unknown)}")
        out = self.self_linear(h)
        n = h.shape[0]
        for kind, edges in edges_by_kind.items():
            src, dst = _edge_tensor(edges, h.device)
            if src.numel() == 0:
                continue
            agg = h.new_zeros(n, h.shape[1])
            agg.index_add_(0, dst, h[src])
            count = h.new_zeros(n)
            count.index_add_(0, dst, h.new_ones(src.shape[0]))
            agg = agg / count.clamp(min=1.0)[:, None]
            out = out + self.rel_linear[kind](agg)
        return self.activation(out)


def _edge_tensor(edges, device):
    """Source/target index vectors from a symmetric directed pair list."""
    if isinstance(edges, torch.Tensor):
        return edges[0].to(device), edges[1].to(device)
    if len(edges) == 0:
        z = torch.zeros(0, dtype=torch.long, device=device)
        return z, z
    pairs = torch.as_tensor(list(edges), dtype=torch.long, device=device)
    return pairs[:, 0], pairs[:, 1]


class FeedForward(nn.Module):
    """Affine layers with a hidden nonlinearity; last layer stays linear."""

    def __init__(self, d_in: int, d_out: int, num_layers: int = 2,
                 d_hidden: int | None = None, activation=torch.relu):
        super().__init__()
        if num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        d_hidden = d_out if d_hidden is None else d_hidden
        dims = [d_in] + [d_hidden] * (num_layers - 1) + [d_out]
        self.layers = nn.ModuleList(
            nn.Linear(dims[i], dims[i + 1]) for i in range(num_layers))
        self.activation = activation

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = self.activation(x)
        return x


class BiSequenceEncoder(nn.Module):
    """Bidirectional LSTM over one sequence; output concatenates directions."""

    def __init__(self, d_in: int, d_out: int, num_layers: int = 2):
        super().__init__()
        if d_out % 2:
            raise ValueError("output dimension must be even")
        self.lstm = nn.LSTM(d_in, d_out // 2, num_layers, bidirectional=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[0] < 1:
            raise ValueError("empty sequence")
        out, _ = self.lstm(x.unsqueeze(1))
        return out.squeeze(1)
