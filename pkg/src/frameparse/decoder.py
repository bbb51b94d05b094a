"""Scoring heads and the incremental argument decoding loop.

A parse is grown as a star graph: one node for the (target, frame) pair
and one node per accepted (argument span, role).  Each step encodes the
current graph, points at a start and an end token, and classifies the
role; choosing the dummy role stops the loop.
"""

from dataclasses import dataclass, field

import torch
from torch import nn

from .neural import GraphConvStack
from .ontology import candidate_frames, candidate_roles


@dataclass
class PartialParseGraph:
    """Star-shaped parse state: target node plus accepted argument nodes."""

    target_span: tuple[int, int]
    frame_node: int
    arg_nodes: list[tuple[tuple[int, int], int]] = field(default_factory=list)

    @property
    def step(self) -> int:
        return len(self.arg_nodes)

    @property
    def node_count(self) -> int:
        return len(self.arg_nodes) + 1

    def edges(self) -> list[tuple[int, int]]:
        return [(0, j) for j in range(1, self.node_count)]

    def add(self, span: tuple[int, int], role_node: int) -> None:
        self.arg_nodes.append((span, role_node))


class ParseGraphEncoder(nn.Module):
    """Project node features, convolve over the star graph, max-pool."""

    def __init__(self, d_node: int, num_layers: int = 2):
        super().__init__()
        self.proj = nn.Linear(2 * d_node, d_node)
        self.conv = GraphConvStack(d_node, d_node, num_layers)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        z = self.conv(self.proj(features),
                      [(0, j) for j in range(1, features.shape[0])])
        return z.max(dim=0).values


class HistoryLstm(nn.Module):
    """Ablation decoder: run an LSTM over the node features instead of the
    graph convolution; the last state summarizes the history."""

    def __init__(self, d_node: int):
        super().__init__()
        self.lstm = nn.LSTM(2 * d_node, d_node, 1)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        out, _ = self.lstm(features.unsqueeze(1))
        return out[-1, 0]


def _candidate_mask(size: int, candidates, ref: torch.Tensor) -> torch.Tensor | None:
    if candidates is None:
        return None
    mask = torch.zeros(size, dtype=torch.bool, device=ref.device)
    mask[list(candidates)] = True
    return mask


def masked_log_softmax(logits: torch.Tensor, allowed: torch.Tensor | None) -> torch.Tensor:
    """Log-softmax with disallowed entries at -inf (probability exactly 0)."""
    if allowed is not None:
        if not bool(allowed.any()):
            raise ValueError("no unmasked entries")
        logits = logits.masked_fill(~allowed, float("-inf"))
    return torch.log_softmax(logits, dim=-1)


def identify_frame(pi_t: torch.Tensor, ffn, frame_vectors: torch.Tensor,
                   candidates=None, log: bool = False) -> torch.Tensor:
    """Distribution over frames by similarity of the squashed target vector.

    ``frame_vectors`` holds one row per frame; logits are dot products with
    tanh(ffn(pi_t)).  Non-candidate frames get probability exactly 0.
    """
    if candidates is not None and len(candidates) == 0:
        raise ValueError("empty candidate frame list")
    logits = frame_vectors @ torch.tanh(ffn(pi_t))
    lp = masked_log_softmax(logits, _candidate_mask(frame_vectors.shape[0],
                                                    candidates, logits))
    return lp if log else lp.exp()


def point_boundary(g: torch.Tensor, h: torch.Tensor, ffn,
                   allowed: torch.Tensor | None = None,
                   log: bool = False) -> torch.Tensor:
    """Pointer distribution over token positions for one boundary."""
    lp = masked_log_softmax(h @ ffn(g), allowed)
    return lp if log else lp.exp()


def classify_role(pi_a: torch.Tensor, g: torch.Tensor, ffn,
                  role_vectors: torch.Tensor, candidates,
                  log: bool = False) -> torch.Tensor:
    """Distribution over the FE inventory (last row = dummy) for one span.

    ``candidates`` indexes rows of ``role_vectors`` and must include the
    dummy row; everything else gets probability exactly 0.
    """
    if len(candidates) == 0:
        raise ValueError("empty candidate role list")
    logits = role_vectors @ ffn(torch.cat([pi_a, g]))
    lp = masked_log_softmax(logits, _candidate_mask(role_vectors.shape[0],
                                                    candidates, logits))
    return lp if log else lp.exp()


@dataclass
class ArgDecision:
    span: tuple[int, int]
    role_node: int  # knowledge-graph node index of the FE
    start_prob: float
    end_prob: float
    role_prob: float


@dataclass
class ParseResult:
    frame_index: int
    frame_prob: float
    args: list[ArgDecision]


def start_mask(covered: list[bool], device=None) -> torch.Tensor:
    return ~torch.tensor(covered, dtype=torch.bool, device=device)


def end_mask(covered: list[bool], start: int, device=None) -> torch.Tensor:
    """Positions usable as span end: from ``start`` up to the next token
    that already belongs to an accepted argument."""
    n = len(covered)
    allowed = torch.zeros(n, dtype=torch.bool, device=device)
    j = start
    while j < n and not covered[j]:
        allowed[j] = True
        j += 1
    return allowed


def decode_structure(model, inst, frame_override: int | None = None,
                     node_matrix: torch.Tensor | None = None,
                     trace: list | None = None) -> ParseResult:
    """Greedy constrained decoding of one target.

    The frame comes from the lexicon-filtered frame head unless overridden
    (gold-frame evaluation).  Arguments are decoded left to right in the
    sense of graph growth: tokens inside accepted spans are masked for the
    start pointer, the end pointer is confined to the contiguous free
    stretch from the chosen start, and the loop stops on the dummy role,
    on token exhaustion, or after n steps.
    """
    fkg = model.fkg
    n = len(inst)
    with torch.no_grad():
        y = model.node_matrix() if node_matrix is None else node_matrix
        h = model.encode_sentence(inst)
        pi_t = model.span(h, *inst.target)

        if frame_override is not None:
            frame_probs = model.frame_scores(pi_t, y, None)
            frame = frame_override
        else:
            cands = candidate_frames(model.ontology, inst.lemma_key)
            frame_probs = model.frame_scores(pi_t, y, cands)
            frame = int(frame_probs.argmax())
        if trace is not None:
            trace.append(("frame", frame_probs))

        role_vecs = y[fkg.num_frames:]
        cand_local = [r - fkg.num_frames for r in candidate_roles(fkg, frame)]
        dummy_local = role_vecs.shape[0] - 1

        graph = PartialParseGraph(inst.target, frame)
        features = [torch.cat([pi_t, y[frame]])]
        covered = [False] * n
        args: list[ArgDecision] = []

        for _ in range(n):
            s_allowed = start_mask(covered)
            if not bool(s_allowed.any()):
                break
            g = model.graph_repr(torch.stack(features))
            s_probs = point_boundary(g, h, model.start_head, s_allowed)
            i_s = int(s_probs.argmax())
            e_probs = point_boundary(g, h, model.end_head,
                                     end_mask(covered, i_s))
            i_e = int(e_probs.argmax())
            pi_a = model.span(h, i_s, i_e)
            r_probs = classify_role(pi_a, g, model.role_head, role_vecs,
                                    cand_local)
            r_local = int(r_probs.argmax())
            if trace is not None:
                trace.append(("start", s_probs))
                trace.append(("end", e_probs))
                trace.append(("role", r_probs))
            if r_local == dummy_local:
                break
            role_node = fkg.num_frames + r_local
            args.append(ArgDecision(
                span=(i_s, i_e), role_node=role_node,
                start_prob=float(s_probs[i_s]), end_prob=float(e_probs[i_e]),
                role_prob=float(r_probs[r_local])))
            graph.add((i_s, i_e), role_node)
            features.append(torch.cat([pi_a, y[role_node]]))
            for t in range(i_s, i_e + 1):
                covered[t] = True

        return ParseResult(frame_index=frame,
                           frame_prob=float(frame_probs[frame]),
                           args=args)
