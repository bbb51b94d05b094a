import numpy as np
import pytest
import torch

from frameparse.neural import (
    BiSequenceEncoder,
    FeedForward,
    GraphConv,
    GraphConvStack,
    RelGraphConv,
    normalized_adjacency,
)

import oracles
from helpers import seeded


def rand_t(rng, *shape, scale=1.0):
    return torch.tensor(
        [[rng.uniform(-scale, scale) for _ in range(shape[1])]
         for _ in range(shape[0])], dtype=torch.float64) \
        if len(shape) == 2 else torch.tensor(
        [rng.uniform(-scale, scale) for _ in range(shape[0])],
        dtype=torch.float64)


def rand_edges(rng, n, p=0.4):
    return [(i, j) for i in range(n) for j in range(i + 1, n)
            if rng.random() < p]


def test_normalized_adjacency_isolated_node():
    adj = normalized_adjacency(3, [(0, 1)])
    assert adj[2, 2].item() == pytest.approx(1.0)
    assert adj[2, 0].item() == 0.0 and adj[2, 1].item() == 0.0


def test_normalized_adjacency_chain_values():
    # chain 0-1-2: self-looped degrees are 2, 3, 2
    adj = normalized_adjacency(3, [(0, 1), (1, 2)], dtype=torch.float64)
    expected = np.array([
        [1 / 2, 1 / np.sqrt(6), 0],
        [1 / np.sqrt(6), 1 / 3, 1 / np.sqrt(6)],
        [0, 1 / np.sqrt(6), 1 / 2],
    ])
    assert np.allclose(adj.numpy(), expected)


def test_normalized_adjacency_symmetrizes_and_ignores_self_loops():
    a = normalized_adjacency(3, [(0, 1)], dtype=torch.float64)
    b = normalized_adjacency(3, [(1, 0), (0, 1), (2, 2)], dtype=torch.float64)
    assert torch.equal(a, b)


def test_graph_conv_zero_weights():
    conv = GraphConv(4, 3)
    with torch.no_grad():
        conv.linear.weight.zero_()
    out = conv(torch.randn(5, 4), normalized_adjacency(5, [(0, 1), (2, 3)]))
    assert torch.equal(out, torch.zeros(5, 3))


def test_graph_conv_single_node_identity():
    conv = GraphConv(3, 3, activation=lambda x: x).double()
    with torch.no_grad():
        conv.linear.weight.copy_(torch.eye(3, dtype=torch.float64))
    h = torch.randn(1, 3, dtype=torch.float64)
    out = conv(h, normalized_adjacency(1, [], dtype=torch.float64))
    assert torch.allclose(out, h)


def test_graph_conv_matches_oracle():
    for seed in range(20):
        rng = seeded(seed)
        n, d_in, d_out = rng.randint(2, 7), rng.randint(1, 5), rng.randint(1, 5)
        edges = rand_edges(rng, n)
        h = rand_t(rng, n, d_in)
        conv = GraphConv(d_in, d_out).double()
        out = conv(h, normalized_adjacency(n, edges, dtype=torch.float64))
        ref = oracles.gcn_oracle(h.numpy(), edges,
                                 conv.linear.weight.detach().numpy().T)
        assert np.abs(out.detach().numpy() - ref).max() < 1e-9


def test_graph_conv_stack_matches_chained_oracle():
    for seed in range(10):
        rng = seeded(100 + seed)
        n = rng.randint(2, 6)
        edges = rand_edges(rng, n)
        stack = GraphConvStack(4, 3, num_layers=2).double()
        h = rand_t(rng, n, 4)
        out = stack(h, edges)
        ref = h.numpy()
        for layer in stack.layers:
            ref = oracles.gcn_oracle(ref, edges,
                                     layer.linear.weight.detach().numpy().T)
        assert np.abs(out.detach().numpy() - ref).max() < 1e-9


def test_graph_conv_dim_mismatch():
    conv = GraphConv(4, 3)
    with pytest.raises(ValueError, match="expected input dim 4"):
        conv(torch.randn(2, 5), normalized_adjacency(2, []))


def test_rel_graph_conv_requires_relations():
    with pytest.raises(ValueError, match="at least one relation"):
        RelGraphConv(3, 3, ())


def test_rel_graph_conv_unknown_kind():
    conv = RelGraphConv(3, 3, ("a",))
    with pytest.raises(ValueError, match="unknown relation kind"):
        conv(torch.randn(2, 3), {"b": [(0, 1), (1, 0)]})


def test_rel_graph_conv_self_term_only():
    conv = RelGraphConv(3, 3, ("a",)).double()
    with torch.no_grad():
        conv.self_linear.weight.copy_(torch.eye(3, dtype=torch.float64))
        conv.rel_linear["a"].weight.zero_()
    h = torch.randn(4, 3, dtype=torch.float64)
    out = conv(h, {"a": [(0, 1), (1, 0)]})
    assert torch.allclose(out, torch.tanh(h))


def test_rel_graph_conv_isolated_node_zero_self():
    conv = RelGraphConv(2, 2, ("a",)).double()
    with torch.no_grad():
        conv.self_linear.weight.zero_()
    h = torch.randn(3, 2, dtype=torch.float64)
    out = conv(h, {"a": [(0, 1), (1, 0)]})
    # node 2 has no incoming edge and a zero self map
    assert torch.equal(out[2], torch.zeros(2, dtype=torch.float64))


def test_rel_graph_conv_matches_oracle():
    for seed in range(20):
        rng = seeded(200 + seed)
        n = rng.randint(2, 7)
        kinds = ("r1", "r2")
        edges = {}
        for kind in kinds:
            und = rand_edges(rng, n)
            edges[kind] = sorted({(i, j) for i, j in und}
                                 | {(j, i) for i, j in und})
        conv = RelGraphConv(3, 4, kinds).double()
        h = rand_t(rng, n, 3)
        out = conv(h, edges)
        w_self, w_rel = oracles.rgcn_params(conv)
        ref = oracles.rgcn_oracle(h.numpy(), edges, w_self, w_rel)
        assert np.abs(out.detach().numpy() - ref).max() < 1e-9


def test_rel_graph_conv_edge_order_invariance():
    rng = seeded(7)
    n = 6
    und = rand_edges(rng, n, p=0.6)
    pairs = sorted({(i, j) for i, j in und} | {(j, i) for i, j in und})
    conv = RelGraphConv(4, 4, ("a", "b"))
    h = torch.randn(n, 4)
    base = conv(h, {"a": pairs, "b": pairs[:4]})
    shuffled = list(pairs)
    rng.shuffle(shuffled)
    out = conv(h, {"b": pairs[:4], "a": shuffled})
    assert (base - out).abs().max().item() <= 1e-6


def test_rel_graph_conv_accepts_edge_tensors():
    conv = RelGraphConv(3, 3, ("a",)).double()
    pairs = [(0, 1), (1, 0)]
    h = torch.randn(2, 3, dtype=torch.float64)
    as_list = conv(h, {"a": pairs})
    as_tensor = conv(h, {"a": torch.tensor(pairs, dtype=torch.long).T})
    assert torch.equal(as_list, as_tensor)


def test_feed_forward_validates_layers():
    with pytest.raises(ValueError, match="num_layers"):
        FeedForward(3, 3, num_layers=0)


def test_feed_forward_single_layer_is_affine():
    ffn = FeedForward(3, 2, num_layers=1).double()
    x = torch.randn(3, dtype=torch.float64)
    w = ffn.layers[0].weight.detach()
    b = ffn.layers[0].bias.detach()
    assert torch.allclose(ffn(x), w @ x + b)


def test_feed_forward_identity_on_nonnegative():
    ffn = FeedForward(3, 3, num_layers=2).double()
    with torch.no_grad():
        for layer in ffn.layers:
            layer.weight.copy_(torch.eye(3, dtype=torch.float64))
            layer.bias.zero_()
    x = torch.tensor([0.5, 0.0, 2.0], dtype=torch.float64)
    assert torch.allclose(ffn(x), x)


def test_feed_forward_matches_oracle():
    for seed in range(20):
        rng = seeded(300 + seed)
        d_in, d_out = rng.randint(1, 5), rng.randint(1, 5)
        layers = rng.randint(1, 3)
        ffn = FeedForward(d_in, d_out, num_layers=layers,
                          d_hidden=rng.randint(1, 6)).double()
        x = rand_t(rng, d_in)
        ref = oracles.ffn_oracle(x.numpy(), oracles.ffn_params(ffn))
        assert np.abs(ffn(x).detach().numpy() - ref).max() < 1e-9


def test_feed_forward_hidden_defaults_to_output():
    ffn = FeedForward(5, 3, num_layers=3)
    assert [l.out_features for l in ffn.layers] == [3, 3, 3]


def test_bi_encoder_validates():
    with pytest.raises(ValueError, match="even"):
        BiSequenceEncoder(4, 5)
    enc = BiSequenceEncoder(4, 6)
    with pytest.raises(ValueError, match="empty sequence"):
        enc(torch.zeros(0, 4))


def test_bi_encoder_shape_and_determinism():
    enc = BiSequenceEncoder(5, 8, num_layers=2)
    x = torch.randn(7, 5)
    out = enc(x)
    assert out.shape == (7, 8)
    assert torch.equal(out, enc(x))
    assert enc(x[:1]).shape == (1, 8)


def test_bi_encoder_forward_half_matches_unrolled_recurrence():
    enc = BiSequenceEncoder(3, 8, num_layers=1).double()
    x = torch.randn(5, 3, dtype=torch.float64)
    out = enc(x).detach().numpy()
    p = {name: t.detach().numpy() for name, t in enc.lstm.named_parameters()}
    fwd = oracles.lstm_oracle(x.numpy(), p["weight_ih_l0"], p["weight_hh_l0"],
                              p["bias_ih_l0"], p["bias_hh_l0"])
    bwd = oracles.lstm_oracle(x.numpy()[::-1], p["weight_ih_l0_reverse"],
                              p["weight_hh_l0_reverse"],
                              p["bias_ih_l0_reverse"],
                              p["bias_hh_l0_reverse"])[::-1]
    assert np.abs(out[:, :4] - fwd).max() < 1e-9
    assert np.abs(out[:, 4:] - bwd).max() < 1e-9


def test_bi_encoder_reversal_with_tied_directions():
    enc = BiSequenceEncoder(3, 8, num_layers=1).double()
    with torch.no_grad():
        for name in ("weight_ih_l0", "weight_hh_l0", "bias_ih_l0",
                     "bias_hh_l0"):
            getattr(enc.lstm, name + "_reverse").copy_(
                getattr(enc.lstm, name))
    x = torch.randn(6, 3, dtype=torch.float64)
    out = enc(x)
    rev = enc(x.flip(0))
    swapped = torch.cat([rev[:, 4:], rev[:, :4]], dim=1)
    assert torch.allclose(swapped, out.flip(0), atol=1e-12)


def test_graph_conv_gradients():
    rng = seeded(11)
    n = 5
    edges = rand_edges(rng, n)
    conv = GraphConv(4, 3).double()
    h = torch.randn(n, 4, dtype=torch.float64)
    weights = torch.randn(n, 3, dtype=torch.float64)

    def loss_fn():
        return (conv(h, normalized_adjacency(n, edges, dtype=torch.float64))
                * weights).sum()

    assert oracles.fd_relative_error(conv, loss_fn) < 1e-6


def test_rel_graph_conv_gradients():
    conv = RelGraphConv(3, 3, ("a", "b")).double()
    h = torch.randn(4, 3, dtype=torch.float64)
    edges = {"a": [(0, 1), (1, 0), (2, 3), (3, 2)], "b": [(0, 3), (3, 0)]}
    weights = torch.randn(4, 3, dtype=torch.float64)

    def loss_fn():
        return (conv(h, edges) * weights).sum()

    assert oracles.fd_relative_error(conv, loss_fn) < 1e-6


def test_feed_forward_gradients():
    ffn = FeedForward(4, 2, num_layers=2, d_hidden=5).double()
    x = torch.randn(4, dtype=torch.float64)

    def loss_fn():
        return (ffn(x) ** 2).sum()

    assert oracles.fd_relative_error(ffn, loss_fn) < 1e-6
