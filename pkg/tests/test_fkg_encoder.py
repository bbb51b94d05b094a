import numpy as np
import torch

from frameparse.knowledge import (
    KnowledgeGraphEncoder,
    NodeEmbeddingTable,
    fkg_edge_tensors,
)
from frameparse.ontology import (
    FKG_RELATIONS,
    Frame,
    FrameElement,
    FrameOntology,
    build_fkg,
    derive_mentions_from_definitions,
)

import oracles
from helpers import transfer_ontology


def toy_fkg():
    return build_fkg(derive_mentions_from_definitions(transfer_ontology()))


def test_name_sharing_ties_rows():
    fkg = toy_fkg()
    table = NodeEmbeddingTable(fkg, 8, name_sharing=True)
    base = table().detach()
    # Recipient appears in both frames (nodes 2 and 5), Theme in 3 and 6
    assert torch.equal(base[2], base[5])
    assert torch.equal(base[3], base[6])
    assert not torch.equal(base[4], base[7])  # Source vs Donor
    # 2 frames + 5 distinct FE names + dummy
    assert table.weight.shape == (8, 8)
    assert table().shape == (fkg.node_count, 8)


def test_no_sharing_gives_every_node_a_row():
    fkg = toy_fkg()
    table = NodeEmbeddingTable(fkg, 8, name_sharing=False)
    base = table().detach()
    assert table.weight.shape == (fkg.node_count, 8)
    assert not torch.equal(base[2], base[5])


def test_embedding_seed_determinism_and_range():
    fkg = toy_fkg()
    a = NodeEmbeddingTable(fkg, 16, seed=3)
    b = NodeEmbeddingTable(fkg, 16, seed=3)
    c = NodeEmbeddingTable(fkg, 16, seed=4)
    assert torch.equal(a.weight, b.weight)
    assert not torch.equal(a.weight, c.weight)
    assert a.weight.abs().max().item() <= 0.1


def test_encoder_zero_weights_give_zero():
    fkg = toy_fkg()
    enc = KnowledgeGraphEncoder(NodeEmbeddingTable(fkg, 4), 4)
    with torch.no_grad():
        for layer in enc.layers:
            layer.self_linear.weight.zero_()
            for lin in layer.rel_linear.values():
                lin.weight.zero_()
    out = enc({k: list(v) for k, v in fkg.edges.items()})
    assert torch.equal(out, torch.zeros_like(out))


def test_encoder_output_bounded_by_tanh():
    fkg = toy_fkg()
    enc = KnowledgeGraphEncoder(NodeEmbeddingTable(fkg, 8), 8)
    with torch.no_grad():
        for p in enc.parameters():
            p.mul_(50.0)
    out = enc({k: list(v) for k, v in fkg.edges.items()})
    assert out.abs().max().item() <= 1.0


def test_dummy_row_ignores_other_embeddings():
    fkg = toy_fkg()
    enc = KnowledgeGraphEncoder(NodeEmbeddingTable(fkg, 6), 6).double()
    edges = {k: list(v) for k, v in fkg.edges.items()}
    before = enc(edges).detach()
    with torch.no_grad():
        enc.embeddings.weight[0] += 2.0  # perturb one frame embedding
    after = enc(edges).detach()
    assert torch.equal(before[fkg.dummy_index], after[fkg.dummy_index])
    assert not torch.equal(before[0], after[0])


def test_encoder_matches_stacked_oracle():
    fkg = toy_fkg()
    enc = KnowledgeGraphEncoder(NodeEmbeddingTable(fkg, 5), 5,
                                num_layers=2).double()
    out = enc({k: list(v) for k, v in fkg.edges.items()})
    base = enc.embeddings().detach().numpy()
    layers = [oracles.rgcn_params(layer) for layer in enc.layers]
    ref = oracles.encode_fkg_oracle(base, {k: list(v)
                                           for k, v in fkg.edges.items()},
                                    layers)
    assert np.abs(out.detach().numpy() - ref).max() < 1e-9


def test_encoder_respects_graph_symmetry():
    # two structurally identical frames with shared FE names: once the
    # frame rows are tied by hand, node outputs must mirror each other
    ont = FrameOntology(frames=(
        Frame("X", fes=(FrameElement("Agent"), FrameElement("Theme"))),
        Frame("Y", fes=(FrameElement("Agent"), FrameElement("Theme"))),
    ))
    fkg = build_fkg(ont)
    enc = KnowledgeGraphEncoder(NodeEmbeddingTable(fkg, 4), 4).double()
    with torch.no_grad():
        enc.embeddings.weight[1].copy_(enc.embeddings.weight[0])
    out = enc({k: list(v) for k, v in fkg.edges.items()}).detach()
    assert torch.allclose(out[0], out[1])
    assert torch.allclose(out[2], out[4])
    assert torch.allclose(out[3], out[5])


def test_rgcn_bypass_returns_table():
    fkg = toy_fkg()
    table = NodeEmbeddingTable(fkg, 8)
    enc = KnowledgeGraphEncoder(table, 8, use_rgcn=False)
    assert enc.layers is None
    out = enc({k: list(v) for k, v in fkg.edges.items()})
    assert torch.equal(out, table())
    assert sum(p.numel() for p in enc.parameters()) == table.weight.numel()


def test_fkg_edge_tensors_shapes():
    fkg = toy_fkg()
    tensors = fkg_edge_tensors(fkg)
    assert set(tensors) == set(FKG_RELATIONS)
    for kind in FKG_RELATIONS:
        t = tensors[kind]
        assert t.shape == (2, len(fkg.edges[kind]))
        assert t.dtype == torch.long
    subset = fkg_edge_tensors(fkg, enabled=("frame_fe",))
    assert set(subset) == {"frame_fe"}


def test_edge_tensor_input_equals_pair_list_input():
    fkg = toy_fkg()
    enc = KnowledgeGraphEncoder(NodeEmbeddingTable(fkg, 4), 4).double()
    from_lists = enc({k: list(v) for k, v in fkg.edges.items()})
    from_tensors = enc(fkg_edge_tensors(fkg))
    assert torch.allclose(from_lists, from_tensors, atol=1e-12)


def test_encoder_gradients_including_shared_rows():
    fkg = toy_fkg()
    enc = KnowledgeGraphEncoder(NodeEmbeddingTable(fkg, 3), 3,
                                num_layers=2).double()
    edges = {k: list(v) for k, v in fkg.edges.items()}
    weights = torch.randn(fkg.node_count, 3, dtype=torch.float64)

    def loss_fn():
        return (enc(edges) * weights).sum()

    assert oracles.fd_relative_error(enc, loss_fn) < 1e-6
