"""Sentence-side encoding: tokens to contextual vectors to span vectors."""

from dataclasses import dataclass, field

import torch
from torch import nn

from .neural import BiSequenceEncoder, FeedForward, GraphConvStack

UNK = "<unk>"


@dataclass
class SentenceInstance:
    """One target in one sentence, with optional gold annotation.

    ``dep_heads[i]`` is the head token of token i (-1 for the root).  All
    spans are inclusive token index pairs.  ``gold_args`` pairs a span with
    an FE name of ``gold_frame`` and is kept sorted by start then end.
    """

    tokens: list[str]
    lemmas: list[str]
    pos_tags: list[str]
    dep_heads: list[int]
    target: tuple[int, int]
    gold_frame: str | None = None
    gold_args: list[tuple[tuple[int, int], str]] | None = None

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def lemma_key(self) -> str:
        """Lexicon key ``<lemma>.<pos letter>`` for the target span.

        Multi-token targets join their lemmas with underscores; the POS
        letter comes from the first target token.
        """
        s, e = self.target
        lemma = "_".join(self.lemmas[s:e + 1])
        pos = self.pos_tags[s][:1].lower() or "x"
        return f"{lemma}.{pos}"


def dependency_edges(dep_heads) -> list[tuple[int, int]]:
    """Undirected, unlabeled edge list of the dependency tree."""
    return [(i, h) for i, h in enumerate(dep_heads) if h >= 0]


class Vocabulary:
    """String-to-index maps for words, lemmas and POS tags (0 = unknown)."""

    def __init__(self, words=(), lemmas=(), pos_tags=()):
        self.words = self._make(words)
        self.lemmas = self._make(lemmas)
        self.pos_tags = self._make(pos_tags)

    @staticmethod
    def _make(items) -> dict[str, int]:
        table = {UNK: 0}
        for item in items:
            if item not in table:
                table[item] = len(table)
        return table

    @classmethod
    def build(cls, instances) -> "Vocabulary":
        words, lemmas, pos = [], [], []
        for inst in instances:
            words.extend(inst.tokens)
            lemmas.extend(inst.lemmas)
            pos.extend(inst.pos_tags)
        return cls(words, lemmas, pos)

    def to_dict(self) -> dict:
        def keys(table):
            return [k for k, _ in sorted(table.items(), key=lambda kv: kv[1])]
        return {"words": keys(self.words), "lemmas": keys(self.lemmas),
                "pos_tags": keys(self.pos_tags)}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        v = cls()
        v.words = {k: i for i, k in enumerate(d["words"])}
        v.lemmas = {k: i for i, k in enumerate(d["lemmas"])}
        v.pos_tags = {k: i for i, k in enumerate(d["pos_tags"])}
        return v


def load_word_vectors(path, dim: int) -> dict[str, list[float]]:
    """Read GloVe-style text vectors: one ``word v1 .. vdim`` line each."""
    vectors = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                continue
            vectors[parts[0]] = [float(x) for x in parts[1:]]
    return vectors


class TokenEmbedder(nn.Module):
    """Concatenated word, lemma, POS and target-indicator embeddings."""

    def __init__(self, vocab: Vocabulary, d_word: int = 100, d_lemma: int = 50,
                 d_pos: int = 25, d_indicator: int = 25,
                 word_vectors: dict | None = None):
        super().__init__()
        self.vocab = vocab
        self.word_emb = nn.Embedding(len(vocab.words), d_word)
        self.lemma_emb = nn.Embedding(len(vocab.lemmas), d_lemma)
        self.pos_emb = nn.Embedding(len(vocab.pos_tags), d_pos)
        self.indicator_emb = nn.Embedding(2, d_indicator)
        self.d_out = d_word + d_lemma + d_pos + d_indicator
        if word_vectors:
            with torch.no_grad():
                for word, vec in word_vectors.items():
                    idx = vocab.words.get(word)
                    if idx is not None and len(vec) == d_word:
                        self.word_emb.weight[idx] = torch.tensor(vec)

    def forward(self, inst: SentenceInstance) -> torch.Tensor:
        device = self.word_emb.weight.device
        word_ids = torch.tensor(
            [self.vocab.words.get(t, 0) for t in inst.tokens], device=device)
        lemma_ids = torch.tensor(
            [self.vocab.lemmas.get(t, 0) for t in inst.lemmas], device=device)
        pos_ids = torch.tensor(
            [self.vocab.pos_tags.get(t, 0) for t in inst.pos_tags], device=device)
        s, e = inst.target
        flags = torch.tensor(
            [1 if s <= i <= e else 0 for i in range(len(inst))], device=device)
        return torch.cat([
            self.word_emb(word_ids),
            self.lemma_emb(lemma_ids),
            self.pos_emb(pos_ids),
            self.indicator_emb(flags),
        ], dim=1)


class SentenceEncoder(nn.Module):
    """BiLSTM plus dependency-tree GCN, combined additively.

    The GCN runs over the undirected, unlabeled dependency graph of the
    BiLSTM outputs and its result is added back, so zero GCN weights leave
    the recurrent encoding untouched.  ``span`` turns a token span into a
    d_n vector from its boundary states: ffn((h_j - h_i) cat (h_j + h_i)).
    """

    def __init__(self, embedder: TokenEmbedder, d_h: int, d_n: int,
                 lstm_layers: int = 2, gcn_layers: int = 2,
                 ffn_layers: int = 2):
        super().__init__()
        self.embedder = embedder
        self.recurrent = BiSequenceEncoder(embedder.d_out, d_h, lstm_layers)
        self.tree_conv = GraphConvStack(d_h, d_h, gcn_layers)
        self.span_ffn = FeedForward(2 * d_h, d_n, ffn_layers, d_hidden=d_h)

    def forward(self, inst: SentenceInstance) -> torch.Tensor:
        seq = self.recurrent(self.embedder(inst))
        tree = self.tree_conv(seq, dependency_edges(inst.dep_heads))
        return seq + tree

    def span(self, h: torch.Tensor, i: int, j: int) -> torch.Tensor:
        if not 0 <= i <= j < h.shape[0]:
            raise ValueError(f"invalid span ({i}, {j}) for length {h.shape[0]}")
        return self.span_ffn(torch.cat([h[j] - h[i], h[j] + h[i]]))
