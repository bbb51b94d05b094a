"""Joint loss, teacher-forced training loop, checkpoints, gradient checks."""

import hashlib
import io
import json
import random
import struct
from dataclasses import dataclass, field, fields
from pathlib import Path

import torch

from .data import atomic_write_bytes
from .decoder import classify_role, end_mask, point_boundary, start_mask
from .evaluation import evaluate_corpus
from .model import FrameSemanticParser, ModelConfig
from .ontology import candidate_roles
from .sentence import Vocabulary

CHECKPOINT_MAGIC = b"FPCK"
CHECKPOINT_VERSION = 1


class TrainingError(RuntimeError):
    pass


class CheckpointError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    """Loss weights, optimizer schedule, and the nested model setup."""

    lambda_frame: float = 0.1
    lambda_boundary: float = 0.3
    lambda_role: float = 0.3
    learning_rate: float = 6e-5
    lr_decay: float = 0.6
    lr_decay_every: int = 30
    batch_size: int = 32
    epochs: int = 100
    pretrain_epochs: int = 30
    seed: int = 0
    model: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self):
        if min(self.lambda_frame, self.lambda_boundary, self.lambda_role) < 0:
            raise ValueError("loss weights must be nonnegative")
        if not 0 < self.lr_decay <= 1:
            raise ValueError("lr decay factor must be in (0, 1]")
        if self.batch_size < 1 or self.epochs < 0 or self.pretrain_epochs < 0:
            raise ValueError("bad schedule value")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)
             if f.name != "model"}
        d["model"] = self.model.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in d.items() if k in known}
        kwargs["model"] = ModelConfig.from_dict(d.get("model", {}))
        return cls(**kwargs)


def _choose_span(model, g, h, covered):
    """Argmax span under the coverage constraints, with an unmasked
    fallback when every position is already taken."""
    with torch.no_grad():
        sm = start_mask(covered)
        if not bool(sm.any()):
            sm = None
        ps = int(point_boundary(g, h, model.start_head, sm).argmax())
        em = end_mask(covered, ps)
        if not bool(em.any()):
            em = torch.zeros(len(covered), dtype=torch.bool)
            em[ps:] = True
        pe = int(point_boundary(g, h, model.end_head, em).argmax())
    return ps, pe


def compute_loss(model, inst, cfg: TrainConfig, node_matrix=None,
                 decisions=None):
    """Joint negative log-likelihood for one annotated instance.

    The initial graph node carries the gold frame; later nodes grow from
    the model's own argmax span and role choices, while the supervision
    targets stay the gold boundaries and roles in left-to-right order,
    with the dummy role closing the sequence.  Losses use unmasked
    distributions so every term stays finite; the coverage masks only
    constrain the predicted graph growth.  Passing ``decisions`` replays
    recorded span/role choices instead of recomputing them, which keeps
    the loss a smooth function of the parameters for gradient checks.

    Returns (loss tensor, per-term breakdown, recorded decisions).
    """
    if inst.gold_frame is None or inst.gold_args is None:
        raise TrainingError("instance has no gold annotation")
    fkg = model.fkg
    try:
        f_gold = fkg.frame_index[inst.gold_frame]
    except KeyError:
        raise TrainingError(f"unknown gold frame: {inst.gold_frame}") from None

    y = model.node_matrix() if node_matrix is None else node_matrix
    h = model.encode_sentence(inst)
    pi_t = model.span(h, *inst.target)

    loss_f = -model.frame_scores(pi_t, y, None, log=True)[f_gold]

    role_vecs = model.role_vectors(y)
    cand_local = [c - fkg.num_frames for c in candidate_roles(fkg, f_gold)]
    dummy_local = role_vecs.shape[0] - 1
    non_dummy = [c for c in cand_local if c != dummy_local]

    features = [torch.cat([pi_t, y[f_gold]])]
    covered = [False] * len(inst)
    loss_s = h.new_zeros(())
    loss_e = h.new_zeros(())
    loss_r = h.new_zeros(())
    k = len(inst.gold_args)
    recorded = []

    for tau in range(k + 1):
        g = model.graph_repr(torch.stack(features))
        if tau < k:
            (gs, ge), role_name = inst.gold_args[tau]
            try:
                gold_role = fkg.fe_index[(inst.gold_frame, role_name)]
            except KeyError:
                raise TrainingError(
                    f"role {role_name!r} not in frame {inst.gold_frame!r}"
                ) from None
            loss_s = loss_s - point_boundary(g, h, model.start_head, None,
                                             log=True)[gs]
            loss_e = loss_e - point_boundary(g, h, model.end_head, None,
                                             log=True)[ge]
            r_lp = classify_role(model.span(h, gs, ge), g, model.role_head,
                                 role_vecs, cand_local, log=True)
            loss_r = loss_r - r_lp[gold_role - fkg.num_frames]

            if decisions is not None:
                ps, pe, role_node = decisions[tau]
            else:
                ps, pe = _choose_span(model, g, h, covered)
                with torch.no_grad():
                    r_probs = classify_role(model.span(h, ps, pe), g,
                                            model.role_head, role_vecs,
                                            non_dummy)
                    role_node = fkg.num_frames + int(r_probs.argmax())
            recorded.append((ps, pe, role_node))
            features.append(torch.cat([model.span(h, ps, pe), y[role_node]]))
            for t in range(ps, pe + 1):
                covered[t] = True
        else:
            if decisions is not None:
                ps, pe, _ = decisions[tau]
            else:
                ps, pe = _choose_span(model, g, h, covered)
            recorded.append((ps, pe, -1))
            r_lp = classify_role(model.span(h, ps, pe), g, model.role_head,
                                 role_vecs, cand_local, log=True)
            loss_r = loss_r - r_lp[dummy_local]

    total = (cfg.lambda_frame * loss_f
             + cfg.lambda_boundary * (loss_s + loss_e)
             + cfg.lambda_role * loss_r)
    parts = {"frame": float(loss_f.detach()), "start": float(loss_s.detach()),
             "end": float(loss_e.detach()), "role": float(loss_r.detach()),
             "total": float(total.detach())}
    return total, parts, recorded


def training_step(model, batch, cfg: TrainConfig, optimizer):
    """One optimizer update on the mean loss of a batch."""
    if not batch:
        raise TrainingError("empty batch")
    optimizer.zero_grad()
    y = model.node_matrix()
    losses = []
    agg = {"frame": 0.0, "start": 0.0, "end": 0.0, "role": 0.0, "total": 0.0}
    for i, inst in enumerate(batch):
        loss, parts, _ = compute_loss(model, inst, cfg, node_matrix=y)
        if not torch.isfinite(loss):
            raise TrainingError(
                f"non-finite loss on batch item {i}: {parts}")
        losses.append(loss)
        for key in agg:
            agg[key] += parts[key]
    mean = torch.stack(losses).mean()
    mean.backward()
    optimizer.step()
    return float(mean.detach()), {key: v / len(batch) for key, v in agg.items()}


def _instances(corpus):
    if corpus is None:
        return []
    return list(getattr(corpus, "instances", corpus))


def _snapshot(model):
    return {k: v.detach().clone() for k, v in model.state_dict().items()}


@dataclass
class Checkpoint:
    train_config: TrainConfig
    vocab: dict
    state_dict: dict
    epoch: int
    metrics: dict
    version: int = CHECKPOINT_VERSION


def train(ontology, train_corpus, dev_corpus=None, config: TrainConfig | None = None,
          *, pretrain_corpus=None, word_vectors=None, log_path=None,
          train_f1_target=None, target_check_every: int = 10) -> Checkpoint:
    """Run the full schedule and return the dev-selected checkpoint.

    An optional pretraining stage runs first at the base learning rate;
    the main stage decays the rate by ``lr_decay`` every ``lr_decay_every``
    epochs and keeps the parameters with the best dev full-structure F1.
    ``train_f1_target`` stops early once training-set full-structure F1
    reaches the target (checked every ``target_check_every`` epochs).
    """
    cfg = config or TrainConfig()
    train_insts = _instances(train_corpus)
    if not train_insts:
        raise TrainingError("empty training corpus")
    dev_insts = _instances(dev_corpus)
    pre_insts = _instances(pretrain_corpus)

    vocab = Vocabulary.build(train_insts + pre_insts)
    model = FrameSemanticParser(ontology, vocab, cfg.model, seed=cfg.seed,
                                word_vectors=word_vectors)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    rng = random.Random(cfg.seed)
    log_fh = open(log_path, "a", encoding="utf-8") if log_path else None

    def log(entry):
        if log_fh is not None:
            log_fh.write(json.dumps(entry) + "\n")
            log_fh.flush()

    def run_epoch(insts, stage, epoch, lr):
        for group in optimizer.param_groups:
            group["lr"] = lr
        order = list(insts)
        rng.shuffle(order)
        agg = {"frame": 0.0, "start": 0.0, "end": 0.0, "role": 0.0,
               "total": 0.0}
        nb = 0
        for i in range(0, len(order), cfg.batch_size):
            _, parts = training_step(model, order[i:i + cfg.batch_size],
                                     cfg, optimizer)
            for key in agg:
                agg[key] += parts[key]
            nb += 1
        entry = {"stage": stage, "epoch": epoch, "lr": lr}
        entry.update({key: v / nb for key, v in agg.items()})
        return entry

    try:
        if pre_insts:
            for e in range(cfg.pretrain_epochs):
                log(run_epoch(pre_insts, "pretrain", e, cfg.learning_rate))

        best = None  # (dev f1, epoch, state)
        epochs_run = 0
        for e in range(cfg.epochs):
            lr = cfg.learning_rate * cfg.lr_decay ** (e // cfg.lr_decay_every)
            entry = run_epoch(train_insts, "train", e, lr)
            epochs_run = e + 1
            if dev_insts:
                report = evaluate_corpus(model, dev_insts)
                entry["dev_full_f1"] = report.full[2]
                entry["dev_frame_acc"] = report.frame_accuracy
                if best is None or report.full[2] > best[0]:
                    best = (report.full[2], e, _snapshot(model))
            reached = False
            if train_f1_target is not None and (e + 1) % target_check_every == 0:
                train_report = evaluate_corpus(model, train_insts)
                entry["train_full_f1"] = train_report.full[2]
                reached = train_report.full[2] >= train_f1_target
            log(entry)
            if reached:
                break
    finally:
        if log_fh is not None:
            log_fh.close()

    metrics = {"epochs_run": epochs_run}
    if best is not None:
        state, epoch = best[2], best[1]
        metrics["best_dev_full_f1"] = best[0]
    else:
        state, epoch = _snapshot(model), max(epochs_run - 1, 0)
    return Checkpoint(train_config=cfg, vocab=vocab.to_dict(),
                      state_dict=state, epoch=epoch, metrics=metrics)


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    """Write a versioned, checksummed binary checkpoint."""
    buf = io.BytesIO()
    torch.save({"train_config": ckpt.train_config.to_dict(),
                "vocab": ckpt.vocab,
                "state_dict": ckpt.state_dict,
                "epoch": ckpt.epoch,
                "metrics": ckpt.metrics}, buf)
    payload = buf.getvalue()
    blob = (CHECKPOINT_MAGIC + struct.pack("<I", ckpt.version)
            + hashlib.sha256(payload).digest() + payload)
    atomic_write_bytes(path, blob)


def load_checkpoint(path) -> Checkpoint:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    if len(blob) < 40 or blob[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError("truncated file or not a parser checkpoint")
    version = struct.unpack("<I", blob[4:8])[0]
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version: {version}")
    digest, payload = blob[8:40], blob[40:]
    if hashlib.sha256(payload).digest() != digest:
        raise CheckpointError("corrupt checkpoint (checksum mismatch)")
    obj = torch.load(io.BytesIO(payload), weights_only=True)
    return Checkpoint(train_config=TrainConfig.from_dict(obj["train_config"]),
                      vocab=obj["vocab"], state_dict=obj["state_dict"],
                      epoch=obj["epoch"], metrics=obj["metrics"],
                      version=version)


def model_from_checkpoint(ckpt: Checkpoint, ontology,
                          dtype=torch.float32) -> FrameSemanticParser:
    vocab = Vocabulary.from_dict(ckpt.vocab)
    model = FrameSemanticParser(ontology, vocab, ckpt.train_config.model,
                                seed=ckpt.train_config.seed, dtype=dtype)
    model.load_state_dict(ckpt.state_dict)
    model.eval()
    return model


def gradient_check(model, instances, cfg: TrainConfig | None = None, *,
                   step: float = 1e-4, sample_per_param: int | None = None,
                   seed: int = 0) -> dict:
    """Compare analytic gradients against central finite differences.

    The model must be in float64.  Discrete span/role choices are recorded
    once and replayed for every perturbed evaluation.  Returns a relative
    error per named parameter, computed over all entries or a seeded
    sample of ``sample_per_param`` entries.
    """
    cfg = cfg or TrainConfig()
    if next(model.parameters()).dtype is not torch.float64:
        raise TrainingError("gradient check requires a float64 model")

    def mean_loss(decision_lists):
        y = model.node_matrix()
        losses = []
        recorded = []
        for i, inst in enumerate(instances):
            dec = decision_lists[i] if decision_lists else None
            loss, _, rec = compute_loss(model, inst, cfg, node_matrix=y,
                                        decisions=dec)
            losses.append(loss)
            recorded.append(rec)
        return torch.stack(losses).mean(), recorded

    total, decision_lists = mean_loss(None)
    model.zero_grad()
    total.backward()
    analytic = {n: p.grad.detach().clone() if p.grad is not None
                else torch.zeros_like(p)
                for n, p in model.named_parameters()}

    rng = random.Random(seed)
    errors = {}
    for name, p in model.named_parameters():
        flat = p.data.view(-1)
        numel = flat.shape[0]
        if sample_per_param is None or numel <= sample_per_param:
            idxs = list(range(numel))
        else:
            idxs = sorted(rng.sample(range(numel), sample_per_param))
        fd = []
        for i in idxs:
            orig = flat[i].item()
            flat[i] = orig + step
            with torch.no_grad():
                plus = float(mean_loss(decision_lists)[0])
            flat[i] = orig - step
            with torch.no_grad():
                minus = float(mean_loss(decision_lists)[0])
            flat[i] = orig
            fd.append((plus - minus) / (2 * step))
        fd_vec = torch.tensor(fd, dtype=torch.float64)
        an_vec = analytic[name].view(-1)[idxs].to(torch.float64)
        denom = max(float(an_vec.norm()), float(fd_vec.norm()), 1e-8)
        errors[name] = float((fd_vec - an_vec).norm()) / denom
    return errors
