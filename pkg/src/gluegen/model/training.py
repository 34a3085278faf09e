"""Training loop: beta-annealed VAE objective with clipping and Adam.

Beta advances 0.002 per mini-batch up to 1.0; the learning rate decays by
0.9 once per epoch. Identically seeded runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..chem.mol import Molecule
from ..engine import (
    AdamState,
    LrSchedule,
    RngBundle,
    Tape,
    Tensor,
    adam_step,
    add,
    clip_global_norm,
    concat,
    load_checkpoint,
    matmul,
    save_checkpoint,
    scale,
)
from ..geom import Conformer, bond_torsion_features
from ..jtree import JunctionTree, Vocabulary, decompose
from .config import LigaseContext, ModelConfig
from .decoder import AssemblyCache, decode_teacher_forced, dfs_children
from .encoder import encode_graph_stream, encode_tree_stream, tree_wiring
from .features import GraphWiring
from .fusion import fuse_latent
from .params import grads_of, init_params, zero_grads
from .seqenc import encode_ligase
from .vae import LatentSample, reparameterize_and_kl
from .assembly import ground_truth_fragment, merge_signature


class TrainingDivergence(RuntimeError):
    """Raised when a batch produces a non-finite loss."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass
class TrainingSchedule:
    beta_step: float = 0.002
    beta_max: float = 1.0
    epochs: int = 500
    batch_size: int = 4

    def beta_at(self, step: int) -> float:
        return min(self.beta_max, self.beta_step * step)


@dataclass
class LossReport:
    total: float
    recon_topology: float
    recon_label: float
    recon_assembly: float
    kl: float
    beta: float
    wacc: float
    tacc: float
    sacc: float


@dataclass
class PreparedExample:
    mol: Molecule
    tree: JunctionTree
    torsions: np.ndarray | None
    ctx: LigaseContext
    graph_wiring: GraphWiring = None
    tree_wiring_: object = None
    assembly_truth: list[tuple[int, int, int | None]] = field(default_factory=list)
    assembly_misses: int = 0


def prepare_example(
    mol: Molecule,
    ctx: LigaseContext,
    vocab: Vocabulary,
    cfg: ModelConfig,
    cache: AssemblyCache,
    conformer: Conformer | None = None,
    tree: JunctionTree | None = None,
) -> PreparedExample:
    """Decompose, featurize and resolve assembly ground truths once."""
    tree = tree or decompose(mol)
    torsions, _ = bond_torsion_features(mol, conformer)
    ex = PreparedExample(mol=mol, tree=tree, torsions=torsions, ctx=ctx)
    ex.graph_wiring = GraphWiring(mol, torsions)
    ex.tree_wiring_ = tree_wiring(tree, vocab)
    children = dfs_children(tree, tree.root)
    for u in _preorder(tree.root, children):
        for v in children[u]:
            cands, _, _ = cache.get(tree.nodes[u].label, tree.nodes[v].label, vocab, cfg.assembly_cap)
            frag, roles = ground_truth_fragment(mol, tree.nodes[u].atom_indices, tree.nodes[v].atom_indices)
            sig = merge_signature(frag, roles)
            idx = next((k for k, c in enumerate(cands) if c.signature == sig), None)
            if idx is None:
                ex.assembly_misses += 1
            ex.assembly_truth.append((u, v, idx))
    return ex


def _preorder(root, children):
    order, stack = [], [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for v in reversed(children[u]):
            stack.append(v)
    return order


class Trainer:
    def __init__(
        self,
        cfg: ModelConfig,
        vocab: Vocabulary,
        seed: int,
        schedule: TrainingSchedule | None = None,
        lr_schedule: LrSchedule | None = None,
        params: dict[str, Tensor] | None = None,
    ):
        self.cfg = cfg
        self.vocab = vocab
        self.seed = seed
        self.schedule = schedule or TrainingSchedule()
        self.lr_schedule = lr_schedule or LrSchedule()
        self.rng = RngBundle(seed)
        self.params = params or init_params(cfg, len(vocab), self.rng["init"])
        self.adam = AdamState(lr=self.lr_schedule.base_lr)
        self.cache = AssemblyCache()
        self.epoch = 0
        self.step = 0  # global mini-batch counter, drives beta

    @property
    def beta(self) -> float:
        return self.schedule.beta_at(self.step)

    def encode_means(self, ex: PreparedExample):
        """Posterior statistics for one molecule: (t_mean, t_logvar, g_mean, g_logvar)."""
        params, cfg = self.params, self.cfg
        t_state = encode_tree_stream(ex.tree_wiring_, params, cfg)
        g_state = encode_graph_stream(ex.graph_wiring, params, cfg)
        t_mean = add(matmul(t_state, params["T_mean.W"]), params["T_mean.b"])
        t_logvar = add(matmul(t_state, params["T_var.W"]), params["T_var.b"])
        g_mean = add(matmul(g_state, params["G_mean.W"]), params["G_mean.b"])
        g_logvar = add(matmul(g_state, params["G_var.W"]), params["G_var.b"])
        return t_mean, t_logvar, g_mean, g_logvar

    def encode_and_fuse(self, ex: PreparedExample, seq_cache: dict | None = None) -> LatentSample:
        """Encode both streams, sample the molecular latent and fuse with the
        ligase embedding."""
        params, cfg = self.params, self.cfg
        t_mean, t_logvar, g_mean, g_logvar = self.encode_means(ex)
        zt, kl_t = reparameterize_and_kl(t_mean, t_logvar, self.rng["reparam"])
        zg, kl_g = reparameterize_and_kl(g_mean, g_logvar, self.rng["reparam"])
        z_mol = concat([zt, zg], axis=1)
        if seq_cache is not None and ex.ctx.ligase_id in seq_cache:
            z_seq, states = seq_cache[ex.ctx.ligase_id]
        else:
            z_seq, states = encode_ligase(ex.ctx, params, cfg)
            if seq_cache is not None:
                seq_cache[ex.ctx.ligase_id] = (z_seq, states)
        z = fuse_latent(z_mol, z_seq, states, params, cfg)
        return LatentSample(
            z_tree_mean=t_mean, z_tree_logvar=t_logvar,
            z_graph_mean=g_mean, z_graph_logvar=g_logvar,
            z_mol=z_mol, z_seq=z_seq, z_fused=z, kl=add(kl_t, kl_g),
        )

    def molecule_losses(self, ex: PreparedExample, seq_cache: dict | None = None):
        """Forward pass for one molecule; returns (loss pieces, decode stats)."""
        latent = self.encode_and_fuse(ex, seq_cache)
        dec = decode_teacher_forced(
            latent.z_fused, ex.mol, ex.tree, self.vocab, self.params, self.cfg,
            self.cache, truth=ex.assembly_truth,
        )
        return dec, latent.kl

    def evaluate_wacc(self, examples: list[PreparedExample]) -> tuple[float, float, float]:
        """Teacher-forced (wacc, tacc, sacc) of the current parameters using
        posterior means, the conventional reconstruction read-out."""
        counts = [0, 0, 0, 0, 0, 0]
        seq_cache: dict = {}
        for ex in examples:
            t_mean, _, g_mean, _ = self.encode_means(ex)
            z_mol = concat([t_mean, g_mean], axis=1)
            if ex.ctx.ligase_id in seq_cache:
                z_seq, states = seq_cache[ex.ctx.ligase_id]
            else:
                z_seq, states = encode_ligase(ex.ctx, self.params, self.cfg)
                seq_cache[ex.ctx.ligase_id] = (z_seq, states)
            z = fuse_latent(z_mol, z_seq, states, self.params, self.cfg)
            dec = decode_teacher_forced(
                z, ex.mol, ex.tree, self.vocab, self.params, self.cfg, self.cache,
                truth=ex.assembly_truth,
            )
            counts[0] += dec.n_label_correct
            counts[1] += dec.n_label
            counts[2] += dec.n_topo_correct
            counts[3] += dec.n_topo
            counts[4] += dec.n_assembly_correct
            counts[5] += dec.n_assembly
        return (
            counts[0] / counts[1] if counts[1] else 0.0,
            counts[2] / counts[3] if counts[3] else 0.0,
            counts[4] / counts[5] if counts[5] else 0.0,
        )

    def train_epoch(self, examples: list[PreparedExample]) -> LossReport:
        if not examples:
            raise ValueError("no training examples")
        self.adam.lr = self.lr_schedule.lr(self.epoch)
        order = list(range(len(examples)))
        self.rng["shuffle"].shuffle(order)
        bs = self.schedule.batch_size

        sums = {"topo": 0.0, "label": 0.0, "asm": 0.0, "kl": 0.0}
        counts = {"topo": 0, "topo_ok": 0, "label": 0, "label_ok": 0, "asm": 0, "asm_ok": 0}
        n_seen = 0

        for bstart in range(0, len(order), bs):
            batch = [examples[i] for i in order[bstart : bstart + bs]]
            beta = self.beta
            zero_grads(self.params)
            with Tape() as tape:
                terms = []
                seq_cache: dict = {}
                for ex in batch:
                    dec, kl = self.molecule_losses(ex, seq_cache)
                    recon = add(add(dec.topology, dec.label), dec.assembly)
                    terms.append(add(recon, scale(kl, beta)))
                    sums["topo"] += float(dec.topology.values)
                    sums["label"] += float(dec.label.values)
                    sums["asm"] += float(dec.assembly.values)
                    sums["kl"] += float(kl.values)
                    counts["topo"] += dec.n_topo
                    counts["topo_ok"] += dec.n_topo_correct
                    counts["label"] += dec.n_label
                    counts["label_ok"] += dec.n_label_correct
                    counts["asm"] += dec.n_assembly
                    counts["asm_ok"] += dec.n_assembly_correct
                total = terms[0]
                for t in terms[1:]:
                    total = add(total, t)
                loss = scale(total, 1.0 / len(batch))
            if not np.isfinite(loss.values):
                raise TrainingDivergence(self.epoch, bstart // bs)
            tape.backward(loss)
            names = sorted(self.params)
            grads = [self.params[n].grad for n in names]
            clip_global_norm(grads, 50.0)
            adam_step(self.params, dict(zip(names, grads)), self.adam)
            self.step += 1
            n_seen += len(batch)

        self.epoch += 1
        beta_end = self.beta
        rt = sums["topo"] / n_seen
        rl = sums["label"] / n_seen
        ra = sums["asm"] / n_seen
        kl = sums["kl"] / n_seen
        return LossReport(
            total=rt + rl + ra + beta_end * kl,
            recon_topology=rt,
            recon_label=rl,
            recon_assembly=ra,
            kl=kl,
            beta=beta_end,
            wacc=counts["label_ok"] / counts["label"] if counts["label"] else 0.0,
            tacc=counts["topo_ok"] / counts["topo"] if counts["topo"] else 0.0,
            sacc=counts["asm_ok"] / counts["asm"] if counts["asm"] else 0.0,
        )

    def save(self, path) -> None:
        save_checkpoint(
            path,
            self.params,
            self.adam,
            epoch=self.epoch,
            beta=self.beta,
            rng_state=self.rng.state(),
            extra={
                "seed": self.seed,
                "step": self.step,
                "config": self.cfg.to_dict(),
                "schedule": {
                    "beta_step": self.schedule.beta_step,
                    "beta_max": self.schedule.beta_max,
                    "epochs": self.schedule.epochs,
                    "batch_size": self.schedule.batch_size,
                },
                "lr": {"base_lr": self.lr_schedule.base_lr, "decay": self.lr_schedule.decay},
                "vocab_size": len(self.vocab),
            },
        )

    @classmethod
    def load(cls, path, vocab: Vocabulary) -> "Trainer":
        data = load_checkpoint(path)
        extra = data["extra"]
        if extra["vocab_size"] != len(vocab):
            raise ValueError(
                f"checkpoint was trained with vocabulary size {extra['vocab_size']}, "
                f"got {len(vocab)}"
            )
        cfg = ModelConfig(**extra["config"])
        schedule = TrainingSchedule(**extra["schedule"])
        lr_schedule = LrSchedule(**extra["lr"])
        trainer = cls(cfg, vocab, extra["seed"], schedule, lr_schedule, params=data["params"])
        trainer.adam = data["adam"]
        trainer.epoch = data["epoch"]
        trainer.step = extra["step"]
        trainer.rng.set_state(data["rng_state"])
        return trainer


def train_epoch(trainer: Trainer, examples: list[PreparedExample]) -> LossReport:
    """Free-function form of Trainer.train_epoch."""
    return trainer.train_epoch(examples)
