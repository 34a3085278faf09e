"""Conditional sampling: greedy tree decoding plus greedy valence-checked
assembly. Failures are reported per sample, never dropped."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..chem import rings as ring_mod
from ..chem.canon import write_canonical_smiles
from ..chem.mol import Atom, ChemError, Molecule, check_valence
from ..chem.smiles import parse_smiles
from ..engine import Tensor, concat, constant
from ..jtree import Vocabulary
from .assembly import _bond_sum
from .config import LigaseContext, ModelConfig
from .decoder import (
    AssemblyCache,
    decoder_initial_hidden,
    gru_step,
    label_embedding,
    label_logits,
    score_candidates,
    topology_logit,
)
from .fusion import fuse_latent
from .seqenc import encode_ligase

STATUS_OK = "ok"


@dataclass
class GenSample:
    sample_id: int
    ligase_id: str
    smiles: str
    status: str


@dataclass
class _DecodedTree:
    labels: list[str]
    edges: list[tuple[int, int]]  # (parent, child) in creation order


def generate(
    ctx: LigaseContext,
    n: int,
    vocab: Vocabulary,
    params: dict[str, Tensor],
    cfg: ModelConfig,
    rng: np.random.Generator,
    cache: AssemblyCache | None = None,
) -> list[GenSample]:
    if not vocab.labels:
        raise ValueError("empty vocabulary")
    cache = cache or AssemblyCache()
    z_seq, states = encode_ligase(ctx, params, cfg)
    samples = []
    for sid in range(n):
        z_mol = constant(rng.standard_normal((1, cfg.z_mol)))
        z = fuse_latent(z_mol, z_seq, states, params, cfg)
        tree = _greedy_decode_tree(z, vocab, params, cfg)
        smiles, status = _assemble(tree, z, vocab, params, cfg, cache)
        samples.append(GenSample(sample_id=sid, ligase_id=ctx.ligase_id, smiles=smiles, status=status))
    return samples


def _greedy_decode_tree(z: Tensor, vocab: Vocabulary, params, cfg: ModelConfig) -> _DecodedTree:
    h = decoder_initial_hidden(z, params)

    def pick_label() -> int:
        return int(np.argmax(label_logits(h, z, params).values))

    def advance(hidden, label_idx):
        return gru_step(hidden, concat([label_embedding(label_idx, params), z], axis=1), params)

    root_label = pick_label()
    labels = [vocab.labels[root_label]]
    label_idx = [root_label]
    edges: list[tuple[int, int]] = []
    h = advance(h, root_label)
    stack = [0]
    while stack:
        u = stack[-1]
        expand = topology_logit(h, z, params).values.item() > 0.0 and len(labels) < cfg.max_decode_nodes
        if expand:
            li = pick_label()
            labels.append(vocab.labels[li])
            label_idx.append(li)
            v = len(labels) - 1
            edges.append((u, v))
            h = advance(h, li)
            stack.append(v)
        else:
            h = advance(h, label_idx[u])
            stack.pop()
    return _DecodedTree(labels=labels, edges=edges)


def _assemble(
    tree: _DecodedTree,
    z: Tensor,
    vocab: Vocabulary,
    params,
    cfg: ModelConfig,
    cache: AssemblyCache,
) -> tuple[str, str]:
    mol = Molecule(source_text="")
    root_template = vocab.templates[tree.labels[0]]
    node_map: dict[int, dict[int, int]] = {0: {}}
    for a in root_template.atoms:
        node_map[0][a.index] = len(mol.atoms)
        mol.atoms.append(replace(a, index=len(mol.atoms)))
    for b in root_template.bonds:
        mol.bonds.append(replace(b, a=node_map[0][b.a], b=node_map[0][b.b]))

    for u, v in tree.edges:
        parent_label, child_label = tree.labels[u], tree.labels[v]
        cands, _, wirings = cache.get(parent_label, child_label, vocab, cfg.assembly_cap)
        if not cands:
            return "", "failed:no_valid_attachment"
        if len(cands) == 1:
            order = [0]
        else:
            scores = score_candidates(wirings, z, params, cfg).values.ravel()
            order = list(np.argsort(-scores, kind="stable"))
        child_template = vocab.templates[child_label]
        placed = None
        for k in order:
            placed = _try_apply(mol, node_map[u], child_template, cands[k])
            if placed is not None:
                break
        if placed is None:
            return "", "failed:no_valid_attachment"
        node_map[v] = placed

    ring_mod.mark_ring_membership(mol)
    mol.rings = ring_mod.perceive_rings(mol)
    ring_mod.mark_ring_membership(mol)
    try:
        smiles = write_canonical_smiles(mol)
        reparsed = parse_smiles(smiles)
    except (ChemError, ValueError) as exc:
        return "", f"failed:invalid_molecule:{type(exc).__name__}"
    report = check_valence(reparsed)
    if not report.ok:
        return smiles, "failed:valence"
    return smiles, STATUS_OK


def _try_apply(mol: Molecule, parent_map: dict[int, int], child: Molecule, cand) -> dict[int, int] | None:
    """Apply a merge candidate onto the live molecule, or None if infeasible."""
    pairing = dict(zip(cand.child_atoms, cand.parent_atoms))
    shared_child_bond = None
    if cand.kind == "bond":
        shared_child_bond = (min(cand.child_atoms), max(cand.child_atoms))

    needs: list[tuple[int, int]] = []  # (molecule atom, hydrogens consumed)
    for j, i in pairing.items():
        mol_idx = parent_map[i]
        consumed = _bond_sum(child, j, skip=shared_child_bond)
        if mol.atoms[mol_idx].implicit_h < consumed:
            return None
        needs.append((mol_idx, consumed))

    for mol_idx, consumed in needs:
        mol.atoms[mol_idx].implicit_h -= consumed
    child_map: dict[int, int] = {}
    for a in child.atoms:
        if a.index in pairing:
            child_map[a.index] = parent_map[pairing[a.index]]
        else:
            child_map[a.index] = len(mol.atoms)
            mol.atoms.append(replace(a, index=len(mol.atoms)))
    for b in child.bonds:
        if shared_child_bond is not None and b.key == shared_child_bond:
            continue
        mol.bonds.append(replace(b, a=child_map[b.a], b=child_map[b.b]))
    return child_map
