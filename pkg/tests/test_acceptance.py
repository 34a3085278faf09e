"""Acceptance suite: the ten exit criteria, each printing one PASS line.

Run with: pytest tests/test_acceptance.py -v -s
"""

import csv
import dataclasses
import io
import math
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from gluegen.chem import check_valence, parse_smiles, write_canonical_smiles
from gluegen.cli import main as cli_main
from gluegen.engine import LrSchedule, Tape, add, clip_global_norm, scale
from gluegen.engine.rng import substream
from gluegen.jtree import build_vocabulary, decompose, verify_cover
from gluegen.model.config import LigaseContext, ModelConfig
from gluegen.model.fusion import fuse_latent, fusion_preactivation
from gluegen.model.generate import generate
from gluegen.model.params import init_params
from gluegen.model.seqenc import encode_ligase
from gluegen.model.training import Trainer, TrainingSchedule, prepare_example
from gluegen.pipeline import admet_filter, classify_affinity, ingest_compounds_csv

NS = {"svg": "http://www.w3.org/2000/svg"}


def _report(n, detail):
    print(f"ACCEPTANCE {n}: PASS  {detail}")


# --- criterion 1: parser / canonicalization over the 250-molecule corpus ----


def test_criterion_1_parser_canonicalization(corpus):
    import random

    start = time.monotonic()
    rng = random.Random(20250809)
    for smi in corpus:
        m = parse_smiles(smi)
        canon = write_canonical_smiles(m)
        m2 = parse_smiles(canon)
        atoms = sorted((a.element, a.formal_charge, a.aromatic, a.implicit_h) for a in m.atoms)
        atoms2 = sorted((a.element, a.formal_charge, a.aromatic, a.implicit_h) for a in m2.atoms)
        assert atoms == atoms2, smi
        bonds = sorted(
            tuple(sorted((m.atoms[b.a].element, m.atoms[b.b].element))) + (b.order,)
            for b in m.bonds
        )
        bonds2 = sorted(
            tuple(sorted((m2.atoms[b.a].element, m2.atoms[b.b].element))) + (b.order,)
            for b in m2.bonds
        )
        assert bonds == bonds2, smi
        assert len(m.rings) == len(m2.rings), smi
        for _ in range(20):
            order = list(range(len(m.atoms)))
            rng.shuffle(order)
            assert write_canonical_smiles(m.permuted(order)) == canon, smi
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"runtime {elapsed:.1f}s exceeds 30s"
    _report(1, f"250 molecules round-trip, 20 permutations each, {elapsed:.1f}s")


# --- criterion 2: junction-tree oracle ----------------------------------


def test_criterion_2_junction_tree_oracle(corpus):
    for smi in corpus:
        m = parse_smiles(smi)
        t = decompose(m)
        rep = verify_cover(m, t)
        assert rep.ok, (smi, rep.problem)

    norbornane = parse_smiles("C1CC2CCC1C2")
    t = decompose(norbornane)
    assert len(t.nodes) == 1
    assert t.nodes[0].atom_indices == tuple(range(7))
    assert t.edges == []

    biphenyl = parse_smiles("c1ccccc1-c2ccccc2")
    t = decompose(biphenyl)
    assert [c.atom_indices for c in t.nodes] == [
        (0, 1, 2, 3, 4, 5), (5, 6), (6, 7, 8, 9, 10, 11),
    ]
    assert t.edges == [(0, 1), (1, 2)]
    assert t.root == 0
    _report(2, "verify_cover 100% of corpus; norbornane merge and biphenyl path exact")


# --- criterion 3: gradient audit ------------------------------------------


def test_criterion_3_gradient_audit():
    from gluegen.engine import apply_primitive, mean, primitive_kinds, Tensor

    start = time.monotonic()
    h, tol = 1e-4, 1e-4

    def rand(rng, *shape, off_zero=False):
        v = rng.normal(size=shape)
        if off_zero:
            v = np.where(np.abs(v) < 0.05, v + 0.1 * np.sign(v + 1e-12), v)
        return Tensor(v, requires_grad=True)

    cases = {
        "matmul": (lambda r: [rand(r, 3, 4), rand(r, 4, 2)], lambda r: {}),
        "add": (lambda r: [rand(r, 3, 4), rand(r, 1, 4)], lambda r: {}),
        "sub": (lambda r: [rand(r, 3, 4), rand(r, 3, 4)], lambda r: {}),
        "mul": (lambda r: [rand(r, 2, 5), rand(r, 2, 5)], lambda r: {}),
        "scale": (lambda r: [rand(r, 2, 3)], lambda r: {"c": float(r.normal())}),
        "concat": (lambda r: [rand(r, 2, 3), rand(r, 2, 2)], lambda r: {"axis": 1}),
        "slice": (lambda r: [rand(r, 3, 6)], lambda r: {"start": 1, "stop": 4, "axis": 1}),
        "relu": (lambda r: [rand(r, 3, 4, off_zero=True)], lambda r: {}),
        "sigmoid": (lambda r: [rand(r, 2, 4)], lambda r: {}),
        "tanh": (lambda r: [rand(r, 2, 4)], lambda r: {}),
        "exp": (lambda r: [rand(r, 2, 3)], lambda r: {}),
        "mean": (lambda r: [rand(r, 3, 4)], lambda r: {}),
        "sum": (lambda r: [rand(r, 3, 4)], lambda r: {}),
        "transpose": (lambda r: [rand(r, 3, 4)], lambda r: {}),
        "softmax": (lambda r: [rand(r, 2, 5)], lambda r: {}),
        "softmax_cross_entropy": (
            lambda r: [rand(r, 3, 6)], lambda r: {"target": r.integers(0, 6, size=3)},
        ),
        "binary_cross_entropy": (
            lambda r: [rand(r, 2, 4)],
            lambda r: {"target": r.integers(0, 2, size=(2, 4)).astype(float)},
        ),
        "gather_rows": (
            lambda r: [rand(r, 5, 3)], lambda r: {"indices": r.integers(0, 5, size=4)},
        ),
    }
    assert set(cases) == set(primitive_kinds())
    audited = 0
    for kind, (make_inputs, make_kwargs) in sorted(cases.items()):
        rng = np.random.default_rng(17)
        for _ in range(100):
            tensors, kwargs = make_inputs(rng), make_kwargs(rng)
            with Tape() as tape:
                out = apply_primitive(kind, *tensors, **kwargs)
                loss = mean(out) if out.values.shape != () else out
            tape.backward(loss)
            t = tensors[0]
            flat = t.values.ravel()
            idx = int(rng.integers(flat.size))
            orig = flat[idx]
            flat[idx] = orig + h
            up = float(apply_primitive(kind, *tensors, **kwargs).values.mean())
            flat[idx] = orig - h
            dn = float(apply_primitive(kind, *tensors, **kwargs).values.mean())
            flat[idx] = orig
            numeric = (up - dn) / (2 * h)
            analytic = t.grad.ravel()[idx]
            rel = abs(numeric - analytic) / max(1e-6, abs(numeric), abs(analytic))
            assert rel <= tol, f"{kind}: rel {rel}"
            audited += 1

    # assembled model: full conditioned loss, every parameter block probed
    smiles = ["CCO", "Cc1ccccc1", "CCN"]
    mols = [parse_smiles(s) for s in smiles]
    vocab = build_vocabulary(mols)
    cfg = ModelConfig(hidden=10, z_tree=3, z_graph=3, seq_embed=8, fused=6,
                      mp_iters=2, tree_iters=2)
    trainer = Trainer(cfg, vocab, seed=12, schedule=TrainingSchedule(batch_size=3),
                      lr_schedule=LrSchedule())
    ctx = LigaseContext("VHL", "ACDEFGHIKLM")
    examples = [prepare_example(m, ctx, vocab, cfg, trainer.cache) for m in mols]
    ref_state = trainer.rng.state()

    def batch_loss():
        trainer.rng.set_state(ref_state)
        terms = []
        for ex in examples:
            dec, kl = trainer.molecule_losses(ex)
            terms.append(add(add(add(dec.topology, dec.label), dec.assembly), scale(kl, 0.37)))
        total = terms[0]
        for term in terms[1:]:
            total = add(total, term)
        return scale(total, 1.0 / len(examples))

    with Tape() as tape:
        loss = batch_loss()
    tape.backward(loss)
    analytic = {name: p.grad.copy() for name, p in trainer.params.items()}
    rng = np.random.default_rng(5)
    model_trials = 0
    for name, p in sorted(trainer.params.items()):
        for _ in range(3):
            direction = rng.normal(size=p.values.shape)
            direction /= np.linalg.norm(direction)
            p.values += h * direction
            up = float(batch_loss().values)
            p.values -= 2 * h * direction
            dn = float(batch_loss().values)
            p.values += h * direction
            numeric = (up - dn) / (2 * h)
            expected = float((analytic[name] * direction).sum())
            rel = abs(numeric - expected) / max(1e-6, abs(numeric), abs(expected))
            assert rel <= tol, f"model block {name}: rel {rel}"
            model_trials += 1

    elapsed = time.monotonic() - start
    assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2 min"
    _report(3, f"{audited} primitive trials + {model_trials} model-block probes, {elapsed:.1f}s")


# --- criterion 4: schedule exactness ---------------------------------------


def test_criterion_4_schedule_exactness():
    sched = TrainingSchedule()
    for t, expected in [(0, 0.0), (1, 0.002), (250, 0.5), (499, 0.998), (500, 1.0), (10**4, 1.0)]:
        assert sched.beta_at(t) == pytest.approx(expected, abs=1e-15), t
    grads = [np.array([60.0, 80.0])]
    clipped, pre = clip_global_norm(grads, 50.0)
    assert pre == pytest.approx(100.0, abs=1e-9)
    assert np.linalg.norm(clipped[0]) == pytest.approx(50.0, abs=1e-9)
    _report(4, "beta(t) exact at all checkpoints; clip(norm 100) = 50.0 within 1e-9")


# --- criteria 5 and 6: overfit oracle and generation validity ---------------

OVERFIT_CFG = ModelConfig(hidden=32, z_tree=16, z_graph=16, seq_embed=32, fused=32,
                          mp_iters=1, tree_iters=1)
OVERFIT_CTX = LigaseContext("VHL", "ACDEFGHIKWLMNP")


def _run_overfit(smiles, seed=1, epochs=300):
    mols = [parse_smiles(s) for s in smiles]
    vocab = build_vocabulary(mols)
    trainer = Trainer(
        OVERFIT_CFG, vocab, seed=seed,
        schedule=TrainingSchedule(batch_size=20, epochs=epochs),
        lr_schedule=LrSchedule(base_lr=0.03),
    )
    examples = [prepare_example(m, OVERFIT_CTX, vocab, OVERFIT_CFG, trainer.cache) for m in mols]
    reports = [trainer.train_epoch(examples) for _ in range(epochs)]
    return trainer, reports


@pytest.fixture(scope="module")
def overfit(overfit_smiles):
    start = time.monotonic()
    trainer, reports = _run_overfit(overfit_smiles)
    elapsed = time.monotonic() - start
    return trainer, reports, elapsed


def test_criterion_5_overfit_oracle(overfit_smiles, overfit):
    trainer, reports, elapsed = overfit
    ratio = reports[-1].total / reports[0].total
    assert ratio < 0.5, f"loss ratio {ratio:.3f}"
    assert reports[-1].wacc >= 0.9, f"final wacc {reports[-1].wacc:.3f}"
    assert elapsed < 600.0, f"runtime {elapsed:.0f}s exceeds 10 min"

    _, reports2 = _run_overfit(overfit_smiles)
    log1 = [dataclasses.astuple(r) for r in reports]
    log2 = [dataclasses.astuple(r) for r in reports2]
    assert log1 == log2, "identically-seeded runs differ"
    _report(
        5,
        f"300 epochs: loss ratio {ratio:.3f} < 0.5, wacc {reports[-1].wacc:.3f} >= 0.9, "
        f"bit-identical rerun, {elapsed:.0f}s",
    )


def test_criterion_6_generation_validity(overfit):
    trainer, _, _ = overfit
    samples = generate(
        OVERFIT_CTX, 500, trainer.vocab, trainer.params, trainer.cfg,
        substream(1, "sample"), trainer.cache,
    )
    assert len(samples) == 500
    statuses = {}
    checked = 0
    for s in samples:
        statuses[s.status] = statuses.get(s.status, 0) + 1
        assert s.status == "ok" or s.status.startswith("failed:"), "silent status"
        if s.status == "ok":
            m = parse_smiles(s.smiles)
            assert check_valence(m).ok, s.smiles
            checked += 1
    assert checked == statuses.get("ok", 0)
    _report(6, f"500 samples; statuses {statuses}; 100% of ok emissions parse + pass valence")


# --- criterion 7: conditioning sensitivity ----------------------------------


def test_criterion_7_conditioning_sensitivity():
    vocab = build_vocabulary([parse_smiles("CCO")])
    cfg = ModelConfig(hidden=16, z_tree=4, z_graph=4, seq_embed=12, fused=8)
    params = init_params(cfg, len(vocab), substream(4, "init"))
    w = params["fuse.W"].values
    assert np.linalg.matrix_rank(w) == min(w.shape), "fusion weight not full rank"
    from gluegen.engine import constant

    z_mol = constant(np.random.default_rng(0).normal(size=(1, cfg.z_mol)))
    z_a, _ = encode_ligase(LigaseContext("A", "ACDEFGHIK"), params, cfg)
    z_b, _ = encode_ligase(LigaseContext("B", "WYSTVKLMN"), params, cfg)
    pre_a = fusion_preactivation(z_mol, z_a, params)
    pre_b = fusion_preactivation(z_mol, z_b, params)
    assert not np.allclose(pre_a.values, pre_b.values)

    attn_cfg = ModelConfig(hidden=16, z_tree=4, z_graph=4, seq_embed=12, fused=8,
                           fusion_mode="cross_attention", attn_heads=2, attn_dim=4,
                           seq_encoder_mode="onehot_rnn")
    attn_params = init_params(attn_cfg, len(vocab), substream(5, "init"))
    z_seq, states = encode_ligase(LigaseContext("A", "ACDEFGHIKLMNP"), attn_params, attn_cfg)
    _, attn = fuse_latent(z_mol, z_seq, states, attn_params, attn_cfg, return_attention=True)
    for weights in attn:
        assert abs(weights.values.sum() - 1.0) < 1e-12
    _report(7, "distinct ligases change fusion pre-activation; attention weights sum to 1")


# --- criterion 8: geometry suite --------------------------------------------


def test_criterion_8_geometry_suite():
    from scipy.spatial.transform import Rotation

    from gluegen.geom import Conformer, dihedral_angle, kabsch_rmsd_coords

    m = parse_smiles("CCCC")

    def conf(coords):
        return Conformer(m, np.asarray(coords, dtype=float))

    anti = conf([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, -1, 0]])
    syn = conf([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, 1, 0]])
    plus = conf([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, 0, 1]])
    minus = conf([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, 0, -1]])
    assert abs(dihedral_angle(anti, 0, 1, 2, 3) - 180.0) < 1e-9
    assert abs(dihedral_angle(syn, 0, 1, 2, 3)) < 1e-9
    assert abs(dihedral_angle(plus, 0, 1, 2, 3) - 90.0) < 1e-9
    assert abs(dihedral_angle(minus, 0, 1, 2, 3) + 90.0) < 1e-9

    rng = np.random.default_rng(8)
    p = rng.normal(size=(15, 3))
    for seed in range(10):
        rot = Rotation.random(random_state=seed).as_matrix()
        q = p @ rot.T + rng.normal(size=3)
        assert kabsch_rmsd_coords(p, q) < 1e-9
    _report(8, "dihedrals 0/+90/-90/180 exact within 1e-9 deg; rigid-copy RMSD < 1e-9 A")


# --- criterion 9: data-pipeline exactness ------------------------------------


def test_criterion_9_data_pipeline_exactness():
    for score, expected in [(-6.2, "High"), (-5.0, "Low"), (-3.0, "Low"),
                            (-1.0, "Low"), (-0.5, "None"), (0.5, "None")]:
        assert classify_affinity(score) == expected, score

    header = ("id,smiles,library,MW,logPo_w,logS,logHERG,metab,ro5_violations,"
              "dock_CRBN,dock_VHL,dock_MDM2")
    rows = [
        ("inside", 366.68, 3.39, -4.59, -6.0, 4, 0, True),
        ("mw_low", 129.0, 3.0, -4.0, -6.0, 4, 0, False),
        ("mw_high", 726.0, 3.0, -4.0, -6.0, 4, 0, False),
        ("logp_low", 300.0, -2.1, -4.0, -6.0, 4, 0, False),
        ("logp_high", 300.0, 6.6, -4.0, -6.0, 4, 0, False),
        ("logs_low", 300.0, 3.0, -6.6, -6.0, 4, 0, False),
        ("logs_high", 300.0, 3.0, 0.6, -6.0, 4, 0, False),
        ("herg", 300.0, 3.0, -4.0, -4.5, 4, 0, False),
        ("metab_low", 300.0, 3.0, -4.0, -6.0, 0, 0, False),
        ("metab_high", 300.0, 3.0, -4.0, -6.0, 9, 0, False),
        ("ro5", 300.0, 3.0, -4.0, -6.0, 4, 2, False),
        ("boundary", 130.0, 6.5, 0.5, -5.01, 8, 1, True),
    ]
    text = header + "\n" + "\n".join(
        f"{i},CCO,ChEMBL,{mw},{logp},{logs},{herg},{met},{ro5},,,"
        for i, mw, logp, logs, herg, met, ro5, _ in rows
    )
    records, rejected = ingest_compounds_csv(io.StringIO(text))
    assert rejected == []
    assert len(records) == 12
    passed, failed = admet_filter(records)
    expected_pass = {i for i, *_, ok in rows if ok}
    assert {r.id for r in passed} == expected_pass
    assert {r.id for r, _ in failed} == {i for i, *_, ok in rows if not ok}

    from gluegen.pipeline import SUMMARY_STATS, summarize_properties

    summary = summarize_properties(records)
    assert tuple(summary["MW"].keys()) == SUMMARY_STATS
    assert len(SUMMARY_STATS) == 8
    _report(9, "affinity boundaries exact; 12-row ADMET fixture reproduced; 8 summary stats")


# --- criterion 10: report fidelity -------------------------------------------


def test_criterion_10_report_fidelity(tmp_path):
    scores = tmp_path / "scores.csv"
    lines = ["compound_id,ligase,score"]
    for i in (1, 2, 3):
        lines += [
            f"VHL_Cmpd_{i},VHL,-5.84",
            f"VHL_Cmpd_{i},MDM2,-4.05",
            f"VHL_Cmpd_{i},CRBN,-4.15",
        ]
    scores.write_text("\n".join(lines) + "\n")
    out = tmp_path / "out"
    assert cli_main(["report", "--out", str(out), "--set", f"report.scores_csv={scores}"]) == 0

    avg_lines = [l for l in (out / "score_averages.csv").read_text().splitlines()
                 if not l.startswith("#")]
    table = {r["docked_target"]: r["mean_score"] for r in csv.DictReader(avg_lines)}
    assert table == {"VHL": "-5.84", "MDM2": "-4.05", "CRBN": "-4.15"}

    root = ET.fromstring((out / "score_heatmap.svg").read_text())
    cells = root.findall(".//svg:rect[@data-compound]", NS)
    assert len(cells) == 9
    source = {}
    for line in lines[1:]:
        comp, lig, score = line.split(",")
        source[(comp, lig)] = repr(float(score))
    for cell in cells:
        key = (cell.get("data-compound"), cell.get("data-ligase"))
        assert cell.get("data-score") == source[key]
    _report(10, "means CSV echoes -5.84/-4.05/-4.15 bit-exact; SVG cells match source values")
