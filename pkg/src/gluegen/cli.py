"""Command-line pipeline: ingest | train | generate | eval | report.

Every command is a pure function of (config file, input files, seed):
reruns produce byte-identical outputs, and each run writes a MANIFEST
listing the effective configuration and a content hash per artifact.

Exit codes: 2 compound-schema failure, 3 non-finite training loss,
4 missing checkpoint, 5 empty sample file, 6 unknown ligase in scores.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
from pathlib import Path

import numpy as np

from . import pipeline as data_mod
from .chem import ChemError, circular_fingerprint, parse_smiles, write_canonical_smiles
from .config import ConfigError, RunConfig
from .engine.rng import substream
from .geom import parse_sdf_v2000
from .jtree import Vocabulary, build_vocabulary
from .metrics import NOVELTY_DENOMINATOR, UNIQUENESS_DENOMINATOR, generation_report
from .model.config import LigaseContext
from .model.decoder import AssemblyCache
from .model.generate import generate
from .model.training import PreparedExample, Trainer, TrainingDivergence, prepare_example
from .projection import ProjectionConfig, project_2d
from .report import figures, svg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gluegen", description=__doc__)
    parser.add_argument("command", choices=["ingest", "train", "generate", "eval", "report"])
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )
    args = parser.parse_args(argv)

    overrides = {}
    for item in args.set:
        if "=" not in item:
            parser.error(f"--set needs KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.out is not None:
        overrides["out_dir"] = args.out

    try:
        cfg = RunConfig.load(args.config, overrides)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    command = {
        "ingest": cmd_ingest,
        "train": cmd_train,
        "generate": cmd_generate,
        "eval": cmd_eval,
        "report": cmd_report,
    }[args.command]
    return command(cfg)


class Manifest:
    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.artifacts: list[tuple[str, str]] = []

    def write_text(self, path: Path, text: str) -> None:
        path.write_text(text, encoding="utf-8")
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        self.artifacts.append((digest, path.name))

    def write_bytes(self, path: Path, payload: bytes) -> None:
        path.write_bytes(payload)
        self.artifacts.append((hashlib.sha256(payload).hexdigest(), path.name))

    def add_file(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.artifacts.append((digest, path.name))

    def close(self) -> None:
        lines = [f"# gluegen {self.command} manifest", "# config"]
        lines += self.cfg.echo()
        lines.append("# artifacts")
        for digest, name in sorted(self.artifacts, key=lambda x: x[1]):
            lines.append(f"{digest}  {name}")
        path = self.cfg.out_dir / f"MANIFEST-{self.command}.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _csv_text(header: list[str], rows: list[list], comments: list[str] | None = None) -> str:
    buf = io.StringIO()
    for c in comments or []:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _read_csv(path: Path) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        filtered = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(filtered)
    return reader.fieldnames or [], list(reader)


def read_ligase_fasta(path: Path) -> dict[str, str]:
    sequences: dict[str, str] = {}
    name = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(">"):
            name = line[1:].strip().split()[0]
            sequences[name] = ""
        elif name is not None:
            sequences[name] += line
    return sequences


def read_embeddings(path: Path) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, _, payload = line.partition(":")
        out[name.strip()] = np.array([float(x) for x in payload.split(",")], dtype=np.float64)
    return out


def load_contexts(cfg: RunConfig) -> dict[str, LigaseContext]:
    fasta = cfg.get("ligase_fasta")
    contexts: dict[str, LigaseContext] = {}
    if fasta:
        for name, seq in read_ligase_fasta(Path(fasta)).items():
            contexts[name] = LigaseContext(ligase_id=name, sequence=seq)
    embeddings_file = cfg.get("embeddings_file")
    if embeddings_file:
        for name, vector in read_embeddings(Path(embeddings_file)).items():
            if name in contexts:
                contexts[name].embedding = vector
            else:
                contexts[name] = LigaseContext(ligase_id=name, embedding=vector)
    return contexts


def cmd_ingest(cfg: RunConfig) -> int:
    manifest = Manifest(cfg, "ingest")
    out = cfg.out_dir
    try:
        records, rejected = data_mod.ingest_compounds_csv(cfg.get("compounds_csv"))
    except (data_mod.SchemaError, FileNotFoundError) as exc:
        print(f"ingest: {exc}", file=sys.stderr)
        return 2
    if not records and rejected:
        print(f"ingest: all {len(rejected)} rows rejected", file=sys.stderr)

    manifest.write_text(
        out / "rejected_rows.csv",
        _csv_text(["line", "reason"], [[line, reason] for line, reason in rejected]),
    )

    spec = cfg.filter_spec()
    passed, failed = data_mod.admet_filter(records, spec)

    passed_rows = [_record_row(r) for r in passed]
    manifest.write_text(out / "passed.csv", _csv_text(_RECORD_HEADER, passed_rows))
    failed_rows = [_record_row(r) + ["; ".join(reasons)] for r, reasons in failed]
    manifest.write_text(out / "failed.csv", _csv_text(_RECORD_HEADER + ["reasons"], failed_rows))

    if passed:
        summary = data_mod.summarize_properties(passed)
        rows = []
        for prop in data_mod.SUMMARY_PROPERTIES:
            s = summary[prop]
            rows.append(
                [prop, int(s["count"])]
                + [repr(round(s[k], 6)) for k in ("mean", "std", "min", "q25", "median", "q75", "max")]
            )
        manifest.write_text(
            out / "property_summary.csv",
            _csv_text(["Property", "Count", "Mean", "Std Dev", "Min", "25%", "50%", "75%", "Max"], rows),
        )

    table = data_mod.affinity_count_table(passed)
    rows = []
    totals = {"High": 0, "Low": 0, "None": 0, "missing": 0, "total": 0}
    for (ligase, library), cell in sorted(table.items()):
        rows.append(
            [ligase, library, cell["High"], cell["Low"], cell["None"], cell["missing"], cell["total"]]
        )
        for k in totals:
            totals[k] += cell[k]
    rows.append(["Total", "", totals["High"], totals["Low"], totals["None"], totals["missing"], totals["total"]])
    manifest.write_text(
        out / "affinity_counts.csv",
        _csv_text(
            ["Ligase", "Library", "High_Affinity", "Low_Affinity", "No_Affinity", "Missing", "Total"],
            rows,
        ),
    )

    scaffold_rows = []
    for ligase in data_mod.LIGASES:
        for affinity in data_mod.AFFINITY_CLASSES:
            for scaffold, count in data_mod.scaffold_frequency(passed, ligase, affinity):
                scaffold_rows.append([ligase, affinity, scaffold, count])
    manifest.write_text(
        out / "scaffold_frequency.csv",
        _csv_text(["ligase", "affinity", "scaffold", "count"], scaffold_rows),
    )

    manifest.close()
    print(f"ingest: {len(passed)} passed, {len(failed)} failed, {len(rejected)} rejected")
    return 0


_RECORD_HEADER = [
    "id", "smiles", "library", "MW", "logPo_w", "logS", "logHERG", "metab",
    "ro5_violations", "dock_CRBN", "dock_VHL", "dock_MDM2",
]


def _record_row(r: data_mod.CompoundRecord) -> list:
    return [
        r.id, r.smiles, r.library, repr(r.mw), repr(r.logp), repr(r.logs), repr(r.logherg),
        r.metab, r.ro5_violations,
        repr(r.dock["CRBN"]) if "CRBN" in r.dock else "",
        repr(r.dock["VHL"]) if "VHL" in r.dock else "",
        repr(r.dock["MDM2"]) if "MDM2" in r.dock else "",
    ]


def _load_dataset(cfg: RunConfig) -> list[data_mod.CompoundRecord]:
    dataset = cfg.get("train.dataset") or str(cfg.out_dir / "passed.csv")
    records, rejected = data_mod.ingest_compounds_csv(dataset)
    if rejected:
        print(f"train: {len(rejected)} dataset rows rejected", file=sys.stderr)
    return records


def cmd_train(cfg: RunConfig) -> int:
    manifest = Manifest(cfg, "train")
    out = cfg.out_dir
    contexts = load_contexts(cfg)
    if not contexts:
        print("train: no ligase contexts (set ligase_fasta and/or embeddings_file)", file=sys.stderr)
        return 2
    records = _load_dataset(cfg)
    pairs, excluded = data_mod.build_training_pairs(
        records, contexts, include_low=cfg.get_bool("train.include_low")
    )
    manifest.write_text(
        out / "training_exclusions.csv",
        _csv_text(["compound_id", "ligase", "reason"], [list(x) for x in excluded]),
    )
    if not pairs:
        print("train: no training pairs after pairing policy", file=sys.stderr)
        return 2

    conformers = {}
    sdf_file = cfg.get("sdf_file")
    if sdf_file:
        for mol, conf in parse_sdf_v2000(Path(sdf_file).read_text(encoding="utf-8")):
            title = mol.source_text.splitlines()[0].strip()
            if title:
                conformers[title] = (mol, conf)

    molecules = []
    seen = set()
    for pair in pairs:
        canon = write_canonical_smiles(pair.molecule)
        if canon not in seen:
            seen.add(canon)
            molecules.append(pair.molecule)
    vocab = build_vocabulary(molecules)
    vocab.save_tsv(out / "vocab.tsv")
    manifest.add_file(out / "vocab.tsv")
    vocab.save_templates(out / "vocab_templates.json")
    manifest.add_file(out / "vocab_templates.json")
    manifest.write_text(
        out / "training_smiles.txt",
        "\n".join(sorted(seen)) + "\n",
    )

    model_cfg = cfg.model_config()
    schedule = cfg.training_schedule()
    resume = cfg.get("train.resume")
    if resume:
        trainer = Trainer.load(resume, vocab)
    else:
        trainer = Trainer(model_cfg, vocab, cfg.seed, schedule, cfg.lr_schedule())

    examples = []
    for pair in pairs:
        conf = None
        if pair.compound.id in conformers:
            sdf_mol, sdf_conf = conformers[pair.compound.id]
            if write_canonical_smiles(sdf_mol) == write_canonical_smiles(pair.molecule):
                conf = _transfer_conformer(pair.molecule, sdf_mol, sdf_conf)
        examples.append(
            prepare_example(pair.molecule, pair.ligase, vocab, model_cfg, trainer.cache, conformer=conf)
        )
    misses = sum(e.assembly_misses for e in examples)
    if misses:
        print(f"train: {misses} assembly ground truths not enumerable", file=sys.stderr)

    log_rows = []
    log_path = out / "training_log.csv"
    ckpt_path = out / "checkpoint.npz"
    target_epochs = schedule.epochs
    try:
        while trainer.epoch < target_epochs:
            report = trainer.train_epoch(examples)
            log_rows.append({
                "epoch": trainer.epoch,
                "total": repr(report.total),
                "kl": repr(report.kl),
                "beta": repr(report.beta),
                "wacc": repr(report.wacc),
                "tacc": repr(report.tacc),
                "sacc": repr(report.sacc),
            })
            trainer.save(ckpt_path)
    except TrainingDivergence as exc:
        print(f"train: {exc} (checkpoint of last good epoch retained)", file=sys.stderr)
        _write_training_outputs(manifest, out, log_rows, ckpt_path)
        manifest.close()
        return 3

    _write_training_outputs(manifest, out, log_rows, ckpt_path)
    manifest.close()
    final = log_rows[-1] if log_rows else {}
    print(f"train: {len(log_rows)} epochs, final total {final.get('total', 'n/a')}")
    return 0


def _write_training_outputs(manifest: Manifest, out: Path, log_rows: list[dict], ckpt_path: Path) -> None:
    manifest.write_text(
        out / "training_log.csv",
        _csv_text(
            ["epoch", "total", "kl", "beta", "wacc", "tacc", "sacc"],
            [[r[k] for k in ("epoch", "total", "kl", "beta", "wacc", "tacc", "sacc")] for r in log_rows],
        ),
    )
    if ckpt_path.exists():
        manifest.add_file(ckpt_path)
    manifest.write_text(out / "loss_curve.svg", svg.loss_curve_svg(log_rows))
    figures.render_loss_curve(log_rows, out / "loss_curve.png")
    manifest.add_file(out / "loss_curve.png")


def _transfer_conformer(target, sdf_mol, sdf_conf):
    """Attach SDF coordinates to the dataset molecule when atom order matches."""
    from .geom import Conformer

    if len(target.atoms) != len(sdf_mol.atoms):
        return None
    if any(a.element != b.element for a, b in zip(target.atoms, sdf_mol.atoms)):
        return None
    return Conformer(molecule=target, coords=sdf_conf.coords)


def cmd_generate(cfg: RunConfig) -> int:
    manifest = Manifest(cfg, "generate")
    out = cfg.out_dir
    ckpt_path = out / "checkpoint.npz"
    if not ckpt_path.exists():
        print(f"generate: checkpoint {ckpt_path} not found", file=sys.stderr)
        return 4
    vocab = Vocabulary.load_tsv(out / "vocab.tsv")
    vocab.templates = Vocabulary.load_templates(out / "vocab_templates.json")
    trainer = Trainer.load(ckpt_path, vocab)

    contexts = load_contexts(cfg)
    wanted = cfg.get("generate.ligases")
    ligase_ids = [l.strip() for l in wanted.split(",") if l.strip()] if wanted else sorted(contexts)
    unknown = [l for l in ligase_ids if l not in contexts]
    if unknown:
        print(f"generate: unknown ligases {unknown}", file=sys.stderr)
        return 6

    n = cfg.get_int("generate.n_per_ligase")
    rng = substream(cfg.seed, "sample")
    cache = AssemblyCache()
    rows = []
    for ligase_id in ligase_ids:
        samples = generate(contexts[ligase_id], n, vocab, trainer.params, trainer.cfg, rng, cache)
        for s in samples:
            rows.append([s.sample_id, s.ligase_id, s.smiles, s.status])
    manifest.write_text(
        out / "samples.csv",
        _csv_text(["sample_id", "ligase_id", "smiles", "status"], rows),
    )
    manifest.close()
    ok = sum(1 for r in rows if r[3] == "ok")
    print(f"generate: {len(rows)} samples, {ok} ok")
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    manifest = Manifest(cfg, "eval")
    out = cfg.out_dir
    samples_path = Path(cfg.get("eval.samples_csv") or out / "samples.csv")
    if not samples_path.exists():
        print(f"eval: samples file {samples_path} not found", file=sys.stderr)
        return 5
    _, sample_rows = _read_csv(samples_path)
    if not sample_rows:
        print(f"eval: samples file {samples_path} is empty", file=sys.stderr)
        return 5

    training_path = Path(cfg.get("eval.training_file") or out / "training_smiles.txt")
    training_smiles = [
        line.strip()
        for line in training_path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    training_canonical = set()
    for smi in training_smiles:
        try:
            training_canonical.add(write_canonical_smiles(parse_smiles(smi)))
        except ChemError:
            continue

    emitted = [r["smiles"] for r in sample_rows if r["status"] == "ok"]
    report = generation_report(emitted, training_canonical)

    comments = [
        f"uniqueness denominator: {UNIQUENESS_DENOMINATOR}",
        f"novelty denominator: {NOVELTY_DENOMINATOR}",
        "qed_lite is a simplified six-property logistic drug-likeness score, not full QED",
    ]
    summary_metrics = {
        "validity": report.validity,
        "uniqueness": report.uniqueness,
        "novelty": report.novelty,
        "mean_qed_lite": report.mean_qed_lite,
        "lipinski_rate": report.lipinski_rate,
    }
    rows = [[
        "summary", "", "", "",
        repr(report.validity) if report.validity is not None else "undefined",
        repr(report.uniqueness) if report.uniqueness is not None else "undefined",
        repr(report.novelty) if report.novelty is not None else "undefined",
        repr(report.mean_qed_lite) if report.mean_qed_lite is not None else "undefined",
        repr(report.lipinski_rate) if report.lipinski_rate is not None else "undefined",
        f"{report.n_samples} samples / {report.n_valid} valid / {report.n_unique} unique / {report.n_novel} novel",
    ]]
    for d in report.details:
        rows.append([
            "detail", d.index, d.smiles, d.canonical,
            int(d.valid), "", "", repr(d.qed) if d.valid else "",
            int(d.lipinski_pass) if d.valid else "",
            d.reason or ("novel" if d.novel else "known"),
        ])
    manifest.write_text(
        out / "eval_report.csv",
        _csv_text(
            ["row_type", "sample_index", "smiles", "canonical", "validity",
             "uniqueness", "novelty", "qed_lite", "lipinski", "note"],
            rows, comments,
        ),
    )

    manifest.write_text(out / "metrics.svg", svg.metric_bars_svg(summary_metrics))
    figures.render_metric_bars(summary_metrics, out / "metrics.png")
    manifest.add_file(out / "metrics.png")

    rng = substream(cfg.seed, "sample")
    sample_cap = cfg.get_int("eval.train_sample")
    train_pool = sorted(training_canonical)
    if len(train_pool) > sample_cap:
        idx = rng.choice(len(train_pool), size=sample_cap, replace=False)
        train_pool = [train_pool[i] for i in sorted(idx)]
    gen_pool = sorted({d.canonical for d in report.details if d.valid})

    points = []
    fps = []
    for smi in train_pool:
        fps.append(circular_fingerprint(parse_smiles(smi)).to_array())
        points.append({"series": "training", "label": smi})
    for smi in gen_pool:
        fps.append(circular_fingerprint(parse_smiles(smi)).to_array())
        points.append({"series": "generated", "label": smi})

    proj_rows = []
    if len(fps) >= 3:
        method = cfg.get("eval.method")
        perplexity = cfg.get_float("eval.perplexity")
        max_perplexity = (len(fps) - 1) / 3
        clamped = False
        if method == "tsne" and perplexity >= max_perplexity:
            perplexity = max(1.0, max_perplexity - 0.01)
            clamped = True
        proj = project_2d(
            np.array(fps),
            ProjectionConfig(
                method=method, perplexity=perplexity,
                iterations=cfg.get_int("eval.iterations"), seed=cfg.seed,
            ),
        )
        for p, (x, y) in zip(points, proj):
            p["x"] = repr(float(x))
            p["y"] = repr(float(y))
            proj_rows.append([p["series"], p["label"], p["x"], p["y"]])
        comments = [f"method: {method}, perplexity clamped to {perplexity}" if clamped else f"method: {method}"]
        manifest.write_text(
            out / "projection.csv",
            _csv_text(["series", "label", "x", "y"], proj_rows, comments),
        )
        manifest.write_text(out / "projection.svg", svg.projection_svg(points))
        figures.render_projection(points, out / "projection.png")
        manifest.add_file(out / "projection.png")
    else:
        print("eval: fewer than 3 points, skipping projection", file=sys.stderr)

    manifest.close()
    print(
        "eval: validity "
        + (f"{report.validity:.3f}" if report.validity is not None else "undefined")
        + f" over {report.n_samples} emitted samples"
    )
    return 0


def cmd_report(cfg: RunConfig) -> int:
    manifest = Manifest(cfg, "report")
    out = cfg.out_dir
    scores_path = Path(cfg.get("report.scores_csv"))
    if not scores_path.exists():
        print(f"report: scores file {scores_path} not found", file=sys.stderr)
        return 2
    header, rows = _read_csv(scores_path)
    for col in ("compound_id", "ligase", "score"):
        if col not in header:
            print(f"report: scores file missing column {col!r}", file=sys.stderr)
            return 2

    contexts = load_contexts(cfg)
    known = set(contexts) | set(data_mod.LIGASES)
    scores: dict[tuple[str, str], float] = {}
    for row in rows:
        ligase = row["ligase"].strip()
        if ligase not in known:
            print(f"report: unknown ligase {ligase!r}", file=sys.stderr)
            return 6
        scores[(row["compound_id"].strip(), ligase)] = float(row["score"])

    compounds = sorted({c for c, _ in scores})
    ligases = sorted({l for _, l in scores})
    manifest.write_text(out / "score_heatmap.svg", svg.heatmap_svg(compounds, ligases, scores))
    figures.render_heatmap(compounds, ligases, scores, out / "score_heatmap.png")
    manifest.add_file(out / "score_heatmap.png")

    groups: dict[tuple[str, str], list[float]] = {}
    for (comp, lig), score in scores.items():
        design = comp.split("_", 1)[0]
        groups.setdefault((design, lig), []).append(score)
    avg_rows = []
    for (design, lig), values in sorted(groups.items()):
        avg_rows.append([design, lig, repr(sum(values) / len(values)), len(values)])
    manifest.write_text(
        out / "score_averages.csv",
        _csv_text(
            ["design_target", "docked_target", "mean_score", "n"],
            avg_rows,
            ["design target parsed from compound_id prefix before the first underscore"],
        ),
    )
    manifest.close()
    print(f"report: {len(compounds)} compounds x {len(ligases)} ligases")
    return 0


if __name__ == "__main__":
    sys.exit(main())
