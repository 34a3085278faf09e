"""Compound library ingestion, ADMET filtering, affinity stratification and
the summary tables feeding reports and training-pair construction."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .chem import ChemError, Molecule, parse_smiles, write_canonical_smiles
from .chem.scaffold import murcko_scaffold
from .jtree import MultiFragmentError, decompose
from .model.config import LigaseContext

LIGASES = ("CRBN", "VHL", "MDM2")
ACYCLIC_BUCKET = "(acyclic)"

MANDATORY_COLUMNS = (
    "id",
    "smiles",
    "library",
    "MW",
    "logPo_w",
    "logS",
    "logHERG",
    "metab",
    "ro5_violations",
)


class SchemaError(ValueError):
    """Compound CSV is missing mandatory columns or is empty."""


@dataclass
class CompoundRecord:
    id: str
    smiles: str
    library: str
    mw: float
    logp: float
    logs: float
    logherg: float
    metab: int
    ro5_violations: int
    dock: dict[str, float] = field(default_factory=dict)


@dataclass
class FilterSpec:
    mw_min: float = 130.0
    mw_max: float = 725.0
    logp_min: float = -2.0
    logp_max: float = 6.5
    logs_min: float = -6.5
    logs_max: float = 0.5
    logherg_max: float = -5.0  # strict: logHERG must be below this
    metab_min: int = 1
    metab_max: int = 8
    ro5_max: int = 1

    def __post_init__(self):
        for lo, hi, name in (
            (self.mw_min, self.mw_max, "mw"),
            (self.logp_min, self.logp_max, "logp"),
            (self.logs_min, self.logs_max, "logs"),
            (self.metab_min, self.metab_max, "metab"),
        ):
            if lo > hi:
                raise ValueError(f"{name}: lower bound {lo} above upper bound {hi}")


HIGH, LOW, NONE = "High", "Low", "None"
AFFINITY_CLASSES = (HIGH, LOW, NONE)


def classify_affinity(score: float) -> str:
    """High below -5, Low in [-5, -1], None above -1 (boundaries go to Low)."""
    if not math.isfinite(score):
        raise ValueError(f"non-finite docking score {score}")
    if score < -5.0:
        return HIGH
    if score <= -1.0:
        return LOW
    return NONE


def ingest_compounds_csv(source) -> tuple[list[CompoundRecord], list[tuple[int, str]]]:
    """Parse the compound CSV; returns (records, rejections as (line, reason)).

    ``source`` is a path or a file-like object. Malformed rows are rejected
    with their line number, never dropped silently.
    """
    if hasattr(source, "read"):
        return _ingest(source)
    with open(source, newline="", encoding="utf-8") as fh:
        return _ingest(fh)


def _ingest(fh) -> tuple[list[CompoundRecord], list[tuple[int, str]]]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None:
        raise SchemaError("empty compound file")
    missing = [c for c in MANDATORY_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise SchemaError(f"missing mandatory columns: {', '.join(missing)}")

    records: list[CompoundRecord] = []
    rejected: list[tuple[int, str]] = []
    seen_ids: set[str] = set()
    for line_no, row in enumerate(reader, start=2):
        try:
            rec = _parse_row(row)
        except (ValueError, KeyError) as exc:
            rejected.append((line_no, str(exc)))
            continue
        if rec.id in seen_ids:
            rejected.append((line_no, f"duplicate id {rec.id!r}"))
            continue
        seen_ids.add(rec.id)
        records.append(rec)
    return records, rejected


def _parse_row(row: dict) -> CompoundRecord:
    ident = (row.get("id") or "").strip()
    if not ident:
        raise ValueError("missing id")
    smiles = (row.get("smiles") or "").strip()
    if not smiles:
        raise ValueError("missing smiles")

    def num(col: str) -> float:
        raw = (row.get(col) or "").strip()
        try:
            value = float(raw)
        except ValueError:
            raise ValueError(f"non-numeric {col}: {raw!r}") from None
        if not math.isfinite(value):
            raise ValueError(f"non-finite {col}")
        return value

    def integer(col: str) -> int:
        value = num(col)
        if value != int(value):
            raise ValueError(f"non-integer {col}: {value}")
        return int(value)

    dock = {}
    for ligase in LIGASES:
        raw = (row.get(f"dock_{ligase}") or "").strip()
        if raw:
            score = float(raw)
            if not math.isfinite(score):
                raise ValueError(f"non-finite dock_{ligase}")
            dock[ligase] = score

    return CompoundRecord(
        id=ident,
        smiles=smiles,
        library=(row.get("library") or "other").strip() or "other",
        mw=num("MW"),
        logp=num("logPo_w"),
        logs=num("logS"),
        logherg=num("logHERG"),
        metab=integer("metab"),
        ro5_violations=integer("ro5_violations"),
        dock=dock,
    )


def admet_filter(
    records: list[CompoundRecord], spec: FilterSpec | None = None
) -> tuple[list[CompoundRecord], list[tuple[CompoundRecord, list[str]]]]:
    """Window filter; failures carry every violated bound."""
    spec = spec or FilterSpec()
    passed, failed = [], []
    for rec in records:
        reasons = []
        if not spec.mw_min <= rec.mw <= spec.mw_max:
            reasons.append(f"MW {rec.mw:g} outside [{spec.mw_min:g}, {spec.mw_max:g}]")
        if not spec.logp_min <= rec.logp <= spec.logp_max:
            reasons.append(f"logPo_w {rec.logp:g} outside [{spec.logp_min:g}, {spec.logp_max:g}]")
        if not spec.logs_min <= rec.logs <= spec.logs_max:
            reasons.append(f"logS {rec.logs:g} outside [{spec.logs_min:g}, {spec.logs_max:g}]")
        if not rec.logherg < spec.logherg_max:
            reasons.append(f"logHERG {rec.logherg:g} not below {spec.logherg_max:g}")
        if not spec.metab_min <= rec.metab <= spec.metab_max:
            reasons.append(f"metab {rec.metab} outside [{spec.metab_min}, {spec.metab_max}]")
        if rec.ro5_violations > spec.ro5_max:
            reasons.append(f"ro5_violations {rec.ro5_violations} above {spec.ro5_max}")
        if reasons:
            failed.append((rec, reasons))
        else:
            passed.append(rec)
    return passed, failed


SUMMARY_STATS = ("count", "mean", "std", "min", "q25", "median", "q75", "max")
SUMMARY_PROPERTIES = ("MW", "logPo_w", "logS", "metab", "ro5_violations")


def summarize_properties(records: list[CompoundRecord]) -> dict[str, dict[str, float]]:
    """Per-property count/mean/std/min/quartiles/max (sample std, linear
    interpolation quantiles)."""
    if not records:
        raise ValueError("cannot summarize an empty record set")
    getters = {
        "MW": lambda r: r.mw,
        "logPo_w": lambda r: r.logp,
        "logS": lambda r: r.logs,
        "metab": lambda r: float(r.metab),
        "ro5_violations": lambda r: float(r.ro5_violations),
    }
    out = {}
    for prop, get in getters.items():
        values = np.array([get(r) for r in records], dtype=np.float64)
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        out[prop] = {
            "count": float(len(values)),
            "mean": float(values.mean()),
            "std": std,
            "min": float(values.min()),
            "q25": float(np.percentile(values, 25)),
            "median": float(np.percentile(values, 50)),
            "q75": float(np.percentile(values, 75)),
            "max": float(values.max()),
        }
    return out


def affinity_count_table(
    records: list[CompoundRecord], ligases=LIGASES
) -> dict[tuple[str, str], dict[str, int]]:
    """(ligase, library) -> counts per affinity class plus missing/total."""
    table: dict[tuple[str, str], dict[str, int]] = {}
    for rec in records:
        for ligase in ligases:
            key = (ligase, rec.library)
            cell = table.setdefault(
                key, {HIGH: 0, LOW: 0, NONE: 0, "missing": 0, "total": 0}
            )
            if ligase in rec.dock:
                cell[classify_affinity(rec.dock[ligase])] += 1
                cell["total"] += 1
            else:
                cell["missing"] += 1
    return table


def scaffold_frequency(
    records: list[CompoundRecord], ligase: str | None = None, affinity: str | None = None
) -> list[tuple[str, int]]:
    """Ranked (scaffold canonical SMILES, count); acyclic scaffolds pool into
    one named bucket. Unparseable compounds are skipped."""
    counts: dict[str, int] = {}
    for rec in records:
        if ligase is not None:
            if ligase not in rec.dock:
                continue
            if affinity is not None and classify_affinity(rec.dock[ligase]) != affinity:
                continue
        try:
            mol = parse_smiles(rec.smiles)
        except ChemError:
            continue
        scaffold = murcko_scaffold(mol)
        label = write_canonical_smiles(scaffold) if scaffold.atoms else ACYCLIC_BUCKET
        counts[label] = counts.get(label, 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass
class TrainingPair:
    compound: CompoundRecord
    molecule: Molecule
    ligase: LigaseContext
    affinity: str


def build_training_pairs(
    records: list[CompoundRecord],
    contexts: dict[str, LigaseContext],
    include_low: bool = False,
) -> tuple[list[TrainingPair], list[tuple[str, str, str]]]:
    """Pair each ligase with its High-affinity (optionally Low) compounds.

    Returns (pairs, exclusions as (compound id, ligase, reason)). Compounds
    that fail to parse or decompose are excluded with reasons.
    """
    wanted = {HIGH, LOW} if include_low else {HIGH}
    pairs: list[TrainingPair] = []
    excluded: list[tuple[str, str, str]] = []
    parsed: dict[str, Molecule | str] = {}
    for rec in records:
        for ligase_id, ctx in contexts.items():
            if ligase_id not in rec.dock:
                continue
            affinity = classify_affinity(rec.dock[ligase_id])
            if affinity not in wanted:
                continue
            if rec.id not in parsed:
                try:
                    mol = parse_smiles(rec.smiles)
                    decompose(mol)
                    parsed[rec.id] = mol
                except MultiFragmentError:
                    parsed[rec.id] = "multi-fragment smiles"
                except ChemError as exc:
                    parsed[rec.id] = f"parse/decompose failure: {exc}"
            entry = parsed[rec.id]
            if isinstance(entry, str):
                excluded.append((rec.id, ligase_id, entry))
            else:
                pairs.append(TrainingPair(compound=rec, molecule=entry, ligase=ctx, affinity=affinity))
    return pairs, excluded
