"""Generated-set quality metrics: validity, uniqueness, novelty, rule-of-five
adherence and a simplified logistic drug-likeness score.

Denominators follow the conventional definitions and are printed in every
report header: uniqueness is over valid samples, novelty over unique valid
canonical forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

from .chem import ChemError, check_valence, parse_smiles, write_canonical_smiles
from .chem.descriptors import Descriptors, compute_descriptors

UNIQUENESS_DENOMINATOR = "valid samples"
NOVELTY_DENOMINATOR = "unique valid canonical forms"

_QED = None


def _qed_table() -> dict:
    global _QED
    if _QED is None:
        text = resources.files("gluegen.data").joinpath("qed_desirability.json").read_text()
        _QED = json.loads(text)
    return _QED


@dataclass
class SampleDetail:
    index: int
    smiles: str
    valid: bool
    reason: str = ""
    canonical: str = ""
    lipinski_violations: int = 0
    lipinski_pass: bool = False
    qed: float = 0.0
    novel: bool | None = None


@dataclass
class GenerationReport:
    n_samples: int
    n_valid: int
    n_unique: int
    n_novel: int
    validity: float | None
    uniqueness: float | None
    novelty: float | None
    mean_qed_lite: float | None
    lipinski_rate: float | None
    details: list[SampleDetail] = field(default_factory=list)


def validity(samples: list[str]) -> tuple[float | None, list[SampleDetail]]:
    """Fraction of samples that parse and pass the valence check."""
    details = []
    n_valid = 0
    for i, smi in enumerate(samples):
        detail = SampleDetail(index=i, smiles=smi, valid=False)
        try:
            mol = parse_smiles(smi)
            report = check_valence(mol)
            if report.ok:
                detail.valid = True
                detail.canonical = write_canonical_smiles(mol)
                n_valid += 1
            else:
                detail.reason = f"valence: {report.failures[0][1]}"
        except (ChemError, ValueError) as exc:
            detail.reason = f"{type(exc).__name__}: {exc}"
        details.append(detail)
    fraction = n_valid / len(samples) if samples else None
    return fraction, details


def uniqueness(samples: list[str]) -> float | None:
    """Distinct canonical forms among valid samples / valid samples."""
    _, details = validity(samples)
    valid = [d.canonical for d in details if d.valid]
    if not valid:
        return None
    return len(set(valid)) / len(valid)


def novelty(samples: list[str], training_canonical: set[str]) -> float | None:
    """Unique valid canonical forms absent from training / unique valid."""
    _, details = validity(samples)
    unique = set(d.canonical for d in details if d.valid)
    if not unique:
        return None
    return len(unique - training_canonical) / len(unique)


def lipinski_violations(d: Descriptors) -> tuple[int, bool]:
    """Count of rule-of-five violations; pass means at most one."""
    violations = 0
    if d.mw > 500:
        violations += 1
    if d.logp > 5:
        violations += 1
    if d.hbd > 5:
        violations += 1
    if d.hba > 10:
        violations += 1
    return violations, violations <= 1


def qed_lite(d: Descriptors) -> float:
    """Geometric mean of six logistic desirability windows.

    A simplified stand-in for full QED: no structural alerts, parameters
    from the shipped desirability table.
    """
    table = _qed_table()["properties"]
    values = {
        "mw": d.mw,
        "logp": d.logp,
        "hbd": float(d.hbd),
        "hba": float(d.hba),
        "rot_bonds": float(d.rot_bonds),
        "aromatic_rings": float(d.aromatic_rings),
    }
    log_sum = 0.0
    for prop, x in values.items():
        p = table[prop]
        desirability = _logistic((x - p["lo"]) / p["w_lo"]) * _logistic((p["hi"] - x) / p["w_hi"])
        log_sum += math.log(max(desirability, 1e-300))
    return math.exp(log_sum / len(values))


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def generation_report(samples: list[str], training_canonical: set[str]) -> GenerationReport:
    frac_valid, details = validity(samples)
    seen: set[str] = set()
    unique: set[str] = set()
    for d in details:
        if not d.valid:
            continue
        mol = parse_smiles(d.smiles)
        desc = compute_descriptors(mol)
        d.lipinski_violations, d.lipinski_pass = lipinski_violations(desc)
        d.qed = qed_lite(desc)
        d.novel = d.canonical not in training_canonical
        seen.add(d.canonical)
    unique = seen
    n_valid = sum(1 for d in details if d.valid)
    n_unique = len(unique)
    n_novel = len(unique - training_canonical)
    valid_details = [d for d in details if d.valid]
    return GenerationReport(
        n_samples=len(samples),
        n_valid=n_valid,
        n_unique=n_unique,
        n_novel=n_novel,
        validity=frac_valid,
        uniqueness=(n_unique / n_valid) if n_valid else None,
        novelty=(n_novel / n_unique) if n_unique else None,
        mean_qed_lite=(sum(d.qed for d in valid_details) / n_valid) if n_valid else None,
        lipinski_rate=(sum(1 for d in valid_details if d.lipinski_pass) / n_valid) if n_valid else None,
        details=details,
    )
