import io
import math

import numpy as np
import pytest

from gluegen.pipeline import (
    ACYCLIC_BUCKET,
    CompoundRecord,
    FilterSpec,
    SchemaError,
    admet_filter,
    affinity_count_table,
    build_training_pairs,
    classify_affinity,
    ingest_compounds_csv,
    scaffold_frequency,
    summarize_properties,
)
from gluegen.model.config import LigaseContext

HEADER = "id,smiles,library,MW,logPo_w,logS,logHERG,metab,ro5_violations,dock_CRBN,dock_VHL,dock_MDM2"


def _rec(ident="c1", smiles="CCO", mw=300.0, logp=2.0, logs=-4.0, logherg=-6.0,
         metab=3, ro5=0, dock=None):
    return CompoundRecord(
        id=ident, smiles=smiles, library="ChEMBL", mw=mw, logp=logp, logs=logs,
        logherg=logherg, metab=metab, ro5_violations=ro5, dock=dock or {},
    )


def test_ingest_three_rows():
    text = HEADER + "\n" + "\n".join(
        f"x{i},CCO,ChEMBL,300,2,-4,-6,3,0,-5.5,," for i in range(3)
    )
    records, rejected = ingest_compounds_csv(io.StringIO(text))
    assert len(records) == 3
    assert rejected == []
    assert records[0].dock == {"CRBN": -5.5}


def test_ingest_rejects_non_numeric_mw_with_line():
    text = HEADER + "\nok1,CCO,ChEMBL,300,2,-4,-6,3,0,,,\nbad,CCO,ChEMBL,heavy,2,-4,-6,3,0,,,"
    records, rejected = ingest_compounds_csv(io.StringIO(text))
    assert len(records) == 1
    assert rejected[0][0] == 3
    assert "MW" in rejected[0][1]


def test_ingest_rejects_duplicate_id():
    text = HEADER + "\nsame,CCO,ChEMBL,300,2,-4,-6,3,0,,,\nsame,CCN,Vitas,310,2,-4,-6,3,0,,,"
    records, rejected = ingest_compounds_csv(io.StringIO(text))
    assert len(records) == 1
    assert records[0].smiles == "CCO"  # first occurrence wins
    assert "duplicate" in rejected[0][1]


def test_ingest_missing_columns():
    with pytest.raises(SchemaError):
        ingest_compounds_csv(io.StringIO("id,smiles\nc,CCO"))


def test_ingest_empty_file():
    with pytest.raises(SchemaError):
        ingest_compounds_csv(io.StringIO(""))


def test_admet_table1_mean_profile_passes():
    rec = _rec(mw=366.68, logp=3.39, logs=-4.59, logherg=-6.0, metab=4, ro5=0)
    passed, failed = admet_filter([rec])
    assert passed == [rec]
    assert failed == []


def test_admet_mw_129_fails_window():
    passed, failed = admet_filter([_rec(mw=129.0)])
    assert not passed
    reasons = failed[0][1]
    assert any("MW" in r for r in reasons)


def test_admet_logherg_bound_is_strict():
    passed, failed = admet_filter([_rec(logherg=-4.5)])
    assert not passed
    assert any("logHERG" in r for r in failed[0][1])
    passed, _ = admet_filter([_rec(logherg=-5.0)])
    assert not passed  # exactly -5 is not below -5


def test_admet_failure_lists_every_violated_bound():
    _, failed = admet_filter([_rec(mw=1000.0, logp=9.0, metab=20)])
    reasons = failed[0][1]
    assert len(reasons) == 3


def test_admet_conservation_and_idempotence():
    records = [_rec(ident=f"r{i}", mw=100.0 + 50 * i) for i in range(12)]
    passed, failed = admet_filter(records)
    assert len(passed) + len(failed) == len(records)
    again_passed, again_failed = admet_filter(passed)
    assert again_passed == passed
    assert again_failed == []


@pytest.mark.parametrize(
    "score,expected",
    [(-6.2, "High"), (-5.0, "Low"), (-3.0, "Low"), (-1.0, "Low"), (-0.5, "None"), (0.5, "None")],
)
def test_affinity_classification(score, expected):
    assert classify_affinity(score) == expected


def test_affinity_partition_property():
    rng = np.random.default_rng(0)
    for score in rng.normal(scale=5, size=200):
        assert classify_affinity(float(score)) in ("High", "Low", "None")


def test_affinity_non_finite_rejected():
    with pytest.raises(ValueError):
        classify_affinity(math.nan)


def test_summary_basic_stats():
    records = [_rec(ident=f"r{i}", mw=float(v)) for i, v in enumerate([1, 2, 3])]
    s = summarize_properties(records)["MW"]
    assert s["count"] == 3
    assert s["mean"] == 2.0
    assert s["std"] == 1.0
    assert s["median"] == 2.0


def test_summary_constant_column():
    records = [_rec(ident=f"r{i}", logp=1.5) for i in range(4)]
    s = summarize_properties(records)["logPo_w"]
    assert s["std"] == 0.0
    assert s["min"] == s["max"] == 1.5


def test_summary_q75_linear_interpolation():
    records = [_rec(ident=f"r{i}", mw=float(v)) for i, v in enumerate([1, 2, 3, 4, 100])]
    s = summarize_properties(records)["MW"]
    assert s["q75"] == 4.0


def test_summary_quantile_monotonicity():
    rng = np.random.default_rng(1)
    records = [_rec(ident=f"r{i}", mw=float(v)) for i, v in enumerate(rng.uniform(100, 700, 30))]
    s = summarize_properties(records)["MW"]
    assert s["min"] <= s["q25"] <= s["median"] <= s["q75"] <= s["max"]


def test_summary_empty_rejected():
    with pytest.raises(ValueError):
        summarize_properties([])


def test_affinity_count_table_basics():
    records = [
        _rec(ident="a", dock={"VHL": -6.0}),
        _rec(ident="b", dock={"VHL": -0.5}),
    ]
    table = affinity_count_table(records, ligases=("VHL",))
    cell = table[("VHL", "ChEMBL")]
    assert cell["High"] == 1
    assert cell["Low"] == 0
    assert cell["None"] == 1
    assert cell["total"] == 2


def test_affinity_count_missing_column():
    records = [_rec(ident="a", dock={"VHL": -6.0})]
    table = affinity_count_table(records, ligases=("VHL", "MDM2"))
    assert table[("MDM2", "ChEMBL")]["missing"] == 1
    assert table[("MDM2", "ChEMBL")]["total"] == 0


def test_affinity_count_deterministic():
    records = [_rec(ident=f"r{i}", dock={"CRBN": -6.0 + i}) for i in range(5)]
    assert affinity_count_table(records) == affinity_count_table(records)


def test_scaffold_frequency_groups_to_benzene():
    records = [
        _rec(ident="t", smiles="Cc1ccccc1", dock={"VHL": -6.0}),
        _rec(ident="e", smiles="CCc1ccccc1", dock={"VHL": -6.0}),
    ]
    ranked = scaffold_frequency(records, "VHL", "High")
    assert len(ranked) == 1
    assert ranked[0][1] == 2


def test_scaffold_frequency_acyclic_bucket():
    ranked = scaffold_frequency([_rec(ident="e", smiles="CCO")])
    assert ranked == [(ACYCLIC_BUCKET, 1)]


def test_scaffold_frequency_empty_selection():
    assert scaffold_frequency([], "VHL", "High") == []


def test_training_pairs_default_high_only():
    ctx = {"VHL": LigaseContext("VHL", "ACD")}
    records = [
        _rec(ident="hi", dock={"VHL": -6.0}),
        _rec(ident="lo", dock={"VHL": -3.0}),
        _rec(ident="no", dock={"VHL": 1.0}),
    ]
    pairs, excluded = build_training_pairs(records, ctx)
    assert [p.compound.id for p in pairs] == ["hi"]
    assert excluded == []


def test_training_pairs_include_low():
    ctx = {"VHL": LigaseContext("VHL", "ACD")}
    records = [_rec(ident="hi", dock={"VHL": -6.0}), _rec(ident="lo", dock={"VHL": -3.0})]
    pairs, _ = build_training_pairs(records, ctx, include_low=True)
    assert sorted(p.compound.id for p in pairs) == ["hi", "lo"]


def test_training_pairs_exclude_multifragment():
    ctx = {"VHL": LigaseContext("VHL", "ACD")}
    records = [_rec(ident="salt", smiles="CC.O", dock={"VHL": -6.0})]
    pairs, excluded = build_training_pairs(records, ctx)
    assert pairs == []
    assert excluded[0][0] == "salt"
    assert "multi-fragment" in excluded[0][2]
