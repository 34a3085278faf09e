import json
from importlib import resources

from gluegen.chem import Molecule, compute_descriptors, parse_smiles


def test_ethanol_descriptors():
    d = compute_descriptors(parse_smiles("CCO"))
    assert abs(d.mw - 46.069) < 0.01
    assert d.hbd == 1
    assert d.hba == 1
    assert d.rot_bonds == 0


def test_benzene_descriptors():
    d = compute_descriptors(parse_smiles("c1ccccc1"))
    assert d.hbd == 0
    assert d.hba == 0
    assert d.aromatic_rings == 1


def test_empty_molecule_returns_zeroed_block():
    d = compute_descriptors(Molecule())
    assert d.mw == 0.0
    assert d.hbd == d.hba == d.rot_bonds == d.aromatic_rings == 0
    assert d.logp == 0.0


def test_butane_rotatable_bond():
    assert compute_descriptors(parse_smiles("CCCC")).rot_bonds == 1


def test_logp_table_is_versioned():
    table = json.loads(
        resources.files("gluegen.data").joinpath("crippen_contributions.json").read_text()
    )
    assert "version" in table
    assert table["classes"]


def test_logp_sane_values():
    # hydrophobic molecules score higher than polar ones
    benzene = compute_descriptors(parse_smiles("c1ccccc1")).logp
    ethanol = compute_descriptors(parse_smiles("CCO")).logp
    assert benzene > ethanol
    assert 1.0 < benzene < 3.0
    assert -1.0 < ethanol < 1.0


def test_counts_nonnegative_over_corpus(corpus):
    for smi in corpus[::5]:
        d = compute_descriptors(parse_smiles(smi))
        assert d.mw > 0
        assert min(d.hbd, d.hba, d.rot_bonds, d.aromatic_rings) >= 0
