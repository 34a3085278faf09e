from gluegen.chem import Atom, Bond, Molecule, check_valence, parse_smiles


def test_ethanol_passes():
    assert check_valence(parse_smiles("CCO")).ok


def test_constructed_five_bonded_carbon_fails():
    m = Molecule()
    m.atoms = [Atom(index=i, element="C", implicit_h=3 if i else 0) for i in range(6)]
    m.atoms[0].implicit_h = 0
    m.bonds = [Bond(a=0, b=i) for i in range(1, 6)]
    report = check_valence(m)
    assert not report.ok
    assert report.failures[0][0] == 0


def test_sulfuric_acid_sulfur_valence_six():
    m = parse_smiles("O=S(=O)(O)O")
    # S: two double bonds (4) + two singles (2) = 6
    report = check_valence(m)
    assert report.ok
    s_idx = next(a.index for a in m.atoms if a.element == "S")
    from gluegen.chem.mol import atom_valence

    assert atom_valence(m, s_idx) == 6
