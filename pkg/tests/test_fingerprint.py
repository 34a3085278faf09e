import pytest

from gluegen.chem import circular_fingerprint, parse_smiles, tanimoto


def test_self_similarity_is_one():
    for smi in ("CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O"):
        fp = circular_fingerprint(parse_smiles(smi))
        assert tanimoto(fp, fp) == 1.0


def test_representation_invariance():
    a = circular_fingerprint(parse_smiles("CCO"))
    b = circular_fingerprint(parse_smiles("OCC"))
    assert a.bits == b.bits


def test_different_molecules_not_identical():
    benzene = circular_fingerprint(parse_smiles("c1ccccc1"))
    pyridine = circular_fingerprint(parse_smiles("c1ccncc1"))
    assert tanimoto(benzene, pyridine) < 1.0


def test_symmetry(corpus):
    mols = [parse_smiles(s) for s in corpus[:10]]
    fps = [circular_fingerprint(m) for m in mols]
    for i in range(len(fps)):
        for j in range(i + 1, len(fps)):
            assert tanimoto(fps[i], fps[j]) == tanimoto(fps[j], fps[i])


def test_nonempty_molecule_sets_bits(corpus):
    for smi in corpus[::10]:
        assert circular_fingerprint(parse_smiles(smi)).popcount() >= 1


def test_nbits_power_of_two_required():
    with pytest.raises(ValueError):
        circular_fingerprint(parse_smiles("CCO"), nbits=1000)


def test_byte_layout_little_endian_bit_order():
    fp = circular_fingerprint(parse_smiles("CCO"), nbits=64)
    raw = fp.to_bytes()
    assert len(raw) == 8
    for i in fp.on_bits():
        assert (raw[i // 8] >> (i % 8)) & 1


def test_radius_zero_differs_from_radius_two():
    m = parse_smiles("CC(C)Cc1ccc(C(C)C(=O)O)cc1")
    f0 = circular_fingerprint(m, radius=0)
    f2 = circular_fingerprint(m, radius=2)
    assert f0.bits != f2.bits
    assert f2.popcount() > f0.popcount()
