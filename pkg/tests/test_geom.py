import math

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from gluegen.chem import parse_smiles
from gluegen.geom import (
    Conformer,
    GeometryError,
    SdfFormatError,
    bond_torsion_features,
    dihedral_angle,
    find_rotatable_bonds,
    kabsch_rmsd,
    kabsch_rmsd_coords,
    parse_sdf_v2000,
)

ETHANOL_BLOCK = """ethanol
  gluegen

  3  2  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    1.5000    0.0000    0.0000 C   0  0  0  0  0  0  0  0  0  0  0  0
    2.1000    1.3000    0.0000 O   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0
  2  3  1  0
M  END
$$$$
"""


def test_sdf_single_record():
    records = parse_sdf_v2000(ETHANOL_BLOCK)
    assert len(records) == 1
    mol, conf = records[0]
    assert [a.element for a in mol.atoms] == ["C", "C", "O"]
    assert np.allclose(conf.coords[2], [2.1, 1.3, 0.0])
    assert [a.implicit_h for a in mol.atoms] == [3, 2, 1]


def test_sdf_three_records_in_order():
    text = ETHANOL_BLOCK * 3
    records = parse_sdf_v2000(text)
    assert len(records) == 3


def test_sdf_truncated_atom_block():
    lines = ETHANOL_BLOCK.splitlines()
    truncated = "\n".join(lines[:5] + lines[6:])
    with pytest.raises(SdfFormatError):
        parse_sdf_v2000(truncated)


def test_sdf_bad_version_tag():
    bad = ETHANOL_BLOCK.replace("V2000", "V3000")
    with pytest.raises(SdfFormatError):
        parse_sdf_v2000(bad)


def test_sdf_non_numeric_coordinate():
    bad = ETHANOL_BLOCK.replace("    2.1000", "    xx1000")
    with pytest.raises(SdfFormatError):
        parse_sdf_v2000(bad)


def test_rotatable_bond_examples():
    assert find_rotatable_bonds(parse_smiles("CCO")) == []
    butane = parse_smiles("CCCC")
    idx = find_rotatable_bonds(butane)
    assert len(idx) == 1
    assert butane.bonds[idx[0]].key == (1, 2)
    biphenyl = parse_smiles("c1ccccc1-c2ccccc2")
    assert len(find_rotatable_bonds(biphenyl)) == 1


def _conf(coords):
    m = parse_smiles("CCCC")
    return Conformer(m, np.asarray(coords, dtype=float))


def test_dihedral_anti_is_180():
    c = _conf([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, -1, 0]])
    assert abs(dihedral_angle(c, 0, 1, 2, 3) - 180.0) < 1e-9


def test_dihedral_syn_is_0():
    c = _conf([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, 1, 0]])
    assert abs(dihedral_angle(c, 0, 1, 2, 3)) < 1e-9


def test_dihedral_perpendicular_is_plus_90():
    c = _conf([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, 0, 1]])
    assert abs(dihedral_angle(c, 0, 1, 2, 3) - 90.0) < 1e-9


def test_dihedral_rigid_invariance():
    rng = np.random.default_rng(5)
    base = rng.normal(size=(4, 3))
    c = _conf(base)
    ref = dihedral_angle(c, 0, 1, 2, 3)
    for seed in range(10):
        rot = Rotation.random(random_state=seed).as_matrix()
        shifted = base @ rot.T + rng.normal(size=3)
        angle = dihedral_angle(_conf(shifted), 0, 1, 2, 3)
        assert abs(angle - ref) < 1e-9


def test_dihedral_reversal_symmetry():
    rng = np.random.default_rng(9)
    for _ in range(20):
        c = _conf(rng.normal(size=(4, 3)))
        a = dihedral_angle(c, 0, 1, 2, 3)
        b = dihedral_angle(c, 3, 2, 1, 0)
        assert abs(abs(a) - abs(b)) < 1e-9


def test_dihedral_collinear_degenerate():
    c = _conf([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 1, 0]])
    with pytest.raises(GeometryError):
        dihedral_angle(c, 0, 1, 2, 3)


def test_torsion_features_absent_conformer():
    m = parse_smiles("CCCC")
    feats, warnings = bond_torsion_features(m, None)
    assert feats.shape == (3, 3)
    assert not feats.any()
    assert warnings == 0


def test_torsion_features_butane_anti():
    m = parse_smiles("CCCC")
    conf = Conformer(m, np.array([[0, 1, 0], [0, 0, 0], [1, 0, 0], [1, -1, 0]], dtype=float))
    feats, _ = bond_torsion_features(m, conf)
    assert np.allclose(feats[1], [math.sin(math.pi), math.cos(math.pi), 1.0], atol=1e-12)


def test_torsion_features_biphenyl_45_degrees():
    # rings built flat in the xy plane with the inter-ring bond (atoms 5-6)
    # along +x, then ring B twisted +45 degrees about that axis
    m = parse_smiles("c1ccccc1-c2ccccc2")
    theta = math.radians(45.0)
    coords = np.zeros((12, 3))
    for i in range(6):  # ring A: atom 5 at angle 0 facing ring B
        ang = math.radians(60.0 * ((i + 1) % 6))
        coords[i] = (math.cos(ang) - 2.0, math.sin(ang), 0.0)
    for i in range(6):  # ring B: atom 6 at angle 180 facing ring A
        ang = math.radians(180.0 - 60.0 * i)
        y = math.sin(ang)
        coords[6 + i] = (
            2.0 + math.cos(ang),
            y * math.cos(theta),
            y * math.sin(theta),
        )
    conf = Conformer(m, coords)
    feats, _ = bond_torsion_features(m, conf)
    rot = find_rotatable_bonds(m)
    assert m.bonds[rot[0]].key == (5, 6)
    sin, cos, flag = feats[rot[0]]
    assert flag == 1.0
    assert abs(dihedral_angle(conf, 0, 5, 6, 7) - 45.0) < 1e-9
    assert abs(sin - math.sin(theta)) < 1e-9
    assert abs(cos - math.cos(theta)) < 1e-9


def test_kabsch_self_zero():
    rng = np.random.default_rng(0)
    p = rng.normal(size=(8, 3))
    assert kabsch_rmsd_coords(p, p) < 1e-12


def test_kabsch_rigid_copy_below_1e9():
    rng = np.random.default_rng(1)
    p = rng.normal(size=(12, 3))
    for seed in range(5):
        rot = Rotation.random(random_state=seed).as_matrix()
        q = p @ rot.T + np.array([1.0, -2.0, 0.5])
        assert kabsch_rmsd_coords(p, q) < 1e-9


def test_kabsch_symmetry_and_nonnegativity():
    rng = np.random.default_rng(2)
    p, q = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
    assert kabsch_rmsd_coords(p, q) >= 0
    assert abs(kabsch_rmsd_coords(p, q) - kabsch_rmsd_coords(q, p)) < 1e-12


def test_kabsch_size_mismatch():
    with pytest.raises(GeometryError):
        kabsch_rmsd_coords(np.zeros((3, 3)), np.zeros((4, 3)))


def _brute_force_min_rmsd(p, q):
    """Independent alignment oracle: optimize rotation+translation directly."""

    def objective(x):
        rot = Rotation.from_rotvec(x[:3]).as_matrix()
        moved = p @ rot.T + x[3:]
        return np.sqrt(np.mean(np.sum((moved - q) ** 2, axis=1)))

    best = np.inf
    for seed in range(8):
        rng = np.random.default_rng(seed)
        x0 = np.concatenate([rng.normal(scale=1.5, size=3), rng.normal(scale=0.5, size=3)])
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 8000})
        best = min(best, res.fun)
    return best


def test_kabsch_single_atom_displacement_matches_brute_force():
    rng = np.random.default_rng(3)
    n = 8
    p = rng.normal(size=(n, 3))
    q = p.copy()
    q[0] += np.array([1.0, 0.0, 0.0])
    ours = kabsch_rmsd_coords(p, q)
    oracle = _brute_force_min_rmsd(p, q)
    assert ours <= oracle + 1e-7
    assert abs(ours - oracle) < 1e-5


def test_kabsch_via_conformers():
    m = parse_smiles("CCO")
    rng = np.random.default_rng(4)
    coords = rng.normal(size=(3, 3))
    a = Conformer(m, coords)
    b = Conformer(m, coords + 1.0)
    assert kabsch_rmsd(a, b) < 1e-9


def test_sdf_charge_lines():
    block = """charged
  gluegen

  2  1  0  0  0  0  0  0  0  0999 V2000
    0.0000    0.0000    0.0000 N   0  0  0  0  0  0  0  0  0  0  0  0
    1.5000    0.0000    0.0000 O   0  0  0  0  0  0  0  0  0  0  0  0
  1  2  1  0
M  CHG  2   1   1   2  -1
M  END
$$$$
"""
    mol, _ = parse_sdf_v2000(block)[0]
    assert mol.atoms[0].formal_charge == 1
    assert mol.atoms[1].formal_charge == -1


def test_rotatable_subset_of_single_acyclic(corpus):
    for smi in corpus[::10]:
        m = parse_smiles(smi)
        for bi in find_rotatable_bonds(m):
            b = m.bonds[bi]
            assert b.order == 1
            assert not b.in_ring
