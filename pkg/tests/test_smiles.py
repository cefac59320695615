import pytest

from molforge.mol import AROMATIC, DOUBLE, SINGLE, UnsupportedElementError, ValenceError, same_graph
from molforge.smiles import SmilesSyntaxError, canonical_smiles, parse_smiles, write_smiles


def counts(mol):
    out = {}
    for a in mol.atoms:
        out[a.element] = out.get(a.element, 0) + 1
    return out


def test_methane():
    mol = parse_smiles("C")
    assert counts(mol) == {"C": 1, "H": 4}
    assert len(mol.bonds) == 4
    assert all(b.order == SINGLE for b in mol.bonds)


def test_piperazine_ring():
    mol = parse_smiles("C1CNCCN1")
    # C4H10N2: each CH2 carries 2 H, each NH carries 1
    assert counts(mol) == {"C": 4, "N": 2, "H": 10}
    heavy_bonds = [b for b in mol.bonds if "H" not in (mol.atoms[b.a].element, mol.atoms[b.b].element)]
    assert len(heavy_bonds) == 6  # one ring
    assert all(b.order == SINGLE for b in mol.bonds)


def test_unclosed_ring_is_syntax_error():
    with pytest.raises(SmilesSyntaxError):
        parse_smiles("C1CC")


def test_syntax_error_carries_offset():
    with pytest.raises(SmilesSyntaxError) as err:
        parse_smiles("CC)C")
    assert err.value.offset == 2


def test_unsupported_element():
    with pytest.raises(UnsupportedElementError):
        parse_smiles("CBr")
    with pytest.raises(UnsupportedElementError):
        parse_smiles("[Se]")


def test_valence_violation():
    with pytest.raises(ValenceError):
        parse_smiles("C(C)(C)(C)(C)C")
    with pytest.raises(ValenceError):
        parse_smiles("O(C)(C)C")


def test_benzene_aromatic():
    mol = parse_smiles("c1ccccc1")
    assert counts(mol) == {"C": 6, "H": 6}
    ring = [b for b in mol.bonds if b.order == AROMATIC]
    assert len(ring) == 6
    assert all(mol.atoms[i].aromatic for i in range(6))


def test_pyridine_and_pyrrole_hydrogens():
    pyridine = parse_smiles("c1ccncc1")
    assert counts(pyridine) == {"C": 5, "N": 1, "H": 5}
    pyrrole = parse_smiles("c1cc[nH]c1")
    assert counts(pyrrole) == {"C": 4, "N": 1, "H": 5}


def test_antiaromatic_pi_count_rejected():
    with pytest.raises(ValenceError):
        parse_smiles("c1cccc1")  # five carbons cannot pair their pi electrons


def test_charges_and_brackets():
    mol = parse_smiles("C[N+](C)(C)C")
    n = next(a for a in mol.atoms if a.element == "N")
    assert n.charge == 1
    nitro = parse_smiles("Cc1ccc(cc1)[N+](=O)[O-]")
    charges = sorted(a.charge for a in nitro.atoms if a.element in ("N", "O"))
    assert charges == [-1, 0, 1]


def test_double_triple_bonds():
    mol = parse_smiles("C=C")
    assert counts(mol) == {"C": 2, "H": 4}
    assert sum(1 for b in mol.bonds if b.order == DOUBLE) == 1
    mol = parse_smiles("C#N")
    assert counts(mol) == {"C": 1, "N": 1, "H": 1}


def test_branching():
    mol = parse_smiles("CC(C)(C)C")  # neopentane
    assert counts(mol) == {"C": 5, "H": 12}
    center = [i for i in range(5) if len([j for j in mol.neighbors(i) if mol.atoms[j].element == "C"]) == 4]
    assert len(center) == 1


def test_writer_methane():
    assert write_smiles(parse_smiles("C")) == "C"


def test_writer_canonical_across_orderings():
    variants = ["C1CNCCN1", "N1CCNCC1", "C1NCCNC1"]
    rendered = {write_smiles(parse_smiles(s)) for s in variants}
    assert len(rendered) == 1


def test_writer_canonical_benzene_orderings():
    rendered = {
        write_smiles(parse_smiles(s))
        for s in ["c1ccccc1", "c1ccc(cc1)", "C1=CC=CC=C1"][:2]
    }
    assert len(rendered) == 1


def test_roundtrip_small_set():
    cases = [
        "C",
        "CC",
        "C=C",
        "C#C",
        "CO",
        "C1CNCCN1",
        "c1ccccc1",
        "CC(=O)O",
        "CC(=O)Oc1ccccc1C(=O)O",
        "C[N+](C)(C)C",
        "CS(=O)(=O)N",
        "FC(F)(F)c1ccccc1",
        "Clc1ccccc1",
        "c1cc[nH]c1",
        "CC1=CC(=O)NC1",
        "O",
        "[H][H]",
    ]
    for s in cases:
        mol = parse_smiles(s)
        out = write_smiles(mol)
        back = parse_smiles(out)
        assert same_graph(mol, back), f"round trip failed for {s} -> {out}"


def test_roundtrip_is_stable():
    # write(parse(write(m))) == write(m): canonical form is a fixed point
    for s in ["CC(=O)Oc1ccccc1C(=O)O", "C1CNCCN1", "CC(C)Cc1ccc(cc1)C(C)C(=O)O"]:
        first = canonical_smiles(s)
        assert canonical_smiles(first) == first


def test_hydrogen_molecule():
    mol = parse_smiles("[H][H]")
    assert counts(mol) == {"H": 2}
    assert write_smiles(mol) == "[H][H]"


def test_explicit_h_counts_in_brackets():
    mol = parse_smiles("[NH3+]CC([O-])=O")  # glycine zwitterion
    n = next(a for a in mol.atoms if a.element == "N")
    assert n.charge == 1
    assert mol.h_count(mol.atoms.index(n)) == 3
    out = write_smiles(mol)
    assert same_graph(parse_smiles(out), mol)
