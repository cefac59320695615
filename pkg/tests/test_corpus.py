"""The bundled reference set must stay parseable and canonically stable."""

from importlib import resources

from molforge.smiles import parse_smiles, write_smiles


def load_corpus():
    ref = resources.files("molforge.descriptors") / "data" / "reference_corpus.smi"
    rows = []
    for line in ref.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        smiles, name = line.split("\t")
        rows.append((smiles, name))
    return rows


def test_corpus_has_fifty_entries():
    assert len(load_corpus()) == 50


def test_corpus_parses_and_roundtrips():
    for smiles, name in load_corpus():
        mol = parse_smiles(smiles)
        out = write_smiles(mol)
        again = write_smiles(parse_smiles(out))
        assert out == again, name


def test_corpus_canonical_forms_distinct():
    forms = [write_smiles(parse_smiles(s)) for s, _ in load_corpus()]
    assert len(set(forms)) == 50
