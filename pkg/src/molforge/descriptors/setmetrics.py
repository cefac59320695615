"""Validity, uniqueness and novelty over a generated batch."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..mol import Molecule3D, MoleculeError
from ..smiles import write_smiles


@dataclass
class SetMetrics:
    validity: float
    uniqueness: float
    novelty: float
    flags: list[str] = field(default_factory=list)


def is_valid_molecule(mol: Molecule3D) -> bool:
    if not len(mol.atoms):
        return False
    if not mol.is_connected():
        return False
    try:
        mol.check_valences()
    except MoleculeError:
        return False
    return True


def set_metrics(generated: list[Molecule3D], training: set[str]) -> SetMetrics:
    flags: list[str] = []
    if not generated:
        return SetMetrics(0.0, 0.0, 0.0, ["empty-batch"])

    canonical = []
    for mol in generated:
        if not is_valid_molecule(mol):
            continue
        try:
            canonical.append(write_smiles(mol))
        except MoleculeError:
            continue

    validity = len(canonical) / len(generated)
    unique = set(canonical)
    if canonical:
        uniqueness = len(unique) / len(canonical)
    else:
        uniqueness = 0.0
        flags.append("no-valid-molecules")
    if unique:
        novelty = len(unique - training) / len(unique)
    else:
        novelty = 0.0
        flags.append("no-unique-molecules")
    return SetMetrics(validity, uniqueness, novelty, flags)
