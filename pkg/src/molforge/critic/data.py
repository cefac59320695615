"""Labeled-pair dataset IO: paired XYZ files plus a CSV manifest.

Layout of a dataset directory:

    manifest.csv             id, active, affinity, residue_types, atom_residue
    pocket_<id>.xyz          pocket atomic nodes
    ligand_<id>.xyz          ligand atoms (bonds re-perceived on demand)

Residue-level pocket structure rides in the manifest as ;-joined ints,
keeping the XYZ files plain.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..elements import ELEMENTS
from ..fileio import read_csv, read_xyz, write_csv, write_xyz
from ..mol import Atom, Molecule3D
from .graphs import PocketGraph
from .training import LabeledPair


def save_pairs(directory: str | Path, pairs: list[LabeledPair]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, pair in enumerate(pairs):
        pocket = pair.pocket
        pocket_mol = Molecule3D(
            [
                Atom(ELEMENTS[s], pos)
                for s, pos in zip(pocket.atom_species, pocket.atom_positions)
            ]
        )
        write_xyz(pocket_mol, directory / f"pocket_{i:04d}.xyz")
        if isinstance(pair.ligand, Molecule3D):
            ligand_mol = pair.ligand
        else:
            ligand_mol = Molecule3D(
                [
                    Atom(ELEMENTS[s], pos)
                    for s, pos in zip(pair.ligand.species, pair.ligand.positions)
                ]
            )
        write_xyz(ligand_mol, directory / f"ligand_{i:04d}.xyz")
        rows.append(
            [
                i,
                int(pair.active),
                pair.affinity,
                ";".join(str(int(t)) for t in pocket.residue_types),
                ";".join(str(int(r)) for r in pocket.atom_residue),
            ]
        )
    write_csv(
        directory / "manifest.csv",
        ["id", "active", "affinity", "residue_types", "atom_residue"],
        rows,
    )


def load_pairs(directory: str | Path) -> list[LabeledPair]:
    directory = Path(directory)
    _, rows = read_csv(directory / "manifest.csv")
    pairs = []
    for row in rows:
        pair_id = int(row[0])
        pocket_mol = read_xyz(directory / f"pocket_{pair_id:04d}.xyz")
        ligand_mol = read_xyz(directory / f"ligand_{pair_id:04d}.xyz")
        residue_types = np.array([int(v) for v in row[3].split(";")], dtype=np.int64)
        atom_residue = np.array([int(v) for v in row[4].split(";")], dtype=np.int64)
        pocket = PocketGraph(
            residue_types=residue_types,
            atom_species=np.array(
                [ELEMENTS.index(a.element) for a in pocket_mol.atoms], dtype=np.int64
            ),
            atom_positions=pocket_mol.positions(),
            atom_residue=atom_residue,
        )
        pairs.append(
            LabeledPair(pocket, ligand_mol, active=bool(int(row[1])), affinity=float(row[2]))
        )
    return pairs
