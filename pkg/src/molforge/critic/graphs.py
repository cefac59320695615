"""Graph encodings of protein pockets and ligands.

A pocket is two-scale: residue nodes (one-hot over the 20 amino acid
classes) and atomic nodes (element one-hot), with distance edges inside
each scale and membership edges linking every atom to exactly one
residue. A ligand is atomic only; its edges are bonds when known, plus
short-range distance pairs, which is all that exists for the partial
molecules scored mid-generation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..elements import ELEMENTS
from ..mol import Molecule3D
from ..nn import pair_list

N_RESIDUE_CLASSES = 20
POCKET_FEATURE_DIM = N_RESIDUE_CLASSES + len(ELEMENTS) + 1  # +1 atom-scale flag
LIGAND_FEATURE_DIM = len(ELEMENTS)

POCKET_CUTOFF = 8.0
LIGAND_CUTOFF = 4.0


def _symmetric(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pairs = {(int(a), int(b)) for a, b in zip(src, dst)}
    pairs |= {(b, a) for a, b in pairs}
    if not pairs:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    arr = np.array(sorted(pairs), dtype=np.int64)
    return arr[:, 0], arr[:, 1]


@dataclass
class PocketGraph:
    residue_types: np.ndarray   # (n_res,) ints in [0, 20)
    atom_species: np.ndarray    # (n_atoms,) indices into ELEMENTS
    atom_positions: np.ndarray  # (n_atoms, 3)
    atom_residue: np.ndarray    # (n_atoms,) owning residue per atom
    cutoff: float = POCKET_CUTOFF

    def __post_init__(self):
        self.residue_types = np.asarray(self.residue_types, dtype=np.int64)
        self.atom_species = np.asarray(self.atom_species, dtype=np.int64)
        self.atom_positions = np.asarray(self.atom_positions, dtype=np.float64)
        self.atom_residue = np.asarray(self.atom_residue, dtype=np.int64)
        if self.residue_types.size == 0 or self.atom_species.size == 0:
            raise ValueError("pocket needs at least one residue and one atom")
        if np.any(self.residue_types < 0) or np.any(self.residue_types >= N_RESIDUE_CLASSES):
            raise ValueError("residue class out of range")
        if np.any(self.atom_species < 0) or np.any(self.atom_species >= len(ELEMENTS)):
            raise ValueError("atom species out of range")
        if self.atom_positions.shape != (self.atom_species.size, 3):
            raise ValueError("atom positions must be (n_atoms, 3)")
        if self.atom_residue.shape != self.atom_species.shape:
            raise ValueError("one owning residue per atom required")
        if np.any(self.atom_residue < 0) or np.any(self.atom_residue >= self.residue_types.size):
            raise ValueError("atom residue index out of range")

    @property
    def n_residues(self) -> int:
        return int(self.residue_types.size)

    @property
    def n_nodes(self) -> int:
        return self.n_residues + int(self.atom_species.size)

    def residue_centroids(self) -> np.ndarray:
        centroids = np.zeros((self.n_residues, 3))
        counts = np.zeros(self.n_residues)
        np.add.at(centroids, self.atom_residue, self.atom_positions)
        np.add.at(counts, self.atom_residue, 1.0)
        counts[counts == 0] = 1.0  # orphan residue nodes sit at the origin
        return centroids / counts[:, None]

    def node_features(self) -> np.ndarray:
        feats = np.zeros((self.n_nodes, POCKET_FEATURE_DIM))
        feats[np.arange(self.n_residues), self.residue_types] = 1.0
        rows = self.n_residues + np.arange(self.atom_species.size)
        feats[rows, N_RESIDUE_CLASSES + self.atom_species] = 1.0
        feats[rows, -1] = 1.0
        return feats

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        n_res = self.n_residues
        a_src, a_dst, _ = pair_list(self.atom_positions, self.cutoff)
        r_src, r_dst, _ = pair_list(self.residue_centroids(), self.cutoff)
        atoms = np.arange(self.atom_species.size, dtype=np.int64) + n_res
        src = np.concatenate([a_src + n_res, r_src, atoms, self.atom_residue])
        dst = np.concatenate([a_dst + n_res, r_dst, self.atom_residue, atoms])
        return _symmetric(src, dst)


@dataclass
class LigandGraph:
    species: np.ndarray     # (n,) indices into ELEMENTS
    positions: np.ndarray   # (n, 3)
    bond_pairs: list[tuple[int, int]] = field(default_factory=list)
    cutoff: float = LIGAND_CUTOFF

    def __post_init__(self):
        self.species = np.asarray(self.species, dtype=np.int64)
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.species.size < 1:
            raise ValueError("ligand graph needs at least one node")
        if np.any(self.species < 0) or np.any(self.species >= len(ELEMENTS)):
            raise ValueError("ligand species out of range")
        if self.positions.shape != (self.species.size, 3):
            raise ValueError("ligand positions must be (n, 3)")

    @property
    def n_nodes(self) -> int:
        return int(self.species.size)

    def node_features(self) -> np.ndarray:
        feats = np.zeros((self.n_nodes, LIGAND_FEATURE_DIM))
        feats[np.arange(self.n_nodes), self.species] = 1.0
        return feats

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        src, dst, _ = pair_list(self.positions, self.cutoff)
        if self.bond_pairs:
            b = np.array(self.bond_pairs, dtype=np.int64)
            src = np.concatenate([src, b[:, 0], b[:, 1]])
            dst = np.concatenate([dst, b[:, 1], b[:, 0]])
        return _symmetric(src, dst)


def ligand_from_molecule(mol: Molecule3D, cutoff: float = LIGAND_CUTOFF) -> LigandGraph:
    species = np.array([ELEMENTS.index(a.element) for a in mol.atoms], dtype=np.int64)
    bonds = [(b.a, b.b) for b in mol.bonds]
    return LigandGraph(species, mol.positions(), bonds, cutoff)
