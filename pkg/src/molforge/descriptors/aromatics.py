"""Perceived aromaticity shared by the descriptor calculators.

Ring aromaticity is recomputed from the graph so that a Kekule-form
input and its lowercase-SMILES twin classify identically.
"""

from __future__ import annotations

from ..mol import Molecule3D, aromatic_rings


def perceived_aromatic(mol: Molecule3D) -> tuple[set[int], set[tuple[int, int]]]:
    """(aromatic atom indices, aromatic ring bond keys)."""
    atoms: set[int] = set()
    bonds: set[tuple[int, int]] = set()
    for ring in aromatic_rings(mol):
        atoms.update(ring)
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            bonds.add((a, b) if a < b else (b, a))
    return atoms, bonds


def atom_environment(mol, idx, arom_atoms, arom_bonds):
    """Bond-order profile of one atom with aromatic bonds set apart.

    Returns (h, n_aromatic, n_single, n_double, n_triple) counting only
    heavy neighbors; hydrogens are reported in the first slot.
    """
    from ..mol import DOUBLE, SINGLE, TRIPLE

    h = n_arom = n_single = n_double = n_triple = 0
    for b in mol.bonds:
        if idx not in (b.a, b.b):
            continue
        j = b.other(idx)
        if mol.atoms[j].element == "H":
            h += 1
        elif b.key() in arom_bonds:
            n_arom += 1
        elif b.order == SINGLE:
            n_single += 1
        elif b.order == DOUBLE:
            n_double += 1
        elif b.order == TRIPLE:
            n_triple += 1
        else:
            # aromatic-order bond outside any perceived ring; treat as such
            n_arom += 1
    return h, n_arom, n_single, n_double, n_triple
