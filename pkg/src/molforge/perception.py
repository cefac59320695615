"""Distance-based bond perception for 3D point clouds.

Connectivity comes from summed covalent radii plus a fixed tolerance.
Bond orders start at single and are upgraded greedily (shortest contact
first) only while both endpoints sit below their default valence and the
distance is short enough to plausibly be a multiple bond. Failure to find
a consistent assignment is reported through a flag, not an exception, so
callers can count invalid structures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elements import (
    COVALENT_RADIUS,
    DOUBLE_RADIUS,
    PERCEPTION_TOLERANCE,
    TRIPLE_RADIUS,
    default_valence,
    max_valence,
)
from .mol import DOUBLE, SINGLE, TRIPLE, Atom, Bond, Molecule3D

# A contact upgrades to order k only if it is shorter than this multiple
# of the summed order-k radii; keeps a 1.54 A C-C contact a single bond
# while catching genuine 1.34 A doubles.
_UPGRADE_SLACK = 1.1


@dataclass
class PerceptionResult:
    molecule: Molecule3D
    valid: bool
    reasons: list[str]


def perceive_bonds(
    elements: list[str],
    positions: np.ndarray,
    scaffold_mask: frozenset[int] = frozenset(),
    provenance: str = "perceived",
) -> PerceptionResult:
    """Build a molecule from elements and coordinates.

    Validity requires a single connected component and that no atom
    exceeds its valence ceiling under the perceived connectivity.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.shape != (len(elements), 3):
        raise ValueError(
            f"positions shape {positions.shape} does not match {len(elements)} atoms"
        )
    atoms = [Atom(el, pos) for el, pos in zip(elements, positions)]

    n = len(atoms)
    bonds: list[Bond] = []
    dists: dict[tuple[int, int], float] = {}
    if n > 1:
        delta = positions[:, None, :] - positions[None, :, :]
        dmat = np.sqrt((delta**2).sum(axis=-1))
        for i in range(n):
            for j in range(i + 1, n):
                cutoff = (
                    COVALENT_RADIUS[elements[i]]
                    + COVALENT_RADIUS[elements[j]]
                    + PERCEPTION_TOLERANCE
                )
                if dmat[i, j] <= cutoff:
                    bonds.append(Bond(i, j, SINGLE))
                    dists[(i, j)] = float(dmat[i, j])

    reasons: list[str] = []
    valence = [0.0] * n
    for b in bonds:
        valence[b.a] += 1
        valence[b.b] += 1
    for i, atom in enumerate(atoms):
        cap = max_valence(atom.element, atom.charge)
        if valence[i] > cap:
            reasons.append(
                f"atom {i} ({atom.element}) has {int(valence[i])} contacts, cap {cap}"
            )

    bonds = _upgrade_orders(atoms, bonds, dists, valence)

    mol = Molecule3D(atoms, bonds, scaffold_mask, provenance)
    if n == 0:
        reasons.append("empty structure")
    elif not mol.is_connected():
        reasons.append("disconnected structure")
    return PerceptionResult(mol, valid=not reasons, reasons=reasons)


def _upgrade_orders(atoms, bonds, dists, valence) -> list[Bond]:
    """Promote single bonds to double/triple where geometry supports it.

    Shortest eligible contact first; ties broken by atom index pair. Each
    promotion raises both endpoint valences by one and never pushes an
    atom past its default valence.
    """
    targets = [default_valence(a.element, a.charge) for a in atoms]
    by_key = {b.key(): b for b in bonds}

    def eligible(key, new_order):
        i, j = key
        if valence[i] + 1 > targets[i] or valence[j] + 1 > targets[j]:
            return False
        table = DOUBLE_RADIUS if new_order == DOUBLE else TRIPLE_RADIUS
        ei, ej = atoms[i].element, atoms[j].element
        if ei not in table or ej not in table:
            return False
        return dists[key] <= _UPGRADE_SLACK * (table[ei] + table[ej])

    while True:
        candidates = []
        for key, bond in by_key.items():
            if bond.order == SINGLE and eligible(key, DOUBLE):
                candidates.append((dists[key], key, DOUBLE))
            elif bond.order == DOUBLE and eligible(key, TRIPLE):
                candidates.append((dists[key], key, TRIPLE))
        if not candidates:
            break
        candidates.sort(key=lambda t: (t[0], t[1]))
        _, key, new_order = candidates[0]
        by_key[key] = Bond(key[0], key[1], new_order)
        valence[key[0]] += 1
        valence[key[1]] += 1

    return [by_key[k] for k in sorted(by_key)]


def perceive_molecule(mol: Molecule3D) -> PerceptionResult:
    """Re-perceive bonds for a molecule that already has coordinates."""
    return perceive_bonds(
        [a.element for a in mol.atoms],
        mol.positions(),
        mol.scaffold_mask,
        mol.provenance or "perceived",
    )
