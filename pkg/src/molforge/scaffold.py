"""Ring-framework extraction and scaffold containment."""

from __future__ import annotations

from .mol import (
    DOUBLE,
    Atom,
    Bond,
    Molecule3D,
    MoleculeError,
    has_subgraph,
    ring_atoms,
)


class NoRingError(MoleculeError):
    pass


def murcko_scaffold(mol: Molecule3D) -> Molecule3D:
    """Ring framework of a molecule.

    Degree-one heavy atoms are pruned iteratively (each takes its
    hydrogens along) until only rings and linkers remain. Two classes of
    peripheral atoms survive: hydrogens attached to surviving atoms, and
    heavy atoms double-bonded to a surviving atom (exocyclic carbonyls
    and the like).
    """
    in_ring = ring_atoms(mol)
    if not in_ring:
        raise NoRingError("molecule has no ring; scaffold undefined")

    adj = _heavy_adjacency(mol)
    keep = {i for i, a in enumerate(mol.atoms) if a.element != "H"}
    changed = True
    while changed:
        changed = False
        for i in sorted(keep):
            nbrs = [(j, order) for j, order in adj[i] if j in keep]
            if len(nbrs) != 1:
                continue
            j, order = nbrs[0]
            if order == DOUBLE and j in in_ring:
                continue  # exocyclic double bond onto the framework survives
            keep.discard(i)
            changed = True

    # Re-attach hydrogens of surviving atoms.
    for i, a in enumerate(mol.atoms):
        if a.element == "H":
            nbrs = mol.neighbors(i)
            if nbrs and nbrs[0] in keep:
                keep.add(i)

    return extract_atoms(mol, sorted(keep))


def _heavy_adjacency(mol: Molecule3D):
    adj: list[list[tuple[int, float]]] = [[] for _ in mol.atoms]
    for b in mol.bonds:
        if mol.atoms[b.a].element == "H" or mol.atoms[b.b].element == "H":
            continue
        adj[b.a].append((b.b, b.order))
        adj[b.b].append((b.a, b.order))
    return adj


def extract_atoms(mol: Molecule3D, indices: list[int]) -> Molecule3D:
    """Induced submolecule over the given atom indices."""
    remap = {old: new for new, old in enumerate(indices)}
    atoms = [
        Atom(
            mol.atoms[i].element,
            None if mol.atoms[i].position is None else mol.atoms[i].position.copy(),
            mol.atoms[i].charge,
            mol.atoms[i].aromatic,
        )
        for i in indices
    ]
    bonds = [
        Bond(remap[b.a], remap[b.b], b.order)
        for b in mol.bonds
        if b.a in remap and b.b in remap
    ]
    mask = frozenset(remap[i] for i in mol.scaffold_mask if i in remap)
    return Molecule3D(atoms, bonds, mask, mol.provenance)


def strip_hydrogens(mol: Molecule3D) -> Molecule3D:
    heavy = [i for i, a in enumerate(mol.atoms) if a.element != "H"]
    return extract_atoms(mol, heavy)


def contains_scaffold(mol: Molecule3D, scaffold: Molecule3D) -> bool:
    """True when the scaffold embeds in the molecule as a labeled subgraph."""
    if not len(scaffold.atoms):
        raise MoleculeError("empty scaffold")
    return has_subgraph(mol, scaffold)
