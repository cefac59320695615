"""Octanol-water partition coefficient as an atomic contribution sum.

Every atom is assigned a type from its element and immediate bonding
pattern, then the bundled per-type contributions are added up. Atoms no
rule covers fall back to a per-element default and are tallied so
callers can report how much of a structure was guessed.
"""

from __future__ import annotations

import csv
import io
from functools import lru_cache

from ..mol import DOUBLE, TRIPLE, Molecule3D
from .aromatics import atom_environment, perceived_aromatic
from .corpus import _data

_HETERO = ("N", "O", "F", "S", "Cl")


@lru_cache(maxsize=None)
def _contributions() -> dict[str, float]:
    reader = csv.DictReader(io.StringIO(_data("crippen_contribs.csv")))
    return {row["type"]: float(row["contribution"]) for row in reader}


def classify_atom(mol: Molecule3D, idx: int, arom_atoms, arom_bonds) -> str | None:
    """Type name for one atom, or None when no rule applies."""
    atom = mol.atoms[idx]
    el = atom.element
    nbr_elements = [mol.atoms[j].element for j in mol.neighbors(idx)]
    h, na, ns, nd, nt = atom_environment(mol, idx, arom_atoms, arom_bonds)
    aromatic = idx in arom_atoms or atom.aromatic

    if el == "H":
        anchor = nbr_elements[0] if nbr_elements else ""
        return {"C": "H_on_C", "N": "H_on_N", "O": "H_on_O"}.get(anchor)

    if el == "C":
        if atom.charge != 0:
            return None
        hetero_multiple = any(
            b.order in (DOUBLE, TRIPLE)
            and b.key() not in arom_bonds
            and mol.atoms[b.other(idx)].element in ("N", "O", "S")
            for b in mol.bonds
            if idx in (b.a, b.b)
        )
        if hetero_multiple:
            return "C_het_unsat"
        if aromatic:
            if h:
                return "C_arom_h"
            plain = [
                mol.atoms[j]
                for j in mol.neighbors(idx)
                if j not in arom_atoms and mol.atoms[j].element != "H"
            ]
            if any(a.element in _HETERO for a in plain):
                return "C_arom_het"
            return "C_arom_sub"
        if nd or nt:
            return "C_unsat"
        if any(e in _HETERO for e in nbr_elements):
            return "C_sp3_het"
        return "C_sp3"

    if el == "N":
        if aromatic:
            return "N_arom"
        if atom.charge > 0:
            return "N_plus"
        if atom.charge != 0:
            return None
        if nt:
            return "N_triple"
        if nd:
            return "N_double"
        if _bonded_to_carbonyl(mol, idx, arom_bonds):
            return "N_amide"
        if h:
            return "N_h"
        return "N_tertiary"

    if el == "O":
        if aromatic:
            return "O_arom"
        if atom.charge < 0:
            return "O_minus"
        if atom.charge != 0:
            return None
        if nd:
            return "O_carbonyl"
        if h:
            return "O_hydroxyl"
        return "O_ether"

    if el == "F":
        return "F_any"
    if el == "Cl":
        return "Cl_any"
    if el == "S":
        if aromatic:
            return "S_arom"
        oxidized = any(
            b.order == DOUBLE and mol.atoms[b.other(idx)].element == "O"
            for b in mol.bonds
            if idx in (b.a, b.b)
        )
        return "S_oxidized" if oxidized else "S_any"
    return None


def _bonded_to_carbonyl(mol, idx, arom_bonds) -> bool:
    for j in mol.neighbors(idx):
        if mol.atoms[j].element != "C":
            continue
        for b in mol.bonds:
            if j not in (b.a, b.b) or b.key() in arom_bonds:
                continue
            if b.order == DOUBLE and mol.atoms[b.other(j)].element in ("O", "S"):
                return True
    return False


def crippen_breakdown(mol: Molecule3D) -> tuple[list[tuple[int, str, float]], int]:
    """Per-atom (index, type, contribution) plus the unclassified count."""
    table = _contributions()
    arom_atoms, arom_bonds = perceived_aromatic(mol)
    rows = []
    unclassified = 0
    for i, atom in enumerate(mol.atoms):
        t = classify_atom(mol, i, arom_atoms, arom_bonds)
        if t is None:
            t = f"{atom.element}_default"
            unclassified += 1
        rows.append((i, t, table[t]))
    return rows, unclassified


def crippen_logp(mol: Molecule3D) -> float:
    rows, _ = crippen_breakdown(mol)
    return sum(c for _, _, c in rows)
