"""Topological polar surface area from N/O fragment contributions."""

from __future__ import annotations

import csv
import io
from functools import lru_cache

from ..mol import Molecule3D
from .aromatics import atom_environment, perceived_aromatic
from .corpus import _data

# Generic per-element contribution when no table row matches the exact
# bonding pattern; keeps exotic valence states from zeroing out.
_FALLBACK = {"N": 3.24, "O": 9.23}


@lru_cache(maxsize=None)
def _table() -> dict[tuple, float]:
    out = {}
    reader = csv.DictReader(io.StringIO(_data("psa_contribs.csv")))
    for row in reader:
        key = (
            row["element"],
            bool(int(row["aromatic"])),
            int(row["charge"]),
            int(row["h"]),
            int(row["arom_bonds"]),
            int(row["single_bonds"]),
            int(row["double_bonds"]),
            int(row["triple_bonds"]),
        )
        out[key] = float(row["tpsa"])
    return out


def psa(mol: Molecule3D) -> float:
    arom_atoms, arom_bonds = perceived_aromatic(mol)
    table = _table()
    total = 0.0
    for i, atom in enumerate(mol.atoms):
        if atom.element not in ("N", "O"):
            continue
        h, na, ns, nd, nt = atom_environment(mol, i, arom_atoms, arom_bonds)
        key = (atom.element, i in arom_atoms, atom.charge, h, na, ns, nd, nt)
        total += table.get(key, _FALLBACK[atom.element])
    return total
