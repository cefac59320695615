"""The eight-descriptor profile consumed by the desirability model."""

from __future__ import annotations

from dataclasses import dataclass

from ..mol import DOUBLE, SINGLE, Molecule3D, sssr
from .alerts import count_alerts
from .aromatics import perceived_aromatic
from .crippen import crippen_logp
from .psa import psa


@dataclass(frozen=True)
class DescriptorVector:
    MW: float
    ALOGP: float
    HBD: int
    HBA: int
    PSA: float
    ROTB: int
    AROM: int
    ALERTS: int
    AP: float

    @property
    def clogP(self) -> float:
        return self.ALOGP

    def __post_init__(self):
        if min(self.HBD, self.HBA, self.ROTB, self.AROM, self.ALERTS) < 0:
            raise ValueError("descriptor counts must be non-negative")
        if not 0.0 <= self.AP <= 1.0:
            raise ValueError(f"aromatic proportion {self.AP} outside [0,1]")


def compute_descriptors(mol: Molecule3D) -> DescriptorVector:
    arom_atoms, arom_bonds = perceived_aromatic(mol)
    rings = sssr(mol)
    ring_bonds = set()
    for ring in rings:
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            ring_bonds.add((a, b) if a < b else (b, a))

    hbd = hba = 0
    for i, atom in enumerate(mol.atoms):
        if atom.element not in ("N", "O"):
            continue
        if mol.h_count(i) >= 1:
            hbd += 1
        if atom.charge <= 0:
            hba += 1

    heavy = [i for i, a in enumerate(mol.atoms) if a.element != "H"]
    heavy_degree = {i: 0 for i in heavy}
    for b in mol.bonds:
        if mol.atoms[b.a].element != "H" and mol.atoms[b.b].element != "H":
            heavy_degree[b.a] += 1
            heavy_degree[b.b] += 1

    rotb = 0
    for b in mol.bonds:
        if b.order != SINGLE or b.key() in ring_bonds:
            continue
        if mol.atoms[b.a].element == "H" or mol.atoms[b.b].element == "H":
            continue
        if heavy_degree[b.a] < 2 or heavy_degree[b.b] < 2:
            continue
        if _is_amide_cn(mol, b):
            continue
        rotb += 1

    arom_heavy = sum(1 for i in heavy if i in arom_atoms or mol.atoms[i].aromatic)
    ap = arom_heavy / len(heavy) if heavy else 0.0
    n_arom_rings = sum(
        1
        for ring in rings
        if all(i in arom_atoms or mol.atoms[i].aromatic for i in ring)
        and all(
            ((ring[k], ring[(k + 1) % len(ring)]) if ring[k] < ring[(k + 1) % len(ring)]
             else (ring[(k + 1) % len(ring)], ring[k])) in arom_bonds
            for k in range(len(ring))
        )
    )

    return DescriptorVector(
        MW=mol.molecular_weight(),
        ALOGP=crippen_logp(mol),
        HBD=hbd,
        HBA=hba,
        PSA=psa(mol),
        ROTB=rotb,
        AROM=n_arom_rings,
        ALERTS=count_alerts(mol),
        AP=ap,
    )


def _is_amide_cn(mol, bond) -> bool:
    pairs = (
        (bond.a, bond.b),
        (bond.b, bond.a),
    )
    for c, n in pairs:
        if mol.atoms[c].element != "C" or mol.atoms[n].element != "N":
            continue
        for b in mol.bonds:
            if c in (b.a, b.b) and b.order == DOUBLE:
                if mol.atoms[b.other(c)].element == "O":
                    return True
    return False
