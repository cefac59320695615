"""Synthetic accessibility scoring.

A molecule is split into radius-2 atom environments whose contributions
come from frequency statistics over the bundled reference set: common
environments score high, unseen ones take a fixed rare penalty. From the
mean contribution a complexity penalty is subtracted (ring bridges and
spiro fusions, stereocenters, macrocycles, and a superlinear size term),
and the raw result is mapped onto the conventional 1..10 scale where 1
reads "easy to make". The affine map is anchored so the reference set
itself spans roughly 1.5 to 8.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ..mol import Molecule3D, sssr
from ..smiles import parse_smiles
from .aromatics import perceived_aromatic
from .corpus import load_reference_corpus

RARE_FRAGMENT = -4.0
_SCALE_LOW, _SCALE_HIGH = 1.5, 8.5


@dataclass(frozen=True)
class SaBreakdown:
    fragment_score: float
    ring_complexity: float
    stereo_complexity: float
    macrocycle_penalty: float
    size_penalty: float
    raw: float
    total: float


def _atom_label(mol, i, arom_atoms) -> str:
    a = mol.atoms[i]
    tag = a.element
    if i in arom_atoms or a.aromatic:
        tag += "a"
    if a.charge:
        tag += f"{a.charge:+d}"
    return f"{tag}H{mol.h_count(i)}"


def _bond_label(bond, arom_bonds) -> str:
    if bond.key() in arom_bonds:
        return "a"
    return {1.0: "s", 2.0: "d", 3.0: "t", 1.5: "a"}[bond.order]


def fragment_keys(mol: Molecule3D) -> list[str]:
    """One environment string per heavy atom, order-independent."""
    arom_atoms, arom_bonds = perceived_aromatic(mol)
    heavy_adj: dict[int, list[tuple[str, int]]] = {}
    for b in mol.bonds:
        if mol.atoms[b.a].element == "H" or mol.atoms[b.b].element == "H":
            continue
        lab = _bond_label(b, arom_bonds)
        heavy_adj.setdefault(b.a, []).append((lab, b.b))
        heavy_adj.setdefault(b.b, []).append((lab, b.a))

    labels = {
        i: _atom_label(mol, i, arom_atoms)
        for i, a in enumerate(mol.atoms)
        if a.element != "H"
    }
    keys = []
    for i in labels:
        arms = []
        for lab1, j in heavy_adj.get(i, []):
            rim = sorted(
                f"{lab2}{labels[k]}" for lab2, k in heavy_adj.get(j, []) if k != i
            )
            arms.append(f"{lab1}{labels[j]}({','.join(rim)})")
        keys.append(f"{labels[i]}|{';'.join(sorted(arms))}")
    return keys


@lru_cache(maxsize=None)
def _calibration():
    """(contribution table, raw_min, raw_max) from the reference set."""
    counts: dict[str, int] = {}
    mols = [parse_smiles(s) for s, _ in load_reference_corpus()]
    for mol in mols:
        for key in fragment_keys(mol):
            counts[key] = counts.get(key, 0) + 1
    mean_count = sum(counts.values()) / len(counts)
    table = {k: math.log(c / mean_count) for k, c in counts.items()}

    raws = [_raw_score(mol, table)[0] for mol in mols]
    lo, hi = min(raws), max(raws)
    if hi - lo < 1e-9:
        hi = lo + 1e-9
    return table, lo, hi


def _raw_score(mol, table):
    keys = fragment_keys(mol)
    frag = sum(table.get(k, RARE_FRAGMENT) for k in keys) / len(keys) if keys else RARE_FRAGMENT

    rings = sssr(mol)
    bridge, spiro = _bridge_and_spiro(rings)
    ring_term = math.log(len(bridge) + 1) + math.log(len(spiro) + 1)
    stereo_term = math.log(_stereocenters(mol) + 1)
    macro_term = math.log(sum(1 for r in rings if len(r) > 8) + 1)
    n = mol.n_heavy
    size_term = n**1.005 - n

    raw = frag - (ring_term + stereo_term + macro_term + size_term)
    return raw, frag, ring_term, stereo_term, macro_term, size_term


def _bridge_and_spiro(rings) -> tuple[set[int], set[int]]:
    ring_bonds = []
    for ring in rings:
        bonds = set()
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            bonds.add((a, b) if a < b else (b, a))
        ring_bonds.append(bonds)

    bridge: set[int] = set()
    spiro: set[int] = set()
    for r in range(len(rings)):
        for s in range(r + 1, len(rings)):
            shared_bonds = ring_bonds[r] & ring_bonds[s]
            shared_atoms = set(rings[r]) & set(rings[s])
            if len(shared_bonds) >= 2:
                # endpoints of the shared path are the bridgeheads
                degree: dict[int, int] = {}
                for a, b in shared_bonds:
                    degree[a] = degree.get(a, 0) + 1
                    degree[b] = degree.get(b, 0) + 1
                bridge.update(i for i, dcount in degree.items() if dcount == 1)
            elif not shared_bonds and len(shared_atoms) == 1:
                spiro.update(shared_atoms)
    return bridge, spiro


def _stereocenters(mol: Molecule3D) -> int:
    """Carbons whose four substituents refine to four distinct classes."""
    n = len(mol.atoms)
    adj: list[list[tuple[float, int]]] = [[] for _ in range(n)]
    for b in mol.bonds:
        adj[b.a].append((b.order, b.b))
        adj[b.b].append((b.order, b.a))

    keys = [(a.element, a.charge) for a in mol.atoms]
    ranks = _dense(keys)
    while True:
        new = _dense(
            [(ranks[i], tuple(sorted((o, ranks[j]) for o, j in adj[i]))) for i in range(n)]
        )
        if new == ranks:
            break
        ranks = new

    count = 0
    for i, a in enumerate(mol.atoms):
        if a.element != "C" or a.aromatic or len(adj[i]) != 4:
            continue
        if len({ranks[j] for _, j in adj[i]}) == 4:
            count += 1
    return count


def _dense(keys) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def sa_score(mol: Molecule3D) -> SaBreakdown:
    table, lo, hi = _calibration()
    raw, frag, ring_term, stereo_term, macro_term, size_term = _raw_score(mol, table)
    scaled = _SCALE_LOW + (_SCALE_HIGH - _SCALE_LOW) * (hi - raw) / (hi - lo)
    total = min(10.0, max(1.0, scaled))
    return SaBreakdown(
        fragment_score=frag,
        ring_complexity=ring_term,
        stereo_complexity=stereo_term,
        macrocycle_penalty=macro_term,
        size_penalty=size_term,
        raw=raw,
        total=total,
    )


def sa_calibration() -> tuple[float, float]:
    """Raw-score anchors (min, max) behind the 1..10 mapping."""
    _, lo, hi = _calibration()
    return lo, hi
