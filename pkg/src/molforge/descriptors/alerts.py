"""Structural alert screening.

Each alert is a SMILES pattern matched by labeled subgraph monomorphism.
A molecule's alert count is the number of distinct patterns present, not
the number of embeddings. Pattern atoms written without the aromatic
flag only match host atoms outside perceived aromatic rings, so Kekule
and lowercase inputs screen the same.
"""

from __future__ import annotations

from functools import lru_cache

import networkx as nx

from ..mol import AROMATIC, DOUBLE, SINGLE, TRIPLE, Molecule3D
from ..smiles import parse_smiles
from .aromatics import perceived_aromatic
from .corpus import _data

_KIND = {SINGLE: "s", DOUBLE: "d", TRIPLE: "t", AROMATIC: "a"}


@lru_cache(maxsize=None)
def _patterns() -> tuple[tuple[str, nx.Graph], ...]:
    out = []
    for line in _data("alerts.smi").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        smiles, name = line.split("\t")
        mol = parse_smiles(smiles, add_hydrogens=False)
        g = nx.Graph()
        arom_atoms, arom_bonds = perceived_aromatic(mol)
        for i, a in enumerate(mol.atoms):
            g.add_node(
                i,
                element=a.element,
                charge=a.charge,
                aromatic=a.aromatic or i in arom_atoms,
                min_h=mol.pattern_min_h[i],
            )
        for b in mol.bonds:
            g.add_edge(b.a, b.b, kind=_KIND[b.order])
        out.append((name, g))
    return tuple(out)


def _host_graph(mol: Molecule3D) -> nx.Graph:
    arom_atoms, arom_bonds = perceived_aromatic(mol)
    g = nx.Graph()
    for i, a in enumerate(mol.atoms):
        if a.element == "H":
            continue
        g.add_node(
            i,
            element=a.element,
            charge=a.charge,
            aromatic=a.aromatic or i in arom_atoms,
            min_h=mol.h_count(i),
        )
    for b in mol.bonds:
        if not g.has_node(b.a) or not g.has_node(b.b):
            continue
        kind = "a" if b.key() in arom_bonds or b.order == AROMATIC else _KIND[b.order]
        g.add_edge(b.a, b.b, kind=kind)
    return g


def _node_match(host, pat):
    return (
        host["element"] == pat["element"]
        and host["charge"] == pat["charge"]
        and host["aromatic"] == pat["aromatic"]
        and host["min_h"] >= pat["min_h"]
    )


def _edge_match(host, pat):
    return host["kind"] == pat["kind"]


def matched_alerts(mol: Molecule3D) -> list[str]:
    host = _host_graph(mol)
    hits = []
    for name, pattern in _patterns():
        gm = nx.algorithms.isomorphism.GraphMatcher(
            host, pattern, node_match=_node_match, edge_match=_edge_match
        )
        if gm.subgraph_is_monomorphic():
            hits.append(name)
    return hits


def count_alerts(mol: Molecule3D) -> int:
    return len(matched_alerts(mol))
