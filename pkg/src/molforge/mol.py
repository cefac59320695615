"""Molecular graph with optional 3D coordinates.

A molecule is a list of atoms plus an undirected bond list. Hydrogens are
always explicit atoms; there is no implicit-H bookkeeping outside the
SMILES layer. Coordinates may be absent (parsed SMILES) or present
(perceived / generated structures).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .elements import (
    ATOMIC_MASS,
    DEFAULT_VALENCE,
    default_valence,
    is_supported,
    max_valence,
)

SINGLE = 1.0
DOUBLE = 2.0
TRIPLE = 3.0
AROMATIC = 1.5


class MoleculeError(ValueError):
    pass


class ValenceError(MoleculeError):
    pass


class UnsupportedElementError(MoleculeError):
    pass


@dataclass
class Atom:
    element: str
    position: np.ndarray | None = None
    charge: int = 0
    aromatic: bool = False

    def __post_init__(self):
        if not is_supported(self.element):
            raise UnsupportedElementError(f"unsupported element {self.element!r}")
        if self.position is not None:
            pos = np.asarray(self.position, dtype=float)
            if pos.shape != (3,):
                raise MoleculeError(f"position must be a 3-vector, got {pos.shape}")
            if not np.all(np.isfinite(pos)):
                raise MoleculeError("position components must be finite")
            self.position = pos


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: float = SINGLE

    def __post_init__(self):
        if self.a == self.b:
            raise MoleculeError("self-bonds are not allowed")
        if self.order not in (SINGLE, DOUBLE, TRIPLE, AROMATIC):
            raise MoleculeError(f"bad bond order {self.order}")

    def other(self, idx: int) -> int:
        if idx == self.a:
            return self.b
        if idx == self.b:
            return self.a
        raise MoleculeError(f"atom {idx} not in bond")

    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass
class Molecule3D:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    # Indices of atoms that belong to the seed scaffold, if any.
    scaffold_mask: frozenset[int] = frozenset()
    provenance: str = ""

    def __post_init__(self):
        seen = set()
        n = len(self.atoms)
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise MoleculeError(f"bond {bond} references a missing atom")
            if bond.key() in seen:
                raise MoleculeError(f"duplicate bond {bond.key()}")
            seen.add(bond.key())
        for idx in self.scaffold_mask:
            if not 0 <= idx < n:
                raise MoleculeError(f"scaffold mask index {idx} out of range")

    # -- basic accessors ------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def n_heavy(self) -> int:
        return sum(1 for a in self.atoms if a.element != "H")

    def has_coordinates(self) -> bool:
        return len(self.atoms) > 0 and all(a.position is not None for a in self.atoms)

    def positions(self) -> np.ndarray:
        if not self.has_coordinates():
            raise MoleculeError("molecule has atoms without coordinates")
        return np.stack([a.position for a in self.atoms])

    def masses(self) -> np.ndarray:
        return np.array([ATOMIC_MASS[a.element] for a in self.atoms])

    def center_of_mass(self) -> np.ndarray:
        m = self.masses()
        return (self.positions() * m[:, None]).sum(axis=0) / m.sum()

    def molecular_weight(self) -> float:
        return float(self.masses().sum())

    def neighbors(self, idx: int) -> list[int]:
        return [b.other(idx) for b in self.bonds if idx in (b.a, b.b)]

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.a].append((b.b, b.order))
            adj[b.b].append((b.a, b.order))
        return adj

    def bond_between(self, i: int, j: int) -> Bond | None:
        key = (i, j) if i < j else (j, i)
        for b in self.bonds:
            if b.key() == key:
                return b
        return None

    def h_count(self, idx: int) -> int:
        return sum(1 for j in self.neighbors(idx) if self.atoms[j].element == "H")

    # -- valence accounting ---------------------------------------------

    def bonded_valence(self, idx: int) -> float:
        """Sum of bond orders at an atom.

        Aromatic bonds are counted via an electron-accounting rule rather
        than a flat 1.5: each aromatic bond contributes 1, plus 1 extra if
        the atom donates a pi electron to its ring (carbon-like) instead of
        a lone pair (pyrrole N, furan O). This keeps pyrrole nitrogens at
        valence 3 while benzene carbons land on 4.
        """
        orders = [order for _, order in self.adjacency()[idx]]
        arom = [o for o in orders if o == AROMATIC]
        plain = sum(o for o in orders if o != AROMATIC)
        if not arom:
            return plain
        total = plain + len(arom)
        if self._is_pi_donor(idx):
            total += 1
        return total

    def _is_pi_donor(self, idx: int) -> bool:
        atom = self.atoms[idx]
        orders = [order for _, order in self.adjacency()[idx]]
        n_arom = sum(1 for o in orders if o == AROMATIC)
        non_arom = sum(o for o in orders if o != AROMATIC)
        spare = default_valence(atom.element, atom.charge) - non_arom - n_arom
        return spare >= 1

    def check_valences(self) -> None:
        """Raise ValenceError if any atom exceeds its charge-adjusted cap."""
        for idx, atom in enumerate(self.atoms):
            val = self.bonded_valence(idx)
            cap = max_valence(atom.element, atom.charge)
            if val > cap + 1e-9:
                raise ValenceError(
                    f"atom {idx} ({atom.element}) has valence {val:g} > {cap}"
                )

    def is_connected(self) -> bool:
        n = len(self.atoms)
        if n == 0:
            return False
        if n == 1:
            return True
        seen = {0}
        stack = [0]
        adj = self.adjacency()
        while stack:
            i = stack.pop()
            for j, _ in adj[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    # -- derived graphs ---------------------------------------------------

    def to_nx(self, heavy_only: bool = False) -> nx.Graph:
        g = nx.Graph()
        for i, a in enumerate(self.atoms):
            if heavy_only and a.element == "H":
                continue
            g.add_node(i, element=a.element, charge=a.charge)
        for b in self.bonds:
            if g.has_node(b.a) and g.has_node(b.b):
                g.add_edge(b.a, b.b, order=b.order)
        return g

    def copy(self) -> "Molecule3D":
        atoms = [
            Atom(a.element, None if a.position is None else a.position.copy(),
                 a.charge, a.aromatic)
            for a in self.atoms
        ]
        return Molecule3D(atoms, list(self.bonds), self.scaffold_mask, self.provenance)


# -- ring perception ------------------------------------------------------


def sssr(mol: Molecule3D) -> list[list[int]]:
    """Smallest set of smallest rings as ordered atom cycles.

    For every bond, the shortest cycle through it is found by BFS in the
    graph with that bond removed. Candidate cycles are then accepted
    smallest-first while their edge-incidence vectors stay independent
    over GF(2), which yields exactly cyclomatic-number rings.
    """
    n = len(mol.atoms)
    adj = [[j for j, _ in nbrs] for nbrs in mol.adjacency()]
    edge_index = {b.key(): k for k, b in enumerate(mol.bonds)}

    candidates: dict[tuple[int, ...], list[int]] = {}
    for bond in mol.bonds:
        path = _shortest_path_avoiding(adj, bond.a, bond.b, bond.key())
        if path is None:
            continue
        cycle = path  # a->...->b plus the removed bond closes the ring
        key = tuple(sorted(cycle))
        if key not in candidates or len(cycle) < len(candidates[key]):
            candidates[key] = cycle

    n_rings_target = len(mol.bonds) - n + _n_components(adj)
    rings: list[list[int]] = []
    basis: list[int] = []  # GF(2) edge-incidence vectors as bitmasks
    for cycle in sorted(candidates.values(), key=lambda c: (len(c), sorted(c))):
        vec = 0
        for i in range(len(cycle)):
            a, b = cycle[i], cycle[(i + 1) % len(cycle)]
            vec |= 1 << edge_index[(a, b) if a < b else (b, a)]
        # Gaussian elimination step over GF(2).
        for row in basis:
            vec = min(vec, vec ^ row)
        if vec:
            basis.append(vec)
            basis.sort(reverse=True)
            rings.append(cycle)
        if len(rings) == n_rings_target:
            break
    return rings


def _shortest_path_avoiding(adj, start, goal, banned_edge):
    from collections import deque

    prev = {start: None}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        if i == goal:
            path = []
            while i is not None:
                path.append(i)
                i = prev[i]
            return path[::-1]
        for j in adj[i]:
            key = (i, j) if i < j else (j, i)
            if key == banned_edge or j in prev:
                continue
            prev[j] = i
            queue.append(j)
    return None


def _n_components(adj) -> int:
    n = len(adj)
    seen = [False] * n
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        stack = [s]
        seen[s] = True
        while stack:
            i = stack.pop()
            for j in adj[i]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
    return count


def ring_atoms(mol: Molecule3D) -> set[int]:
    out: set[int] = set()
    for ring in sssr(mol):
        out.update(ring)
    return out


def aromatic_rings(mol: Molecule3D) -> list[list[int]]:
    """Rings judged aromatic.

    A ring qualifies if all of its bonds carry the aromatic order (as set
    by the SMILES reader), or if a Hueckel-style electron count on the
    localized structure gives 4n+2: carbons must hold a double bond to a
    ring atom (1 electron), bare heteroatoms contribute a lone pair (2).
    """
    rings = sssr(mol)
    adj = mol.adjacency()
    in_any_ring = ring_atoms(mol)
    out = []
    for ring in rings:
        ring_set = set(ring)
        bonds = [mol.bond_between(ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))]
        if all(b is not None and b.order == AROMATIC for b in bonds):
            out.append(ring)
            continue
        pi = 0
        ok = True
        for idx in ring:
            atom = mol.atoms[idx]
            double_to_ring = any(
                order == DOUBLE and j in in_any_ring for j, order in adj[idx]
            )
            has_any_double = any(order in (DOUBLE, TRIPLE) for _, order in adj[idx])
            if double_to_ring:
                pi += 1
            elif atom.element in ("N", "O", "S") and not has_any_double:
                pi += 2
            else:
                ok = False
                break
        if ok and pi >= 2 and (pi - 2) % 4 == 0:
            out.append(ring)
    return out


def aromatic_atoms(mol: Molecule3D) -> set[int]:
    out: set[int] = set()
    for ring in aromatic_rings(mol):
        out.update(ring)
    return out


# -- graph comparison ------------------------------------------------------


def _node_match(a, b):
    return a["element"] == b["element"] and a["charge"] == b["charge"]


def _edge_match(a, b):
    return a["order"] == b["order"]


def same_graph(m1: Molecule3D, m2: Molecule3D, match_orders: bool = True) -> bool:
    """Graph isomorphism on elements/charges (and bond orders by default)."""
    em = _edge_match if match_orders else None
    return nx.is_isomorphic(
        m1.to_nx(), m2.to_nx(), node_match=_node_match, edge_match=em
    )


def has_subgraph(host: Molecule3D, pattern: Molecule3D) -> bool:
    """Element-labeled subgraph monomorphism test (bond orders ignored)."""
    matcher = nx.algorithms.isomorphism.GraphMatcher(
        host.to_nx(),
        pattern.to_nx(),
        node_match=lambda a, b: a["element"] == b["element"],
    )
    return matcher.subgraph_is_monomorphic()


def subgraph_matches(host: Molecule3D, pattern: Molecule3D):
    """Iterate host->pattern node mappings of monomorphic embeddings."""
    matcher = nx.algorithms.isomorphism.GraphMatcher(
        host.to_nx(),
        pattern.to_nx(),
        node_match=lambda a, b: a["element"] == b["element"],
    )
    yield from matcher.subgraph_monomorphisms_iter()
