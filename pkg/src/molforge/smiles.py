"""SMILES subset reader and canonical writer.

Supported grammar: organic-subset atoms (C N O S F Cl and aromatic
c n o s), bracket atoms with explicit H counts and formal charges,
bond symbols ``- = # :``, branches, and ring-closure digits (``%nn``
for two-digit labels). No stereo descriptors, no isotopes, no
disconnected structures.

Hydrogens are materialized as explicit atoms on parse. The writer
suppresses them again where the implicit-H rules would regenerate the
same count, so ``parse(write(m))`` is graph-isomorphic to ``m``.
"""

from __future__ import annotations

from .elements import default_valence, max_valence
from .mol import (
    AROMATIC,
    DOUBLE,
    SINGLE,
    TRIPLE,
    Atom,
    Bond,
    Molecule3D,
    MoleculeError,
    UnsupportedElementError,
    ValenceError,
)

_ORGANIC = ("Cl", "C", "N", "O", "S", "F")  # longest match first
_AROMATIC_SYMBOLS = {"c": "C", "n": "N", "o": "O", "s": "S"}
_BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}
_UNSUPPORTED = ("Br", "Si", "Se", "B", "P", "I", "b", "p")


class SmilesSyntaxError(MoleculeError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


# ---------------------------------------------------------------------------
# parsing


def parse_smiles(text: str, add_hydrogens: bool = True) -> Molecule3D:
    """Parse a SMILES string into a molecule without coordinates.

    With ``add_hydrogens=False`` the implicit-hydrogen rules are skipped
    entirely; bracket H counts are kept as matching hints on the bare
    heavy-atom graph (used by the substructure-pattern machinery).
    """
    if not text or not text.strip():
        raise SmilesSyntaxError("empty SMILES", 0)
    text = text.strip()

    atoms: list[dict] = []  # element, charge, aromatic, h (None = implicit)
    bonds: dict[tuple[int, int], float | None] = {}
    prev: int | None = None
    pending: float | None = None
    pending_pos = 0
    stack: list[int] = []
    ring_open: dict[int, tuple[int, float | None, int]] = {}

    def add_bond(a: int, b: int, order: float | None, pos: int):
        if a == b:
            raise SmilesSyntaxError("ring closure bonds an atom to itself", pos)
        key = (a, b) if a < b else (b, a)
        if key in bonds:
            raise SmilesSyntaxError("duplicate bond", pos)
        bonds[key] = order

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _BOND_SYMBOLS:
            if pending is not None:
                raise SmilesSyntaxError("two bond symbols in a row", i)
            pending = _BOND_SYMBOLS[ch]
            pending_pos = i
            i += 1
            continue
        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch before any atom", i)
            stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not stack:
                raise SmilesSyntaxError("unmatched ')'", i)
            if pending is not None:
                raise SmilesSyntaxError("dangling bond before ')'", pending_pos)
            prev = stack.pop()
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesSyntaxError("ring digit before any atom", i)
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise SmilesSyntaxError("'%' needs two digits", i)
                label = int(text[i + 1 : i + 3])
                i += 3
            else:
                label = int(ch)
                i += 1
            if label in ring_open:
                j, order0, pos0 = ring_open.pop(label)
                order = _merge_ring_orders(order0, pending, pos0)
                add_bond(prev, j, order, i - 1)
            else:
                ring_open[label] = (prev, pending, i - 1)
            pending = None
            continue
        if ch == ".":
            raise SmilesSyntaxError("disconnected structures are not supported", i)

        spec, width = _read_atom(text, i)
        idx = len(atoms)
        atoms.append(spec)
        if prev is not None:
            add_bond(prev, idx, pending, i)
        elif pending is not None:
            raise SmilesSyntaxError("bond symbol before first atom", pending_pos)
        pending = None
        prev = idx
        i += width

    if pending is not None:
        raise SmilesSyntaxError("dangling bond at end of string", pending_pos)
    if stack:
        raise SmilesSyntaxError("unclosed '('", n - 1)
    if ring_open:
        label, (_, _, pos) = next(iter(ring_open.items()))
        raise SmilesSyntaxError(f"unclosed ring digit {label}", pos)

    return _assemble(atoms, bonds, add_hydrogens)


def _merge_ring_orders(a: float | None, b: float | None, pos: int) -> float | None:
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise SmilesSyntaxError("conflicting ring-closure bond orders", pos)


def _read_atom(text: str, i: int) -> tuple[dict, int]:
    ch = text[i]
    if ch == "[":
        end = text.find("]", i)
        if end < 0:
            raise SmilesSyntaxError("unclosed '['", i)
        spec = _parse_bracket(text[i + 1 : end], i)
        return spec, end - i + 1
    for sym in _ORGANIC:
        if text.startswith(sym, i):
            return {"element": sym, "charge": 0, "aromatic": False, "h": None}, len(sym)
    if ch in _AROMATIC_SYMBOLS:
        return (
            {"element": _AROMATIC_SYMBOLS[ch], "charge": 0, "aromatic": True, "h": None},
            1,
        )
    for sym in _UNSUPPORTED:
        if text.startswith(sym, i):
            raise UnsupportedElementError(
                f"element {sym!r} is outside the supported set (offset {i})"
            )
    raise SmilesSyntaxError(f"unexpected character {ch!r}", i)


def _parse_bracket(body: str, offset: int) -> dict:
    if not body:
        raise SmilesSyntaxError("empty bracket atom", offset)
    j = 0
    aromatic = False
    if body[0].islower():
        if body[0] in _AROMATIC_SYMBOLS:
            element = _AROMATIC_SYMBOLS[body[0]]
            aromatic = True
            j = 1
        else:
            raise UnsupportedElementError(
                f"element {body[0]!r} is outside the supported set (offset {offset})"
            )
    else:
        head = body[:2] if len(body) > 1 and body[1].islower() else body[:1]
        if head in ("Cl", "C", "N", "O", "S", "F", "H"):
            element = head
            j = len(head)
        else:
            raise UnsupportedElementError(
                f"element {head!r} is outside the supported set (offset {offset})"
            )
    h = 0
    if j < len(body) and body[j] == "H":
        j += 1
        digits = ""
        while j < len(body) and body[j].isdigit():
            digits += body[j]
            j += 1
        h = int(digits) if digits else 1
    charge = 0
    if j < len(body) and body[j] in "+-":
        sign = 1 if body[j] == "+" else -1
        j += 1
        digits = ""
        while j < len(body) and body[j].isdigit():
            digits += body[j]
            j += 1
        if digits:
            charge = sign * int(digits)
        else:
            charge = sign
            while j < len(body) and body[j] in "+-":
                if (body[j] == "+") != (sign > 0):
                    raise SmilesSyntaxError("mixed charge signs", offset)
                charge += sign
                j += 1
    if j != len(body):
        raise SmilesSyntaxError(f"unsupported bracket content {body!r}", offset)
    if element == "H" and h:
        raise SmilesSyntaxError("hydrogen atom with H count", offset)
    return {"element": element, "charge": charge, "aromatic": aromatic, "h": h}


def _assemble(atom_specs: list[dict], bond_specs, add_hydrogens: bool) -> Molecule3D:
    n = len(atom_specs)
    neighbors: list[list[tuple[int, float | None]]] = [[] for _ in range(n)]
    for (a, b), order in bond_specs.items():
        neighbors[a].append((b, order))
        neighbors[b].append((a, order))

    # Default bond order: aromatic when both ends are aromatic atoms.
    resolved: dict[tuple[int, int], float] = {}
    for (a, b), order in bond_specs.items():
        if order is None:
            both_arom = atom_specs[a]["aromatic"] and atom_specs[b]["aromatic"]
            order = AROMATIC if both_arom else SINGLE
        if order == AROMATIC and not (
            atom_specs[a]["aromatic"] and atom_specs[b]["aromatic"]
        ):
            raise ValenceError("aromatic bond between non-aromatic atoms")
        resolved[(a, b)] = order

    orders_at: list[list[float]] = [[] for _ in range(n)]
    for (a, b), order in resolved.items():
        orders_at[a].append(order)
        orders_at[b].append(order)

    for i, spec in enumerate(atom_specs):
        if spec["aromatic"]:
            n_arom = sum(1 for o in orders_at[i] if o == AROMATIC)
            if n_arom < 2:
                raise ValenceError(
                    f"aromatic atom {i} is not inside an aromatic ring"
                )

    h_counts = [spec["h"] or 0 for spec in atom_specs]
    if add_hydrogens:
        for i, spec in enumerate(atom_specs):
            if spec["h"] is None:
                h_counts[i] = _implicit_h(
                    spec["element"], spec["charge"], spec["aromatic"], orders_at[i]
                )

    # Valence ceiling check on the hydrogen-dressed graph.
    for i, spec in enumerate(atom_specs):
        total = _dressed_valence(
            spec["element"], spec["charge"], spec["aromatic"],
            orders_at[i], h_counts[i],
        )
        cap = max_valence(spec["element"], spec["charge"])
        if total > cap + 1e-9:
            raise ValenceError(
                f"atom {i} ({spec['element']}) has valence {total:g} > {cap}"
            )

    if add_hydrogens:
        _check_aromatic_parity(atom_specs, resolved, orders_at, h_counts)

    atoms = [
        Atom(spec["element"], charge=spec["charge"], aromatic=spec["aromatic"])
        for spec in atom_specs
    ]
    bonds = [Bond(a, b, order) for (a, b), order in sorted(resolved.items())]
    if add_hydrogens:
        for i in range(n):
            for _ in range(h_counts[i]):
                atoms.append(Atom("H"))
                bonds.append(Bond(i, len(atoms) - 1, SINGLE))
    mol = Molecule3D(atoms, bonds)
    if not add_hydrogens:
        mol.provenance = "pattern"
        mol.pattern_min_h = h_counts  # type: ignore[attr-defined]
    return mol


def _implicit_h(element, charge, aromatic, heavy_orders) -> int:
    dv = default_valence(element, charge)
    if aromatic:
        n_arom = sum(1 for o in heavy_orders if o == AROMATIC)
        non = sum(o for o in heavy_orders if o != AROMATIC)
        spare = dv - non - n_arom
        if spare < 0:
            raise ValenceError(f"aromatic {element} over its valence")
        h = dv - non - n_arom - (1 if spare >= 1 else 0)
    else:
        if sum(heavy_orders) != int(sum(heavy_orders)):
            raise ValenceError("aromatic bond on a non-aromatic atom")
        used = int(sum(heavy_orders))
        # Sulfur fills to the smallest of its 2/4/6 valence states.
        states = (2, 4, 6) if element == "S" and charge == 0 else (dv,)
        target = next((s for s in states if s >= used), None)
        if target is None:
            raise ValenceError(f"{element} exceeds its default valence")
        h = target - used
    if h < 0:
        raise ValenceError(f"{element} exceeds its default valence")
    return int(h)


def _dressed_valence(element, charge, aromatic, heavy_orders, h) -> float:
    n_arom = sum(1 for o in heavy_orders if o == AROMATIC)
    non = sum(o for o in heavy_orders if o != AROMATIC) + h
    if not n_arom:
        return non
    donor = (default_valence(element, charge) - non - n_arom) >= 1
    return non + n_arom + (1 if donor else 0)


def _check_aromatic_parity(atom_specs, resolved, orders_at, h_counts) -> None:
    """Kekulizability sanity check: pi donors must pair up.

    Within each component connected by aromatic bonds, the atoms that
    contribute one pi electron (rather than a lone pair) must be even in
    number, otherwise no alternating double-bond assignment exists.
    """
    n = len(atom_specs)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (a, b), order in resolved.items():
        if order == AROMATIC:
            parent[find(a)] = find(b)

    donors: dict[int, int] = {}
    for i, spec in enumerate(atom_specs):
        n_arom = sum(1 for o in orders_at[i] if o == AROMATIC)
        if not n_arom:
            continue
        non = sum(o for o in orders_at[i] if o != AROMATIC) + h_counts[i]
        spare = default_valence(spec["element"], spec["charge"]) - non - n_arom
        root = find(i)
        donors[root] = donors.get(root, 0) + (1 if spare >= 1 else 0)
    for root, count in donors.items():
        if count % 2:
            raise ValenceError(
                "aromatic ring system has an unpaired pi electron count"
            )


# ---------------------------------------------------------------------------
# writing


def write_smiles(mol: Molecule3D) -> str:
    """Canonical SMILES for the molecule's graph.

    Atom ranks come from iterative neighborhood refinement seeded with
    (element, degree, charge, H count, aromatic flag). Remaining symmetry
    ties are broken by trying each member of the first tied class and
    keeping the lexicographically smallest rendering, so isomorphic input
    orderings produce identical strings.
    """
    heavy = [i for i, a in enumerate(mol.atoms) if a.element != "H"]
    if not heavy:
        if not mol.atoms:
            raise MoleculeError("cannot write an empty molecule")
        if len(mol.atoms) == 1:
            return "[H]"
        if len(mol.atoms) == 2 and len(mol.bonds) == 1:
            return "[H][H]"
        raise MoleculeError("unsupported hydrogen cluster")

    index_of = {a: k for k, a in enumerate(heavy)}
    h_count = [mol.h_count(i) for i in heavy]
    adj: list[list[tuple[int, float]]] = [[] for _ in heavy]
    for b in mol.bonds:
        if mol.atoms[b.a].element == "H" or mol.atoms[b.b].element == "H":
            continue
        adj[index_of[b.a]].append((index_of[b.b], b.order))
        adj[index_of[b.b]].append((index_of[b.a], b.order))

    init_keys = []
    for k, i in enumerate(heavy):
        a = mol.atoms[i]
        init_keys.append((a.element, len(adj[k]), a.charge, h_count[k], a.aromatic))

    best: str | None = None
    for ranks in _complete_rankings(init_keys, adj):
        s = _render(mol, heavy, adj, h_count, ranks)
        if best is None or s < best:
            best = s
    assert best is not None
    return best


def _dense(keys) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(ranks: list[int], adj) -> list[int]:
    while True:
        keys = [
            (ranks[i], tuple(sorted(ranks[j] for j, _ in adj[i])))
            for i in range(len(ranks))
        ]
        new = _dense(keys)
        if new == ranks:
            return ranks
        ranks = new


def _complete_rankings(init_keys, adj, cap: int = 20000):
    stack = [_refine(_dense(init_keys), adj)]
    produced = 0
    while stack:
        ranks = stack.pop()
        tied = _first_tied_class(ranks)
        if tied is None:
            produced += 1
            if produced > cap:
                raise MoleculeError("canonicalization symmetry budget exceeded")
            yield ranks
            continue
        for a in tied:
            keys = [(r, 0) if i != a else (r, -1) for i, r in enumerate(ranks)]
            stack.append(_refine(_dense(keys), adj))


def _first_tied_class(ranks) -> list[int] | None:
    by_rank: dict[int, list[int]] = {}
    for i, r in enumerate(ranks):
        by_rank.setdefault(r, []).append(i)
    for r in sorted(by_rank):
        if len(by_rank[r]) > 1:
            return by_rank[r]
    return None


def _render(mol, heavy, adj, h_count, ranks) -> str:
    n = len(heavy)
    root = ranks.index(0)
    visited = [False] * n
    closures: dict[tuple[int, int], int] = {}
    digit_state = {"next": 1, "free": []}

    # First pass: identify ring-closure edges via DFS in rank order.
    tree: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    ring_edges: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    parent = [-1] * n

    def walk(i: int):
        for j, order in sorted(adj[i], key=lambda t: ranks[t[0]]):
            if not visited[j]:
                visited[j] = True
                parent[j] = i
                tree[i].append((j, order))
                walk(j)
            elif parent[i] != j and (j, i) not in closures and (i, j) not in closures:
                closures[(i, j)] = 0  # placeholder; digit assigned on render
                ring_edges[i].append((j, order))
                ring_edges[j].append((i, order))

    visited[root] = True
    walk(root)
    for i in range(n):
        ring_edges[i].sort(key=lambda t: ranks[t[0]])

    digit_of: dict[tuple[int, int], int] = {}
    out: list[str] = []

    def bond_token(i: int, j: int, order: float) -> str:
        both_arom = mol.atoms[heavy[i]].aromatic and mol.atoms[heavy[j]].aromatic
        if order == SINGLE:
            return "-" if both_arom else ""
        if order == AROMATIC:
            return "" if both_arom else ":"
        return "=" if order == DOUBLE else "#"

    def closure_digit(i: int, j: int) -> str:
        key = (i, j) if (i, j) in digit_of or (j, i) not in digit_of else (j, i)
        if key in digit_of:
            label = digit_of.pop(key)
            digit_state["free"].append(label)
            digit_state["free"].sort()
        else:
            if digit_state["free"]:
                label = digit_state["free"].pop(0)
            else:
                label = digit_state["next"]
                digit_state["next"] += 1
            digit_of[(i, j)] = label
        return str(label) if label < 10 else f"%{label:02d}"

    def emit(i: int, incoming: str):
        out.append(incoming)
        out.append(_atom_token(mol, heavy[i], h_count[i], len(adj[i])))
        for j, order in ring_edges[i]:
            out.append(bond_token(i, j, order))
            out.append(closure_digit(i, j))
        children = tree[i]
        for k, (j, order) in enumerate(children):
            token = bond_token(i, j, order)
            if k < len(children) - 1:
                out.append("(")
                emit(j, token)
                out.append(")")
            else:
                emit(j, token)

    emit(root, "")
    return "".join(out)


def _atom_token(mol, atom_idx: int, h: int, heavy_degree: int) -> str:
    a = mol.atoms[atom_idx]
    heavy_orders = []
    for b in mol.bonds:
        if atom_idx in (b.a, b.b) and mol.atoms[b.other(atom_idx)].element != "H":
            heavy_orders.append(b.order)
    try:
        expected = _implicit_h(a.element, 0, a.aromatic, heavy_orders) if a.charge == 0 else -1
    except ValenceError:
        expected = -1
    symbol = a.element.lower() if a.aromatic else a.element
    if a.charge == 0 and h == expected and a.element != "H":
        return symbol
    token = symbol
    if h == 1:
        token += "H"
    elif h > 1:
        token += f"H{h}"
    if a.charge:
        sign = "+" if a.charge > 0 else "-"
        token += sign if abs(a.charge) == 1 else f"{sign}{abs(a.charge)}"
    return f"[{token}]"


def canonical_smiles(text_or_mol) -> str:
    """Round a SMILES string or molecule through the canonical writer."""
    if isinstance(text_or_mol, str):
        return write_smiles(parse_smiles(text_or_mol))
    return write_smiles(text_or_mol)
