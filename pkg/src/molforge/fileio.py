"""Plain-text structure and table formats.

XYZ files use six-decimal fixed-point coordinates. The comment line
carries optional ``key=value`` fields separated by spaces; ``scaffold=``
holds comma-separated atom indices of the seed framework so masks survive
a round trip.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .elements import is_supported
from .mol import Atom, Molecule3D, MoleculeError


class XyzFormatError(MoleculeError):
    pass


def write_xyz(mol: Molecule3D, path: str | Path | None = None) -> str:
    """Render an XYZ block; also write it to ``path`` when given."""
    if not mol.has_coordinates():
        raise MoleculeError("cannot write XYZ without coordinates")
    fields = []
    if mol.provenance:
        fields.append(f"provenance={mol.provenance}")
    if mol.scaffold_mask:
        idx = ",".join(str(i) for i in sorted(mol.scaffold_mask))
        fields.append(f"scaffold={idx}")
    lines = [str(len(mol.atoms)), " ".join(fields)]
    for atom in mol.atoms:
        x, y, z = atom.position
        lines.append(f"{atom.element} {x:.6f} {y:.6f} {z:.6f}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_xyz(source: str | Path) -> Molecule3D:
    """Parse an XYZ block from a path or literal text.

    The structure comes back without bonds; run perception afterwards.
    """
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and Path(source).is_file()
    ):
        text = Path(source).read_text()
    else:
        text = str(source)
    lines = text.splitlines()
    if not lines:
        raise XyzFormatError("empty XYZ input (line 1)")
    try:
        count = int(lines[0].strip())
    except ValueError:
        raise XyzFormatError(f"bad atom count {lines[0]!r} (line 1)") from None
    if len(lines) < count + 2:
        raise XyzFormatError(
            f"expected {count + 2} lines, found {len(lines)} (line {len(lines)})"
        )
    comment = lines[1]
    atoms: list[Atom] = []
    for k in range(count):
        lineno = k + 3
        parts = lines[k + 2].split()
        if len(parts) != 4:
            raise XyzFormatError(
                f"expected 'El x y z', got {lines[k + 2]!r} (line {lineno})"
            )
        el = parts[0]
        if not is_supported(el):
            raise XyzFormatError(f"unsupported element {el!r} (line {lineno})")
        try:
            pos = np.array([float(v) for v in parts[1:]], dtype=float)
        except ValueError:
            raise XyzFormatError(f"bad coordinate (line {lineno})") from None
        if not np.all(np.isfinite(pos)):
            raise XyzFormatError(f"non-finite coordinate (line {lineno})")
        atoms.append(Atom(el, pos))

    mask: frozenset[int] = frozenset()
    provenance = ""
    for field in comment.split():
        if field.startswith("scaffold="):
            body = field[len("scaffold="):]
            if body:
                mask = frozenset(int(v) for v in body.split(","))
        elif field.startswith("provenance="):
            provenance = field[len("provenance="):]
    return Molecule3D(atoms, [], mask, provenance)


def write_smiles_file(path: str | Path, rows: list[tuple[str, str]] | list[str]) -> None:
    """One record per line: SMILES, optionally tab-separated from a label."""
    lines = []
    for row in rows:
        if isinstance(row, str):
            lines.append(row)
        else:
            smiles, label = row
            lines.append(f"{smiles}\t{label}" if label else smiles)
    Path(path).write_text("\n".join(lines) + "\n")


def read_smiles_file(path: str | Path) -> list[tuple[str, str]]:
    out = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" in line:
            smiles, label = line.split("\t", 1)
        else:
            smiles, label = line, ""
        out.append((smiles, label))
    return out


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    """RFC-4180 CSV with a header row and deterministic float formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    Path(path).write_text(buf.getvalue(), newline="")


def _format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    if isinstance(value, (np.floating,)):
        return format(float(value), ".10g")
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"empty CSV {path}")
    return rows[0], rows[1:]
