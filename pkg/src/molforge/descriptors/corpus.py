"""Loader for the bundled reference structure set."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources


def _data(name: str) -> str:
    return (resources.files(__package__) / "data" / name).read_text()


@lru_cache(maxsize=None)
def load_reference_corpus() -> tuple[tuple[str, str], ...]:
    """(smiles, name) pairs of the bundled drug-like reference set."""
    rows = []
    for line in _data("reference_corpus.smi").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        smiles, name = line.split("\t")
        rows.append((smiles, name))
    return tuple(rows)
