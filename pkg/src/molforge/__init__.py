"""molforge: desk-scale scaffold-constrained 3D molecule generation.

The package is organized as a stack: a small chemistry kernel (graphs,
SMILES, bond perception, scaffolds), property calculators, a numpy
reverse-mode tensor engine, the sequential placement actor, a two-tower
graph-attention critic, reward/fine-tuning logic, and a CLI pipeline.
"""

__version__ = "0.1.0"

from .mol import Atom, Bond, Molecule3D
from .smiles import canonical_smiles, parse_smiles, write_smiles
from .perception import perceive_bonds, perceive_molecule
from .scaffold import contains_scaffold, murcko_scaffold, strip_hydrogens

__all__ = [
    "Atom",
    "Bond",
    "Molecule3D",
    "canonical_smiles",
    "parse_smiles",
    "write_smiles",
    "perceive_bonds",
    "perceive_molecule",
    "contains_scaffold",
    "murcko_scaffold",
    "strip_hydrogens",
    "__version__",
]
