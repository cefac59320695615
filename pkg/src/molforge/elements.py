"""Element data for the supported chemistry subset.

The generator vocabulary is the seven elements below plus a STOP sentinel
used by the sequential builder to terminate an episode.
"""

from __future__ import annotations

# Symbols in a fixed, stable order. Index into this list is the class id
# used by every categorical head in the package.
ELEMENTS = ("H", "C", "N", "O", "F", "S", "Cl")

STOP = "<stop>"

# Vocabulary for type prediction: elements plus the termination token.
TYPE_VOCAB = ELEMENTS + (STOP,)
STOP_INDEX = TYPE_VOCAB.index(STOP)

ATOMIC_NUMBER = {"H": 1, "C": 6, "N": 7, "O": 8, "F": 9, "S": 16, "Cl": 17}

# Standard atomic weights, 2021 IUPAC abridged values.
ATOMIC_MASS = {
    "H": 1.008,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "S": 32.06,
    "Cl": 35.45,
}

# Single-bond covalent radii (Angstrom) used by distance-based bond
# perception together with a fixed 0.4 A slack.
COVALENT_RADIUS = {
    "H": 0.31,
    "C": 0.76,
    "N": 0.71,
    "O": 0.66,
    "F": 0.57,
    "S": 1.05,
    "Cl": 1.02,
}
PERCEPTION_TOLERANCE = 0.4

# Approximate double/triple bond radii; only used to decide whether a
# perceived contact is short enough to justify a bond-order upgrade.
DOUBLE_RADIUS = {"C": 0.67, "N": 0.60, "O": 0.57, "S": 0.94}
TRIPLE_RADIUS = {"C": 0.60, "N": 0.54}

# Valence an atom is "expected" to fill with neutral charge; drives
# implicit hydrogen counts and bond-order upgrades.
DEFAULT_VALENCE = {"H": 1, "C": 4, "N": 3, "O": 2, "F": 1, "S": 2, "Cl": 1}

# Hard ceiling; exceeding this is a validity failure. Sulfur is allowed
# its hypervalent states up to sulfone.
MAX_VALENCE = {"H": 1, "C": 4, "N": 3, "O": 2, "F": 1, "S": 6, "Cl": 1}


def max_valence(element: str, charge: int = 0) -> int:
    """Charge-adjusted valence ceiling.

    Cations of N/O gain a bond, anions lose one; charged carbon loses one
    either way. Other elements keep their neutral ceiling.
    """
    base = MAX_VALENCE[element]
    if element in ("N", "O"):
        return max(0, base + charge)
    if element == "C":
        return max(0, base - abs(charge))
    return base


def default_valence(element: str, charge: int = 0) -> int:
    base = DEFAULT_VALENCE[element]
    if element in ("N", "O"):
        return max(0, base + charge)
    if element == "C":
        return max(0, base - abs(charge))
    return base


def is_supported(symbol: str) -> bool:
    return symbol in ATOMIC_MASS
