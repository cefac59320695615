"""Drug-likeness filter: Lipinski bounds plus rotatable-bond, mass-floor
and aromaticity requirements."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..mol import Molecule3D
from .vector import DescriptorVector, compute_descriptors


@dataclass
class LipinskiReport:
    passed: bool
    violations: list[str] = field(default_factory=list)


def lipinski_from_vector(d: DescriptorVector) -> LipinskiReport:
    violations = []
    if d.HBD > 5:
        violations.append("donors")
    if d.HBA > 10:
        violations.append("acceptors")
    if d.ROTB > 5:
        violations.append("rotatable")
    if not 200.0 <= d.MW <= 500.0:
        violations.append("mass")
    if not d.ALOGP < 5.0:
        violations.append("logp")
    if d.AROM < 1:
        violations.append("aromatic")
    return LipinskiReport(passed=not violations, violations=violations)


def lipinski_modified(mol: Molecule3D) -> LipinskiReport:
    return lipinski_from_vector(compute_descriptors(mol))
