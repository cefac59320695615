"""Aqueous solubility estimate (log mol/L) by linear regression."""

from __future__ import annotations

from .vector import DescriptorVector


def esol(d: DescriptorVector) -> float:
    # intercept and coefficients of the published fit, applied verbatim
    return 0.16 - 0.63 * d.clogP - 0.0062 * d.MW + 0.066 * d.ROTB - 0.74 * d.AP
