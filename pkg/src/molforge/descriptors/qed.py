"""Drug-likeness as the geometric mean of eight desirability curves.

Each descriptor passes through an asymmetric double sigmoid whose six
shape parameters come from a bundled table. Curves are normalized by
their numerically located maximum so every desirability lies in (0, 1].
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

from .corpus import _data
from .vector import DescriptorVector

# Geometric-mean inputs are floored here; a zero would send the log to
# -inf on molecules far outside the calibrated descriptor ranges.
D_FLOOR = 1e-6

_ORDER = ("MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS")


@dataclass(frozen=True)
class AdsParams:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    dmax: float


def ads_raw(x: float, p: AdsParams) -> float:
    """Asymmetric double sigmoid before normalization."""
    rise = 1.0 + math.exp(-(x - p.c + p.d / 2.0) / p.e)
    fall = 1.0 + math.exp(-(x - p.c - p.d / 2.0) / p.f)
    return p.a + p.b / rise * (1.0 - 1.0 / fall)


def desirability(x: float, p: AdsParams) -> float:
    return ads_raw(x, p) / p.dmax


def _locate_max(a, b, c, d, e, f) -> float:
    """Peak of the raw curve: coarse grid, then golden-section refine."""
    probe = AdsParams(a, b, c, d, e, f, 1.0)
    span = abs(d) / 2.0 + 25.0 * max(e, f, 0.1)
    lo, hi = c - span, c + span
    n = 4000
    xs = [lo + (hi - lo) * k / n for k in range(n + 1)]
    best = max(range(n + 1), key=lambda k: ads_raw(xs[k], probe))
    left = xs[max(best - 1, 0)]
    right = xs[min(best + 1, n)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = right - phi * (right - left)
    x2 = left + phi * (right - left)
    f1, f2 = ads_raw(x1, probe), ads_raw(x2, probe)
    for _ in range(200):
        if right - left < 1e-12 * max(1.0, abs(left)):
            break
        if f1 < f2:
            left, x1, f1 = x1, x2, f2
            x2 = left + phi * (right - left)
            f2 = ads_raw(x2, probe)
        else:
            right, x2, f2 = x2, x1, f1
            x1 = right - phi * (right - left)
            f1 = ads_raw(x1, probe)
    return ads_raw((left + right) / 2.0, probe)


@lru_cache(maxsize=None)
def load_qed_params() -> dict[str, AdsParams]:
    out = {}
    reader = csv.DictReader(io.StringIO(_data("qed_params.csv")))
    for row in reader:
        a, b, c, d = (float(row[k]) for k in "abcd")
        e, f = float(row["e"]), float(row["f"])
        if e == 0.0 or f == 0.0:
            raise ValueError(f"zero sigmoid width for {row['descriptor']}")
        out[row["descriptor"]] = AdsParams(a, b, c, d, e, f, _locate_max(a, b, c, d, e, f))
    if set(out) != set(_ORDER):
        raise ValueError("parameter table does not cover the eight descriptors")
    return out


def geometric_mean(values) -> float:
    logs = [math.log(v) for v in values]
    return math.exp(sum(logs) / len(logs))


def qed_breakdown(
    d: DescriptorVector, params: dict[str, AdsParams] | None = None
) -> tuple[float, dict[str, float], list[str]]:
    """(qed, per-descriptor desirabilities, names clamped to the floor)."""
    params = params or load_qed_params()
    values = {}
    clamped = []
    for name in _ORDER:
        x = getattr(d, name)
        v = desirability(float(x), params[name])
        if v < D_FLOOR:
            clamped.append(name)
            v = D_FLOOR
        values[name] = v
    return geometric_mean(values.values()), values, clamped


def qed(d: DescriptorVector, params: dict[str, AdsParams] | None = None) -> float:
    value, _, _ = qed_breakdown(d, params)
    return value
