"""Small numeric and seeding helpers."""

from __future__ import annotations

import hashlib
import math
import os
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_ENUM_CAP = 10_000_000
DEFAULT_STATE_CAP = 5_000_000
TOL = 1e-9


def default_enum_cap() -> int:
    """Enumeration cap, overridable via PATHPROPHET_ENUM_CAP."""
    raw = os.environ.get("PATHPROPHET_ENUM_CAP")
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        cap = int(raw)
    except ValueError:
        return DEFAULT_ENUM_CAP
    return cap if cap > 0 else DEFAULT_ENUM_CAP


def stable_sum(values: Iterable) -> float | Fraction:
    """Sum that stays exact for Fractions and is compensated for floats."""
    vals = list(values)
    if any(isinstance(v, Fraction) for v in vals):
        total = Fraction(0)
        for v in vals:
            total += v if isinstance(v, Fraction) else Fraction(v)
        return total
    return math.fsum(vals)


def derive_seed(master: int, *parts: object) -> int:
    """Deterministic 64-bit stream seed from a master seed and a path of parts.

    Stable across processes and platforms; used so that trial j of a
    Monte Carlo run never depends on how many draws earlier trials made.
    """
    h = hashlib.sha256()
    h.update(str(master).encode())
    for part in parts:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "big")


def weighted_index(weights: Sequence[float], u: float) -> int:
    """Index i such that u falls in the i-th cumulative weight bucket.

    `u` must lie in [0, 1); weights are assumed to sum to ~1.  Ties and
    rounding drift resolve to the last positive-weight bucket.
    """
    acc = 0.0
    last_positive = 0
    for i, w in enumerate(weights):
        if w > 0:
            last_positive = i
        acc += w
        if u < acc:
            return i
    return last_positive
