"""Interval arithmetic on the unit interval.

Categorical distributions are partitioned into half-open CDF subintervals
[lo, hi) whose widths equal the symbol probabilities.  A code point is a
number in [0,1) in one of two representations: "fast" (64-bit float) or
"exact" (fractions.Fraction).  All operations here are generic over the two;
feeding Fractions in keeps everything exact, feeding floats uses ordinary
binary arithmetic with a final clamp so drift never leaves a code
un-locatable.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ContractViolationError, InvalidDistributionError, ParameterError

# Dual code representation: float = fast path, Fraction = exact path.
Real = Union[int, float, Fraction]

FAST_SUM_TOL = 1e-9


def is_exact(x: Real) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class UnitInterval:
    """Half-open subinterval [lo, hi) of the unit interval."""

    lo: Real
    hi: Real

    def __post_init__(self):
        if not (0 <= self.lo < self.hi <= 1):
            raise ParameterError(f"not a valid unit subinterval: [{self.lo}, {self.hi})")

    @property
    def width(self) -> Real:
        return self.hi - self.lo

    def contains(self, c: Real) -> bool:
        return self.lo <= c < self.hi


@dataclass(frozen=True)
class CategoricalDistribution:
    """Ordered per-symbol probabilities.

    Exact inputs (ints/Fractions) must sum to exactly 1; float inputs must
    sum to 1 within FAST_SUM_TOL.
    """

    probs: tuple[Real, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(self.probs))
        if not self.probs:
            raise InvalidDistributionError("empty distribution")
        if any(p < 0 for p in self.probs):
            raise InvalidDistributionError(f"negative probability in {self.probs}")
        total = sum(self.probs)
        if self.is_exact:
            if total != 1:
                raise InvalidDistributionError(f"exact probabilities sum to {total}, not 1")
        elif abs(total - 1.0) > FAST_SUM_TOL:
            raise InvalidDistributionError(f"probabilities sum to {total!r}")

    @property
    def is_exact(self) -> bool:
        return all(is_exact(p) for p in self.probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class LatticeSpec:
    """Evenly spaced code set: sample count n, spacing mode, shared shift b.

    mode="paper" places codes at i/(n+1) + b mod 1 for i = 1..n, so a single
    code with b=0 lands at 1/2.  mode="uniform" places them at i/n + b mod 1
    for i = 0..n-1 (spacing exactly 1/n, as the step-function variance
    arguments assume).
    """

    n: int
    mode: str = "paper"
    shift: Real = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("lattice needs n >= 1")
        if self.mode not in ("paper", "uniform"):
            raise ParameterError(f"unknown lattice mode {self.mode!r}")
        if not (0 <= self.shift < 1):
            raise ParameterError("shift must lie in [0, 1)")


class Diagnostics:
    """Counters for representation-drift events (fast path only)."""

    def __init__(self):
        self.locate_drift = 0

    def reset(self):
        self.locate_drift = 0


diagnostics = Diagnostics()


def cdf_intervals(dist: CategoricalDistribution) -> list[tuple[int, UnitInterval]]:
    """Partition [0,1) into per-symbol CDF intervals.

    Returns (symbol_index, interval) pairs in vocabulary order.  Widths equal
    probabilities; zero-probability symbols are omitted; the last upper bound
    is clamped to exactly 1 so float drift cannot leave a gap at the top.
    """
    one: Real = 1 if dist.is_exact else 1.0
    out: list[tuple[int, UnitInterval]] = []
    lo: Real = 0 if dist.is_exact else 0.0
    for idx, p in enumerate(dist.probs):
        if p == 0:
            continue
        hi = lo + p
        out.append((idx, UnitInterval(lo, min(hi, one))))
        lo = hi
    if not out:
        raise InvalidDistributionError("all probabilities are zero")
    last_idx, last = out[-1]
    if last.hi != one:
        out[-1] = (last_idx, UnitInterval(last.lo, one))
    return out


def locate(c: Real, intervals: list[tuple[int, UnitInterval]]) -> int:
    """Return the symbol index whose half-open interval contains c.

    A code at or above the final upper bound (possible only through float
    drift) is assigned to the last interval and counted in diagnostics.
    """
    los = [iv.lo for _, iv in intervals]
    pos = bisect.bisect_right(los, c) - 1
    if pos < 0:
        raise ContractViolationError(f"code {c} below the partition")
    idx, iv = intervals[pos]
    if c >= iv.hi:  # only reachable for the last interval, via drift
        diagnostics.locate_drift += 1
        idx = intervals[-1][0]
    return idx


def interval_of(symbol: int, intervals: list[tuple[int, UnitInterval]]) -> UnitInterval:
    """Look up a symbol's interval in a cdf_intervals partition."""
    for idx, iv in intervals:
        if idx == symbol:
            return iv
    raise ContractViolationError(f"symbol {symbol} has no interval (zero probability?)")


def renormalize(c: Real, interval: UnitInterval) -> Real:
    """Map c from [lo, hi) affinely onto [0, 1)."""
    if not interval.contains(c):
        raise ContractViolationError(f"code {c} outside [{interval.lo}, {interval.hi})")
    if is_exact(c) and is_exact(interval.lo) and is_exact(interval.hi):
        return Fraction(c - interval.lo) / Fraction(interval.width)
    out = (c - interval.lo) / interval.width
    if out >= 1.0:  # float rounding at the top edge
        out = math.nextafter(1.0, 0.0)
    return out


def shift_mod1(c: Real, b: Real) -> Real:
    """(c + b) mod 1, staying in the representation of its inputs."""
    if not (0 <= c < 1 and 0 <= b < 1):
        raise ParameterError("both operands must lie in [0, 1)")
    s = c + b
    return s - 1 if s >= 1 else s


def lattice_codes(spec: LatticeSpec) -> list[Real]:
    """Generate the code set {c_i} for a lattice spec, in lattice index order."""
    b = spec.shift
    exact = is_exact(b)
    if spec.mode == "paper":
        base = (Fraction(i, spec.n + 1) if exact else i / (spec.n + 1) for i in range(1, spec.n + 1))
    else:
        base = (Fraction(i, spec.n) if exact else i / spec.n for i in range(spec.n))
    return [shift_mod1(x, b) for x in base]
