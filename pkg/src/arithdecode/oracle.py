"""Exact brute-force ground truth for small models.

Everything here is rational arithmetic end to end: the joint is enumerated by
depth-first search over prefixes, the codebook is materialized as explicit
cumulative intervals in dictionary order, and expectations are exact sums.
This is the independent twin of the per-step decoder, used to pin down every
derived expected value in the test suite.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .codebook import LatticeSpec, UnitInterval, lattice_codes
from .errors import EnumerationBoundError, InvalidModelError, ParameterError
from .models import ModifierChain, SequenceModel, Tokens, conditional_modified

Reward = Callable[[Tokens], Fraction]

DEFAULT_BOUND = 10**6


@dataclass(frozen=True)
class ExactJoint:
    """Complete sequences with exact probabilities, dictionary-ordered."""

    entries: tuple[tuple[Tokens, Fraction], ...]

    def __post_init__(self):
        if sum(p for _, p in self.entries) != 1:
            raise InvalidModelError("joint probabilities do not sum to 1")

    def probability(self, tokens: Tokens) -> Fraction:
        for seq, p in self.entries:
            if seq == tokens:
                return p
        return Fraction(0)


def enumerate_joint(
    model: SequenceModel, chain: ModifierChain | None = None, bound: int = DEFAULT_BOUND
) -> ExactJoint:
    """Every positive-probability complete sequence, by exhaustive DFS.

    Requires an exact model (Fraction conditionals after modifiers); DFS in
    vocabulary-index order yields dictionary order for free.
    """
    out: list[tuple[Tokens, Fraction]] = []

    def walk(prefix: Tokens, mass: Fraction):
        if model.is_complete(prefix):
            if len(out) >= bound:
                raise EnumerationBoundError(f"more than {bound} sequences")
            out.append((prefix, mass))
            return
        dist = conditional_modified(model, prefix, chain)
        if not dist.is_exact:
            raise ParameterError("enumerate_joint needs exact (rational) conditionals")
        for v, p in enumerate(dist.probs):
            if p > 0:
                walk(prefix + (v,), mass * Fraction(p))

    walk((), Fraction(1))
    return ExactJoint(tuple(out))


class ExactCodebook:
    """Cumulative dictionary-order intervals, one per complete sequence."""

    def __init__(self, joint: ExactJoint):
        self.sequences: list[Tokens] = []
        self.los: list[Fraction] = []
        self.his: list[Fraction] = []
        acc = Fraction(0)
        for seq, p in joint.entries:
            if p == 0:
                continue
            self.sequences.append(seq)
            self.los.append(acc)
            acc += p
            self.his.append(acc)
        if acc != 1:
            raise InvalidModelError("codebook does not cover [0, 1)")

    def interval_of(self, tokens: Tokens) -> UnitInterval:
        i = self.sequences.index(tokens)
        return UnitInterval(self.los[i], self.his[i])

    def decode(self, c) -> Tokens:
        """The unique sequence whose half-open interval contains c."""
        if not (0 <= c < 1):
            raise ParameterError(f"code {c} outside [0, 1)")
        i = bisect.bisect_right(self.los, c) - 1
        return self.sequences[i]

    def items(self) -> Iterable[tuple[Tokens, UnitInterval]]:
        for seq, lo, hi in zip(self.sequences, self.los, self.his):
            yield seq, UnitInterval(lo, hi)


def exact_codebook(joint: ExactJoint) -> ExactCodebook:
    return ExactCodebook(joint)


def exact_expectation(joint: ExactJoint, reward: Reward) -> Fraction:
    """Sum of reward(s) * P(s) in exact arithmetic."""
    return sum((Fraction(reward(seq)) * p for seq, p in joint.entries), Fraction(0))


def brute_force_decode(c, codebook: ExactCodebook) -> Tokens:
    return codebook.decode(c)


def prefix_probabilities(joint: ExactJoint) -> dict[Tokens, Fraction]:
    """Exact mass of every prefix (including complete sequences and the root)."""
    out: dict[Tokens, Fraction] = {}
    for seq, p in joint.entries:
        for i in range(len(seq) + 1):
            pre = seq[:i]
            out[pre] = out.get(pre, Fraction(0)) + p
    return out


def prefix_intervals(joint: ExactJoint) -> dict[Tokens, UnitInterval]:
    """Exact codebook interval of every prefix (contiguous in dictionary order)."""
    cb = ExactCodebook(joint)
    out: dict[Tokens, tuple[Fraction, Fraction]] = {}
    for seq, lo, hi in zip(cb.sequences, cb.los, cb.his):
        for i in range(len(seq) + 1):
            pre = seq[:i]
            if pre in out:
                plo, phi = out[pre]
                out[pre] = (min(plo, lo), max(phi, hi))
            else:
                out[pre] = (lo, hi)
    return {pre: UnitInterval(lo, hi) for pre, (lo, hi) in out.items()}


def full_period_shift_grid(codebook: ExactCodebook, n: int, min_k: int = 10) -> list[Fraction]:
    """Shifts b = j/(K(n+1)) that refine every breakpoint of the estimator in b.

    The arithmetic-sampling estimator is piecewise constant in b with
    breakpoints at rationals whose denominators divide lcm(D, n+1), D being
    the lcm of the codebook endpoint denominators.  Averaging over this grid
    therefore reproduces the continuous average exactly.
    """
    denoms = [x.denominator for x in codebook.los + codebook.his]
    period = math.lcm(n + 1, *denoms)
    k = period // (n + 1)
    if k < min_k:
        k *= -(-min_k // k)  # ceil division
    m = k * (n + 1)
    return [Fraction(j, m) for j in range(m)]


def full_period_average(
    codebook: ExactCodebook,
    n: int,
    reward: Reward,
    mode: str = "paper",
    min_k: int = 10,
) -> Fraction:
    """Exact average over a full period of b of the lattice-sample mean reward."""
    grid = full_period_shift_grid(codebook, n, min_k)
    total = Fraction(0)
    for b in grid:
        codes = lattice_codes(LatticeSpec(n, mode, b))
        total += sum((Fraction(reward(codebook.decode(c))) for c in codes), Fraction(0)) / n
    return total / len(grid)


def write_oracle_csv(joint: ExactJoint, model: SequenceModel, path: str):
    """Emit the exact joint and codebook as CSV with rational columns."""
    cb = ExactCodebook(joint)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sequence", "prob_num", "prob_den", "lo", "hi"])
        for seq, iv in cb.items():
            p = iv.hi - iv.lo
            w.writerow(
                [model.vocabulary.render(seq), p.numerator, p.denominator, str(iv.lo), str(iv.hi)]
            )
