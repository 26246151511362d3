"""Code-point decoding and batch sampling.

decode_code is the per-step renormalization recurrence: build the modified
conditional CDF, locate the code, descend into the chosen interval, repeat
until EOS or the length bound.  Feeding a Fraction code into an exact model
keeps the whole decode exact; floats give the fast path, which keeps ~52 bits
of resolution inside the current prefix interval but may disagree with the
exact oracle for codes within ~2^-40 of an interval boundary.

Arithmetic sampling decodes a shifted lattice of codes; ancestral sampling
decodes i.i.d. uniform codes, so both methods share one code path.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .codebook import (
    LatticeSpec,
    Real,
    UnitInterval,
    cdf_intervals,
    interval_of,
    is_exact,
    lattice_codes,
    locate,
    renormalize,
)
from .errors import EmptyIntervalError, ParameterError
from .models import ModifierChain, SequenceModel, Tokens, conditional_modified, sequence_logprob


@dataclass(frozen=True)
class SampleEntry:
    sequence: Tokens
    code: Optional[Real]  # absent for ancestral entries
    logprob: float


@dataclass(frozen=True)
class SampleSet:
    entries: tuple[SampleEntry, ...]
    method: str  # "arithmetic" | "ancestral"
    shift: Optional[Real] = None
    chain: Optional[tuple] = None

    def sequences(self) -> list[Tokens]:
        return [e.sequence for e in self.entries]


def decode_code(
    model: SequenceModel,
    c: Real,
    chain: ModifierChain | None = None,
    max_length: int | None = None,
) -> Tokens:
    """Decode one code point into a complete sequence."""
    if not (0 <= c < 1):
        raise ParameterError(f"code {c} outside [0, 1)")
    limit = model.max_length if max_length is None else min(max_length, model.max_length)
    tokens: Tokens = ()
    while not model.is_complete(tokens) and len(tokens) < limit:
        dist = conditional_modified(model, tokens, chain)
        intervals = cdf_intervals(dist)
        sym = locate(c, intervals)
        c = renormalize(c, interval_of(sym, intervals))
        tokens = tokens + (sym,)
    return tokens


def code_interval_of_sequence(
    model: SequenceModel, tokens: Tokens, chain: ModifierChain | None = None
) -> UnitInterval:
    """The codebook interval housing a sequence or prefix.

    The interval width equals the (modified) sequence probability, exactly in
    rational arithmetic when the model is exact.
    """
    model.validate_tokens(tokens)
    exact = True
    lo: Real = 0
    width: Real = 1
    for t, tok in enumerate(tokens):
        dist = conditional_modified(model, tokens[:t], chain)
        exact = exact and dist.is_exact
        p = dist.probs[tok]
        if p == 0:
            raise EmptyIntervalError(f"sequence {tokens} has zero probability")
        below = sum(dist.probs[:tok])
        lo = lo + width * below
        width = width * p
    if exact:
        lo, width = Fraction(lo), Fraction(width)
    return UnitInterval(lo, lo + width)


def parallel_decode(
    model: SequenceModel,
    codes: Sequence[Real],
    chain: ModifierChain | None = None,
    worker_count: int = 1,
) -> SampleSet:
    """Decode a batch of codes; output is by input index, independent of workers."""
    if worker_count < 1:
        raise ParameterError("worker_count must be >= 1")
    work: Callable[[Real], Tokens] = lambda c: decode_code(model, c, chain)
    if worker_count == 1 or len(codes) <= 1:
        seqs = [work(c) for c in codes]
    else:
        with ThreadPoolExecutor(max_workers=worker_count) as pool:
            seqs = list(pool.map(work, codes))
    entries = tuple(
        SampleEntry(seq, code, sequence_logprob(model, seq, chain))
        for seq, code in zip(seqs, codes)
    )
    return SampleSet(entries, method="arithmetic", chain=_chain_key(chain))


def arithmetic_sample(
    model: SequenceModel,
    spec: LatticeSpec,
    chain: ModifierChain | None = None,
    worker_count: int = 1,
) -> SampleSet:
    """Decode the full shifted lattice {c_i}; entries come back ordered by code."""
    codes = sorted(lattice_codes(spec))
    out = parallel_decode(model, codes, chain, worker_count)
    return SampleSet(out.entries, method="arithmetic", shift=spec.shift, chain=out.chain)


def ancestral_sample(
    model: SequenceModel,
    n: int,
    seed,
    chain: ModifierChain | None = None,
) -> SampleSet:
    """n i.i.d. sequences via inverse-CDF sampling (uniform codes from `seed`)."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = random.Random(seed)
    codes = [rng.random() for _ in range(n)]
    entries = []
    for c in codes:
        seq = decode_code(model, c, chain)
        entries.append(SampleEntry(seq, None, sequence_logprob(model, seq, chain)))
    return SampleSet(tuple(entries), method="ancestral", chain=_chain_key(chain))


def _chain_key(chain: ModifierChain | None) -> Optional[tuple]:
    return tuple(chain) if chain else None
