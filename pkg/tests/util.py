"""Shared model builders for the test suite."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from arithdecode import MarkovModel, TabularModel, Vocabulary

AB = Vocabulary(("A", "B"))


def bernoulli_model(p_a=Fraction(3, 5), max_length=2) -> MarkovModel:
    """Independent per-step choice: P(A) = p_a at every position, no EOS."""
    return MarkovModel(0, {(): (p_a, 1 - p_a)}, AB, max_length)


def one_symbol_model(p_a=Fraction(3, 5)) -> MarkovModel:
    """The two-symbol, length-one setting of the naive-lattice bias example."""
    return MarkovModel(0, {(): (p_a, 1 - p_a)}, AB, 1)


def deterministic_model(tokens=(0, 1, 0)) -> TabularModel:
    vocab = Vocabulary(("A", "B"))
    return TabularModel({tuple(tokens): Fraction(1)}, vocab, len(tokens))


def all_complete_sequences(vocab_size: int, max_length: int, eos: int | None):
    """Every complete sequence for a fixed vocabulary/length/EOS convention."""
    out = []
    if eos is None:
        return [tuple(s) for s in itertools.product(range(vocab_size), repeat=max_length)]
    non_eos = [v for v in range(vocab_size) if v != eos]
    for length in range(1, max_length + 1):
        if length < max_length:
            for body in itertools.product(non_eos, repeat=length - 1):
                out.append(tuple(body) + (eos,))
        else:
            for body in itertools.product(non_eos, repeat=length):
                out.append(tuple(body))
            for body in itertools.product(non_eos, repeat=length - 1):
                out.append(tuple(body) + (eos,))
    return sorted(out)


def random_tabular_model(
    rng: random.Random, vocab_size=3, max_length=3, eos=None, weight_cap=20
) -> TabularModel:
    """Random exact joint: integer weights over all complete sequences."""
    vocab = Vocabulary(tuple("abcdef"[:vocab_size]), eos=eos)
    seqs = all_complete_sequences(vocab_size, max_length, eos)
    weights = [rng.randint(1, weight_cap) for _ in seqs]
    total = sum(weights)
    table = {s: Fraction(w, total) for s, w in zip(seqs, weights)}
    return TabularModel(table, vocab, max_length)


def random_markov_model(
    rng: random.Random, vocab_size=3, max_length=3, denom=8
) -> MarkovModel:
    """Random order-1 chain with per-row denominators `denom` (no EOS)."""
    vocab = Vocabulary(tuple("abcdef"[:vocab_size]))

    def row():
        cuts = sorted(rng.randint(0, denom) for _ in range(vocab_size - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
        return tuple(Fraction(p, denom) for p in parts)

    rows = {(): row()}
    for v in range(vocab_size):
        rows[(v,)] = row()
    return MarkovModel(1, rows, vocab, max_length)
