"""Sequence models over an ordered vocabulary, plus logit-modifier transforms.

A model exposes conditional distributions over the next token given a prefix.
Reference implementations: a tabular model backed by an explicit joint table,
a Markov model with fixed-order transition rows, and a seeded synthetic LM
whose conditionals are a stateless keyed hash of the prefix (so they are
bit-reproducible and safe to evaluate from many workers at once).

Tabular and Markov models carry Fraction probabilities sourced from decimal
strings, so every downstream computation can stay exact.  The synthetic LM is
float-only; it stands in for a neural model in statistical experiments.
"""

from __future__ import annotations

import hashlib
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .codebook import CategoricalDistribution, Real, is_exact
from .errors import (
    InvalidModelError,
    InvalidPrefixError,
    InvalidSequenceError,
    ParameterError,
)

Tokens = tuple[int, ...]


@dataclass(frozen=True)
class Vocabulary:
    """Ordered printable symbols; eos=None means fixed-length sequences."""

    symbols: tuple[str, ...]
    eos: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise InvalidModelError("empty vocabulary")
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidModelError("duplicate vocabulary symbols")
        if self.eos is not None and not (0 <= self.eos < len(self.symbols)):
            raise InvalidModelError(f"eos index {self.eos} out of range")

    def __len__(self) -> int:
        return len(self.symbols)

    def index_of(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise InvalidSequenceError(f"unknown token {symbol!r}") from None

    def render(self, tokens: Tokens) -> str:
        return " ".join(self.symbols[t] for t in tokens)

    def parse(self, text: str) -> Tokens:
        return tuple(self.index_of(s) for s in text.split())


class SequenceModel(ABC):
    """Conditional-distribution provider over prefixes of bounded length."""

    vocabulary: Vocabulary
    max_length: int

    @abstractmethod
    def conditional(self, prefix: Tokens) -> CategoricalDistribution:
        """Distribution of the next token given `prefix` (prefix not complete)."""

    def is_complete(self, tokens: Tokens) -> bool:
        if not tokens:
            return False
        eos = self.vocabulary.eos
        return (eos is not None and tokens[-1] == eos) or len(tokens) >= self.max_length

    def validate_tokens(self, tokens: Tokens):
        size = len(self.vocabulary)
        for t in tokens:
            if not (0 <= t < size):
                raise InvalidSequenceError(f"token index {t} out of vocabulary")
        if len(tokens) > self.max_length:
            raise InvalidSequenceError("sequence longer than max_length")
        eos = self.vocabulary.eos
        if eos is not None and eos in tokens[:-1]:
            raise InvalidSequenceError("token follows EOS")


# ---------------------------------------------------------------------------
# Logit modifiers


@dataclass(frozen=True)
class Temperature:
    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise ParameterError("temperature must be positive")


@dataclass(frozen=True)
class TopK:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("top-k needs k >= 1")


@dataclass(frozen=True)
class Nucleus:
    p: float

    def __post_init__(self):
        if not (0 < self.p <= 1):
            raise ParameterError("nucleus p must lie in (0, 1]")


Modifier = Union[Temperature, TopK, Nucleus]
ModifierChain = Sequence[Modifier]


def _renormalized(probs: list[Real]) -> CategoricalDistribution:
    total = sum(probs)
    if total == 0:
        raise InvalidModelError("modifier zeroed out the whole distribution")
    if all(is_exact(p) for p in probs):
        return CategoricalDistribution(tuple(Fraction(p) / Fraction(total) for p in probs))
    return CategoricalDistribution(tuple(p / total for p in probs))


def apply_temperature(dist: CategoricalDistribution, t: float) -> CategoricalDistribution:
    """Sharpen (t<1) or flatten (t>1) a distribution: p_i ∝ p_i^(1/t)."""
    if t <= 0:
        raise ParameterError("temperature must be positive")
    if t == 1:
        return dist
    powered = [0.0 if p == 0 else float(p) ** (1.0 / t) for p in dist.probs]
    return _renormalized(powered)


def apply_top_k(dist: CategoricalDistribution, k: int) -> CategoricalDistribution:
    """Zero all but the k highest probabilities (ties broken by vocabulary order)."""
    if k < 1:
        raise ParameterError("top-k needs k >= 1")
    if k >= len(dist):
        return dist
    order = sorted(range(len(dist)), key=lambda i: (-dist.probs[i], i))
    keep = set(order[:k])
    kept = [p if i in keep else type(p)(0) for i, p in enumerate(dist.probs)]
    return _renormalized(kept)


def apply_nucleus(dist: CategoricalDistribution, p: float) -> CategoricalDistribution:
    """Keep the smallest probability-sorted symbol set with cumulative mass >= p."""
    if not (0 < p <= 1):
        raise ParameterError("nucleus p must lie in (0, 1]")
    order = sorted(range(len(dist)), key=lambda i: (-dist.probs[i], i))
    keep: set[int] = set()
    acc: Real = 0
    for i in order:
        keep.add(i)
        acc += dist.probs[i]
        if float(acc) >= p:  # float compare so 4/5 meets a threshold written as 0.8
            break
    kept = [q if i in keep else type(q)(0) for i, q in enumerate(dist.probs)]
    return _renormalized(kept)


def apply_modifier(dist: CategoricalDistribution, mod: Modifier) -> CategoricalDistribution:
    if isinstance(mod, Temperature):
        return apply_temperature(dist, mod.t)
    if isinstance(mod, TopK):
        return apply_top_k(dist, mod.k)
    if isinstance(mod, Nucleus):
        return apply_nucleus(dist, mod.p)
    raise ParameterError(f"unknown modifier {mod!r}")


def conditional_modified(
    model: SequenceModel, prefix: Tokens, chain: ModifierChain | None
) -> CategoricalDistribution:
    """The model conditional with the modifier chain applied left to right."""
    if model.is_complete(prefix):
        raise InvalidPrefixError(f"prefix {prefix} is already complete")
    dist = model.conditional(prefix)
    for mod in chain or ():
        dist = apply_modifier(dist, mod)
    return dist


def sequence_logprob(model: SequenceModel, tokens: Tokens, chain: ModifierChain | None = None) -> float:
    """Sum of log modified-conditional probabilities; -inf on any zero step."""
    model.validate_tokens(tokens)
    total = 0.0
    for t, tok in enumerate(tokens):
        dist = conditional_modified(model, tokens[:t], chain)
        p = dist.probs[tok]
        if p == 0:
            return -math.inf
        total += math.log(p)
    return total


# ---------------------------------------------------------------------------
# Reference models


class TabularModel(SequenceModel):
    """Model defined by an explicit joint table over complete sequences.

    Conditionals are computed by marginalizing the table over continuations;
    a prefix-mass trie is precomputed so each conditional is O(|V|).
    """

    def __init__(self, table: dict[Tokens, Real], vocabulary: Vocabulary, max_length: int):
        self.vocabulary = vocabulary
        self.max_length = max_length
        self.table = {tuple(k): v for k, v in table.items()}
        total = sum(self.table.values())
        exact = all(is_exact(v) for v in self.table.values())
        if (exact and total != 1) or (not exact and abs(total - 1.0) > 1e-9):
            raise InvalidModelError(f"joint table sums to {total}, not 1")
        self._mass: dict[Tokens, Real] = {}
        for seq, p in self.table.items():
            if p < 0:
                raise InvalidModelError("negative table probability")
            self.validate_tokens(seq)
            if not self.is_complete(seq):
                raise InvalidModelError(f"table key {seq} is not a complete sequence")
            for i in range(len(seq) + 1):
                pre = seq[:i]
                self._mass[pre] = self._mass.get(pre, 0) + p

    def conditional(self, prefix: Tokens) -> CategoricalDistribution:
        prefix = tuple(prefix)
        if self.is_complete(prefix):
            raise InvalidPrefixError(f"prefix {prefix} is complete")
        mass = self._mass.get(prefix, 0)
        if mass == 0:
            raise InvalidPrefixError(f"prefix {prefix} has zero probability")
        zero = 0 if is_exact(mass) else 0.0
        probs = []
        for v in range(len(self.vocabulary)):
            child = self._mass.get(prefix + (v,), zero)
            probs.append(Fraction(child, 1) / Fraction(mass, 1) if is_exact(mass) and is_exact(child) else child / mass)
        return CategoricalDistribution(tuple(probs))


class MarkovModel(SequenceModel):
    """Fixed-order Markov chain: the conditional depends on the last `order` tokens."""

    def __init__(
        self,
        order: int,
        rows: dict[Tokens, Sequence[Real]],
        vocabulary: Vocabulary,
        max_length: int,
    ):
        if order < 0:
            raise ParameterError("order must be >= 0")
        self.order = order
        self.vocabulary = vocabulary
        self.max_length = max_length
        self.rows = {}
        for ctx, row in rows.items():
            if len(row) != len(vocabulary):
                raise InvalidModelError(f"row for context {ctx} has wrong arity")
            self.rows[tuple(ctx)] = CategoricalDistribution(tuple(row))

    def conditional(self, prefix: Tokens) -> CategoricalDistribution:
        prefix = tuple(prefix)
        if self.is_complete(prefix):
            raise InvalidPrefixError(f"prefix {prefix} is complete")
        ctx = prefix[-self.order:] if self.order else ()
        if ctx not in self.rows:
            raise InvalidModelError(f"missing transition row for context {ctx}")
        return self.rows[ctx]


class SyntheticLM(SequenceModel):
    """Deterministic pseudo-random model keyed by (seed, prefix).

    Per-prefix uniforms come from a blake2b hash; raising them to the
    `peakedness` power concentrates mass on few continuations, mimicking a
    low-temperature neural model.  Identical seeds give bit-identical
    conditionals; there is no mutable state.
    """

    def __init__(
        self,
        seed: int,
        vocab_size: int,
        max_length: int,
        peakedness: float = 1.0,
        eos: int | None = None,
    ):
        if vocab_size < 2:
            raise ParameterError("synthetic LM needs vocab_size >= 2")
        if peakedness <= 0:
            raise ParameterError("peakedness must be positive")
        self.seed = seed
        self.peakedness = peakedness
        self.vocabulary = Vocabulary(tuple(f"t{i}" for i in range(vocab_size)), eos=eos)
        self.max_length = max_length

    def conditional(self, prefix: Tokens) -> CategoricalDistribution:
        prefix = tuple(prefix)
        if self.is_complete(prefix):
            raise InvalidPrefixError(f"prefix {prefix} is complete")
        size = len(self.vocabulary)
        key = f"{self.seed}|{','.join(map(str, prefix))}".encode()
        digest = hashlib.blake2b(key, digest_size=8 * size).digest()
        logs = []
        for i in range(size):
            word = int.from_bytes(digest[8 * i : 8 * (i + 1)], "big")
            u = (word + 1) / (2**64 + 1)  # strictly inside (0, 1)
            logs.append(self.peakedness * math.log(u))
        peak = max(logs)
        weights = [math.exp(x - peak) for x in logs]
        total = sum(weights)
        return CategoricalDistribution(tuple(w / total for w in weights))


def make_tabular_model(
    table: dict[Tokens, Real], vocabulary: Vocabulary, max_length: int
) -> TabularModel:
    return TabularModel(table, vocabulary, max_length)


def make_markov_model(
    order: int, rows: dict[Tokens, Sequence[Real]], vocabulary: Vocabulary, max_length: int
) -> MarkovModel:
    return MarkovModel(order, rows, vocabulary, max_length)


def make_synthetic_lm(
    seed: int, vocab_size: int, max_length: int, peakedness: float = 1.0, eos: int | None = None
) -> SyntheticLM:
    return SyntheticLM(seed, vocab_size, max_length, peakedness, eos)


# ---------------------------------------------------------------------------
# Model-definition files (JSON; probabilities as decimal strings)


def _parse_prob(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise InvalidModelError(f"unparseable probability {s!r}") from None


def _format_prob(p: Real) -> str:
    f = Fraction(p) if is_exact(p) else Fraction(p).limit_denominator(10**12)
    num, den = f.numerator, f.denominator
    # prefer an exact decimal string when the denominator is 2^a * 5^b
    d = den
    for base in (2, 5):
        while d % base == 0:
            d //= base
    if d == 1:
        from decimal import Decimal

        return str(Decimal(num) / Decimal(den))
    return f"{num}/{den}"


def model_from_dict(spec: dict) -> SequenceModel:
    try:
        mtype = spec["type"]
        max_length = int(spec["max_length"])
        eos = spec.get("eos")
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidModelError(f"bad model definition: {e}") from None
    try:
        if mtype == "synthetic":
            return SyntheticLM(
                seed=int(spec["seed"]),
                vocab_size=int(spec["vocab_size"]),
                max_length=max_length,
                peakedness=float(spec.get("peakedness", 1.0)),
                eos=eos,
            )
        vocab = Vocabulary(tuple(spec["vocabulary"]), eos=eos)
        if mtype == "tabular":
            table = {vocab.parse(k): _parse_prob(v) for k, v in spec["table"].items()}
            return TabularModel(table, vocab, max_length)
        if mtype == "markov":
            rows = {
                vocab.parse(ctx): tuple(_parse_prob(x) for x in row)
                for ctx, row in spec["rows"].items()
            }
            return MarkovModel(int(spec["order"]), rows, vocab, max_length)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidModelError(f"bad model definition: {e}") from None
    raise InvalidModelError(f"unknown model type {mtype!r}")


def model_to_dict(model: SequenceModel) -> dict:
    base = {"max_length": model.max_length, "eos": model.vocabulary.eos}
    if isinstance(model, TabularModel):
        return {
            "type": "tabular",
            "vocabulary": list(model.vocabulary.symbols),
            "table": {model.vocabulary.render(k): _format_prob(v) for k, v in model.table.items()},
            **base,
        }
    if isinstance(model, MarkovModel):
        return {
            "type": "markov",
            "vocabulary": list(model.vocabulary.symbols),
            "order": model.order,
            "rows": {
                model.vocabulary.render(ctx): [_format_prob(p) for p in dist.probs]
                for ctx, dist in model.rows.items()
            },
            **base,
        }
    if isinstance(model, SyntheticLM):
        return {
            "type": "synthetic",
            "seed": model.seed,
            "vocab_size": len(model.vocabulary),
            "peakedness": model.peakedness,
            **base,
        }
    raise InvalidModelError(f"cannot serialize {type(model).__name__}")


def load_model(path: str) -> SequenceModel:
    with open(path) as f:
        try:
            spec = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidModelError(f"{path}: {e}") from None
    return model_from_dict(spec)


def save_model(model: SequenceModel, path: str):
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=2)
        f.write("\n")
