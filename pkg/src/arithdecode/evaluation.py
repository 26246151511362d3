"""Rewards, estimator statistics, n-gram diversity, and step-function variance.

The step-function experiments check the variance story behind shifted
lattices: grid-aligned pieces integrate with zero variance at n points, and
with n+1 points the lattice estimator still beats naive Monte Carlo because
the pairwise covariance matrix of the indicator sums (c_on on the diagonal,
c_off off it) is negative semidefinite.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .codebook import LatticeSpec, Real, UnitInterval, is_exact, lattice_codes
from .errors import ParameterError
from .models import ModifierChain, SequenceModel, Tokens
from .sampler import SampleSet, ancestral_sample, arithmetic_sample

RewardFn = Callable[[Tokens], float]


# ---------------------------------------------------------------------------
# Step functions


@dataclass(frozen=True)
class StepFunction:
    """Finite linear combination of indicators of disjoint intervals covering [0,1)."""

    pieces: tuple[tuple[UnitInterval, Real], ...]

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise ParameterError("step function needs at least one piece")
        lo = self.pieces[0][0].lo
        if lo != 0:
            raise ParameterError("pieces must start at 0")
        for iv, _ in self.pieces:
            if iv.lo != lo:
                raise ParameterError("pieces must be contiguous and ordered")
            lo = iv.hi
        if lo != 1:
            raise ParameterError("pieces must cover [0, 1)")


def eval_step_function(f: StepFunction, c: Real) -> Real:
    """Coefficient of the (half-open) piece containing c."""
    los = [iv.lo for iv, _ in f.pieces]
    i = bisect.bisect_right(los, c) - 1
    return f.pieces[i][1]


def step_integral(f: StepFunction) -> Real:
    return sum(iv.width * a for iv, a in f.pieces)


def lattice_step_estimate(f: StepFunction, spec: LatticeSpec) -> Real:
    """Lattice-rule sample mean of f; exact when shift and pieces are rational."""
    codes = lattice_codes(spec)
    total = sum(eval_step_function(f, c) for c in codes)
    if is_exact(total):
        return Fraction(total, spec.n)
    return total / spec.n


def step_variance_experiment(
    f: StepFunction, n_points: int, mode: str = "uniform", reps: int = 1000, seed: int = 0
) -> dict:
    """Empirical shifted-lattice vs naive-MC estimator variance for one function.

    Returns {"lattice_var", "mc_var", "exact_integral"} with variances taken
    over `reps` independent shifts / i.i.d. point sets.
    """
    if reps < 2:
        raise ParameterError("reps must be >= 2")
    rng = np.random.default_rng(seed)
    los = np.array([float(iv.lo) for iv, _ in f.pieces])
    coeffs = np.array([float(a) for _, a in f.pieces])

    def piecewise(points: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(los, points, side="right") - 1
        return coeffs[idx]

    if mode == "paper":
        base = np.arange(1, n_points + 1) / (n_points + 1)
    else:
        base = np.arange(n_points) / n_points
    shifts = rng.random(reps)
    lattice_pts = (shifts[:, None] + base[None, :]) % 1.0
    lattice_est = piecewise(lattice_pts).mean(axis=1)
    mc_pts = rng.random((reps, n_points))
    mc_est = piecewise(mc_pts).mean(axis=1)
    return {
        "lattice_var": float(lattice_est.var()),
        "mc_var": float(mc_est.var()),
        "exact_integral": float(step_integral(f)),
    }


def covariance_constants(n: int, reps: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of the lattice indicator covariance sums.

    For n+1 points spaced 1/n under a shared uniform shift, estimates
    sum_{i != j} Cov[1_[0,1/n)(c_i), 1_[0,1/n)(c_j)]        (the "on" total)
    and the analogous cross total against 1_[1/n,2/n)       (the "off" total).
    The analytic values are 1/n - 1 and 1/n.
    """
    if n < 3:
        raise ParameterError("needs n >= 3")
    rng = np.random.default_rng(seed)
    mu = 1.0 / n
    base = np.arange(n + 1) / n
    shifts = rng.random(reps)
    pts = (shifts[:, None] + base[None, :]) % 1.0
    a = (pts < mu).astype(float) - mu
    b = ((pts >= mu) & (pts < 2 * mu)).astype(float) - mu
    s_on = a.sum(axis=1) ** 2 - (a**2).sum(axis=1)
    s_off = a.sum(axis=1) * b.sum(axis=1) - (a * b).sum(axis=1)
    return float(s_on.mean()), float(s_off.mean())


def covariance_matrix_eigenvalues(n: int) -> tuple[float, list[float]]:
    """Eigenvalues of the n x n matrix with 1/n - 1 on the diagonal, 1/n off it."""
    c_on = 1.0 / n - 1.0
    c_off = 1.0 / n
    mat = np.full((n, n), c_off) + np.eye(n) * (c_on - c_off)
    vals = sorted(np.linalg.eigvalsh(mat).tolist())
    return max(vals), vals


# ---------------------------------------------------------------------------
# Estimator statistics


def sample_mean(samples: SampleSet, reward: RewardFn) -> float:
    if not samples.entries:
        raise ParameterError("empty sample set")
    vals = [reward(e.sequence) for e in samples.entries]
    total = sum(vals)
    if is_exact(total):
        return Fraction(total, len(vals))
    return total / len(vals)


@dataclass(frozen=True)
class EstimatorReport:
    method: str
    n: int
    reps: int
    mean: float
    sd: float
    percentile_2_5: float
    percentile_97_5: float


def estimator_sd(
    model: SequenceModel,
    method: str,
    n: int,
    chain: ModifierChain | None,
    reward: RewardFn,
    reps: int,
    seed: int = 0,
    lattice_mode: str = "paper",
) -> EstimatorReport:
    """Run an estimator `reps` times with independent shifts/seeds.

    Each rep derives its randomness from (seed, rep index), so serial and
    parallel schedules agree bit-exactly.
    """
    if reps < 2:
        raise ParameterError("reps must be >= 2")
    ests = []
    for rep in range(reps):
        tag = f"{seed}:{rep}"
        if method == "arithmetic":
            b = random.Random(tag).random()
            ss = arithmetic_sample(model, LatticeSpec(n, lattice_mode, b), chain)
        elif method == "ancestral":
            ss = ancestral_sample(model, n, tag, chain)
        else:
            raise ParameterError(f"unknown method {method!r}")
        ests.append(float(sample_mean(ss, reward)))
    arr = np.array(ests)
    return EstimatorReport(
        method=method,
        n=n,
        reps=reps,
        mean=float(arr.mean()),
        sd=float(arr.std(ddof=1)),
        percentile_2_5=float(np.percentile(arr, 2.5)),
        percentile_97_5=float(np.percentile(arr, 97.5)),
    )


# ---------------------------------------------------------------------------
# Sequence metrics


def _ngrams(tokens: Sequence[int], n: int) -> list[tuple[int, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def ngram_diversity(
    sequences: Sequence[Tokens], max_n: int = 4, eos: int | None = None
) -> float:
    """d = sum over n of (unique n-grams across the set / total n-grams).

    n-grams are over token indices with EOS stripped; an n with no n-grams at
    all contributes 0.
    """
    if not sequences:
        raise ParameterError("empty sequence list")
    stripped = [tuple(t for t in s if t != eos) if eos is not None else tuple(s) for s in sequences]
    d = 0.0
    for n in range(1, max_n + 1):
        grams: list[tuple[int, ...]] = []
        for s in stripped:
            grams.extend(_ngrams(s, n))
        if grams:
            d += len(set(grams)) / len(grams)
    return d


def sentence_bleu(
    hypothesis: Sequence[int], reference: Sequence[int], max_n: int = 4
) -> float:
    """Add-one-smoothed sentence BLEU with exponential brevity penalty, in [0, 1]."""
    if not reference:
        raise ParameterError("empty reference")
    hyp = tuple(hypothesis)
    ref = tuple(reference)
    if not hyp:
        return 0.0
    log_prec = 0.0
    for n in range(1, max_n + 1):
        hg = _ngrams(hyp, n)
        rg = _ngrams(ref, n)
        matched = 0
        pool = list(rg)
        for g in hg:
            if g in pool:
                pool.remove(g)
                matched += 1
        log_prec += math.log((matched + 1) / (len(hg) + 1))
    bp = math.exp(min(0.0, 1.0 - len(ref) / len(hyp)))
    return bp * math.exp(log_prec / max_n)
