"""Experiment runner CLI.

Subcommands mirror the library surface: `sample` (arithmetic / ancestral
batches), `diversity` (reward-vs-diversity sweeps against a reference file),
`variance` (estimator SD sweeps), `stepfn` (step-function variance and
covariance-constant experiments), and `oracle-check` (exact equivalence
suite).  All output is deterministic CSV: identical configs give
byte-identical files regardless of worker count.

Exit codes: 0 success, 1 input error, 2 property failure.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from fractions import Fraction

from . import evaluation, oracle
from .codebook import LatticeSpec
from .errors import (
    EnumerationBoundError,
    InputError,
    InvalidModelError,
    InvalidSequenceError,
    ParameterError,
)
from .models import Nucleus, Temperature, TopK, load_model
from .sampler import ancestral_sample, arithmetic_sample, code_interval_of_sequence, decode_code


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ARITH_DECODE_SEED")
    return int(env) if env else 0


def _chain(args, temperature: float | None = None):
    chain = []
    t = temperature if temperature is not None else getattr(args, "temperature_single", None)
    if t is not None and t != 1.0:
        chain.append(Temperature(t))
    if args.top_k is not None:
        chain.append(TopK(args.top_k))
    if args.nucleus_p is not None:
        chain.append(Nucleus(args.nucleus_p))
    return chain or None


def _derive_shift(seed, tag: str) -> float:
    return random.Random(f"{seed}:{tag}").random()


def _load_references(path: str, vocabulary) -> list[tuple[int, ...]]:
    try:
        with open(path) as f:
            lines = [ln.strip() for ln in f if ln.strip()]
    except OSError as e:
        raise InputError(str(e)) from None
    if not lines:
        raise InputError(f"{path}: no references")
    try:
        return [vocabulary.parse(ln) for ln in lines]
    except InvalidSequenceError as e:
        raise InputError(f"{path}: {e}") from None


def _write(args, lines: list[str]):
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _strip_eos(tokens, eos):
    return tuple(t for t in tokens if t != eos) if eos is not None else tuple(tokens)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_sample(args) -> int:
    model = load_model(args.model)
    seed = _seed(args)
    chain = _chain(args)
    lines = []
    if args.method == "arithmetic":
        b = _derive_shift(seed, "shift")
        lines.append(f"# shift_b={_fmt(b)}")
        ss = arithmetic_sample(model, LatticeSpec(args.n, args.lattice_mode, b), chain, args.workers)
    else:
        ss = ancestral_sample(model, args.n, seed, chain)
    lines.append("index,code,sequence,logprob")
    for i, e in enumerate(ss.entries):
        code = _fmt(e.code) if e.code is not None else ""
        lines.append(f"{i},{code},{model.vocabulary.render(e.sequence)},{_fmt(e.logprob)}")
    _write(args, lines)
    return 0


def cmd_diversity(args) -> int:
    model = load_model(args.model)
    seed = _seed(args)
    refs = _load_references(args.reference, model.vocabulary)
    eos = model.vocabulary.eos
    temps = args.temperature
    lines = ["method,temperature,n,mean_reward,min_reward,max_reward,ngram_diversity"]
    for t in temps:
        chain = _chain(args, temperature=t)
        means, mins, maxes, divs = [], [], [], []
        for i, ref in enumerate(refs):
            tag = f"{t}:{i}"
            if args.method == "arithmetic":
                b = _derive_shift(seed, tag)
                ss = arithmetic_sample(model, LatticeSpec(args.n, args.lattice_mode, b), chain, args.workers)
            else:
                ss = ancestral_sample(model, args.n, f"{seed}:{tag}", chain)
            rewards = [
                evaluation.sentence_bleu(_strip_eos(s, eos), ref) for s in ss.sequences()
            ]
            means.append(sum(rewards) / len(rewards))
            mins.append(min(rewards))
            maxes.append(max(rewards))
            divs.append(evaluation.ngram_diversity(ss.sequences(), eos=eos))
        k = len(refs)
        lines.append(
            f"{args.method},{_fmt(t)},{args.n},{_fmt(sum(means) / k)},"
            f"{_fmt(sum(mins) / k)},{_fmt(sum(maxes) / k)},{_fmt(sum(divs) / k)}"
        )
    _write(args, lines)
    return 0


def cmd_variance(args) -> int:
    model = load_model(args.model)
    seed = _seed(args)
    refs = _load_references(args.reference, model.vocabulary)
    eos = model.vocabulary.eos
    target = refs[0]
    chain = _chain(args)
    reward = lambda s: evaluation.sentence_bleu(_strip_eos(s, eos), target)
    lines = ["method,n,mean,sd,p2_5,p97_5"]
    for n in args.n:
        rep = evaluation.estimator_sd(
            model, args.method, n, chain, reward, args.reps, seed, args.lattice_mode
        )
        lines.append(
            f"{rep.method},{rep.n},{_fmt(rep.mean)},{_fmt(rep.sd)},"
            f"{_fmt(rep.percentile_2_5)},{_fmt(rep.percentile_97_5)}"
        )
    _write(args, lines)
    return 0


def _load_step_function(path: str) -> evaluation.StepFunction:
    pieces = []
    try:
        with open(path) as f:
            rows = [ln.split() for ln in f if ln.strip()]
    except OSError as e:
        raise InputError(str(e)) from None
    for row in rows:
        if len(row) != 3:
            raise InputError(f"{path}: expected 'lo hi coefficient' lines")
        lo, hi, a = (Fraction(x) for x in row)
        from .codebook import UnitInterval

        pieces.append((UnitInterval(lo, hi), a))
    try:
        return evaluation.StepFunction(tuple(pieces))
    except ParameterError as e:
        raise InputError(f"{path}: {e}") from None


def cmd_stepfn(args) -> int:
    f = _load_step_function(args.stepfn)
    seed = _seed(args)
    lines = ["n_points,lattice_var,mc_var,exact_integral,c_on_hat,c_off_hat"]
    for n in args.n:
        res = evaluation.step_variance_experiment(f, n, args.lattice_mode, args.reps, seed)
        if n >= 3:
            c_on, c_off = evaluation.covariance_constants(n, args.reps, seed)
            con, coff = _fmt(c_on), _fmt(c_off)
        else:
            con = coff = ""
        lines.append(
            f"{n},{_fmt(res['lattice_var'])},{_fmt(res['mc_var'])},"
            f"{_fmt(res['exact_integral'])},{con},{coff}"
        )
    _write(args, lines)
    return 0


def cmd_oracle_check(args) -> int:
    model = load_model(args.model)
    joint = oracle.enumerate_joint(model, bound=args.bound)
    cb = oracle.exact_codebook(joint)
    rows: list[tuple[str, bool, str]] = []

    widths_ok = all(iv.hi - iv.lo == p for (seq, p), (_, iv) in zip(joint.entries, cb.items()))
    covers = cb.los[0] == 0 and cb.his[-1] == 1
    rows.append(("partition", widths_ok and covers, "0"))

    codes = list(oracle.lattice_codes(LatticeSpec(101, "paper", Fraction(1, 7))))
    for lo, hi in zip(cb.los, cb.his):
        codes.append(lo)
        codes.append((lo + hi) / 2)
    mismatches = sum(1 for c in codes if decode_code(model, c) != cb.decode(c))
    rows.append(("decode_equivalence", mismatches == 0, str(mismatches)))

    worst = Fraction(0)
    for seq, p in joint.entries:
        iv = code_interval_of_sequence(model, seq)
        worst = max(worst, abs(Fraction(iv.width) - p))
    rows.append(("interval_width_matches_probability", worst == 0, str(worst)))

    first_tok = joint.entries[0][0][0]
    reward = lambda s: Fraction(1) if s and s[0] == first_tok else Fraction(0)
    truth = oracle.exact_expectation(joint, reward)
    est = oracle.full_period_average(cb, min(args.n, 16) if args.n else 4, reward)
    rows.append(("full_period_unbiasedness", est == truth, str(abs(est - truth))))

    lines = ["property,pass,worst_deviation"]
    for name, ok, dev in rows:
        lines.append(f"{name},{'pass' if ok else 'fail'},{dev}")
    _write(args, lines)
    return 0 if all(ok for _, ok, _ in rows) else 2


# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="arithdecode", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_list=False):
        sp.add_argument("--model", required=True, help="model definition JSON")
        sp.add_argument("--method", choices=["arithmetic", "ancestral"], default="arithmetic")
        if n_list:
            sp.add_argument("--n", type=_int_list, default=[16], help="comma list of sample counts")
        else:
            sp.add_argument("--n", type=int, default=16, help="number of samples")
        sp.add_argument("--lattice-mode", choices=["paper", "uniform"], default="paper")
        sp.add_argument("--top-k", type=int, default=None)
        sp.add_argument("--nucleus-p", type=float, default=None)
        sp.add_argument("--seed", type=int, default=None, help="falls back to $ARITH_DECODE_SEED, then 0")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out", default=None, help="output CSV path (default stdout)")

    sp = sub.add_parser("sample", help="decode one sample batch to CSV")
    common(sp)
    sp.add_argument("--temperature", dest="temperature_single", type=float, default=None)
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("diversity", help="reward vs n-gram diversity sweep")
    common(sp)
    sp.add_argument("--temperature", type=_float_list, default=[1.0], help="comma list of temperatures")
    sp.add_argument("--reference", required=True, help="one tokenized reference per line")
    sp.set_defaults(fn=cmd_diversity)

    sp = sub.add_parser("variance", help="estimator SD sweep")
    common(sp, n_list=True)
    sp.add_argument("--temperature", dest="temperature_single", type=float, default=None)
    sp.add_argument("--reference", required=True)
    sp.add_argument("--reps", type=int, default=100)
    sp.set_defaults(fn=cmd_variance)

    sp = sub.add_parser("stepfn", help="step-function variance experiments")
    sp.add_argument("--stepfn", required=True, help="lines 'lo hi coefficient' (decimal strings)")
    sp.add_argument("--n", type=_int_list, default=[4, 10])
    sp.add_argument("--lattice-mode", choices=["paper", "uniform"], default="uniform")
    sp.add_argument("--reps", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_stepfn)

    sp = sub.add_parser("oracle-check", help="exact oracle/sampler equivalence suite")
    sp.add_argument("--model", required=True)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--bound", type=int, default=oracle.DEFAULT_BOUND)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_oracle_check)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, InvalidModelError, EnumerationBoundError, OSError, ParameterError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
