"""CLI commands: CSV determinism, experiment protocols, exit codes."""

import json
import math
import random

import pytest

from arithdecode.cli import main

BERNOULLI = {
    "type": "markov",
    "vocabulary": ["A", "B"],
    "eos": None,
    "max_length": 2,
    "order": 0,
    "rows": {"": ["0.6", "0.4"]},
}

DETERMINISTIC = {
    "type": "tabular",
    "vocabulary": ["A", "B"],
    "eos": None,
    "max_length": 2,
    "table": {"A B": "1"},
}

SYNTH = {"type": "synthetic", "seed": 5, "vocab_size": 4, "max_length": 3, "eos": None}


@pytest.fixture
def model_file(tmp_path):
    def write(spec, name="model.json"):
        path = tmp_path / name
        path.write_text(json.dumps(spec))
        return str(path)

    return write


def run(args):
    return main(args)


class TestSample:
    def test_deterministic_rows(self, model_file, tmp_path):
        out = tmp_path / "out.csv"
        assert run(["sample", "--model", model_file(DETERMINISTIC), "--n", "3", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# shift_b=")
        assert lines[1] == "index,code,sequence,logprob"
        rows = [ln.split(",") for ln in lines[2:]]
        assert len(rows) == 3
        assert all(r[2] == "A B" and r[3] == "0.0" for r in rows)

    def test_rows_sorted_by_code(self, model_file, tmp_path):
        out = tmp_path / "out.csv"
        run(["sample", "--model", model_file(BERNOULLI), "--n", "5", "--seed", "3", "--out", str(out)])
        codes = [float(ln.split(",")[1]) for ln in out.read_text().splitlines()[2:]]
        assert codes == sorted(codes)

    def test_byte_identical_reruns(self, model_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sample", "--model", model_file(SYNTH), "--n", "8", "--seed", "11"]
        run(args + ["--out", str(a)])
        run(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_worker_count_does_not_change_output(self, model_file, tmp_path):
        outs = []
        for w in ("1", "2", "8"):
            out = tmp_path / f"w{w}.csv"
            run(
                ["sample", "--model", model_file(SYNTH), "--n", "32", "--seed", "7",
                 "--workers", w, "--out", str(out)]
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_ancestral_has_empty_code_column(self, model_file, tmp_path):
        out = tmp_path / "out.csv"
        run(["sample", "--model", model_file(BERNOULLI), "--method", "ancestral", "--n", "4",
             "--seed", "1", "--out", str(out)])
        lines = out.read_text().splitlines()
        assert lines[0] == "index,code,sequence,logprob"
        assert all(ln.split(",")[1] == "" for ln in lines[1:])

    def test_missing_model_file(self, tmp_path):
        assert run(["sample", "--model", str(tmp_path / "nope.json"), "--n", "2"]) == 1


class TestDiversity:
    def test_deterministic_mean_equals_max(self, model_file, tmp_path):
        ref = tmp_path / "refs.txt"
        ref.write_text("A B\n")
        out = tmp_path / "out.csv"
        assert run(
            ["diversity", "--model", model_file(DETERMINISTIC), "--n", "4",
             "--reference", str(ref), "--out", str(out)]
        ) == 0
        row = out.read_text().splitlines()[1].split(",")
        assert row[3] == row[5]  # mean_reward == max_reward

    def test_duplicate_samples_diversity(self, model_file, tmp_path):
        ref = tmp_path / "refs.txt"
        ref.write_text("A B\n")
        out = tmp_path / "out.csv"
        run(["diversity", "--model", model_file(DETERMINISTIC), "--n", "5",
             "--reference", str(ref), "--out", str(out)])
        div = float(out.read_text().splitlines()[1].split(",")[6])
        # 5 copies of a 2-token sequence: d = 2/10 + 1/5 + 0 + 0
        assert div == pytest.approx(0.4)

    def test_sweep_max_ge_mean(self, model_file, tmp_path):
        ref = tmp_path / "refs.txt"
        ref.write_text("t0 t1 t2\nt1 t1 t0\n")
        out = tmp_path / "out.csv"
        run(["diversity", "--model", model_file(SYNTH), "--n", "6",
             "--temperature", "0.5,1.0,1.5", "--reference", str(ref), "--out", str(out)])
        lines = out.read_text().splitlines()
        assert len(lines) == 4
        for ln in lines[1:]:
            parts = ln.split(",")
            assert float(parts[5]) >= float(parts[3]) >= float(parts[4])

    def test_unknown_reference_token(self, model_file, tmp_path):
        ref = tmp_path / "refs.txt"
        ref.write_text("A Z\n")
        assert run(["diversity", "--model", model_file(BERNOULLI), "--reference", str(ref)]) == 1


class TestVariance:
    def test_deterministic_zero_sd(self, model_file, tmp_path):
        ref = tmp_path / "refs.txt"
        ref.write_text("A B\n")
        out = tmp_path / "out.csv"
        run(["variance", "--model", model_file(DETERMINISTIC), "--n", "2,4",
             "--reference", str(ref), "--reps", "5", "--out", str(out)])
        lines = out.read_text().splitlines()
        assert lines[0] == "method,n,mean,sd,p2_5,p97_5"
        for ln in lines[1:]:
            assert float(ln.split(",")[3]) == 0.0


class TestStepFn:
    def test_half_indicator(self, tmp_path):
        fpath = tmp_path / "f.txt"
        fpath.write_text("0 0.5 1\n0.5 1 0\n")
        out = tmp_path / "out.csv"
        assert run(["stepfn", "--stepfn", str(fpath), "--n", "2,4", "--reps", "2000",
                    "--seed", "0", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "n_points,lattice_var,mc_var,exact_integral,c_on_hat,c_off_hat"
        n2 = lines[1].split(",")
        assert float(n2[1]) == 0.0  # width-1/2 pieces, 2 uniform points: zero variance
        assert float(n2[3]) == 0.5
        n4 = lines[2].split(",")
        assert abs(float(n4[4]) - (0.25 - 1)) < 0.1
        assert abs(float(n4[5]) - 0.25) < 0.1

    def test_bad_file(self, tmp_path):
        fpath = tmp_path / "f.txt"
        fpath.write_text("0 0.5\n")
        assert run(["stepfn", "--stepfn", str(fpath)]) == 1


class TestOracleCheck:
    def test_all_pass(self, model_file, tmp_path):
        out = tmp_path / "out.csv"
        assert run(["oracle-check", "--model", model_file(BERNOULLI), "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "property,pass,worst_deviation"
        assert all(ln.split(",")[1] == "pass" for ln in lines[1:])

    def test_non_normalized_model(self, model_file):
        bad = dict(BERNOULLI, rows={"": ["0.5", "0.4"]})
        assert run(["oracle-check", "--model", model_file(bad)]) == 1

    def test_bound_exceeded(self, model_file):
        assert run(["oracle-check", "--model", model_file(BERNOULLI), "--bound", "2"]) == 1
