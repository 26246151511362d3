"""Unit-interval partitioning, code location, renormalization, lattices."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arithdecode import (
    CategoricalDistribution,
    LatticeSpec,
    UnitInterval,
    cdf_intervals,
    lattice_codes,
    locate,
    renormalize,
    shift_mod1,
)
from arithdecode.errors import ContractViolationError, InvalidDistributionError, ParameterError

F = Fraction


def exact_dists():
    """Random exact categorical distributions from integer weights."""
    return (
        st.lists(st.integers(min_value=0, max_value=50), min_size=1, max_size=8)
        .filter(lambda w: sum(w) > 0)
        .map(lambda w: CategoricalDistribution(tuple(F(x, sum(w)) for x in w)))
    )


class TestCdfIntervals:
    def test_two_symbol_example(self):
        ivs = cdf_intervals(CategoricalDistribution((F(3, 5), F(2, 5))))
        assert ivs == [(0, UnitInterval(0, F(3, 5))), (1, UnitInterval(F(3, 5), F(1)))]

    def test_single_symbol(self):
        ivs = cdf_intervals(CategoricalDistribution((F(1),)))
        assert ivs == [(0, UnitInterval(0, F(1)))]

    def test_zero_symbol_omitted(self):
        ivs = cdf_intervals(CategoricalDistribution((F(1, 5), F(0), F(3, 10), F(1, 2))))
        assert [i for i, _ in ivs] == [0, 2, 3]
        assert ivs[1][1] == UnitInterval(F(1, 5), F(1, 2))
        assert ivs[2][1] == UnitInterval(F(1, 2), F(1))

    def test_float_final_bound_clamped(self):
        probs = tuple([0.1] * 10)
        ivs = cdf_intervals(CategoricalDistribution(probs))
        assert ivs[-1][1].hi == 1.0

    def test_invalid_distribution_rejected(self):
        with pytest.raises(InvalidDistributionError):
            CategoricalDistribution((0.5, 0.4))
        with pytest.raises(InvalidDistributionError):
            CategoricalDistribution((F(1, 2), F(-1, 2), F(1)))

    @given(exact_dists())
    def test_partition_property(self, dist):
        ivs = cdf_intervals(dist)
        assert sum(iv.width for _, iv in ivs) == 1
        for (_, a), (_, b) in zip(ivs, ivs[1:]):
            assert a.hi == b.lo  # contiguous, hence disjoint
        assert ivs[0][1].lo == 0 and ivs[-1][1].hi == 1
        for idx, iv in ivs:
            assert iv.width == dist.probs[idx]


class TestLocate:
    def setup_method(self):
        self.ivs = cdf_intervals(CategoricalDistribution((F(3, 5), F(2, 5))))

    def test_interior(self):
        assert locate(F(1, 2), self.ivs) == 0

    def test_boundary_goes_up(self):
        assert locate(F(3, 5), self.ivs) == 1

    def test_near_one(self):
        assert locate(F(999, 1000), self.ivs) == 1

    @given(exact_dists(), st.fractions(min_value=0, max_value=1).filter(lambda x: x < 1))
    def test_locate_interval_consistency(self, dist, frac):
        ivs = cdf_intervals(dist)
        for idx, iv in ivs:
            c = iv.lo + frac * iv.width
            if c < iv.hi:
                assert locate(c, ivs) == idx


class TestRenormalize:
    @pytest.mark.parametrize(
        "c,lo,hi,want",
        [
            (F(3, 10), F(0), F(3, 5), F(1, 2)),
            (F(3, 5), F(3, 5), F(1), F(0)),
            (F(4, 5), F(3, 5), F(1), F(1, 2)),
        ],
    )
    def test_examples(self, c, lo, hi, want):
        assert renormalize(c, UnitInterval(lo, hi)) == want

    def test_outside_interval_rejected(self):
        with pytest.raises(ContractViolationError):
            renormalize(F(7, 10), UnitInterval(F(0), F(3, 5)))

    @given(
        st.fractions(min_value=0, max_value=1),
        st.fractions(min_value=0, max_value=1),
        st.fractions(min_value=0, max_value=1),
    )
    def test_bijection_roundtrip(self, a, b, frac):
        lo, hi = min(a, b), max(a, b)
        if lo == hi or frac == 1:
            return
        iv = UnitInterval(lo, hi)
        c = lo + frac * iv.width
        r = renormalize(c, iv)
        assert 0 <= r < 1
        assert iv.lo + r * iv.width == c  # inverse affine map recovers c exactly


class TestLattice:
    def test_single_paper_code_is_midpoint(self):
        assert lattice_codes(LatticeSpec(1, "paper", F(0))) == [F(1, 2)]

    def test_uniform_mode(self):
        assert lattice_codes(LatticeSpec(4, "uniform", F(0))) == [0, F(1, 4), F(1, 2), F(3, 4)]

    def test_uniform_wrap(self):
        assert lattice_codes(LatticeSpec(2, "uniform", F(9, 10))) == [F(9, 10), F(2, 5)]

    def test_invalid_spec(self):
        with pytest.raises(ParameterError):
            LatticeSpec(0)
        with pytest.raises(ParameterError):
            LatticeSpec(3, "hexagonal")
        with pytest.raises(ParameterError):
            LatticeSpec(3, "paper", 1.5)

    @given(st.integers(min_value=1, max_value=40), st.fractions(min_value=0, max_value=1).filter(lambda b: b < 1))
    def test_uniform_gaps_all_equal(self, n, b):
        codes = sorted(lattice_codes(LatticeSpec(n, "uniform", b)))
        gaps = [y - x for x, y in zip(codes, codes[1:])] + [1 - codes[-1] + codes[0]]
        assert all(g == F(1, n) for g in gaps)

    @given(st.integers(min_value=2, max_value=40), st.fractions(min_value=0, max_value=1).filter(lambda b: b < 1))
    def test_paper_gaps(self, n, b):
        codes = sorted(lattice_codes(LatticeSpec(n, "paper", b)))
        gaps = [y - x for x, y in zip(codes, codes[1:])] + [1 - codes[-1] + codes[0]]
        assert min(gaps) == F(1, n + 1)
        assert sorted(gaps)[-1] == F(2, n + 1)
        assert gaps.count(F(2, n + 1)) == 1

    @given(st.integers(min_value=1, max_value=60), st.fractions(min_value=0, max_value=1).filter(lambda b: b < 1))
    def test_codes_in_unit_interval(self, n, b):
        for mode in ("paper", "uniform"):
            for c in lattice_codes(LatticeSpec(n, mode, b)):
                assert 0 <= c < 1


class TestShiftMod1:
    def test_examples(self):
        assert math.isclose(shift_mod1(0.7, 0.5), 0.2)
        assert shift_mod1(F(3, 10), F(0)) == F(3, 10)
        assert shift_mod1(F(0), F(999, 1000)) == F(999, 1000)

    @given(st.integers(min_value=0, max_value=999))
    def test_marginal_uniform_over_grid(self, k):
        # for fixed c on a fine grid, c + b mod 1 permutes the grid as b sweeps it
        c = F(k, 1000)
        hits = {shift_mod1(c, F(j, 1000)) for j in range(1000)}
        assert hits == {F(j, 1000) for j in range(1000)}
