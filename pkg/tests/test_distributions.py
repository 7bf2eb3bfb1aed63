import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from skellam_flows.distributions import (
    ConditionalJointTable,
    SkellamParams,
    _sample_joint_many,
    conditional_joint_table,
    poisson_log_pmf,
    sample_joint,
    skellam_pmf,
)


def skellam_bruteforce(delta, lam_in, lam_out, k_hi=1500):
    """Independent oracle: convolve two Poisson pmfs over the joint support."""
    ks = np.arange(max(delta, 0), k_hi + 1)
    terms = stats.poisson.pmf(ks, lam_in) * stats.poisson.pmf(ks - delta, lam_out)
    return float(terms.sum())


def table_bruteforce(delta, lam_in, lam_out, k_hi=200):
    """Independent oracle: enumerate and normalize the truncated joint terms."""
    ks = np.arange(max(delta, 0), k_hi + 1)
    terms = stats.poisson.pmf(ks, lam_in) * stats.poisson.pmf(ks - delta, lam_out)
    return ks, terms / terms.sum()


class TestPoissonLogPmf:
    def test_unit_intensity_values(self):
        assert poisson_log_pmf(0, 1.0) == pytest.approx(-1.0, abs=1e-14)
        assert poisson_log_pmf(1, 1.0) == pytest.approx(-1.0, abs=1e-14)

    def test_high_precision_value(self):
        # Frozen from mpmath (60 digits): 10*log(3.7) - 3.7 - log(10!)
        assert poisson_log_pmf(10, 3.7) == pytest.approx(
            -5.721084376573727691724667, abs=1e-12
        )

    def test_large_arguments_stay_finite(self):
        assert np.isfinite(poisson_log_pmf(1_000_000, 1e6))
        assert np.isfinite(poisson_log_pmf(0, 1e6))
        assert np.isfinite(poisson_log_pmf(1_000_000, 0.5))

    def test_array_input(self):
        ks = np.arange(6)
        vals = poisson_log_pmf(ks, 2.5)
        assert vals.shape == (6,)
        assert np.exp(vals).sum() == pytest.approx(
            stats.poisson.cdf(5, 2.5), rel=1e-12
        )

    @pytest.mark.parametrize("bad_k", [-1, 2.5, np.array([1, -3])])
    def test_invalid_k_raises(self, bad_k):
        with pytest.raises(ValueError):
            poisson_log_pmf(bad_k, 1.0)

    @pytest.mark.parametrize("bad_lam", [0.0, -1.0, np.inf, np.nan])
    def test_invalid_lambda_raises(self, bad_lam):
        with pytest.raises(ValueError):
            poisson_log_pmf(1, bad_lam)


class TestSkellamPmf:
    def test_matches_bruteforce_symmetric_case(self):
        params = SkellamParams(1.0, 1.0)
        got = skellam_pmf(0, params, k_max=200)
        assert got == pytest.approx(skellam_bruteforce(0, 1.0, 1.0, 200), abs=1e-12)
        # Frozen from mpmath: e^-2 * sum_k 1/(k!)^2
        assert got == pytest.approx(0.3085083225536710395333843, abs=1e-13)

    def test_matches_bruteforce_asymmetric_case(self):
        got = skellam_pmf(5, SkellamParams(2.0, 3.0), k_max=500)
        assert got == pytest.approx(skellam_bruteforce(5, 2.0, 3.0, 500), abs=1e-12)
        # Frozen from mpmath.
        assert got == pytest.approx(0.004592447845998785356723874, abs=1e-14)

    def test_symmetry_in_swapped_intensities(self):
        for delta in (-7, -1, 0, 2, 11):
            lhs = skellam_pmf(delta, SkellamParams(1.7, 4.2))
            rhs = skellam_pmf(-delta, SkellamParams(4.2, 1.7))
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_k_max_below_support_raises(self):
        with pytest.raises(ValueError):
            skellam_pmf(10, SkellamParams(1.0, 1.0), k_max=9)

    @settings(max_examples=150, deadline=None)
    @given(
        delta=st.integers(min_value=-60, max_value=60),
        lam_in=st.floats(min_value=0.01, max_value=50.0),
        lam_out=st.floats(min_value=0.01, max_value=50.0),
    )
    def test_matches_bruteforce_property(self, delta, lam_in, lam_out):
        got = skellam_pmf(delta, SkellamParams(lam_in, lam_out), k_max=1000)
        assert got == pytest.approx(
            skellam_bruteforce(delta, lam_in, lam_out), abs=1e-10
        )

    @pytest.mark.parametrize("lam_in,lam_out", [(0.3, 0.3), (5.0, 2.0), (20.0, 20.0)])
    def test_total_mass_over_delta_range(self, lam_in, lam_out):
        params = SkellamParams(lam_in, lam_out)
        total = sum(skellam_pmf(d, params) for d in range(-200, 201))
        assert total >= 1.0 - 1e-8
        assert total <= 1.0 + 1e-10


class TestConditionalJointTable:
    def test_mode_probability_symmetric_unit_case(self):
        table = conditional_joint_table(0, SkellamParams(1.0, 1.0), k_max=50)
        assert table.k_min == 0
        assert int(np.argmax(table.probs)) == 0
        # Frozen from mpmath: 1 / sum_k (1/(k!)^2)
        assert table.probs[0] == pytest.approx(0.4386762798370487393788454, abs=1e-13)

    def test_support_starts_at_delta(self):
        table = conditional_joint_table(3, SkellamParams(0.8, 1.3))
        assert table.k_min == 3
        assert table.support()[0] == 3

    def test_matches_enumeration(self):
        table = conditional_joint_table(-2, SkellamParams(0.5, 2.0), k_max=200)
        ks, expected = table_bruteforce(-2, 0.5, 2.0, 200)
        got = np.zeros_like(expected)
        got[: len(table.probs)] = table.probs
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_self_truncation_keeps_table_small(self):
        table = conditional_joint_table(0, SkellamParams(0.2, 0.3), k_max=1000)
        assert table.k_max < 100
        assert table.probs.sum() == pytest.approx(1.0, abs=1e-9)
        assert table.tail_ratio < 1e-20

    @settings(max_examples=200, deadline=None)
    @given(
        delta=st.integers(min_value=-40, max_value=40),
        lam_in=st.floats(min_value=0.01, max_value=50.0),
        lam_out=st.floats(min_value=0.01, max_value=50.0),
    )
    def test_normalization_property(self, delta, lam_in, lam_out):
        table = conditional_joint_table(delta, SkellamParams(lam_in, lam_out))
        assert abs(table.probs.sum() - 1.0) < 1e-9
        assert np.all(table.probs >= 0.0)
        assert table.k_min == max(delta, 0)


class TestSampleJoint:
    def test_point_mass_table(self):
        table = ConditionalJointTable(
            delta=1, k_min=4, k_max=4, probs=np.array([1.0]), tail_ratio=0.0
        )
        rng = np.random.default_rng(0)
        assert sample_joint(table, rng) == (4, 3)

    def test_identity_holds_for_every_draw(self):
        rng = np.random.default_rng(1)
        for delta in (-5, 0, 3):
            table = conditional_joint_table(delta, SkellamParams(2.0, 1.4))
            for _ in range(200):
                i, r = sample_joint(table, rng)
                assert i - r == delta
                assert i >= 0 and r >= 0

    def test_empirical_mean_matches_table_mean(self):
        table = conditional_joint_table(0, SkellamParams(2.0, 2.0))
        support = table.support()
        mean = float(support @ table.probs)
        var = float((support**2) @ table.probs) - mean**2

        n = 1_000_000
        rng = np.random.default_rng(42)
        i, r, bad = _sample_joint_many(
            np.zeros(n, dtype=int), np.full(n, 2.0), np.full(n, 2.0), rng
        )
        assert not bad.any()
        se = np.sqrt(var / n)
        assert abs(i.mean() - mean) < 3 * se

        # The scalar sampler agrees (smaller draw count, wider tolerance).
        m = 20_000
        rng2 = np.random.default_rng(7)
        draws = np.array([sample_joint(table, rng2)[0] for _ in range(m)])
        assert abs(draws.mean() - mean) < 3 * np.sqrt(var / m)

    def test_reproducible_given_rng_state(self):
        table = conditional_joint_table(2, SkellamParams(3.0, 1.0))
        a = [sample_joint(table, np.random.default_rng(123)) for _ in range(5)]
        b = [sample_joint(table, np.random.default_rng(123)) for _ in range(5)]
        assert a == b


class TestSampleJointMany:
    def test_identity_and_determinism(self):
        rng = np.random.default_rng(3)
        deltas = rng.integers(-10, 10, size=500)
        lam_i = rng.uniform(0.1, 8.0, size=500)
        lam_r = rng.uniform(0.1, 8.0, size=500)

        i1, r1, bad1 = _sample_joint_many(deltas, lam_i, lam_r, np.random.default_rng(9))
        i2, r2, bad2 = _sample_joint_many(deltas, lam_i, lam_r, np.random.default_rng(9))
        assert not bad1.any()
        np.testing.assert_array_equal(i1, i2)
        np.testing.assert_array_equal(r1, r2)
        np.testing.assert_array_equal(i1 - r1, deltas)
        assert np.all(i1 >= 0) and np.all(r1 >= 0)

    def test_nonfinite_intensity_flags_degenerate(self):
        i, r, bad = _sample_joint_many(
            np.array([0, 1]),
            np.array([np.nan, 2.0]),
            np.array([1.0, 1.0]),
            np.random.default_rng(0),
        )
        assert bad.tolist() == [True, False]
        assert i[0] == 0 and r[0] == 0

    def test_support_cap_respected(self):
        rng = np.random.default_rng(11)
        deltas = np.zeros(2000, dtype=int)
        cap = np.full(2000, 3)
        i, r, bad = _sample_joint_many(
            deltas, np.full(2000, 5.0), np.full(2000, 5.0), rng, k_cap=cap
        )
        assert not bad.any()
        assert i.max() <= 3

    def test_cap_below_support_is_degenerate(self):
        i, r, bad = _sample_joint_many(
            np.array([5]), np.array([2.0]), np.array([2.0]),
            np.random.default_rng(0), k_cap=np.array([4]),
        )
        assert bad.tolist() == [True]

    def test_marginal_distribution_matches_scalar_table(self):
        # One fixed parameter triple, many batched draws, chi-square against
        # the scalar table's probabilities.
        delta, lam_i, lam_r = -3, 1.5, 4.0
        table = conditional_joint_table(delta, SkellamParams(lam_i, lam_r))
        n = 200_000
        rng = np.random.default_rng(2024)
        i, _, bad = _sample_joint_many(
            np.full(n, delta), np.full(n, lam_i), np.full(n, lam_r), rng
        )
        assert not bad.any()
        counts = np.bincount(i - table.k_min, minlength=len(table.probs))
        expected = n * table.probs
        keep = expected >= 5.0
        tail_obs = counts[~keep].sum()
        tail_exp = expected[~keep].sum()
        obs = np.append(counts[keep], tail_obs)
        exp = np.append(expected[keep], tail_exp)
        chi2 = ((obs - exp) ** 2 / np.maximum(exp, 1e-12)).sum()
        pval = stats.chi2.sf(chi2, df=len(obs) - 1)
        assert pval > 1e-3
