import math

import numpy as np
import pytest
from scipy.integrate import quad

from rfharvest import channel
from rfharvest.errors import ValidationError


def empirical_ks(sorted_samples, cdf_values):
    n = sorted_samples.size
    i = np.arange(1, n + 1)
    return max(np.max(np.abs(cdf_values - i / n)),
               np.max(np.abs(cdf_values - (i - 1) / n)))


class TestLinkBudget:
    def test_reference_gain_matches_published_value(self):
        link = channel.LinkBudget(transmit_power_mw=1.0, distance_m=1.0,
                                  path_loss_exponent=2.0)
        assert link.path_gain == pytest.approx((0.3456 / (4.0 * math.pi)) ** 2,
                                               rel=1e-14)
        assert link.path_gain == pytest.approx(7.5625e-4, rel=2e-3)

    def test_distance_scaling_law(self):
        near = channel.LinkBudget(1.0, 1.0, 2.0)
        far = channel.LinkBudget(1.0, 10.0, 2.0)
        assert far.path_gain == pytest.approx(near.path_gain * 1e-2, rel=1e-12)

    def test_log_domain_recomputation(self):
        link = channel.LinkBudget(1.0, 4.0, 2.1)
        gain_db = (20.0 * math.log10(0.3456 / (4.0 * math.pi))
                   - 2.1 * 10.0 * math.log10(4.0))
        assert link.path_gain == pytest.approx(10.0 ** (gain_db / 10.0), rel=1e-12)

    def test_monotone_in_distance_and_exponent(self):
        gains_d = [channel.LinkBudget(1.0, d, 2.1).path_gain for d in (2, 4, 8, 16)]
        assert all(a > b for a, b in zip(gains_d, gains_d[1:]))
        gains_nu = [channel.LinkBudget(1.0, 5.0, nu).path_gain for nu in (1.8, 2.1, 3.0)]
        assert all(a > b for a, b in zip(gains_nu, gains_nu[1:]))

    def test_validation(self):
        with pytest.raises(ValidationError):
            channel.LinkBudget(0.0, 1.0, 2.0)
        with pytest.raises(ValidationError):
            channel.LinkBudget(1.0, 0.5, 2.0)  # inside reference distance


class TestGammaDistribution:
    def test_rayleigh_special_case(self):
        ch = channel.FadingChannel(nakagami_m=1.0)
        assert channel.gamma_pdf(ch, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_pdf_normalization(self, nakagami5):
        total, _ = quad(lambda x: channel.gamma_pdf(nakagami5, x), 0.0, 60.0,
                        epsabs=1e-12, epsrel=1e-10, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_pdf_against_histogram(self, nakagami5):
        gains = channel.sample_gamma(nakagami5, 10_000_000, seed=1234)
        width = 0.02
        mask = np.abs(gains - 1.0) <= width / 2
        estimate = np.count_nonzero(mask) / gains.size / width
        pdf = channel.gamma_pdf(nakagami5, 1.0)
        se = math.sqrt(pdf / (gains.size * width))
        assert abs(estimate - pdf) <= 4.0 * se + 1e-4  # + O(width^2) bin bias

    def test_pdf_at_zero_by_shape(self):
        assert channel.gamma_pdf(channel.FadingChannel(0.7), 0.0) == math.inf
        assert channel.gamma_pdf(channel.FadingChannel(1.0), 0.0) == pytest.approx(1.0)
        assert channel.gamma_pdf(channel.FadingChannel(5.0), 0.0) == 0.0

    def test_cdf_basics(self, nakagami5):
        assert channel.gamma_cdf(nakagami5, 0.0) == 0.0
        rayleigh = channel.FadingChannel(1.0)
        assert channel.gamma_cdf(rayleigh, math.log(2.0)) == pytest.approx(0.5, rel=1e-12)

    def test_cdf_against_empirical(self, nakagami5):
        n = 1_000_000
        gains = channel.sample_gamma(nakagami5, n, seed=77)
        analytic = channel.gamma_cdf(nakagami5, 1.0)
        empirical = np.count_nonzero(gains <= 1.0) / n
        se = math.sqrt(analytic * (1.0 - analytic) / n)
        assert abs(empirical - analytic) <= 3.0 * se

    def test_shape_below_half_rejected(self):
        with pytest.raises(ValidationError):
            channel.FadingChannel(nakagami_m=0.3)


class TestReceivedPower:
    def test_cdf_is_monotone_transform_of_gain_cdf(self, link_d5, nakagami5):
        x = np.geomspace(1e-4, 1.0, 50)
        lhs = channel.received_power_cdf(link_d5, nakagami5, x)
        rhs = channel.gamma_cdf(nakagami5, x / link_d5.power_scale_mw)
        np.testing.assert_array_equal(lhs, rhs)

    def test_exponential_case(self, link_d5):
        rayleigh = channel.FadingChannel(1.0)
        scale = link_d5.power_scale_mw
        for x in (0.01, 0.05, 0.2):
            assert channel.received_power_cdf(link_d5, rayleigh, x) == pytest.approx(
                1.0 - math.exp(-x / scale), rel=1e-12)

    def test_median_preserved(self, link_d5, nakagami5):
        lo, hi = 0.0, 50.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if channel.gamma_cdf(nakagami5, mid) < 0.5:
                lo = mid
            else:
                hi = mid
        median_gain = 0.5 * (lo + hi)
        value = channel.received_power_cdf(link_d5, nakagami5,
                                           link_d5.power_scale_mw * median_gain)
        assert value == pytest.approx(0.5, abs=1e-10)

    def test_cdf_against_monte_carlo(self, nakagami5):
        link = channel.LinkBudget(transmit_power_mw=2000.0, distance_m=5.0,
                                  path_loss_exponent=2.1)
        n = 1_000_000
        samples = channel.sample_received_power(link, nakagami5, n, seed=31)
        x = link.power_scale_mw
        analytic = channel.received_power_cdf(link, nakagami5, x)
        empirical = np.count_nonzero(samples <= x) / n
        se = math.sqrt(analytic * (1.0 - analytic) / n)
        assert abs(empirical - analytic) <= 3.0 * se


class TestSampling:
    def test_moments(self, nakagami5):
        n = 1_000_000
        gains = channel.sample_gamma(nakagami5, n, seed=5150)
        se_mean = math.sqrt(nakagami5.omega ** 2 / nakagami5.nakagami_m / n)
        assert abs(gains.mean() - 1.0) <= 3.0 * se_mean
        variance = gains.var()
        assert variance == pytest.approx(1.0 / 5.0, rel=0.02)

    def test_moment_matched_shape_estimate(self, nakagami5):
        gains = channel.sample_gamma(nakagami5, 1_000_000, seed=8)
        m_hat = gains.mean() ** 2 / gains.var()
        assert m_hat == pytest.approx(5.0, rel=0.02)

    def test_seed_determinism(self, link_d5, nakagami5):
        a = channel.sample_received_power(link_d5, nakagami5, 50_000, seed=99)
        b = channel.sample_received_power(link_d5, nakagami5, 50_000, seed=99)
        np.testing.assert_array_equal(a, b)
        c = channel.sample_received_power(link_d5, nakagami5, 50_000, seed=100)
        assert not np.array_equal(a, c)

    def test_mean_received_power(self, link_d5, nakagami5):
        samples = channel.sample_received_power(link_d5, nakagami5, 1_000_000, seed=4)
        assert samples.mean() == pytest.approx(link_d5.power_scale_mw, rel=0.01)

    def test_kolmogorov_smirnov(self, link_d5, nakagami5):
        n = 1_000_000
        samples = np.sort(channel.sample_received_power(link_d5, nakagami5, n, seed=21))
        ks = empirical_ks(samples, channel.received_power_cdf(link_d5, nakagami5, samples))
        assert ks <= 0.002

    def test_boosted_low_shape(self):
        ch = channel.FadingChannel(nakagami_m=0.6)
        gains = channel.sample_gamma(ch, 500_000, seed=3)
        assert gains.mean() == pytest.approx(1.0, rel=0.02)
        assert gains.var() == pytest.approx(1.0 / 0.6, rel=0.03)


class TestRician:
    def test_rayleigh_consistency(self):
        assert channel.rician_to_nakagami(0.0) == pytest.approx(1.0)

    def test_known_values(self):
        assert channel.rician_to_nakagami(1.0) == pytest.approx(4.0 / 3.0, rel=1e-14)
        assert channel.rician_to_nakagami(10.0) == pytest.approx(121.0 / 21.0, rel=1e-14)

    def test_domain(self):
        with pytest.raises(ValidationError):
            channel.rician_to_nakagami(-0.5)
