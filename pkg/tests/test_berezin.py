import math

import numpy as np
import pytest

from fockops.bands import HS_DIRECT_RATIO_BAND, SUBHARMONIC_LOWER
from fockops.berezin import (
    GridSpec,
    berezin_at,
    berezin_log_profile,
    berezin_power_integral,
    berezin_profile,
    hilbert_schmidt_integral,
    lp_integral,
    vanishes_at_infinity,
)
from fockops.errors import DivergentTail
from fockops.quadrature import gaussian_integral
from fockops.symbols import AffineMap, Symbol, SymbolPair, weight_at

# 2 pi int_0^inf r^3 e^{-r^2} / (1+r)^2 dr, frozen from scipy.integrate.quad
VOLTERRA_Z_AT_ORIGIN = 1.051303812194897

ONE = Symbol.polynomial([1.0])
Z = Symbol.polynomial([0.0, 1.0])


def flat_pair(alpha=1.0):
    return SymbolPair.weighted(ONE, AffineMap(1.0), alpha=alpha)


class TestPointValues:
    @pytest.mark.parametrize("w", [0.0, 1.0, 4.0 - 2.0j, 12.0j, 30.0])
    def test_identity_weight_is_flat(self, w):
        np.testing.assert_allclose(berezin_at(flat_pair(), 2.0, w), np.pi,
                                   rtol=1e-10)

    @pytest.mark.parametrize("alpha,power", [(0.5, 2.0), (2.0, 2.0), (1.0, 4.0)])
    def test_identity_weight_scaling(self, alpha, power):
        pair = flat_pair(alpha)
        np.testing.assert_allclose(berezin_at(pair, power, 1.5),
                                   2.0 * np.pi / (power * alpha), rtol=1e-10)

    @pytest.mark.parametrize("w", [0.0, 1.0 + 1.0j, -2.5, 3.0j])
    def test_contraction_closed_form(self, w):
        pair = SymbolPair.weighted(ONE, AffineMap(0.5))
        want = np.pi * np.exp(-0.75 * abs(w) ** 2)
        np.testing.assert_allclose(berezin_at(pair, 2.0, w), want, rtol=1e-9)

    def test_shifted_map_closed_form(self):
        # u = 1, psi = a z + b: value pi exp(-(1-|a|^2)|w|^2 + 2 Re(b conj(w)))
        a, b, w = 0.6, 0.4 + 0.2j, 1.0 - 0.5j
        pair = SymbolPair.weighted(ONE, AffineMap(a, b))
        exponent = -(1 - a * a) * abs(w) ** 2 + 2 * (b * np.conj(w)).real
        np.testing.assert_allclose(berezin_at(pair, 2.0, w),
                                   np.pi * np.exp(exponent), rtol=1e-9)

    def test_volterra_monomial_at_origin(self):
        pair = SymbolPair.volterra(Z)
        np.testing.assert_allclose(berezin_at(pair, 2.0, 0.0),
                                   VOLTERRA_Z_AT_ORIGIN, rtol=1e-8)

    @pytest.mark.parametrize("w", [0.8, 1.0 + 0.5j, -1.5j])
    @pytest.mark.parametrize("g", [Z, Symbol.polynomial([0.0, 0.0, 1.0])])
    def test_matches_plain_quadrature(self, g, w):
        # same transform without recentring: the integrand against the full
        # Gaussian, with the kernel factor written out explicitly
        pair = SymbolPair.volterra(g)
        c = 1.0

        def plain(z):
            kernel_part = np.exp(2 * c * (pair.psi(z) * np.conj(w)).real
                                 - c * abs(w) ** 2)
            return weight_at(pair, z) ** 2 * kernel_part

        direct = gaussian_integral(plain, c, linear_bound=2 * c * abs(w),
                                   poly_degree_cap=2 * g.degree)
        np.testing.assert_allclose(berezin_at(pair, 2.0, w), direct.value,
                                   rtol=1e-6)


class TestProfile:
    def test_grid_shape_and_header(self):
        prof = berezin_profile(flat_pair(), 2.0,
                               grid=GridSpec(w_max=4.0, radial_count=6,
                                             angular_count=8))
        rows = list(prof.csv_rows())
        assert rows[0] == ("w_re", "w_im", "value")
        assert len(rows) == 6 * 8 + 1
        values = np.array([r[2] for r in rows[1:]])
        np.testing.assert_allclose(values, np.pi, rtol=1e-8)

    def test_ring_maxima_decrease_for_contraction(self):
        prof = berezin_profile(SymbolPair.weighted(ONE, AffineMap(0.5)), 2.0)
        rings = prof.ring_maxima
        assert np.all(np.diff(rings) < 0)
        # the grid starts at r_min, so the sup sits on the innermost ring
        assert prof.sup == pytest.approx(np.pi * np.exp(-0.75 * 0.25 ** 2),
                                         rel=1e-4)
        assert not prof.unbounded

    def test_expanding_map_grows_toward_the_rim(self):
        prof = berezin_profile(SymbolPair.weighted(ONE, AffineMap(1.2)), 2.0)
        rings = prof.ring_maxima
        assert rings[-1] > 10 * rings[0]

    def test_divergent_exponential_weight_flags_unbounded(self):
        u = Symbol.exponential(0.0, 0.0, 0.6)
        prof = berezin_profile(SymbolPair.weighted(u, AffineMap(1.0)), 2.0)
        assert prof.unbounded
        assert prof.note

    def test_vanishing_tail_detection(self):
        shrinking = berezin_profile(SymbolPair.weighted(ONE, AffineMap(0.5)), 2.0)
        flat = berezin_profile(flat_pair(), 2.0)
        assert vanishes_at_infinity(shrinking)[0]
        assert not vanishes_at_infinity(flat)[0]

    def test_log_profile_agrees_with_point_evaluation(self):
        pair = SymbolPair.volterra(Z)
        points = np.array([0.5, 1.0 + 1.0j, 2.0])
        logs = berezin_log_profile(pair, 2.0, points)
        for got, w in zip(logs, points):
            np.testing.assert_allclose(math.exp(got),
                                       berezin_at(pair, 2.0, complex(w)),
                                       rtol=2e-4)


class TestPowerIntegral:
    def test_monomial_tail_converges_for_high_order(self):
        value, status = berezin_power_integral(SymbolPair.volterra(Z), 2.0, 2.0)
        assert status == "converged"
        assert 0 < value < math.inf

    def test_monomial_low_order_diverges(self):
        value, status = berezin_power_integral(SymbolPair.volterra(Z), 2.0, 0.5)
        assert status == "diverged"
        assert value == math.inf

    def test_zero_weight_short_circuits(self):
        pair = SymbolPair.volterra(ONE)  # g' = 0
        assert berezin_power_integral(pair, 2.0, 1.0) == (0.0, "converged")

    def test_gaussian_growth_beyond_decay_diverges(self):
        u = Symbol.exponential(0.0, 0.0, 0.6)
        pair = SymbolPair.weighted(u, AffineMap(1.0))
        value, status = berezin_power_integral(pair, 2.0, 1.0)
        assert status == "diverged"
        assert value == math.inf


class TestLpIntegral:
    def test_contraction_reference_value(self):
        # p = 4 > q = 2 gives s = 2; for psi = z/2 the double Gaussian
        # integral collapses to (pi^3 / 1.5)^(1/4)
        pair = SymbolPair.weighted(ONE, AffineMap(0.5))
        got = lp_integral(pair, 2.0, 2.0)
        np.testing.assert_allclose(got, (np.pi ** 3 / 1.5) ** 0.25, rtol=1e-6)

    def test_identity_map_is_not_integrable(self):
        assert lp_integral(flat_pair(), 2.0, 2.0) == math.inf

    def test_exponent_must_exceed_one(self):
        with pytest.raises(ValueError):
            lp_integral(flat_pair(), 2.0, 1.0)


class TestHilbertSchmidt:
    @pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
    def test_weighted_geometric_reference(self, a):
        pair = SymbolPair.weighted(ONE, AffineMap(a))
        want = np.pi / (1.0 - a * a)
        np.testing.assert_allclose(hilbert_schmidt_integral(pair), want,
                                   rtol=1e-10)

    def test_volterra_reference_value(self):
        pair = SymbolPair.volterra(Z, psi=AffineMap(0.5))
        np.testing.assert_allclose(hilbert_schmidt_integral(pair),
                                   1.255091538303287, rtol=1e-8)

    def test_volterra_direct_ratio_stays_in_band(self):
        # the derivative-form integral is only comparable to the squared
        # spectral norm, 4 ln(4/3) here; the ratio is pinned by the band
        pair = SymbolPair.volterra(Z, psi=AffineMap(0.5))
        ratio = hilbert_schmidt_integral(pair) / (4.0 * math.log(4.0 / 3.0))
        lo, hi = HS_DIRECT_RATIO_BAND
        assert lo < ratio < hi

    def test_zero_weight(self):
        assert hilbert_schmidt_integral(SymbolPair.volterra(ONE)) == 0.0

    def test_unitary_map_is_not_hilbert_schmidt(self):
        assert hilbert_schmidt_integral(flat_pair()) == math.inf


class TestSubharmonicLowerBound:
    @pytest.mark.parametrize("g", [Z, Symbol.polynomial([0.0, 0.0, 1.0])])
    def test_transform_dominates_the_pointwise_weight(self, g):
        # measured min over this grid: 0.511, pinned with headroom
        pair = SymbolPair.volterra(g)
        scale = 2.0 * np.pi / 2.0
        for r in np.geomspace(0.25, 6.0, 8):
            for phase in (1.0, 1.0j, -1.0):
                w = r * phase
                ratio = berezin_at(pair, 2.0, w) / (
                    scale * weight_at(pair, w) ** 2)
                assert ratio >= SUBHARMONIC_LOWER


class TestDivergenceGuards:
    def test_berezin_at_raises_beyond_decay(self):
        u = Symbol.exponential(0.0, 0.0, 0.6)
        pair = SymbolPair.weighted(u, AffineMap(1.0))
        with pytest.raises(DivergentTail):
            berezin_at(pair, 2.0, 0.0)

    def test_exponential_weight_inside_decay_is_finite(self):
        u = Symbol.exponential(0.0, 0.0, 0.2)
        pair = SymbolPair.weighted(u, AffineMap(0.5))
        value = berezin_at(pair, 2.0, 1.0)
        assert math.isfinite(value)
        assert value > 0
