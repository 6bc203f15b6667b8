import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from toa import arrival
from toa.errors import NotInDomainError, PreconditionError, ResolutionError
from toa.numerics import ComplexSamples, Grid, integrate_values
from toa.states import (GaussianSpec, MomentumState, PhysicalConstants, build_state,
                        evolve_free, to_energy_channels)

from conftest import gaussian_specs, superpositions


def _state(func, pmax=12.0, n=4096, constants=PhysicalConstants()):
    g = Grid.symmetric(pmax, n)
    vals = func(g.nodes).astype(complex)
    vals /= np.sqrt(integrate_values(np.abs(vals) ** 2, g))
    return MomentumState(constants, ComplexSamples(g, vals))


@pytest.fixture(scope="module")
def linear_state():
    """psi(p) = c |p| exp(-p^2/2): even, in the domain, closed-form density."""
    return _state(lambda p: np.abs(p) * np.exp(-p ** 2 / 2))


@pytest.fixture(scope="module")
def reference_dist(reference_state):
    return arrival.kijowski_distribution(reference_state)


class TestDifferentialExpression:
    def test_forms_agree_on_smooth_states(self, reference_state):
        direct = arrival.apply_tab_momentum(reference_state, "direct").values
        sym = arrival.apply_tab_momentum(reference_state, "symmetric").values
        assert np.max(np.abs(direct - sym)) < 1e-8 * np.abs(direct).max()

    def test_unknown_form(self, reference_state):
        with pytest.raises(ValueError):
            arrival.apply_tab_momentum(reference_state, "other")

    def test_multiplication_oracle(self):
        # on p^a the expression is (i/2)(1 - 2a) p^(a-2) (hbar = m = 1)
        g = Grid(0.5, 3.0, 501)
        for a in (1.0, 2.5, 4.0):
            out = arrival.tab_expression(ComplexSamples(g, g.nodes ** a)).values
            np.testing.assert_allclose(out, 0.5j * (1 - 2 * a) * g.nodes ** (a - 2), rtol=1e-9)

    def test_zero_node_is_masked(self):
        g = Grid.symmetric(1.0, 11)
        out = arrival.tab_expression(ComplexSamples(g, g.nodes ** 2)).values
        assert out[5] == 0

    def test_expectation_is_real_for_reference(self, reference_state):
        t = arrival.tab_expectation(reference_state)
        assert abs(t.imag) < 1e-8
        assert t.real == pytest.approx(2.0, rel=5e-3)


class TestDomain:
    def test_gaussian_in_domain(self, reference_state):
        assert arrival.in_domain(reference_state)

    def test_sqrt_behaviour_is_not(self):
        s = _state(lambda p: np.sqrt(np.abs(p)) * np.exp(-p ** 2 / 2))
        assert not arrival.in_domain(s)
        with pytest.raises(NotInDomainError):
            arrival.apply_tab_momentum(s)
        with pytest.raises(NotInDomainError):
            arrival.second_moment_check(s, Grid(-5.0, 5.0, 1001))

    def test_p_squared_is(self):
        # ratio ~ p^(1/2): large threshold crossing is not needed, it decreases to 0
        s = _state(lambda p: 50 * p ** 2 * np.exp(-p ** 2 / 2))
        assert arrival.domain_ratio(s)[0][0] < arrival.domain_ratio(s)[0][-1]
        assert arrival.in_domain(s)


class TestDeficiency:
    def test_check_passes(self):
        rep = arrival.deficiency_check()
        assert rep.passed, str(rep)
        assert rep.values["residual_plus"] < 1e-6
        assert rep.values["residual_minus"] < 1e-6
        assert rep.values["residual_minus_i_candidate"] < 1e-6

    def test_candidate_norms_match_closed_form(self):
        # int_0^P p exp(p^2) dp = (exp(P^2) - 1) / 2
        rep = arrival.deficiency_check()
        exact = [(np.exp(c * c) - 1) / 2 for c in rep.values["cutoffs"]]
        np.testing.assert_allclose(rep.values["candidate_norms"], exact, rtol=1e-6)
        assert rep.values["candidate_norms"][-1] > 1e6

    def test_vectors(self):
        p = np.array([-1.0, 1.0])
        np.testing.assert_allclose(arrival.deficiency_vector(p, +1), [0, np.exp(-0.5)])
        np.testing.assert_allclose(arrival.deficiency_vector(p, -1), [np.exp(-0.5), 0])
        np.testing.assert_allclose(arrival.deficiency_vector(p, +1, growing=True),
                                   [0, np.exp(0.5)])

    def test_other_units(self):
        assert arrival.deficiency_check(PhysicalConstants(hbar=0.5, mass=2.0)).passed


class TestKijowski:
    def test_closed_form(self, linear_state):
        # each channel: |int_0^inf sqrt(p/2pi) p exp(-p^2 (1 + it)/2) dp|^2
        tg = Grid(-5.0, 5.0, 1001)
        dist = arrival.kijowski_distribution(linear_state, tg)
        c2 = 2 / np.sqrt(np.pi)
        t = tg.nodes
        exact = 2 * c2 / (2 * np.pi) * gamma(1.25) ** 2 * np.sqrt(2) / (1 + t * t) ** 1.25
        # the p^(3/2) behaviour at 0 limits the quadrature to roughly h^(5/2)
        np.testing.assert_allclose(dist.density, exact, rtol=1e-6)

    def test_classical_limit(self, reference_dist):
        assert reference_dist.total == pytest.approx(1.0, abs=2e-3)
        assert reference_dist.mean() == pytest.approx(2.0, rel=1e-2)
        assert reference_dist.peak() == pytest.approx(2.0, rel=2e-2)

    def test_metadata(self, reference_dist):
        md = reference_dist.metadata
        assert md["total_plus"] + md["total_minus"] == pytest.approx(reference_dist.total)
        assert md["total_minus"] < 1e-20
        np.testing.assert_allclose(md["plus"] + md["minus"], reference_dist.density)

    @settings(max_examples=10)
    @given(superpositions())
    def test_normalization(self, specs):
        dist = arrival.kijowski_distribution(build_state(specs))
        assert 0.998 <= dist.total <= 1.002

    def test_time_guard(self, reference_state):
        with pytest.raises(ResolutionError):
            arrival.kijowski_distribution(reference_state, Grid(0.0, 4.0, 11))
        with pytest.raises(ResolutionError, match="largest"):
            arrival.kijowski_distribution(reference_state, Grid(0.0, 500.0, 200001))

    def test_energy_representation_agrees(self, two_channel_state):
        tg = Grid(0.5, 3.5, 601)
        mom = arrival.kijowski_distribution(two_channel_state, tg)
        en = arrival.kijowski_energy_distribution(to_energy_channels(two_channel_state), tg)
        i = int(np.argmax(mom.density))
        assert abs(en.density[i] - mom.density[i]) / mom.density[i] < 1e-4

    def test_window_object(self, reference_state):
        g = arrival.TimeWindow(0.0, 4.0).grid(reference_state)
        assert g.spacing <= arrival._time_step_limit(reference_state) / 2 + 1e-15
        assert arrival.time_grid(reference_state, 0.0, 0.01).n == 201


class TestCovariance:
    @settings(max_examples=5)
    @given(superpositions(max_packets=2), st.integers(-300, 300))
    def test_shift(self, specs, steps):
        s = build_state(specs)
        tg = arrival.time_grid(s, *arrival.arrival_window(s))
        rep = arrival.covariance_check(s, steps * tg.spacing, tg)
        assert rep.measured < 1e-4, str(rep)

    def test_zero_shift(self, reference_state):
        assert arrival.covariance_check(reference_state, 0.0, Grid(0, 4, 801)).measured == 0.0


class TestFluxAndMoments:
    @settings(max_examples=5)
    @given(gaussian_specs(sign=1))
    def test_flux_identity(self, spec):
        t_flux, rep = arrival.arrival_mean_flux(build_state([spec]))
        assert rep.passed, str(rep)
        assert t_flux > 0

    def test_reference_flux(self, reference_state):
        t_flux, rep = arrival.arrival_mean_flux(reference_state)
        assert t_flux == pytest.approx(2.0, rel=1e-2)
        assert rep.measured < 1e-6

    def test_flux_mean_at_origin(self):
        s = build_state([GaussianSpec(5.0, 0.2, 0.0)], pmax=10.0)
        t_flux, rep = arrival.arrival_mean_flux(s)
        assert abs(t_flux) < 1e-2
        assert rep.passed

    def test_flux_is_positive_for_right_movers(self, reference_state):
        j = arrival.flux(reference_state, Grid(0.0, 4.0, 801))
        assert j.min() > -1e-12

    def test_presence_time(self, reference_state):
        t_pres, rep = arrival.presence_mean(reference_state)
        assert rep.passed, str(rep)
        # slower components dwell longer at x = 0, so it lies just above the flux mean
        assert 2.0 < t_pres < 2.02

    def test_presence_needs_positive_momenta(self, two_channel_state):
        with pytest.raises(PreconditionError):
            arrival.presence_mean(two_channel_state)

    def test_second_moment(self, reference_state):
        rep = arrival.second_moment_check(reference_state)
        assert rep.passed, str(rep)

    @settings(max_examples=4)
    @given(superpositions(max_packets=2))
    def test_second_moment_random(self, specs):
        rep = arrival.second_moment_check(build_state(specs))
        assert rep.passed, str(rep)

    def test_position_amplitude_at_t0(self, reference_state):
        # psi(x, 0) of a Gaussian centred at -10 with sigma_x = 2.5
        psi, _ = arrival.position_amplitude(reference_state, 0.0, x=-10.0)
        assert abs(psi[0]) ** 2 == pytest.approx((2 * np.pi * 6.25) ** -0.5, rel=1e-10)
