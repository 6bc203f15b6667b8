import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toa import halfline
from toa.errors import InvalidGridError, PreconditionError, ResolutionError, TailError, UnsupportedError
from toa.numerics import ComplexSamples, Grid
from toa.states import PhysicalConstants, boost

LAM = 1.0


def exact_density(p, lam=LAM):
    # |2 lam^(3/2) / (sqrt(2 pi) (lam + i p)^2)|^2
    return 2 * lam ** 3 / (np.pi * (lam * lam + p * p) ** 2)


@pytest.fixture(scope="module")
def state():
    return halfline.linear_exponential_state(LAM)


@pytest.fixture(scope="module")
def wide_dist(state):
    return halfline.momentum_density(state, Grid.symmetric(40.0, 1601))


class TestState:
    def test_normalized_and_in_domain(self, state):
        assert state.norm2() == pytest.approx(1.0, abs=1e-12)
        assert state.in_domain
        assert state.values[0] == 0

    def test_boundary_value_flags_domain(self):
        s = halfline.HalfLineState.from_function(lambda x: np.exp(-x), 40.0, 2001)
        assert not s.in_domain
        assert s.norm2() == pytest.approx(1.0)

    def test_grid_must_start_at_zero(self):
        with pytest.raises(InvalidGridError):
            halfline.HalfLineState(PhysicalConstants(), ComplexSamples(Grid(1.0, 2.0, 3), np.ones(3)))


class TestDensity:
    def test_closed_form(self, wide_dist):
        np.testing.assert_allclose(wide_dist.density, exact_density(wide_dist.nodes),
                                   rtol=1e-8, atol=1e-12)

    def test_naimark_projection_gives_same_density(self, state):
        pg = Grid.symmetric(20.0, 801)
        a = halfline.momentum_density(state, pg).density
        b = halfline.naimark_density(state, pg).density
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-16)

    def test_extension(self, state):
        ext = halfline.extend_to_line(state)
        assert ext.grid.start == -state.xmax
        assert np.all(ext.values[:state.samples.grid.n - 1] == 0)

    @settings(max_examples=8)
    @given(st.floats(-3.0, 3.0))
    def test_momentum_shift_covariance(self, state, q):
        pg = Grid.symmetric(12.0, 481)
        moved = halfline.HalfLineState(state.constants, boost(state.samples, -q))
        a = halfline.momentum_density(moved, pg).density
        b = halfline.momentum_density(state, pg.shifted(-q)).density
        assert np.max(np.abs(a - b)) < 1e-6 * b.max()

    def test_resolution_guards(self, state):
        with pytest.raises(ResolutionError, match="position grid"):
            halfline.momentum_density(state, Grid.symmetric(1000.0, 20001))
        with pytest.raises(ResolutionError, match="momentum grid"):
            halfline.momentum_density(state, Grid.symmetric(10.0, 51))


class TestMoments:
    def test_norm_with_tail(self, wide_dist):
        assert halfline.moment(wide_dist, 0, tail="powerlaw") == pytest.approx(1.0, abs=1e-6)

    def test_second_moment_identity(self, wide_dist, state):
        dist_m2 = halfline.moment(wide_dist, 2, tail="powerlaw")
        op_m2 = halfline.operator_moment(state, 2)
        assert dist_m2 == pytest.approx(LAM ** 2, rel=1e-4)
        assert op_m2.real == pytest.approx(LAM ** 2, rel=1e-8)
        assert abs(dist_m2 - op_m2.real) / op_m2.real < 1e-4

    def test_truncated_tail_is_reported(self, wide_dist):
        with pytest.raises(TailError) as err:
            halfline.moment(wide_dist, 2)
        assert 0 < err.value.tail_mass < 0.1

    def test_third_moment_diverges(self, wide_dist):
        with pytest.raises(TailError):
            halfline.moment(wide_dist, 3, tail="powerlaw")

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_third_moment_anomaly(self, lam):
        s = halfline.linear_exponential_state(lam)
        m3 = halfline.operator_moment(s, 3)
        # integration by parts leaves hbar^3 |psi'(0)|^2 / 2 = 2 lam^3
        assert m3.imag == pytest.approx(2 * lam ** 3, rel=1e-3)
        assert abs(m3.real) < 1e-6 * lam ** 3

    def test_first_moment_vanishes(self, state):
        assert abs(halfline.operator_moment(state, 1)) < 1e-8

    def test_limits(self, state):
        with pytest.raises(UnsupportedError):
            halfline.apply_momentum(state, 5)
        with pytest.raises(PreconditionError):
            halfline.operator_moment(state, -1)

    def test_decaying_density_needs_no_tail(self):
        g = Grid.symmetric(10.0, 201)
        from toa.results import Distribution
        d = Distribution(g, np.exp(-g.nodes ** 2) / np.sqrt(np.pi))
        assert halfline.moment(d, 2) == pytest.approx(0.5, abs=1e-12)


@st.composite
def windows(draw):
    return (draw(st.floats(-1.5, 1.5)), draw(st.floats(0.2, 0.5)), draw(st.floats(-2.0, 2.0)))


class TestKernel:
    @settings(max_examples=5)
    @given(windows(), windows())
    def test_smeared_identity(self, wf, wg):
        half = max(abs(wf[0]) + 14 * wf[1], abs(wg[0]) + 14 * wg[1])
        pg = Grid.symmetric(half, int(np.ceil(2 * half / 0.01)) // 2 * 2 + 1)
        rep = halfline.overlap_kernel_check(halfline.gaussian_window(*wf),
                                            halfline.gaussian_window(*wg), pg, xmax=40.0)
        assert rep.passed, str(rep)

    def test_same_window_is_half_norm_plus_real_part(self):
        # <u, u> is real, so the principal-value term must be real as well
        f = halfline.gaussian_window(0.3, 0.3, 1.0)
        rep = halfline.overlap_kernel_check(f, f, Grid.symmetric(5.0, 1001), xmax=40.0)
        assert rep.passed
        assert abs(rep.values["lhs"].imag) < 1e-10
        assert abs(rep.values["pv_term"].imag) < 1e-6

    def test_window(self):
        w = halfline.gaussian_window(1.0, 0.5, 2.0)
        assert w(1.0) == pytest.approx(np.exp(2j))
        assert abs(w(2.0)) == pytest.approx(np.exp(-1.0))
