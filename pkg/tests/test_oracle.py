import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cavext.oracle import (
    CutoffWarning,
    DensityMatrix,
    build_state,
    cat_cutoff,
    displacement_matrix,
    loss_channel,
    oracle_distribution,
    quasi_from_density_matrix,
    wigner_from_density_matrix,
)
from cavext.states import Cat, Explicit, Fock, cat_output_wigner, fock_output_wigner, fock_wigner

# reconstruction from an exactly representable state is exact at any |alpha|
pytestmark = pytest.mark.filterwarnings("ignore::cavext.oracle.CutoffWarning")


def random_density(seed, dim):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def mp_displacement(beta, m, n):
    # <m|D(beta)|n> from the Laguerre closed form at 40 digits
    mpmath.mp.dps = 40
    b = mpmath.mpc(beta.real, beta.imag)
    x = abs(b) ** 2
    if m >= n:
        pref = mpmath.sqrt(mpmath.factorial(n) / mpmath.factorial(m)) * b ** (m - n)
        val = pref * mpmath.exp(-x / 2) * mpmath.laguerre(n, m - n, x)
    else:
        pref = mpmath.sqrt(mpmath.factorial(m) / mpmath.factorial(n)) * (-mpmath.conj(b)) ** (n - m)
        val = pref * mpmath.exp(-x / 2) * mpmath.laguerre(m, n - m, x)
    return complex(val)


class TestDensityMatrix:
    def test_validation(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([0.5, 0.4]))
        with pytest.raises(ValueError):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_fock(self):
        rho = build_state(Fock(0), 1)
        assert rho.elements.shape == (1, 1) and rho.elements[0, 0] == 1
        with pytest.raises(ValueError):
            build_state(Fock(3), 3)

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 3.0])
    def test_cat_even_parity_and_trace(self, a):
        rho = build_state(Cat(a), cat_cutoff(a))
        diag = np.real(np.diag(rho.elements))
        assert np.max(diag[1::2]) < 1e-15
        assert np.trace(rho.elements).real == pytest.approx(1.0, abs=1e-14)
        assert rho.purity() == pytest.approx(1.0, abs=1e-13)

    def test_cat_cutoff_too_small(self):
        with pytest.raises(ValueError):
            build_state(Cat(3.0), 12)

    def test_explicit_padding(self):
        rho = build_state(Explicit(np.diag([0.25, 0.75])), 5)
        assert rho.dim == 5 and rho.elements[1, 1] == 0.75


class TestLossChannel:
    def test_single_photon(self):
        out = loss_channel(build_state(Fock(1), 2), 0.7).elements
        assert np.allclose(out, np.diag([0.3, 0.7]), atol=1e-16)

    @pytest.mark.parametrize("n", [2, 5, 30])
    def test_binomial_populations(self, n):
        eta = 0.6
        out = np.real(np.diag(loss_channel(build_state(Fock(n), n + 1), eta).elements))
        ref = [math.comb(n, k) * eta ** k * (1 - eta) ** (n - k) for k in range(n + 1)]
        assert np.allclose(out, ref, rtol=1e-12, atol=1e-300)

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 12), st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=40, deadline=None)
    def test_composition(self, seed, dim, e1, e2):
        rho = random_density(seed, dim)
        twice = loss_channel(loss_channel(rho, e1), e2).elements
        once = loss_channel(rho, e1 * e2).elements
        assert np.max(np.abs(twice - once)) < 1e-12

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 12), st.floats(0, 1))
    @settings(max_examples=40, deadline=None)
    def test_trace_hermiticity_purity(self, seed, dim, eta):
        rho = random_density(seed, dim)
        out = loss_channel(rho, eta)
        assert abs(np.trace(out.elements) - 1) < 1e-12
        assert np.array_equal(out.elements, out.elements.conj().T)

    def test_purity_decreases_for_pure_states(self):
        rho = build_state(Cat(2.0), cat_cutoff(2.0))
        purities = [loss_channel(rho, e).purity() for e in (1.0, 0.9, 0.7, 0.5)]
        assert all(a > b for a, b in zip(purities, purities[1:]))

    def test_unit_efficiency_identity(self):
        rho = random_density(3, 6)
        assert np.allclose(loss_channel(rho, 1.0).elements, rho.elements, atol=1e-15)

    def test_rejects_bad_eta(self):
        with pytest.raises(ValueError):
            loss_channel(build_state(Fock(1), 2), 1.2)


class TestDisplacement:
    @pytest.mark.parametrize("beta", [0.3 + 0.1j, -1.2 + 0.7j, 3 + 4j, 6.5j])
    def test_against_mpmath(self, beta):
        d = displacement_matrix(beta, 40, 40)
        for m, n in [(0, 0), (3, 0), (0, 3), (7, 2), (12, 19), (25, 25), (39, 1), (5, 38)]:
            assert abs(d[m, n] - mp_displacement(beta, m, n)) < 1e-13

    def test_unitary_column(self):
        # columns of a large enough truncation are normalised
        d = displacement_matrix(np.array(1.0 + 0.5j), 80, 5)
        assert np.allclose(np.sum(np.abs(d) ** 2, axis=0), 1.0, atol=1e-14)


class TestReconstruction:
    @pytest.mark.parametrize("n", range(6))
    def test_fock_wigner(self, n):
        pts = np.array([0.0, 0.3, 0.5 + 0.5j, -1.1j, 1.3 - 0.2j])
        got = wigner_from_density_matrix(build_state(Fock(n), 12), pts)
        assert np.allclose(got, fock_wigner(n)(pts), rtol=0, atol=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 4])
    @pytest.mark.parametrize("eta", [0.3, 0.5, 0.71])
    def test_fock_output(self, n, eta):
        pts = np.array([0.0, 0.4 + 0.2j, -0.9j, 1.5])
        rho = loss_channel(build_state(Fock(n), n + 1), eta)
        got = wigner_from_density_matrix(rho, pts)
        assert np.allclose(got, fock_output_wigner(n, eta)(pts), rtol=0, atol=1e-10)

    def test_cat_output(self):
        pts = np.array([0.0, 0.3j, 2.9, -2.9 + 0.1j, 1.0 + 1.0j])
        rho = loss_channel(build_state(Cat(3.0), cat_cutoff(3.0)), 0.952)
        got = wigner_from_density_matrix(rho, pts)
        assert np.allclose(got, cat_output_wigner(3.0, 0.952)(pts), rtol=0, atol=1e-8)

    def test_husimi_of_vacuum(self):
        pts = np.array([0.0, 0.5, 1.0 + 1.0j])
        got = quasi_from_density_matrix(build_state(Fock(0), 4), pts, -1.0)
        assert np.allclose(got, np.exp(-np.abs(pts) ** 2) / np.pi, rtol=1e-14)

    def test_positive_order_rejected(self):
        with pytest.raises(ValueError):
            quasi_from_density_matrix(build_state(Fock(0), 1), 0.0, 0.5)

    def test_cutoff_warning(self):
        with pytest.warns(CutoffWarning):
            wigner_from_density_matrix(build_state(Fock(1), 4), np.array([3.0]))

    def test_distribution_wrapper(self):
        p = oracle_distribution(build_state(Fock(1), 2), -0.5, "x")
        assert p.order == -0.5 and p.label == "x"
        assert p(np.array([0.2j])).shape == (1,)
