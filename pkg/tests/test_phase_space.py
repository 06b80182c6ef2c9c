import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavext.oracle import build_state, cat_cutoff, loss_channel, quasi_from_density_matrix
from cavext.phase_space import (
    ConvolutionValidityError,
    GridSpec,
    PhaseGrid,
    QuasiDistribution,
    TailMassWarning,
    convert_s_order,
    evaluate_on_grid,
    extract_state,
    extraction_order,
    grid_integral,
    wigner_convolution,
)
from cavext.states import Cat, Fock, cat_output_wigner, cat_wigner, fock_output_wigner, fock_wigner

pytestmark = pytest.mark.filterwarnings("ignore::cavext.oracle.CutoffWarning")

PTS = np.array([0.0, 0.35 - 0.2j, 1.1j, -1.4 + 0.6j, 2.2])


class TestGridSpec:
    def test_parse(self):
        g = GridSpec.parse("-5:5:11,-2:2:5")
        assert (g.n_re, g.n_im, g.im_min) == (11, 5, -2)
        assert np.array_equal(g.re, np.linspace(-5, 5, 11))
        assert GridSpec.parse(str(g)) == g

    @pytest.mark.parametrize("bad", ["1:2", "0:1:1,0:1:3", "a:b:c,0:1:3", "1:0:5,0:1:3"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            GridSpec.parse(bad)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            PhaseGrid(GridSpec.square(1, 3), np.zeros((3, 4)))


class TestEvaluate:
    def test_three_by_three_vacuum(self):
        g = evaluate_on_grid(fock_wigner(0), GridSpec.square(1.0, 3), eta=1.0)
        assert g.values.shape == (3, 3)
        assert g.values[1, 1] == pytest.approx(2 / math.pi, rel=1e-15)
        assert g.values[0, 0] == pytest.approx(2 / math.pi * math.exp(-4), rel=1e-14)
        assert g.metadata["eta"] == 1.0 and g.metadata["s"] == 0.0

    def test_orientation(self):
        p = QuasiDistribution(0.0, lambda a: a.real + 10 * a.imag)
        g = evaluate_on_grid(p, GridSpec(0, 1, 2, 0, 2, 3))
        assert np.array_equal(g.values, [[0, 10, 20], [1, 11, 21]])

    def test_grid_integral_of_gaussian(self):
        spec = GridSpec.square(6, 121)
        vals = np.exp(-np.abs(spec.re[:, None] + 1j * spec.im[None, :]) ** 2)
        assert grid_integral(vals, spec.re, spec.im) == pytest.approx(math.pi, rel=1e-13)

    def test_order_above_one_rejected(self):
        with pytest.raises(ValueError):
            QuasiDistribution(1.5, lambda a: a.real)


class TestOrderConversion:
    def test_identity(self):
        w = fock_wigner(2)
        assert convert_s_order(w, 0.0) is w

    def test_raising_rejected(self):
        with pytest.raises(ValueError):
            convert_s_order(fock_wigner(1), 0.5)

    def test_vacuum_to_husimi(self):
        q = convert_s_order(fock_wigner(0), -1.0)
        assert q.order == -1.0
        assert np.allclose(q(PTS), np.exp(-np.abs(PTS) ** 2) / np.pi, rtol=1e-12, atol=0)

    @pytest.mark.parametrize("target", [-0.3, -1.0, -2.5])
    def test_one_photon_against_fock_basis(self, target):
        q = convert_s_order(fock_wigner(1), target)
        ref = quasi_from_density_matrix(build_state(Fock(1), 2), PTS, target)
        assert np.allclose(q(PTS), ref, rtol=0, atol=1e-12)

    def test_cat_against_fock_basis(self):
        q = convert_s_order(cat_wigner(2.0), -0.6)
        ref = quasi_from_density_matrix(build_state(Cat(2.0), cat_cutoff(2.0)), PTS, -0.6)
        assert np.allclose(q(PTS), ref, rtol=0, atol=1e-11)

    def test_semigroup(self):
        w = fock_wigner(1)
        two_step = convert_s_order(convert_s_order(w, -0.5), -1.0)
        one_step = convert_s_order(w, -1.0)
        assert np.allclose(two_step(PTS), one_step(PTS), rtol=0, atol=1e-12)

    def test_tail_warning(self):
        wide = QuasiDistribution(0.0, lambda a: np.exp(-0.1 * np.abs(a) ** 2), support_radius=3.0)
        with pytest.warns(TailMassWarning):
            convert_s_order(wide, -1.0)(np.array([0.0]))


class TestExtraction:
    def test_order_formula(self):
        assert extraction_order(0.5, 0.0) == -1.0
        assert extraction_order(1.0, 0.3) == pytest.approx(0.3)

    @pytest.mark.parametrize("eta", [0.2, 0.5, 0.71, 0.99])
    def test_rescaling_matches_closed_form(self, eta):
        cav = convert_s_order(fock_wigner(1), extraction_order(eta, 0.0))
        out = extract_state(cav, eta, 0.0)
        assert out.order == 0.0
        assert np.allclose(out(PTS), fock_output_wigner(1, eta)(PTS), rtol=0, atol=1e-12)

    def test_rescale_requires_matching_order(self):
        with pytest.raises(ValueError):
            extract_state(fock_wigner(1), 0.5, 0.0, mode="rescale")

    def test_rescale_infers_target(self):
        out = extract_state(fock_wigner(1), 0.6)
        assert out.order == pytest.approx(0.4)

    @pytest.mark.parametrize("eta", [0.1, 0.5, 0.9, 0.99])
    def test_convolution_normalized(self, eta):
        g = wigner_convolution(cat_wigner(2.0), eta, GridSpec.square(8, 161))
        assert g.integral() == pytest.approx(1.0, abs=1e-10)
        assert g.metadata["path"] == "convolution"

    @pytest.mark.parametrize("spec, closed", [(Fock(2), fock_output_wigner), (Cat(2.5), cat_output_wigner)])
    def test_convolution_equals_rescaling(self, spec, closed):
        cav = fock_wigner(spec.n) if isinstance(spec, Fock) else cat_wigner(spec.alpha0)
        arg = getattr(spec, "n", None)
        arg = spec.alpha0 if arg is None else arg
        for eta in (0.3, 0.84):
            conv = wigner_convolution(cav, eta)
            resc = extract_state(convert_s_order(cav, extraction_order(eta, 0.0)), eta, 0.0)
            assert np.allclose(conv(PTS), resc(PTS), rtol=0, atol=1e-12)
            assert np.allclose(conv(PTS), closed(arg, eta)(PTS), rtol=0, atol=1e-12)

    def test_convolution_composition(self):
        w = fock_wigner(1)
        two = extract_state(extract_state(w, 0.8, 0.0, "convolution"), 0.6, 0.0, "convolution")
        one = extract_state(w, 0.48, 0.0, "convolution")
        assert np.allclose(two(PTS), one(PTS), rtol=0, atol=1e-12)

    def test_validity_error(self):
        with pytest.raises(ConvolutionValidityError):
            extract_state(fock_wigner(1), 0.5, 0.7, mode="convolution")

    def test_zero_width_routes_to_rescale(self):
        out = extract_state(fock_wigner(1), 0.5, 0.5, mode="convolution")
        assert np.allclose(out(PTS), fock_wigner(1)(PTS / math.sqrt(0.5)) / 0.5)

    def test_wigner_convolution_rejects_unit_efficiency(self):
        with pytest.raises(ValueError):
            wigner_convolution(fock_wigner(1), 1.0)
        with pytest.raises(ValueError):
            wigner_convolution(convert_s_order(fock_wigner(1), -1.0), 0.5)

    @given(st.floats(0.05, 0.95))
    @settings(max_examples=10, deadline=None)
    def test_parity_symmetry_preserved(self, eta):
        out = wigner_convolution(cat_wigner(1.5), eta)
        assert np.allclose(out(PTS), out(-PTS), rtol=0, atol=1e-13)

    def test_against_loss_channel(self):
        eta = 0.65
        rho = loss_channel(build_state(Cat(1.5), cat_cutoff(1.5)), eta)
        ref = quasi_from_density_matrix(rho, PTS, 0.0)
        assert np.allclose(wigner_convolution(cat_wigner(1.5), eta)(PTS), ref, atol=1e-12, rtol=0)
