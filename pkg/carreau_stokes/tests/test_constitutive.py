"""
Tests for the Carreau law, viscosity models and the sampled inequalities
"""

import math

import numpy as np
import pytest

from ..constitutive import (CarreauParams, SymTensor2, ViscosityModel, check_constitutive, eta, eta_prime,
                            growth_ratio, lipschitz_ratio, monotonicity_pairing, nu, nu_prime, stress)
from ..stokes_types import ConstitutiveError


@pytest.fixture
def params():
    return CarreauParams(eta_inf=0.5, eta0=2.0, lam=1.0, p=1.6)


class TestCarreauParams:
    @pytest.mark.parametrize("kwargs", [
        {"eta_inf": -0.1},
        {"eta_inf": 2.0, "eta0": 2.0},
        {"lam": 0.0},
        {"p": 1.0},
        {"p": 2.5},
        {"eta0": math.nan},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConstitutiveError):
            CarreauParams(**kwargs)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            CarreauParams(p=3.0)

    def test_flags(self):
        assert CarreauParams(p=2.0).newtonian
        assert CarreauParams(eta_inf=0.0).degenerate
        assert not CarreauParams().degenerate


class TestEta:
    def test_zero_shear(self, params):
        assert eta(0.0, params) == pytest.approx(2.0)

    def test_tends_to_eta_inf(self, params):
        assert eta(1e20, params) == pytest.approx(0.5, abs=1e-3)

    def test_closed_form(self, params):
        assert eta(3.0, params) == pytest.approx(0.5 + 1.5 * 4.0 ** -0.2)

    def test_newtonian_is_exact(self):
        newtonian = CarreauParams(p=2.0)
        assert eta(123.4, newtonian) == 2.0
        assert eta_prime(5.0, newtonian) == 0.0

    def test_array_input(self, params):
        values = eta(np.array([0.0, 1.0, 10.0]), params)
        assert values.shape == (3,)
        assert np.all(np.diff(values) < 0)

    def test_derivative_matches_finite_differences(self, params):
        z, h = 0.7, 1e-6
        fd = (eta(z + h, params) - eta(z - h, params)) / (2 * h)
        assert eta_prime(z, params) == pytest.approx(fd, rel=1e-7)

    def test_negative_argument(self, params):
        with pytest.raises(ConstitutiveError):
            eta(-1.0, params)


class TestViscosityModels:
    def test_exp_decay(self):
        model = ViscosityModel.exp_decay()
        assert nu(0.0, model) == pytest.approx(1.0)
        assert nu_prime(1.0, model) == pytest.approx(-math.exp(-1.0))
        nu1, nu2, nu3 = model.bounds()
        assert nu1 == pytest.approx(math.exp(-1.5))
        assert nu2 == pytest.approx(1.0)
        assert nu3 == pytest.approx(1.0)

    def test_constant(self):
        model = ViscosityModel.constant(3.0)
        assert nu(np.array([0.0, 7.0]), model).tolist() == [3.0, 3.0]
        assert model.bounds() == (3.0, 3.0, 0.0)

    def test_affine_clamped(self):
        model = ViscosityModel.affine_clamped(a=1.0, b=-1.0, lo=0.2, hi=0.9)
        assert nu(0.0, model) == pytest.approx(0.9)
        assert nu(0.5, model) == pytest.approx(0.5)
        assert nu(2.0, model) == pytest.approx(0.2)
        assert nu_prime(0.5, model) == pytest.approx(-1.0)
        assert nu_prime(2.0, model) == 0.0

    def test_contains(self):
        model = ViscosityModel.exp_decay()
        assert model.contains(0.0, 1.0)
        assert not model.contains(-0.1, 1.0)
        assert not model.contains(0.0, 2.0)

    def test_unknown_kind(self):
        with pytest.raises(ConstitutiveError):
            ViscosityModel("cubic")

    def test_non_positive_constant(self):
        with pytest.raises(ConstitutiveError):
            ViscosityModel.constant(0.0)


class TestSymTensor2:
    def test_off_diagonal_counted_twice(self):
        t = SymTensor2.from_matrix([[1.0, 2.0], [2.0, 3.0]])
        assert t.norm() ** 2 == pytest.approx(18.0)
        assert np.allclose(t.as_matrix(), [[1.0, 2.0], [2.0, 3.0]])

    def test_arithmetic(self):
        a, b = SymTensor2(1.0, 2.0, 3.0), SymTensor2.identity()
        assert (a - b).as_array().tolist() == [0.0, 2.0, 2.0]
        assert (-a + a).norm() == 0.0
        assert a.inner(b) == pytest.approx(4.0)


class TestStressInequalities:
    def test_stress_is_scaled_strain(self, params):
        eps = SymTensor2(0.3, -0.2, 0.1)
        tau = stress(eps, params)
        factor = eta(eps.inner(eps), params)
        assert np.allclose(tau.as_array(), factor * eps.as_array())

    def test_pairing_positive(self, params):
        k, l = SymTensor2(1.0, 0.5, -2.0), SymTensor2(-0.3, 0.0, 0.4)
        pairing = monotonicity_pairing(k, l, params)
        assert pairing > 0
        assert pairing >= 0.5 * (k - l).norm() ** 2

    def test_newtonian_lipschitz_is_eta0(self):
        newtonian = CarreauParams(p=2.0)
        ratio = lipschitz_ratio(SymTensor2(1.0, 2.0, 3.0), SymTensor2(0.0, -1.0, 0.5), newtonian)
        assert ratio == pytest.approx(2.0, abs=1e-12)

    def test_lipschitz_undefined_for_equal_arguments(self, params):
        with pytest.raises(ConstitutiveError):
            lipschitz_ratio(SymTensor2.identity(), SymTensor2.identity(), params)

    def test_growth_ratio_bounded_when_degenerate(self):
        degenerate = CarreauParams(eta_inf=0.0)
        assert growth_ratio(SymTensor2(1e6, 0.0, -1e6), degenerate) < 10.0
        assert growth_ratio(SymTensor2(0.0, 0.0, 0.0), degenerate) == 0.0


class TestCheckConstitutive:
    def test_non_degenerate_passes(self, params):
        report = check_constitutive(params, samples=5000, seed=0)
        assert report.passed, report.failures
        assert report.min_pairing > 0
        assert report.lower_bound_holds
        assert report.lipschitz_label == "C1_hat"
        assert math.isfinite(report.lipschitz_sup)

    def test_degenerate_passes(self):
        report = check_constitutive(CarreauParams(eta_inf=0.0, p=1.2), samples=5000, seed=1)
        assert report.passed, report.failures
        assert report.lipschitz_label == "C3_hat"

    def test_newtonian_deviation(self):
        report = check_constitutive(CarreauParams(p=2.0), samples=5000, seed=2)
        assert report.newtonian_deviation is not None
        assert report.newtonian_deviation <= 1e-12

    def test_seeded_runs_are_reproducible(self, params):
        a = check_constitutive(params, samples=2000, seed=42)
        b = check_constitutive(params, samples=2000, seed=42)
        assert a.lipschitz_sup == b.lipschitz_sup
        assert a.min_pairing == b.min_pairing

    def test_invalid_sample_count(self, params):
        with pytest.raises(ConstitutiveError):
            check_constitutive(params, samples=0)
