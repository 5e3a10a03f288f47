"""Moment-integral, shockwave, and Cauchy-transform tests."""

import math

import numpy as np
import pytest
import sympy as sp

from plateaulab import moment as M
from plateaulab.moment import (
    CurveModel,
    NuLambdaFrame,
    PoleOnCurveError,
    cauchy_G,
    cauchy_G_oracle,
    decomposition_probe,
    differential_form,
    disc_curve,
    lambda_sweep,
    moment_integral,
    shockwave_order,
    shockwave_residual,
)


@pytest.fixture(scope="module")
def circle():
    return CurveModel.from_expressions(["exp(I*t)", "0*t"], label="unit circle in z1")


@pytest.fixture(scope="module")
def nonbounding():
    return CurveModel.from_expressions(["exp(I*t)", "exp(-I*t)"], label="conjugate pair")


# ---------------------------------------------------------------- curve model


def test_curve_must_close():
    with pytest.raises(ValueError, match="close"):
        CurveModel.from_expressions(["t", "0*t"])


def test_curve_must_be_immersed():
    with pytest.raises(ValueError, match="immersed"):
        CurveModel.from_expressions(["0*t + 1", "0*t"])


def test_disc_curve_samples():
    gamma = disc_curve(0.7, radius=0.5)
    z, dz = gamma.samples(64)
    assert np.allclose(np.abs(z[:, 1]), 0.5)
    assert np.allclose(z[:, 2], 0.7)
    assert np.allclose(z[:, 0], 0.0)
    assert np.max(np.abs(dz[:, 1] - 1j * z[:, 1])) < 1e-12


# ---------------------------------------------------------------- moments


def test_bounding_moments_vanish(circle):
    assert abs(moment_integral(circle, {1: "z2"})) < 1e-10
    for k in range(4):
        assert abs(moment_integral(circle, {1: f"z1**{k}"})) < 1e-10


def test_nonbounding_moment_is_2_pi_i(nonbounding):
    val = moment_integral(nonbounding, {1: "z2"})
    assert abs(val - 2j * math.pi) < 1e-8


def test_exact_differentials_integrate_to_zero(circle, nonbounding):
    z1, z2 = sp.symbols("z1 z2", complex=True)
    third = CurveModel.from_expressions(
        ["exp(I*t) + 0.3*exp(3*I*t)", "0.5*exp(-2*I*t)"], label="wobbly"
    )
    rng = np.random.default_rng(0)
    for s in range(10):
        P = sum(
            sp.Rational(int(rng.integers(-5, 6)), 3)
            * z1 ** int(rng.integers(0, 4))
            * z2 ** int(rng.integers(0, 4))
            for _ in range(4)
        )
        form = differential_form(P, 2)
        for c in (circle, nonbounding, third):
            assert abs(moment_integral(c, form)) < 1e-10


def test_moment_reparametrization_invariance(nonbounding):
    def reparam(theta):
        s = theta + 0.4 * np.sin(theta)
        return np.stack([np.exp(1j * s), np.exp(-1j * s)], axis=-1)

    other = CurveModel(n=2, fn=reparam, label="reparametrized")
    a = moment_integral(nonbounding, {1: "z2"})
    b = moment_integral(other, {1: "z2"})
    assert abs(a - b) < 1e-10


def test_moment_rejects_bad_differential(circle):
    with pytest.raises(ValueError, match="dz_3"):
        moment_integral(circle, {3: "z1"})


# ---------------------------------------------------------------- shockwave


def test_burgers_solution_has_small_residual():
    xi = np.linspace(0.28, 0.32, 9)
    eta = np.linspace(0.18, 0.22, 9)
    f = lambda x, e: x / (1.0 - e)
    assert shockwave_residual(f, xi, eta, h=1e-3) < 1e-6


def test_shockwave_constant_is_machine_zero():
    xi = eta = np.linspace(-0.3, 0.3, 7)
    assert shockwave_residual(lambda x, e: 0 * x + 2.0, xi, eta) < 1e-13


def test_shockwave_of_f_equals_xi_is_abs_xi():
    xi = np.linspace(0.1, 0.4, 7)
    eta = np.linspace(0.0, 0.2, 5)
    r = shockwave_residual(lambda x, e: x, xi, eta)
    assert abs(r - 0.4) < 1e-9


def test_shockwave_order_is_two():
    xi = np.linspace(0.25, 0.35, 7)
    eta = np.linspace(0.15, 0.25, 7)
    order = shockwave_order(lambda x, e: x / (1.0 - e), xi, eta, h=1e-3)
    assert 1.8 <= order <= 2.2


# ---------------------------------------------------------------- cauchy_G


def _frame(**kw):
    base = dict(lam=0.0, xi1=0.0, xi2=0.0, eta1=1.0, eta2=1.0, etap1=1.0, etap2=1.0)
    base.update(kw)
    return NuLambdaFrame(**base)


def test_frame_requires_nonzero_slopes():
    with pytest.raises(ValueError, match="slopes"):
        _frame(etap1=0.0)
    with pytest.raises(ValueError, match="slopes"):
        _frame(etap2=0.0)


def test_cauchy_G_matches_residue_inside():
    fr = _frame()
    val = cauchy_G(disc_curve(0.5), fr)
    assert abs(val - cauchy_G_oracle(0.5, fr)) < 1e-10
    assert abs(val - 0.5) < 1e-10


def test_cauchy_G_vanishes_outside():
    fr = _frame(lam=2.0)
    assert abs(cauchy_G(disc_curve(0.5), fr)) < 1e-10
    assert cauchy_G_oracle(0.5, fr) == 0.0


def test_cauchy_G_zero_slope_frame_gives_zero():
    fr = _frame(eta1=0.0)
    assert abs(cauchy_G(disc_curve(0.5), fr)) < 1e-12
    assert cauchy_G_oracle(0.5, fr) == 0.0


def test_cauchy_G_pole_guard():
    # zeta0 = 0.5 - lam hits the contour at lam = -0.5
    with pytest.raises(PoleOnCurveError, match="guard"):
        cauchy_G(disc_curve(0.5), _frame(lam=-0.5))


def test_lambda_sweep_tracks_oracle_inside_and_outside():
    fr = _frame()
    inside = lambda_sweep(0.5, fr, np.linspace(-0.4, 0.4, 20))
    assert max(abs(g - o) for _, g, o in inside) < 1e-8
    outside = lambda_sweep(0.5, fr, np.linspace(1.6, 2.4, 20))
    assert max(abs(g) for _, g, _ in outside) < 1e-8


def test_lambda_sweep_is_continuous_within_branch():
    fr = _frame()
    sweep = lambda_sweep(0.5, fr, np.linspace(-0.3, 0.3, 25))
    vals = np.array([g for _, g, _ in sweep])
    assert np.max(np.abs(np.diff(vals))) < 0.05


def test_cauchy_G_needs_three_coordinates(circle):
    with pytest.raises(ValueError, match="C\\^3"):
        cauchy_G(circle, _frame())


# ---------------------------------------------------------------- probe


def test_decomposition_probe_flat_for_affine_G():
    xi = np.linspace(-0.2, 0.2, 9)
    eta = np.linspace(-0.2, 0.2, 9)
    probe = decomposition_probe(lambda x, e: 2.0 * x + 0.3, xi, eta)
    assert probe.max_second_difference < 1e-8
    assert probe.grid_shape == (9, 9)
    assert "diagnostic" in probe.note


def test_decomposition_probe_scores_candidates():
    xi = np.linspace(0.28, 0.32, 5)
    eta = np.linspace(0.18, 0.22, 5)
    good = lambda x, e: x / (1.0 - e)
    bad = lambda x, e: x + e
    probe = decomposition_probe(good, xi, eta, candidates=(good, bad))
    assert probe.candidate_residuals[0] < 1e-6
    assert probe.candidate_residuals[1] > 0.1
