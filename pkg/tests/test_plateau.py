"""Leaf quadrature tests: volumes, omega-energy, gap, mixed volume, Stokes."""

import math

import numpy as np
import pytest

from plateaulab import plateau as P
from plateaulab.plateau import (
    BallDomain,
    DegenerateLeafError,
    DiscDomain,
    FoliatedHypersurface,
    LeafChart,
    RectDomain,
    ball_family,
    calibration_gap,
    competitor_perturb,
    current_mass,
    exterior_derivative,
    leaf_volume,
    mixed_volume,
    omega_energy,
    planar_leaf,
    random_polynomial_form,
    stokes_check,
)


@pytest.fixture(scope="module")
def disc():
    return planar_leaf(2, (0, 1), DiscDomain(1.0), label="flat holomorphic disc")


@pytest.fixture(scope="module")
def ball():
    return planar_leaf(2, (0, 1, 2, 3), BallDomain(1.0), label="flat complex 2-ball")


# ---------------------------------------------------------------- volume


def test_disc_volume_is_pi(disc):
    assert abs(leaf_volume(disc) - math.pi) < 1e-6


def test_ball_volume_is_half_pi_squared(ball):
    assert abs(leaf_volume(ball) - math.pi**2 / 2) < 1e-5


def test_rect_leaf_volume_matches_parallelogram():
    dom = RectDomain(((0.0, 1.0), (0.0, 1.0)))
    base = np.zeros(4)
    chart = planar_leaf(2, (0, 2), dom, base_point=base)

    def map_fn(U):
        return np.stack([U[:, 0], 0 * U[:, 0], U[:, 0] + 2 * U[:, 1], 0 * U[:, 0]], axis=-1)

    def jac_fn(U):
        J = np.zeros((U.shape[0], 4, 2))
        J[:, 0, 0] = 1.0
        J[:, 2, 0] = 1.0
        J[:, 2, 1] = 2.0
        return J

    skew = LeafChart(2, dom, map_fn, jac_fn)
    assert abs(leaf_volume(skew) - 2.0) < 1e-10


def test_degenerate_leaf_raises():
    dom = DiscDomain(1.0)
    chart = LeafChart(
        2,
        dom,
        lambda U: np.zeros((U.shape[0], 4)),
        lambda U: np.zeros((U.shape[0], 4, 2)),
        label="collapsed",
    )
    with pytest.raises(DegenerateLeafError, match="collapsed"):
        leaf_volume(chart)


def test_nonholomorphic_perturbation_increases_volume(disc):
    base = leaf_volume(disc)
    pert = leaf_volume(competitor_perturb(disc, 0.25))
    assert pert > base + 1e-4


def test_volume_strictly_increasing_in_amplitude(disc):
    vols = [leaf_volume(competitor_perturb(disc, a)) for a in (0.05, 0.1, 0.2)]
    assert vols[0] < vols[1] < vols[2]


def test_mass_path_agrees_with_volume(disc):
    assert abs(current_mass(disc, rtol=1e-7) - leaf_volume(disc, rtol=1e-7)) < 1e-8


# ---------------------------------------------------------------- energy


def test_disc_energy_is_pi(disc):
    assert abs(omega_energy(disc) - math.pi) < 1e-9


def test_ball_energy_equals_volume(ball):
    assert abs(omega_energy(ball) - math.pi**2 / 2) < 1e-9


def test_energy_invariant_under_boundary_fixing_perturbation(disc):
    base = omega_energy(disc)
    for direction in (None, np.array([0, 0, 1.0, 1.0])):
        pert = competitor_perturb(disc, 0.3, direction=direction)
        assert abs(omega_energy(pert) - base) < 1e-6 * abs(base)


def test_totally_real_patch_has_zero_energy():
    patch = planar_leaf(2, (0, 2), DiscDomain(1.0), label="totally real")
    assert abs(omega_energy(patch)) < 1e-12


# ---------------------------------------------------------------- gap


def test_gap_zero_iff_complex(disc):
    rep = calibration_gap(disc)
    assert rep.is_complex
    assert abs(rep.gap) < 1e-6
    pert = calibration_gap(competitor_perturb(disc, 0.2))
    assert not pert.is_complex
    assert pert.gap > 1e-4


def test_gap_nonnegative_across_perturbations(disc, ball):
    rng = np.random.default_rng(7)
    for chart in (disc, ball):
        for k in range(4):
            v = rng.normal(size=4)
            rep = calibration_gap(competitor_perturb(chart, 0.1 * (k + 1) / 4, direction=v))
            assert rep.gap >= -1e-9


# ---------------------------------------------------------------- mixed volume


def test_ball_family_mixed_volume():
    target = 8 * math.pi**2 / 15
    mv = mixed_volume(ball_family())
    assert abs(mv - target) < 1e-4 * target


def test_mixed_volume_empty_interval():
    fam = FoliatedHypersurface(lambda l: None, (1.0, 1.0))
    assert mixed_volume(fam) == 0.0


def test_mixed_volume_of_perturbed_family_does_not_decrease():
    fam = ball_family()
    mv0 = mixed_volume(fam)
    mvp = mixed_volume(competitor_perturb(fam, 0.1))
    assert mvp >= mv0 - 1e-8
    assert mvp > mv0


def test_mixed_volume_names_failing_leaf():
    good = planar_leaf(2, (0, 1), DiscDomain(1.0))
    dead = LeafChart(
        2,
        good.domain,
        lambda U: np.zeros((U.shape[0], 4)),
        lambda U: np.zeros((U.shape[0], 4, 2)),
    )
    fam = FoliatedHypersurface(lambda l: dead if l > 0.5 else good, (0.0, 1.0))
    with pytest.raises(DegenerateLeafError, match="parameter l="):
        mixed_volume(fam)


# ---------------------------------------------------------------- perturbations


def test_perturbation_fixes_boundary(disc):
    pert = competitor_perturb(disc, 0.5)
    Ub, _, _ = disc.domain.boundary_nodes(2)
    assert np.max(np.abs(pert.map_fn(Ub) - disc.map_fn(Ub))) < 1e-12


def test_zero_amplitude_is_identity(disc):
    pert = competitor_perturb(disc, 0.0)
    U, _ = disc.domain.nodes(1)
    assert np.array_equal(pert.map_fn(U), disc.map_fn(U))
    assert np.array_equal(pert.jac_fn(U), disc.jac_fn(U))


def test_tangential_fold_raises_immersion_error(disc):
    with pytest.raises(DegenerateLeafError, match="folds"):
        competitor_perturb(disc, 2.0, direction=np.array([1.0, 0, 0, 0]))


def test_lifted_fold_remains_immersed(disc):
    chart = competitor_perturb(disc, 2.0, direction=np.array([1.0, 0, 0, 1.0]))
    assert leaf_volume(chart) > math.pi


# ---------------------------------------------------------------- stokes


def test_exterior_derivative_of_x1_dy1():
    d = exterior_derivative({(1,): "x1"}, 2)
    assert set(d) == {(0, 1)}
    assert d[(0, 1)] == 1


def test_exterior_derivative_antisymmetry():
    # d(y1 dx1) = -dx1^dy1 component
    d = exterior_derivative({(0,): "y1"}, 2)
    assert d[(0, 1)] == -1


def test_d_squared_is_zero():
    form = {(0,): "x1**2*y2", (3,): "x2*y1 - y2**3"}
    d1 = exterior_derivative(form, 2)
    d2 = exterior_derivative(d1, 2)
    assert d2 == {}


def test_stokes_disc_area_form(disc):
    rep = stokes_check(disc, {(1,): "x1"})
    assert abs(rep.interior - math.pi) < 1e-9
    assert abs(rep.boundary - math.pi) < 1e-9
    assert rep.residual < 1e-6


def test_stokes_ball_volume_form(ball):
    rep = stokes_check(ball, {(1, 2, 3): "x1"})
    assert abs(rep.interior - math.pi**2 / 2) < 1e-9
    assert rep.residual < 1e-6


def test_stokes_zero_form(disc):
    rep = stokes_check(disc, {})
    assert rep.interior == 0.0 and rep.boundary == 0.0 and rep.residual == 0.0


def test_stokes_random_polynomial_forms(disc, ball):
    for s in range(10):
        rep1 = stokes_check(disc, random_polynomial_form(2, degree=3, arity=1, seed=s))
        assert rep1.residual < 1e-5
        assert rep1.observed_order >= 2 or rep1.residual < 1e-10
        rep3 = stokes_check(ball, random_polynomial_form(2, degree=3, arity=3, seed=100 + s))
        assert rep3.residual < 1e-5
        assert rep3.observed_order >= 2 or rep3.residual < 1e-10


def test_stokes_observed_order_on_transcendental_form():
    coarse = planar_leaf(2, (0, 1), DiscDomain(1.0, base_radial=3, base_angular=6))
    rep = stokes_check(coarse, {(0,): "sin(3*x1)*y1", (1,): "cos(2*y1)*x1"}, max_level=4)
    assert rep.observed_order >= 2
    assert rep.residual < 1e-6


def test_stokes_rejects_wrong_arity(ball):
    with pytest.raises(ValueError, match="form"):
        stokes_check(ball, {(1,): "x1"})
