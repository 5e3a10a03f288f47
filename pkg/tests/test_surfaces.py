"""Surface models: residuals, gradients, tangency defect, complex-point search."""

import numpy as np
import pytest

from plateaulab.surfaces import (
    BUILTIN_SURFACES,
    DegenerateTangentError,
    NonIsolatedComplexPointsWarning,
    OffSurfaceError,
    SurfaceModel,
    cr_defect,
    find_complex_points,
    _junction_step,
    _quartic_well,
    _upper_piece,
)

# frozen tangency tables for the builtin surfaces: (point, )
ELLIPTIC_SPHERE_POINTS = [
    np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
    np.array([0.0, 0.0, 0.0, 0.0, -1.0, 0.0]),
]
HORNED_SPHERE_POINTS = [
    np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
    np.array([0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    np.array([0.0, -1.0, 0.0, 0.0, -1.0, 0.0]),
    np.array([0.0, 1.0, 0.0, 0.0, -1.0, 0.0]),
]
TORUS_POINTS = [
    np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
    np.array([0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    np.array([0.0, 0.0, 0.0, 0.0, -1.0, 0.0]),
    np.array([0.0, 0.0, 0.0, 0.0, -2.0, 0.0]),
]
KNOWN_POINTS = {
    "elliptic_sphere": ELLIPTIC_SPHERE_POINTS,
    "horned_sphere": HORNED_SPHERE_POINTS,
    "torus": TORUS_POINTS,
}


def random_box_points(S, rng, count):
    lo, hi = S.box[:, 0], S.box[:, 1]
    return lo + (hi - lo) * rng.random((count, S.dim))


def test_builtin_metadata():
    es = SurfaceModel.builtin("elliptic_sphere")
    hs = SurfaceModel.builtin("horned_sphere")
    tor = SurfaceModel.builtin("torus")
    assert (es.chi, hs.chi, tor.chi) == (2, 2, 0)
    assert es.level_range == (-1.0, 1.0)
    assert hs.level_range == (-1.0, 1.0)
    assert tor.level_range == (-2.0, 1.0)
    assert es.n == 3 and es.m == 2 and es.level_index == 4
    with pytest.raises(ValueError):
        SurfaceModel.builtin("nope")


@pytest.mark.parametrize("name", BUILTIN_SURFACES)
def test_known_points_lie_on_surface(name):
    S = SurfaceModel.builtin(name)
    for p in KNOWN_POINTS[name]:
        assert S.max_residual(p) < 1e-12


def test_smooth_step_profile():
    t = np.linspace(-0.2, 0.2, 401)
    val, der = _junction_step(t, 0.0, 0.05)
    assert np.all(val[t <= -0.025] == 0.0)
    assert np.all(val[t >= 0.025] == 1.0)
    assert np.all(np.diff(val) >= -1e-15)
    # derivative against central differences inside the band
    h = 1e-7
    inner = np.linspace(-0.02, 0.02, 41)
    vp, _ = _junction_step(inner + h, 0.0, 0.05)
    vm, _ = _junction_step(inner - h, 0.0, 0.05)
    _, d = _junction_step(inner, 0.0, 0.05)
    assert np.allclose(d, (vp - vm) / (2 * h), rtol=1e-5, atol=1e-6)


def test_horned_sphere_matches_branches_outside_bands():
    S = SurfaceModel.builtin("horned_sphere")
    rng = np.random.default_rng(3)
    u = rng.normal(size=(40, 4)) * 0.5
    # upper region: exactly the spherical-cap branch
    t = 0.6 * np.ones(40)
    X = np.concatenate([u, t[:, None], np.zeros((40, 1))], axis=1)
    assert np.allclose(S.residuals(X)[:, 0], _upper_piece(u, t), rtol=0, atol=1e-14)
    # lower region: exactly the quartic graph branch
    t = -0.7 * np.ones(40)
    X = np.concatenate([u, t[:, None], np.zeros((40, 1))], axis=1)
    assert np.allclose(S.residuals(X)[:, 0], _quartic_well(u) - t, rtol=0, atol=1e-14)


def test_torus_matches_branches_outside_bands():
    S = SurfaceModel.builtin("torus")
    rng = np.random.default_rng(4)
    u = rng.normal(size=(30, 4)) * 0.5
    cases = [
        (0.6, lambda u, t: _upper_piece(u, t)),
        (-0.3, lambda u, t: _quartic_well(u) - t),
        (-0.7, lambda u, t: _quartic_well(u) + 1.0 + t),
        (-1.5, lambda u, t: _upper_piece(u, -1.0 - t)),
    ]
    for t0, branch in cases:
        t = t0 * np.ones(30)
        X = np.concatenate([u, t[:, None], np.zeros((30, 1))], axis=1)
        assert np.allclose(S.residuals(X)[:, 0], branch(u, t), rtol=0, atol=1e-14)


@pytest.mark.parametrize("name", BUILTIN_SURFACES)
def test_gradients_match_finite_differences(name):
    S = SurfaceModel.builtin(name)
    rng = np.random.default_rng(11)
    X = random_box_points(S, rng, 25)
    G = S.gradients(X)
    h = 1e-6
    for i in range(S.dim):
        e = np.zeros(S.dim)
        e[i] = h
        fd = (S.residuals(X + e) - S.residuals(X - e)) / (2 * h)
        assert np.allclose(G[:, :, i], fd, rtol=2e-5, atol=2e-7)


def test_single_point_shapes():
    S = SurfaceModel.builtin("horned_sphere")
    x = np.array([0.1, 0.2, 0.0, -0.1, 0.01, 0.0])
    assert S.residuals(x).shape == (2,)
    assert S.gradients(x).shape == (2, 6)


def test_projection_recovers_surface():
    S = SurfaceModel.builtin("horned_sphere")
    rng = np.random.default_rng(5)
    x0 = np.array([0.0, 0.9, 0.1, -0.2, 0.0, 0.0])
    x0 = S.project(x0, tol=1e-13)
    pert = x0 + 1e-3 * rng.normal(size=6)
    back = S.project(pert, tol=1e-13)
    assert S.max_residual(back) < 1e-12
    assert np.linalg.norm(back - x0) < 5e-3


def test_tangent_basis_properties():
    S = SurfaceModel.builtin("elliptic_sphere")
    x = S.project(np.array([0.3, 0.4, 0.5, -0.2, 0.6, 0.0]))
    B = S.tangent_basis(x)
    assert B.shape == (6, 4)
    assert np.allclose(B.T @ B, np.eye(4), atol=1e-12)
    assert np.max(np.abs(S.gradients(x) @ B)) < 1e-10


@pytest.mark.parametrize("name", BUILTIN_SURFACES)
def test_cr_defect_zero_at_known_points(name):
    S = SurfaceModel.builtin(name)
    for p in KNOWN_POINTS[name]:
        assert cr_defect(S, p) < 1e-10


def test_cr_defect_at_totally_real_point():
    # equator point of the sphere: J mixes two tangent directions into the
    # normal bundle, each contributing 1 to the squared Frobenius norm
    S = SurfaceModel.builtin("elliptic_sphere")
    x = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    assert abs(cr_defect(S, x) - np.sqrt(2.0)) < 1e-12


def test_cr_defect_validates_input():
    S = SurfaceModel.builtin("elliptic_sphere")
    with pytest.raises(OffSurfaceError):
        cr_defect(S, np.array([2.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
    sing = SurfaceModel.from_polynomials(
        ["x1*y1", "x2"], n=2, box=np.array([[-1, 1]] * 4)
    )
    with pytest.raises(DegenerateTangentError):
        cr_defect(sing, np.zeros(4))


def test_complex_curve_has_zero_defect_everywhere():
    # the graph of w = z1^2 is a complex curve: J-invariant tangents at all points
    S = SurfaceModel.graph("z1**2", n=2, box=np.array([[-1, 1]] * 4))
    rng = np.random.default_rng(9)
    for _ in range(12):
        x1, y1 = rng.normal(size=2) * 0.7
        z = complex(x1, y1) ** 2
        p = np.array([x1, y1, z.real, z.imag])
        assert S.max_residual(p) < 1e-12
        assert cr_defect(S, p) < 1e-10


def test_from_polynomials_matches_builtin_sphere():
    S1 = SurfaceModel.builtin("elliptic_sphere")
    S2 = SurfaceModel.from_polynomials(
        ["x1**2 + y1**2 + x2**2 + y2**2 + x3**2 + y3**2 - 1", "y3"],
        n=3,
        box=S1.box,
    )
    rng = np.random.default_rng(13)
    X = random_box_points(S1, rng, 20)
    assert np.allclose(S1.residuals(X), S2.residuals(X), atol=1e-12)
    assert np.allclose(S1.gradients(X), S2.gradients(X), atol=1e-12)


def test_find_complex_points_elliptic_sphere():
    S = SurfaceModel.builtin("elliptic_sphere")
    pts = find_complex_points(S)
    assert len(pts) == 2
    for got, want in zip(pts, ELLIPTIC_SPHERE_POINTS):
        assert np.linalg.norm(got - want) < 1e-8


def test_find_complex_points_horned_sphere():
    S = SurfaceModel.builtin("horned_sphere")
    pts = find_complex_points(S)
    assert len(pts) == 4
    for got, want in zip(pts, HORNED_SPHERE_POINTS):
        assert np.linalg.norm(got - want) < 1e-6


def test_find_complex_points_torus():
    S = SurfaceModel.builtin("torus")
    pts = find_complex_points(S)
    assert len(pts) == 4
    for got, want in zip(pts, TORUS_POINTS):
        assert np.linalg.norm(got - want) < 1e-6


def test_nonisolated_tangency_set_is_flagged():
    # w = (|z1|^2 - 1)^2 carries an isolated tangency at z1 = 0 and a whole
    # circle of tangencies at |z1| = 1
    S = SurfaceModel.graph(
        "(z1*conj(z1) - 1)**2", n=2, box=np.array([[-1.4, 1.4]] * 2 + [[-0.2, 1.2], [-0.2, 0.2]])
    )
    with pytest.warns(NonIsolatedComplexPointsWarning):
        pts = find_complex_points(S, grid_density=7, residual_filter=0.4)
    assert any(np.linalg.norm(p - np.array([0.0, 0.0, 1.0, 0.0])) < 1e-6 for p in pts)
