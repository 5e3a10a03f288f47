"""Real 2-codimensional surface models in C^n and complex-tangency detection.

A surface is stored implicitly: m real equations on R^(2n) (interleaved
coordinates x_1, y_1, ..., x_n, y_n) with analytic gradients, plus a
bounding box, the distinguished level coordinate x_n, and optional
topological metadata.

Builtin models
--------------
elliptic_sphere   unit sphere of C^2 x R inside {y_3 = 0}; two complex points
                  at the poles, both elliptic.
horned_sphere     a sphere-like surface in {y_3 = 0} glued from a spherical
                  upper piece and a quartic graph, carrying three elliptic
                  complex points and one 1-hyperbolic one at the junction.
torus             the upper horned-sphere piece truncated and doubled by the
                  reflection through {x_3 = -1/2}; two elliptic and two
                  1-hyperbolic complex points.

The two-piece models are blended with a C-infinity bump step of width
`smoothing_width` in x_3 around each junction.  The blend leaves the
junction complex point and its second-order jet unchanged, and the defining
residuals coincide exactly with the raw piecewise formulas outside the
bands.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .multivector import complex_structure_matrix

__all__ = [
    "SurfaceModel",
    "OffSurfaceError",
    "DegenerateTangentError",
    "NonIsolatedComplexPointsWarning",
    "cr_defect",
    "find_complex_points",
    "BUILTIN_SURFACES",
]

BUILTIN_SURFACES = ("elliptic_sphere", "horned_sphere", "torus")


class OffSurfaceError(ValueError):
    """A query point does not satisfy the surface equations."""


class DegenerateTangentError(RuntimeError):
    """The implicit equations lose rank, so no tangent space is defined."""


class NonIsolatedComplexPointsWarning(UserWarning):
    """A cluster of complex-tangency minima looks like a positive-dimensional set."""


# ----------------------------------------------------------------------------
# C-infinity step used for junction blending
# ----------------------------------------------------------------------------


def _bump_step(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Smooth step on [-1, 1] and its derivative: 0 below, 1 above."""
    s = np.asarray(s, dtype=float)
    val = np.where(s >= 1.0, 1.0, 0.0)
    der = np.zeros_like(s)
    mid = (s > -1.0) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        with np.errstate(over="ignore", under="ignore"):
            a = np.exp(-1.0 / (1.0 + sm))
            b = np.exp(-1.0 / (1.0 - sm))
            tot = a + b
            val_mid = a / tot
            der_mid = (a * b / tot**2) * (1.0 / (1.0 + sm) ** 2 + 1.0 / (1.0 - sm) ** 2)
        val = val.astype(float)
        val[mid] = val_mid
        der[mid] = der_mid
    return val, der


def _junction_step(t: np.ndarray, center: float, width: float):
    """Step up through a band of total width `width` centered at `center`."""
    if width <= 0.0:
        return np.where(np.asarray(t, dtype=float) > center, 1.0, 0.0), np.zeros_like(
            np.asarray(t, dtype=float)
        )
    val, der = _bump_step((np.asarray(t, dtype=float) - center) / (width / 2.0))
    return val, der * (2.0 / width)


# ----------------------------------------------------------------------------
# builtin defining functions (vectorized over leading axes)
# ----------------------------------------------------------------------------


def _quartic_well(u: np.ndarray) -> np.ndarray:
    x1, y1, x2, y2 = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
    return (
        x1**4 + y1**4 + x2**4 + y2**4 + 4.0 * x1**2 - 2.0 * y1**2 + x2**2 + y2**2
    )


def _quartic_well_grad(u: np.ndarray) -> np.ndarray:
    x1, y1, x2, y2 = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
    return np.stack(
        [
            4.0 * x1**3 + 8.0 * x1,
            4.0 * y1**3 - 4.0 * y1,
            4.0 * x2**3 + 2.0 * x2,
            4.0 * y2**3 + 2.0 * y2,
        ],
        axis=-1,
    )


def _upper_piece(u: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Spherical upper branch: t(|u|^2 + t^2 - 1) + (1 - t) P(u)."""
    r2 = np.sum(u * u, axis=-1)
    return t * (r2 + t * t - 1.0) + (1.0 - t) * _quartic_well(u)


def _upper_piece_grad(u: np.ndarray, t: np.ndarray):
    r2 = np.sum(u * u, axis=-1)
    du = 2.0 * t[..., None] * u + (1.0 - t)[..., None] * _quartic_well_grad(u)
    dt = r2 + 3.0 * t * t - 1.0 - _quartic_well(u)
    return du, dt


def _horned_sphere_residual(X: np.ndarray, delta: float) -> np.ndarray:
    u, t = X[..., :4], X[..., 4]
    psi, _ = _junction_step(t, 0.0, delta)
    return psi * _upper_piece(u, t) + (1.0 - psi) * (_quartic_well(u) - t)


def _horned_sphere_grad(X: np.ndarray, delta: float) -> np.ndarray:
    u, t = X[..., :4], X[..., 4]
    psi, dpsi = _junction_step(t, 0.0, delta)
    A = _upper_piece(u, t)
    Au, At = _upper_piece_grad(u, t)
    B = _quartic_well(u) - t
    Pu = _quartic_well_grad(u)
    g = np.zeros(X.shape)
    g[..., :4] = psi[..., None] * Au + (1.0 - psi)[..., None] * Pu
    g[..., 4] = dpsi * (A - B) + psi * At + (1.0 - psi) * (-1.0)
    return g


def _torus_weights(t: np.ndarray, delta: float):
    p0, d0 = _junction_step(t, 0.0, delta)
    pm, dm = _junction_step(t, -0.5, delta)
    pq, dq = _junction_step(t, -1.0, delta)
    wA = p0
    wB = (1.0 - p0) * pm
    wC = (1.0 - p0) * (1.0 - pm) * pq
    wD = (1.0 - p0) * (1.0 - pm) * (1.0 - pq)
    dA = d0
    dB = -d0 * pm + (1.0 - p0) * dm
    dC = -d0 * (1.0 - pm) * pq - (1.0 - p0) * dm * pq + (1.0 - p0) * (1.0 - pm) * dq
    dD = -d0 * (1.0 - pm) * (1.0 - pq) - (1.0 - p0) * dm * (1.0 - pq) - (1.0 - p0) * (
        1.0 - pm
    ) * dq
    return (wA, wB, wC, wD), (dA, dB, dC, dD)


def _torus_residual(X: np.ndarray, delta: float) -> np.ndarray:
    u, t = X[..., :4], X[..., 4]
    (wA, wB, wC, wD), _ = _torus_weights(t, delta)
    P = _quartic_well(u)
    return (
        wA * _upper_piece(u, t)
        + wB * (P - t)
        + wC * (P + 1.0 + t)
        + wD * _upper_piece(u, -1.0 - t)
    )


def _torus_grad(X: np.ndarray, delta: float) -> np.ndarray:
    u, t = X[..., :4], X[..., 4]
    (wA, wB, wC, wD), (dA, dB, dC, dD) = _torus_weights(t, delta)
    P = _quartic_well(u)
    Pu = _quartic_well_grad(u)
    A = _upper_piece(u, t)
    Au, At = _upper_piece_grad(u, t)
    tm = -1.0 - t
    D = _upper_piece(u, tm)
    Du, Dt_at = _upper_piece_grad(u, tm)
    B = P - t
    C = P + 1.0 + t
    g = np.zeros(X.shape)
    g[..., :4] = (
        wA[..., None] * Au
        + (wB + wC)[..., None] * Pu
        + wD[..., None] * Du
    )
    g[..., 4] = (
        dA * A + wA * At
        + dB * B + wB * (-1.0)
        + dC * C + wC * 1.0
        + dD * D + wD * (-Dt_at)
    )
    return g


def _elliptic_sphere_residual(X: np.ndarray) -> np.ndarray:
    return np.sum(X * X, axis=-1) - 1.0


def _elliptic_sphere_grad(X: np.ndarray) -> np.ndarray:
    return 2.0 * X


# ----------------------------------------------------------------------------
# the model class
# ----------------------------------------------------------------------------


@dataclass
class SurfaceModel:
    """Implicit 2-codimensional surface in C^n with vectorized residuals.

    funcs(X) takes arrays of shape (..., 2n) and returns (..., m) residual
    values; grads(X) returns (..., m, 2n).  The distinguished level
    coordinate (for slicing and orbit work) is x_n, index 2n - 2.
    """

    n: int
    funcs: Callable[[np.ndarray], np.ndarray]
    grads: Callable[[np.ndarray], np.ndarray]
    m: int
    box: np.ndarray
    name: str = "surface"
    level_range: Optional[Tuple[float, float]] = None
    chi: Optional[int] = None
    smoothing_width: float = 0.0
    builtin_id: Optional[str] = None

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def level_index(self) -> int:
        return 2 * self.n - 2

    # ---- evaluation ----

    def residuals(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = self.funcs(X)
        return np.asarray(out, dtype=float)

    def gradients(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.asarray(self.grads(X), dtype=float)

    def max_residual(self, x: np.ndarray) -> float:
        return float(np.max(np.abs(self.residuals(np.asarray(x, dtype=float)))))

    def on_surface(self, x: np.ndarray, tol: float = 1e-8) -> bool:
        return self.max_residual(x) <= tol

    def in_level_range(self, level: float, slack: float = 1e-9) -> bool:
        if self.level_range is None:
            return True
        lo, hi = self.level_range
        return lo - slack <= level <= hi + slack

    # ---- geometry ----

    def project(self, x: np.ndarray, tol: float = 1e-12, max_iter: int = 60) -> np.ndarray:
        """Gauss-Newton projection of a nearby point onto the surface."""
        x = np.array(x, dtype=float)
        for _ in range(max_iter):
            F = self.residuals(x)
            if np.max(np.abs(F)) < tol:
                return x
            G = self.gradients(x)
            M = G @ G.T
            try:
                lam = np.linalg.solve(M, F)
            except np.linalg.LinAlgError as exc:
                raise DegenerateTangentError("projection hit a rank-deficient point") from exc
            x = x - G.T @ lam
        if np.max(np.abs(self.residuals(x))) > 100 * tol:
            raise RuntimeError("surface projection did not converge")
        return x

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        """Orthonormal basis (2n, 2n - m) of the tangent space at x."""
        G = self.gradients(np.asarray(x, dtype=float))
        s = np.linalg.svd(G, compute_uv=False)
        if s[-1] <= 1e-10 * max(1.0, s[0]):
            raise DegenerateTangentError("implicit equations lose rank at this point")
        _, _, Vt = np.linalg.svd(G)
        return Vt[self.m :].T

    def tangent_projectors(self, X: np.ndarray):
        """Batched tangent projectors P with a validity mask.

        X: (N, 2n) -> (P: (N, 2n, 2n), ok: (N,) bool).  P = I - G^T (G G^T)^-1 G
        is smooth in x wherever the Jacobian G keeps full rank.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        G = self.gradients(X)
        M = G @ np.swapaxes(G, -1, -2)
        det = np.linalg.det(M)
        scale = np.maximum(np.einsum("nii->n", M) / self.m, 1e-30) ** self.m
        ok = det > 1e-12 * scale
        Minv = np.full_like(M, np.nan)
        if np.any(ok):
            Minv[ok] = np.linalg.inv(M[ok])
        P = np.eye(self.dim)[None] - np.einsum("nim,nmk,nkj->nij", np.swapaxes(G, -1, -2), Minv, G)
        return P, ok

    # ---- constructors ----

    @classmethod
    def builtin(cls, name: str, smoothing_width: float = 0.05) -> "SurfaceModel":
        if name not in BUILTIN_SURFACES:
            raise ValueError(f"unknown builtin surface {name!r}; have {BUILTIN_SURFACES}")
        delta = float(smoothing_width)
        if name == "elliptic_sphere":
            def funcs(X):
                return np.stack([_elliptic_sphere_residual(X), X[..., 5]], axis=-1)

            def grads(X):
                g2 = np.zeros(X.shape[:-1] + (6,))
                g2[..., 5] = 1.0
                return np.stack([_elliptic_sphere_grad(X), g2], axis=-2)

            box = np.array([[-1.1, 1.1]] * 5 + [[0.0, 0.0]])
            return cls(
                n=3, funcs=funcs, grads=grads, m=2, box=box, name=name,
                level_range=(-1.0, 1.0), chi=2, smoothing_width=0.0, builtin_id=name,
            )
        if name == "horned_sphere":
            def funcs(X):
                return np.stack([_horned_sphere_residual(X, delta), X[..., 5]], axis=-1)

            def grads(X):
                g2 = np.zeros(X.shape[:-1] + (6,))
                g2[..., 5] = 1.0
                return np.stack([_horned_sphere_grad(X, delta), g2], axis=-2)

            box = np.array(
                [[-0.9, 0.9], [-1.6, 1.6], [-1.1, 1.1], [-1.1, 1.1], [-1.0, 1.0], [0.0, 0.0]]
            )
            return cls(
                n=3, funcs=funcs, grads=grads, m=2, box=box, name=name,
                level_range=(-1.0, 1.0), chi=2, smoothing_width=delta, builtin_id=name,
            )
        # torus
        def funcs(X):
            return np.stack([_torus_residual(X, delta), X[..., 5]], axis=-1)

        def grads(X):
            g2 = np.zeros(X.shape[:-1] + (6,))
            g2[..., 5] = 1.0
            return np.stack([_torus_grad(X, delta), g2], axis=-2)

        box = np.array(
            [[-0.9, 0.9], [-1.6, 1.6], [-1.1, 1.1], [-1.1, 1.1], [-2.0, 1.0], [0.0, 0.0]]
        )
        return cls(
            n=3, funcs=funcs, grads=grads, m=2, box=box, name=name,
            level_range=(-2.0, 1.0), chi=0, smoothing_width=delta, builtin_id=name,
        )

    @classmethod
    def from_polynomials(
        cls,
        exprs: Sequence[str],
        n: int,
        box: np.ndarray,
        name: str = "polynomial-surface",
        level_range: Optional[Tuple[float, float]] = None,
        chi: Optional[int] = None,
    ) -> "SurfaceModel":
        """Surface cut out by polynomial expressions in x_1, y_1, ..., x_n, y_n."""
        import sympy as sp

        syms = []
        for j in range(1, n + 1):
            syms.append(sp.Symbol(f"x{j}", real=True))
            syms.append(sp.Symbol(f"y{j}", real=True))
        local = {s.name: s for s in syms}
        parsed = [sp.sympify(text, locals=local) for text in exprs]
        grads_sym = [[sp.diff(ex, s) for s in syms] for ex in parsed]
        f_lams = [sp.lambdify(syms, ex, "numpy") for ex in parsed]
        g_lams = [[sp.lambdify(syms, d, "numpy") for d in row] for row in grads_sym]
        m = len(parsed)
        dim = 2 * n

        def funcs(X):
            cols = [X[..., i] for i in range(dim)]
            vals = [np.broadcast_to(np.asarray(f(*cols), dtype=float), X.shape[:-1]) for f in f_lams]
            return np.stack(vals, axis=-1)

        def grads(X):
            cols = [X[..., i] for i in range(dim)]
            rows = []
            for row in g_lams:
                entries = [
                    np.broadcast_to(np.asarray(g(*cols), dtype=float), X.shape[:-1])
                    for g in row
                ]
                rows.append(np.stack(entries, axis=-1))
            return np.stack(rows, axis=-2)

        return cls(
            n=n, funcs=funcs, grads=grads, m=m, box=np.asarray(box, dtype=float),
            name=name, level_range=level_range, chi=chi,
        )

    @classmethod
    def graph(
        cls,
        phi: str,
        n: int,
        box: np.ndarray,
        name: str = "graph-surface",
        level_range: Optional[Tuple[float, float]] = None,
        chi: Optional[int] = None,
    ) -> "SurfaceModel":
        """Graph w = phi(z) with w = z_n, phi in z_1..z_{n-1} and their conjugates.

        phi may use z1, ..., conj(z1), ... or the real symbols x1, y1, ...;
        it is split into real and imaginary parts and handled implicitly.
        """
        import sympy as sp

        xs, ys, zs = [], [], {}
        for j in range(1, n + 1):
            xs.append(sp.Symbol(f"x{j}", real=True))
            ys.append(sp.Symbol(f"y{j}", real=True))
        local = {}
        for j in range(1, n):
            zj = xs[j - 1] + sp.I * ys[j - 1]
            local[f"z{j}"] = zj
        for j in range(1, n + 1):
            local[f"x{j}"] = xs[j - 1]
            local[f"y{j}"] = ys[j - 1]
        local["conj"] = sp.conjugate
        local["I"] = sp.I
        expr = sp.expand(sp.sympify(phi, locals=local))
        re_part = sp.simplify(sp.re(expr))
        im_part = sp.simplify(sp.im(expr))
        eq1 = xs[n - 1] - re_part
        eq2 = ys[n - 1] - im_part
        return cls.from_polynomials(
            [str(eq1), str(eq2)], n, box, name=name, level_range=level_range, chi=chi
        )


# ----------------------------------------------------------------------------
# complex-tangency defect and point search
# ----------------------------------------------------------------------------


def _defect_from_projector(P: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Frobenius norm of (I - P) J P for a batch of projectors."""
    JP = J[None] @ P
    M = JP - P @ JP
    return np.sqrt(np.sum(M * M, axis=(-2, -1)))


def cr_defect(S: SurfaceModel, x: np.ndarray, tol: float = 1e-8) -> float:
    """Distance of the tangent space at x from J-invariance.

    Frobenius norm of the part of J(T_x S) orthogonal to T_x S; zero exactly
    at complex tangencies.  The point must satisfy the surface equations.
    """
    x = np.asarray(x, dtype=float)
    resid = S.max_residual(x)
    if resid > tol:
        raise OffSurfaceError(f"point has surface residual {resid:.3e} > {tol:.1e}")
    P, ok = S.tangent_projectors(x[None])
    if not ok[0]:
        raise DegenerateTangentError("implicit equations lose rank at this point")
    J = complex_structure_matrix(S.n)
    return float(_defect_from_projector(P, J)[0])


def _defect_batch(S: SurfaceModel, X: np.ndarray):
    P, ok = S.tangent_projectors(X)
    J = complex_structure_matrix(S.n)
    vals = np.full(X.shape[0], np.inf)
    if np.any(ok):
        vals[ok] = _defect_from_projector(P[ok], J)
    return vals, ok


def _grid_points(S: SurfaceModel, grid_density: int) -> np.ndarray:
    axes = []
    for i in range(S.dim):
        lo, hi = S.box[i]
        if hi - lo < 1e-15:
            axes.append(np.array([lo]))
        else:
            axes.append(np.linspace(lo, hi, grid_density))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _fd_smallest_singular_value(fun: Callable, x: np.ndarray, h: float = 1e-6) -> float:
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2.0 * h))
    Jmat = np.stack(cols, axis=-1)
    return float(np.linalg.svd(Jmat, compute_uv=False)[-1])


def find_complex_points(
    S: SurfaceModel,
    grid_density: int = 9,
    cluster_radius: float = 1e-4,
    defect_tol: float = 1e-6,
    residual_filter: float = 0.25,
    top_seeds: int = 64,
    seed_separation: float = 0.15,
) -> List[np.ndarray]:
    """Locate the isolated complex tangencies of a surface.

    Grid seeding inside the bounding box, a residual filter, spatial
    thinning of the lowest-defect candidates so every basin keeps a seed,
    then local Levenberg-Marquardt refinement of the smooth residual
    [surface equations; entries of (I - P) J P].  Results with defect below
    defect_tol are cluster-merged at cluster_radius; a positive-dimensional
    set of tangencies (detected through a rank-deficient refinement system
    or an oversized cluster) is reported through
    NonIsolatedComplexPointsWarning instead of being silently averaged.

    Deterministic for a fixed grid.  Output is sorted by descending level
    coordinate, then lexicographically.
    """
    from scipy.optimize import least_squares

    grid = _grid_points(S, grid_density)
    res = S.residuals(grid)
    near = np.max(np.abs(res), axis=-1) < residual_filter
    cand = grid[near]
    if cand.shape[0] == 0:
        return []
    defects, ok = _defect_batch(S, cand)

    # primary seeds: local minima of the sampled defect (one per basin),
    # deduplicated at seed_separation; thinned global order fills the rest.
    # The neighbourhood radius must exceed the coarsest grid step, otherwise
    # isolated candidates count as minima of their own.
    from scipy.spatial import cKDTree

    widths = S.box[:, 1] - S.box[:, 0]
    max_step = float(np.max(widths)) / max(grid_density - 1, 1)
    radius = max(1.2 * max_step, 1.5 * seed_separation)
    finite = np.isfinite(defects)
    tree = cKDTree(cand)
    locmin_idx = []
    for i in np.nonzero(finite)[0]:
        nb = tree.query_ball_point(cand[i], radius)
        if defects[i] <= np.min(defects[nb]):
            locmin_idx.append(i)
    locmin_idx.sort(key=lambda i: defects[i])

    seeds: List[np.ndarray] = []
    kept = np.empty((0, S.dim))

    def try_add(p):
        nonlocal kept
        if kept.shape[0] == 0 or np.min(np.linalg.norm(kept - p, axis=1)) >= seed_separation:
            seeds.append(p)
            kept = np.vstack([kept, p])

    for idx in locmin_idx:
        try_add(cand[idx])
        if len(seeds) >= top_seeds:
            break
    if len(seeds) < top_seeds:
        order = np.argsort(defects, kind="stable")
        for idx in order[:20000]:
            if not np.isfinite(defects[idx]):
                break
            try_add(cand[idx])
            if len(seeds) >= top_seeds:
                break

    J = complex_structure_matrix(S.n)
    surface_weight = 4.0

    def resvec(x):
        F = S.residuals(x)
        P, ok1 = S.tangent_projectors(x[None])
        if not ok1[0]:
            return np.concatenate([surface_weight * F, np.full(S.dim * S.dim, 1e3)])
        JP = J @ P[0]
        M = JP - P[0] @ JP
        return np.concatenate([surface_weight * np.atleast_1d(F), M.ravel()])

    found = []
    for seed in seeds:
        try:
            sol = least_squares(
                resvec, seed, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=600
            )
        except Exception:
            continue
        x = sol.x
        try:
            x = S.project(x, tol=1e-13)
            d = cr_defect(S, x, tol=1e-7)
        except (OffSurfaceError, DegenerateTangentError, RuntimeError):
            continue
        if d < defect_tol and np.all(x >= S.box[:, 0] - 0.2) and np.all(x <= S.box[:, 1] + 0.2):
            found.append(x)
    if not found:
        return []

    pts = np.array(found)
    # chain-link clustering at cluster_radius
    m = pts.shape[0]
    parent = list(range(m))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if np.linalg.norm(pts[i] - pts[j]) <= cluster_radius:
                ri, rj = root(i), root(j)
                if ri != rj:
                    parent[ri] = rj
    groups = {}
    for i in range(m):
        groups.setdefault(root(i), []).append(i)

    out = []
    for idxs in groups.values():
        cluster = pts[idxs]
        diam = 0.0
        if len(idxs) > 1:
            diff = cluster[:, None, :] - cluster[None, :, :]
            diam = float(np.max(np.linalg.norm(diff, axis=-1)))
        if diam > max(10.0 * cluster_radius, 1e-2):
            warnings.warn(
                f"complex-tangency cluster of diameter {diam:.3g} looks non-isolated "
                f"({len(idxs)} merged minima); returning its representative",
                NonIsolatedComplexPointsWarning,
            )
        rep = cluster[np.argmin([cr_defect(S, c, tol=1e-6) for c in cluster])]
        sigma_min = _fd_smallest_singular_value(resvec, rep)
        if sigma_min < 1e-3:
            warnings.warn(
                f"tangency at level {rep[S.level_index]:+.4f} sits on a rank-deficient "
                f"zero set (sigma_min {sigma_min:.2e}); it is likely not isolated",
                NonIsolatedComplexPointsWarning,
            )
        out.append(rep)
    out.sort(key=lambda q: (-q[S.level_index],) + tuple(np.round(q, 9)))
    return out
