"""Quadratic normal forms and classification of complex tangencies.

At an isolated complex tangency the surface is a graph over its J-invariant
tangent plane: after a unitary change of ambient coordinates,

    w = Q(z, conj z) + O(|z|^3),    Q = z^T A z + conj(z)^T B z + conj(z)^T C conj(z),

with z in C^(n-1), w in C, A and C symmetric.  The classification pipeline:

* ``quadratic_expansion`` recovers A, B, C numerically from stencil samples
  (Newton-solved graph values, complex least squares with a cubic-inclusive
  basis, Richardson extrapolation in the stencil radius).
* ``flat_normal_form`` finds the phase rotation of w making the mixed part
  Hermitian and the holomorphic shift making Q real-valued; tangencies
  without such a phase are *non-flat*.
* ``special_normal_form`` reduces a real quadratic with positive-definite
  Hermitian part to ``|z|^2 + sum lambda_j Re(z_j^2)``, ``lambda_j >= 0``,
  via congruence and a Takagi factorization.
* ``classify_point`` labels the tangency from the invariants
  (special elliptic, special k-hyperbolic, parabolic, or the non-special /
  non-flat fallbacks) and computes its topological index, the degree of the
  anti-holomorphic gradient map; the indices sum to the Euler characteristic
  for a closed surface.

The phase of the chart normal is arbitrary; every quantity reported here is
invariant under it (the flat phase absorbs it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .surfaces import SurfaceModel, cr_defect, find_complex_points

__all__ = [
    "ChartExpansion",
    "FlatForm",
    "SpecialForm",
    "ComplexPointRecord",
    "NotFlatError",
    "NotSpecialError",
    "ExpansionError",
    "quadratic_expansion",
    "flat_normal_form",
    "special_normal_form",
    "takagi_decomposition",
    "tangency_index",
    "classify_point",
    "classify_surface",
    "euler_signed_count",
]


class NotFlatError(ValueError):
    """No phase rotation makes the quadratic part real-valued."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NotSpecialError(ValueError):
    """The Hermitian part of the quadratic is not positive definite."""


class ExpansionError(RuntimeError):
    """The stencil fit did not behave like a tangency expansion."""


# ----------------------------------------------------------------------------
# real/complex coordinate plumbing
# ----------------------------------------------------------------------------


def _complexify(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def _realify(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def _chart_unitary(S: SurfaceModel, p: np.ndarray) -> np.ndarray:
    """Unitary (n, n) whose first n-1 columns span the complex tangent."""
    B = S.tangent_basis(p)  # (2n, 2n-2) real orthonormal
    cols = _complexify(B.T)  # (2n-2, n) complex spanning set of the tangent
    U, s, _ = np.linalg.svd(cols.T, full_matrices=True)
    rank = int(np.sum(s > 1e-8))
    if rank != S.n - 1:
        raise ExpansionError(
            f"tangent space is not J-invariant here (complex rank {rank})"
        )
    return U


# ----------------------------------------------------------------------------
# stencil expansion
# ----------------------------------------------------------------------------


@dataclass
class ChartExpansion:
    """Quadratic jet of the graph function in a unitary chart at a tangency."""

    point: np.ndarray
    unitary: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    expansion_residual: float
    fit_residual: float


def _monomial_exponents(m: int, max_degree: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """All exponent pairs (alpha, beta) for z^alpha conj(z)^beta, total degree <= max_degree."""

    def exact(total, slots):
        if slots == 0:
            if total == 0:
                yield ()
            return
        for first in range(total + 1):
            for rest in exact(total - first, slots - 1):
                yield (first,) + rest

    out = []
    for deg in range(max_degree + 1):
        for combined in exact(deg, 2 * m):
            out.append((combined[:m], combined[m:]))
    return out


def _graph_values(
    S: SurfaceModel, p: np.ndarray, U: np.ndarray, zs: np.ndarray, tol: float = 1e-15
) -> np.ndarray:
    """Solve the surface equations for the graph values w(z') on a batch of z'."""
    n = S.n
    pc = _complexify(p)
    nu = U[:, -1]
    r1 = _realify(nu[None])[0]
    r2 = _realify((1j * nu)[None])[0]
    M = zs.shape[0]
    w = np.zeros(M, dtype=complex)
    # ambient points: pc + U[:, :n-1] @ z' + nu * w
    tangent_part = pc[None, :] + zs @ U[:, : n - 1].T
    for _ in range(60):
        Z = tangent_part + w[:, None] * nu[None, :]
        X = _realify(Z)
        F = S.residuals(X)
        if np.max(np.abs(F)) < tol:
            break
        G = S.gradients(X)
        J11 = G @ r1
        J12 = G @ r2
        Jb = np.stack([J11, J12], axis=-1)  # (M, m, 2)
        try:
            step = np.linalg.solve(Jb, F[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise ExpansionError("graph solve hit a singular Jacobian") from exc
        w = w - (step[:, 0] + 1j * step[:, 1])
    else:
        raise ExpansionError("graph values did not converge on the stencil")
    return w


def _fit_quadratic(
    S: SurfaceModel, p: np.ndarray, U: np.ndarray, rho: float, dirs: np.ndarray
):
    """Complex least-squares jet fit at one stencil radius; returns coefficient dict."""
    m = S.n - 1
    zs = rho * dirs
    w = _graph_values(S, p, U, zs)
    expl = _monomial_exponents(m, 3)
    zeta = dirs  # unit-scale coordinates for conditioning
    cols = []
    for alpha, beta in expl:
        col = np.ones(len(zeta), dtype=complex)
        for j in range(m):
            if alpha[j]:
                col = col * zeta[:, j] ** alpha[j]
            if beta[j]:
                col = col * np.conj(zeta[:, j]) ** beta[j]
        cols.append(col)
    design = np.stack(cols, axis=-1)
    coef, res, _, _ = np.linalg.lstsq(design, w, rcond=None)
    fitted = design @ coef
    fit_residual = float(np.max(np.abs(fitted - w)))
    out = {}
    for (alpha, beta), c in zip(expl, coef):
        deg = sum(alpha) + sum(beta)
        out[(alpha, beta)] = c / rho**deg
    return out, fit_residual


def quadratic_expansion(
    S: SurfaceModel,
    p: np.ndarray,
    rho: float = 1e-3,
    samples: int = 80,
    seed: int = 0,
) -> ChartExpansion:
    """Quadratic coefficient matrices A, B, C of the graph at a tangency.

    Samples the graph on random stencil spheres of radius rho and rho/2,
    fits a cubic-inclusive monomial basis by complex least squares, and
    Richardson-combines the two radii (factor 4) to cancel the leading
    quartic contamination of the quadratic coefficients.
    """
    p = np.asarray(p, dtype=float)
    U = _chart_unitary(S, p)
    m = S.n - 1
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, 2 * m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    # two interleaved stencil radii: on a single sphere the monomial basis is
    # collinear (1 = sum |z_j|^2 there), which corrupts a least-squares fit
    dirs *= np.where(np.arange(samples) % 2 == 0, 1.0, 0.6)[:, None]
    dirs_c = dirs[:, 0::2] + 1j * dirs[:, 1::2]

    coef_r, fit_r = _fit_quadratic(S, p, U, rho, dirs_c)
    coef_h, fit_h = _fit_quadratic(S, p, U, rho / 2, dirs_c)

    def matrices(coef):
        A = np.zeros((m, m), dtype=complex)
        B = np.zeros((m, m), dtype=complex)
        C = np.zeros((m, m), dtype=complex)
        for j in range(m):
            for k in range(m):
                ej = tuple(1 if i == j else 0 for i in range(m))
                ek = tuple(1 if i == k else 0 for i in range(m))
                if j == k:
                    two = tuple(2 if i == j else 0 for i in range(m))
                    A[j, j] = coef[(two, (0,) * m)]
                    C[j, j] = coef[((0,) * m, two)]
                elif j < k:
                    both = tuple((ej[i] + ek[i]) for i in range(m))
                    A[j, k] = A[k, j] = coef[(both, (0,) * m)] / 2.0
                    C[j, k] = C[k, j] = coef[((0,) * m, both)] / 2.0
                B[j, k] = coef[(ek, ej)]  # coefficient of z_k conj(z_j)
        return A, B, C

    A_r, B_r, C_r = matrices(coef_r)
    A_h, B_h, C_h = matrices(coef_h)
    A = (4.0 * A_h - A_r) / 3.0
    B = (4.0 * B_h - B_r) / 3.0
    C = (4.0 * C_h - C_r) / 3.0

    zero_exp = ((0,) * m, (0,) * m)
    lin = [abs(coef_h[(tuple(1 if i == j else 0 for i in range(m)), (0,) * m)]) for j in range(m)]
    lin += [abs(coef_h[((0,) * m, tuple(1 if i == j else 0 for i in range(m)))]) for j in range(m)]
    expansion_residual = float(abs(coef_h[zero_exp]) + max(lin))
    return ChartExpansion(
        point=p, unitary=U, A=A, B=B, C=C,
        expansion_residual=expansion_residual,
        fit_residual=max(fit_r, fit_h),
    )


# ----------------------------------------------------------------------------
# flat normal form
# ----------------------------------------------------------------------------


@dataclass
class FlatForm:
    """Real quadratic q(z) = z^H B z + Re(z^T C z) after the flattening moves."""

    theta: float
    B: np.ndarray
    C: np.ndarray
    residual: float


def flat_normal_form(
    B: np.ndarray, C: np.ndarray, tol: float = 1e-6
) -> FlatForm:
    """Phase-rotate w and shift by a holomorphic quadratic to make Q real.

    Flatness requires exp(-i theta) B to be Hermitian for some theta; the
    optimum is theta = arg(tr(B^2)) / 2, with squared defect
    (||B||_F^2 - |tr(B^2)|) / 2.  The returned Hermitian part is normalized
    to nonnegative trace (falling back to the leading eigenvalue's sign),
    and the pair part is C_pair = 2 conj(exp(-i theta) C), so
    q(z) = z^H B_herm z + Re(z^T C_pair z).
    """
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    normB = np.linalg.norm(B)
    if normB < 1e-14:
        theta = 0.0
        residual = 0.0
    else:
        trB2 = np.trace(B @ B)
        if abs(trB2) < 1e-14 * normB**2:
            theta = 0.0
        else:
            theta = float(np.angle(trB2)) / 2.0
        rot = np.exp(-1j * theta) * B
        residual = float(np.linalg.norm((rot - rot.conj().T) / 2.0))
        if residual > tol * max(normB, 1.0):
            raise NotFlatError(
                f"no phase makes the mixed quadratic Hermitian "
                f"(defect {residual:.3e} vs norm {normB:.3e})",
                residual,
            )
    Bh = np.exp(-1j * theta) * B
    Bh = (Bh + Bh.conj().T) / 2.0  # exact Hermitianization of the tiny defect
    tr = float(np.real(np.trace(Bh)))
    flip = False
    if tr < -1e-12 * max(normB, 1.0):
        flip = True
    elif abs(tr) <= 1e-12 * max(normB, 1.0) and normB >= 1e-14:
        w = np.linalg.eigvalsh(Bh)
        if abs(w[0]) > abs(w[-1]):
            flip = True
    if flip:
        theta += np.pi
        Bh = -Bh
    Cp = 2.0 * np.conj(np.exp(-1j * theta) * C)
    Cp = (Cp + Cp.T) / 2.0
    return FlatForm(theta=theta, B=Bh, C=Cp, residual=float(residual))


# ----------------------------------------------------------------------------
# Takagi factorization and the special form
# ----------------------------------------------------------------------------


def takagi_decomposition(C: np.ndarray, check: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Autonne-Takagi factorization C = U diag(mu) U^T of a complex symmetric C.

    Uses the SVD route: with C = V S W^H, the unitary Z = V^H conj(W)
    commutes with S blockwise, and U = V sqrtm(Z) on each group of equal
    singular values.  Returns (U, mu) with U unitary and mu >= 0 descending.
    """
    C = np.asarray(C, dtype=complex)
    msize = C.shape[0]
    if msize == 0:
        return np.zeros((0, 0), dtype=complex), np.zeros(0)
    asym = np.linalg.norm(C - C.T)
    if asym > 1e-10 * max(1.0, np.linalg.norm(C)):
        raise ValueError(f"matrix is not symmetric (defect {asym:.3e})")
    C = (C + C.T) / 2.0
    V, s, Wh = np.linalg.svd(C)
    W = Wh.conj().T
    Z = V.conj().T @ W.conj()
    # group (nearly) equal singular values; Z is block diagonal on the groups
    scale = max(s[0], 1.0)
    groups = []
    start = 0
    for i in range(1, msize + 1):
        if i == msize or abs(s[i] - s[start]) > 1e-10 * scale:
            groups.append(list(range(start, i)))
            start = i
    blocks = []
    for g in groups:
        sub = Z[np.ix_(g, g)]
        blocks.append(scipy.linalg.sqrtm(sub).astype(complex))
    U = V @ scipy.linalg.block_diag(*blocks)
    if check:
        err = np.linalg.norm(U @ np.diag(s) @ U.T - C)
        if err > 1e-8 * max(1.0, np.linalg.norm(C)):
            raise RuntimeError(f"factorization failed to reconstruct (error {err:.3e})")
    return U, s


@dataclass
class SpecialForm:
    """Normal form |z|^2 + sum lambda_j Re(z_j^2) with the reducing transform."""

    lambdas: np.ndarray
    transform: np.ndarray
    b_eigenvalues: np.ndarray


def special_normal_form(form: FlatForm, pd_tol: float = 1e-10) -> SpecialForm:
    """Reduce a flat quadratic with positive-definite Hermitian part.

    Congruence z = B^(-1/2) z' makes the Hermitian part the identity and
    keeps the pair part symmetric; the Takagi unitary then diagonalizes it
    with nonnegative entries.  lambda_j are the singular values of the
    normalized pair part; z = transform @ z'' carries the normal form back.
    """
    B, C = form.B, form.C
    w, Q = np.linalg.eigh(B)
    if w[0] <= pd_tol * max(abs(w[-1]), 1.0):
        raise NotSpecialError(
            f"Hermitian part is not positive definite (eigenvalues {np.round(w, 6)})"
        )
    inv_sqrt = Q @ np.diag(w**-0.5) @ Q.conj().T
    Cp = inv_sqrt.T @ C @ inv_sqrt
    Cp = (Cp + Cp.T) / 2.0
    U, mu = takagi_decomposition(Cp)
    transform = inv_sqrt @ np.conj(U)
    return SpecialForm(lambdas=mu, transform=transform, b_eigenvalues=w)


# ----------------------------------------------------------------------------
# classification
# ----------------------------------------------------------------------------


def tangency_index(B: np.ndarray, C: np.ndarray) -> int:
    """Topological index: sign of the real Jacobian of z -> B z + 2 C conj(z).

    The anti-holomorphic gradient of the graph function vanishes at the
    tangency; its degree is +1 or -1 when the zero is nondegenerate, and
    the indices of a closed surface sum to its Euler characteristic.
    Returns 0 for a degenerate (parabolic-type) zero.
    """
    B = np.asarray(B, dtype=complex)
    N = 2.0 * np.asarray(C, dtype=complex)
    Jr = np.block(
        [
            [B.real + N.real, -B.imag + N.imag],
            [B.imag + N.imag, B.real - N.real],
        ]
    )
    det = np.linalg.det(Jr)
    scale = max(np.linalg.norm(Jr, "fro") ** Jr.shape[0], 1e-30)
    if abs(det) < 1e-10 * scale:
        return 0
    return 1 if det > 0 else -1


@dataclass
class ComplexPointRecord:
    """One classified complex tangency of a surface."""

    point: np.ndarray
    level: float
    defect: float
    kind: str
    index: int
    lambdas: Optional[Tuple[float, ...]]
    theta: Optional[float]
    flat_residual: float
    expansion_residual: float

    def summary(self) -> str:
        lam = (
            "(" + ", ".join(f"{v:.6f}" for v in self.lambdas) + ")"
            if self.lambdas is not None
            else "-"
        )
        return (
            f"level {self.level:+.4f}  {self.kind:<22} index {self.index:+d}  "
            f"lambda {lam}"
        )


def classify_point(
    S: SurfaceModel,
    p: np.ndarray,
    tol: float = 1e-6,
    rho: float = 1e-3,
    defect_tol: float = 1e-6,
) -> ComplexPointRecord:
    """Classify one complex tangency through the normal-form pipeline.

    Labels: special_elliptic (all lambda < 1), special_k_hyperbolic
    (exactly k of them > 1, k <= n-2), parabolic (some lambda within tol
    of 1), and elliptic_nonspecial / hyperbolic_nonspecial when the
    reduction does not apply (non-flat point, indefinite Hermitian part,
    or k = n-1); the fallbacks are labeled by the sign of the index.
    """
    p = np.asarray(p, dtype=float)
    defect = cr_defect(S, p, tol=1e-7)
    if defect > defect_tol:
        raise ValueError(f"point is not a complex tangency (defect {defect:.3e})")
    chart = quadratic_expansion(S, p, rho=rho)
    index = tangency_index(chart.B, chart.C)
    lambdas: Optional[Tuple[float, ...]] = None
    theta: Optional[float] = None
    flat_residual = np.inf
    kind: str
    try:
        flat = flat_normal_form(chart.B, chart.C, tol=tol)
        flat_residual = flat.residual
        theta = flat.theta
        special = special_normal_form(flat)
        lam = special.lambdas
        lambdas = tuple(float(v) for v in lam)
        if np.any(np.abs(lam - 1.0) <= tol):
            kind = "parabolic"
        else:
            k = int(np.sum(lam > 1.0))
            if k == 0:
                kind = "special_elliptic"
            elif k <= S.n - 2:
                kind = f"special_{k}_hyperbolic"
            else:
                kind = "hyperbolic_nonspecial" if index < 0 else "elliptic_nonspecial"
    except NotFlatError as exc:
        flat_residual = exc.residual
        kind = "elliptic_nonspecial" if index > 0 else "hyperbolic_nonspecial"
        if index == 0:
            kind = "parabolic"
    except NotSpecialError:
        kind = "elliptic_nonspecial" if index > 0 else "hyperbolic_nonspecial"
        if index == 0:
            kind = "parabolic"
    return ComplexPointRecord(
        point=p,
        level=float(p[S.level_index]),
        defect=float(defect),
        kind=kind,
        index=index,
        lambdas=lambdas,
        theta=theta,
        flat_residual=float(flat_residual),
        expansion_residual=chart.expansion_residual,
    )


def classify_surface(
    S: SurfaceModel,
    tol: float = 1e-6,
    rho: float = 1e-3,
    **search_kwargs,
) -> List[ComplexPointRecord]:
    """Find and classify all isolated complex tangencies of a surface."""
    points = find_complex_points(S, **search_kwargs)
    return [classify_point(S, p, tol=tol, rho=rho) for p in points]


def euler_signed_count(records: Sequence[ComplexPointRecord]) -> int:
    """Sum of tangency indices; equals chi for a closed surface in good position."""
    return int(sum(r.index for r in records))
