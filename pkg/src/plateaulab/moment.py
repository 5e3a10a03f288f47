"""Moment conditions and shockwave diagnostics for boundary curves.

Closed curves in C^n are integrated against holomorphic polynomial
1-forms with spectral (trapezoid) quadrature: vanishing moments certify
that a curve bounds holomorphically, and exact differentials integrate to
zero to machine precision.  The Cauchy-type transform G attached to a
nu-lambda frame extracts the pole position of a model disc family, and a
shockwave residual measures how far a candidate function is from solving
f . D_xi f = D_eta f, the transport equation that the components of G
satisfy along the frame parameters.  All curves live in a single affine
chart (the projective chart w0 != 0 of the ambient space).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

__all__ = [
    "CurveModel",
    "NuLambdaFrame",
    "PoleOnCurveError",
    "disc_curve",
    "moment_integral",
    "differential_form",
    "shockwave_residual",
    "shockwave_order",
    "cauchy_G",
    "cauchy_G_oracle",
    "lambda_sweep",
    "DecompositionProbe",
    "decomposition_probe",
]

DEFAULT_NODES = 512


class PoleOnCurveError(RuntimeError):
    """The Cauchy denominator nearly vanishes on the integration curve."""


def _theta(nodes: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(nodes) / nodes


def _spectral_derivative(vals: np.ndarray) -> np.ndarray:
    """d/dtheta of periodic samples via the FFT; Nyquist mode dropped."""
    m = vals.shape[0]
    k = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        k[m // 2] = 0.0
    shape = (m,) + (1,) * (vals.ndim - 1)
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(vals, axis=0), axis=0)


@dataclass
class CurveModel:
    """Closed parametrized curve [0, 2pi) -> C^n.

    fn maps an array of angles to an (M, n) complex array.  The curve must
    close up (endpoint mismatch below 1e-12) and be immersed (the spectral
    derivative bounded away from zero).
    """

    n: int
    fn: Callable[[np.ndarray], np.ndarray]
    label: str = "curve"

    def __post_init__(self):
        ends = self.fn(np.array([0.0, 2.0 * np.pi]))
        gap = float(np.max(np.abs(ends[1] - ends[0])))
        if gap > 1e-12:
            raise ValueError(f"curve does not close: endpoint mismatch {gap:.2e}")
        probe = self.fn(_theta(256))
        speed = np.linalg.norm(_spectral_derivative(probe), axis=1)
        if float(np.min(speed)) < 1e-8:
            raise ValueError("curve is not immersed: derivative vanishes on the probe grid")

    def samples(self, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
        z = np.asarray(self.fn(_theta(nodes)), dtype=complex)
        return z, _spectral_derivative(z)

    @classmethod
    def from_expressions(cls, exprs: Sequence[str], label: str = "curve") -> "CurveModel":
        t = sp.Symbol("t", real=True)
        parsed = [sp.sympify(e, locals={"t": t, "I": sp.I}) for e in exprs]
        fns = [sp.lambdify(t, e, modules="numpy") for e in parsed]

        def fn(theta):
            theta = np.asarray(theta, dtype=float)
            cols = [np.broadcast_to(np.asarray(f(theta), dtype=complex), theta.shape) for f in fns]
            return np.stack(cols, axis=-1)

        return cls(n=len(exprs), fn=fn, label=label)


def disc_curve(c: complex, radius: float = 1.0) -> CurveModel:
    """Boundary of the model disc {z2 = radius * zeta, z3 = c, |zeta| <= 1} in C^3."""

    def fn(theta):
        theta = np.asarray(theta, dtype=float)
        z = np.zeros(theta.shape + (3,), dtype=complex)
        z[..., 1] = radius * np.exp(1j * theta)
        z[..., 2] = c
        return z

    return CurveModel(n=3, fn=fn, label=f"disc boundary at z3={c}")


# ----------------------------------------------------------------------------
# moment integrals
# ----------------------------------------------------------------------------


def _holomorphic_symbols(n: int):
    return [sp.Symbol(f"z{j}", complex=True) for j in range(1, n + 1)]


def _compile_form(form: Dict[int, object], n: int):
    syms = _holomorphic_symbols(n)
    local = {str(s): s for s in syms}
    local["I"] = sp.I
    out = []
    for j, coeff in form.items():
        if not 1 <= j <= n:
            raise ValueError(f"dz_{j} is not a coordinate differential in C^{n}")
        expr = coeff if isinstance(coeff, sp.Expr) else sp.sympify(coeff, locals=local)
        out.append((j - 1, sp.lambdify(syms, expr, modules="numpy")))
    return out


def moment_integral(
    curve: CurveModel,
    form: Dict[int, object],
    nodes: int = DEFAULT_NODES,
    tol: float = 1e-12,
    max_doublings: int = 3,
) -> complex:
    """Contour integral of sum_j P_j(z) dz_j over the closed curve.

    Periodic trapezoid quadrature (spectrally accurate); the node count is
    doubled until the value is stable to tol.
    """
    compiled = _compile_form(form, curve.n)
    prev = None
    m = nodes
    for _ in range(max_doublings + 1):
        z, dz = curve.samples(m)
        cols = [z[:, i] for i in range(curve.n)]
        total = 0.0 + 0.0j
        for i, fn in compiled:
            vals = np.broadcast_to(np.asarray(fn(*cols), dtype=complex), (m,))
            total += np.sum(vals * dz[:, i])
        total *= 2.0 * np.pi / m
        if prev is not None and abs(total - prev) <= tol * max(1.0, abs(total)):
            return total
        prev = total
        m *= 2
    return prev


def differential_form(expr: object, n: int) -> Dict[int, sp.Expr]:
    """The exact form dP of a polynomial P(z1..zn): components for each dz_j."""
    syms = _holomorphic_symbols(n)
    local = {str(s): s for s in syms}
    local["I"] = sp.I
    P = expr if isinstance(expr, sp.Expr) else sp.sympify(expr, locals=local)
    return {j + 1: sp.diff(P, s) for j, s in enumerate(syms) if sp.diff(P, s) != 0}


# ----------------------------------------------------------------------------
# shockwave residual
# ----------------------------------------------------------------------------


def shockwave_residual(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xi: np.ndarray,
    eta: np.ndarray,
    h: float = 1e-3,
) -> float:
    """max |f . D_xi f - D_eta f| on the grid, central differences of step h."""
    XI, ETA = np.meshgrid(np.asarray(xi, float), np.asarray(eta, float), indexing="ij")
    F = np.asarray(f(XI, ETA), dtype=complex)
    Dxi = (np.asarray(f(XI + h, ETA)) - np.asarray(f(XI - h, ETA))) / (2.0 * h)
    Deta = (np.asarray(f(XI, ETA + h)) - np.asarray(f(XI, ETA - h))) / (2.0 * h)
    return float(np.max(np.abs(F * Dxi - Deta)))


def shockwave_order(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xi: np.ndarray,
    eta: np.ndarray,
    h: float = 1e-3,
) -> float:
    """Observed convergence order of the residual under halving of h."""
    r1 = shockwave_residual(f, xi, eta, 2.0 * h)
    r2 = shockwave_residual(f, xi, eta, h)
    if r2 <= 1e-14:
        return math.inf
    return math.log2(r1 / r2)


# ----------------------------------------------------------------------------
# the Cauchy transform of a nu-lambda frame
# ----------------------------------------------------------------------------


@dataclass
class NuLambdaFrame:
    """Linear pole data xi_lambda,l = xi_l + eta'_l lambda with slopes eta_l.

    The slopes eta'_1, eta'_2 of the lambda-dependence must not vanish.
    """

    lam: float
    xi1: complex
    xi2: complex
    eta1: complex
    eta2: complex
    etap1: complex
    etap2: complex

    def __post_init__(self):
        if self.etap1 == 0 or self.etap2 == 0:
            raise ValueError("frame slopes eta'_1, eta'_2 must be nonzero")

    def xi_lambda(self, l: int) -> complex:
        if l == 1:
            return self.xi1 + self.etap1 * self.lam
        if l == 2:
            return self.xi2 + self.etap2 * self.lam
        raise ValueError("l must be 1 or 2")

    def with_lambda(self, lam: float) -> "NuLambdaFrame":
        return NuLambdaFrame(lam, self.xi1, self.xi2, self.eta1, self.eta2, self.etap1, self.etap2)


def cauchy_G(
    gamma: CurveModel,
    frame: NuLambdaFrame,
    nodes: int = DEFAULT_NODES,
    guard: float = 1e-6,
    tol: float = 1e-10,
    max_doublings: int = 3,
) -> complex:
    """(1/2 pi i) contour integral of z2 dh/h, h = z3 - xi_lambda,1 - eta1 z2.

    Raises PoleOnCurveError when |h| dips below the guard on the curve —
    the pole of the Cauchy kernel is not allowed to touch the contour.
    """
    if gamma.n < 3:
        raise ValueError("the Cauchy transform needs curves in C^3")
    shift = frame.xi_lambda(1)
    prev = None
    m = nodes
    for _ in range(max_doublings + 1):
        z, dz = gamma.samples(m)
        h = z[:, 2] - shift - frame.eta1 * z[:, 1]
        hmin = float(np.min(np.abs(h)))
        if hmin < guard:
            raise PoleOnCurveError(
                f"|h| reaches {hmin:.2e} on the curve (guard {guard:g}); "
                f"pole data touches the contour"
            )
        dh = dz[:, 2] - frame.eta1 * dz[:, 1]
        total = np.sum(z[:, 1] * dh / h) * (2.0 * np.pi / m) / (2.0j * np.pi)
        if prev is not None and abs(total - prev) <= tol * max(1.0, abs(total)):
            return complex(total)
        prev = total
        m *= 2
    return complex(prev)


def cauchy_G_oracle(c: complex, frame: NuLambdaFrame, radius: float = 1.0) -> complex:
    """Residue value of cauchy_G on the model disc boundary at z3 = c.

    The kernel zero sits at zeta0 = (c - xi_lambda,1)/eta1; the transform
    picks out radius-scaled zeta0 when the zero lies inside the disc and
    vanishes otherwise (including the eta1 = 0 degenerate frame).
    """
    if frame.eta1 == 0:
        return 0.0 + 0.0j
    zeta0 = (c - frame.xi_lambda(1)) / frame.eta1
    if abs(zeta0) < radius:
        return complex(zeta0)
    return 0.0 + 0.0j


def lambda_sweep(
    c: complex,
    frame: NuLambdaFrame,
    lambdas: Sequence[float],
    radius: float = 1.0,
    nodes: int = DEFAULT_NODES,
) -> List[Tuple[float, complex, complex]]:
    """cauchy_G along a lambda path on the model disc, with the residue oracle."""
    gamma = disc_curve(c, radius)
    out = []
    for lam in lambdas:
        fr = frame.with_lambda(float(lam))
        out.append((float(lam), cauchy_G(gamma, fr, nodes=nodes), cauchy_G_oracle(c, fr, radius)))
    return out


# ----------------------------------------------------------------------------
# decomposition probe
# ----------------------------------------------------------------------------


@dataclass
class DecompositionProbe:
    """Diagnostic-only report: curvature of G and candidate shock residuals."""

    max_second_difference: float
    candidate_residuals: Tuple[float, ...]
    grid_shape: Tuple[int, int]
    note: str = "diagnostic only; not a pass/fail criterion"


def decomposition_probe(
    G: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xi: np.ndarray,
    eta: np.ndarray,
    candidates: Sequence[Callable[[np.ndarray, np.ndarray], np.ndarray]] = (),
    h: float = 1e-3,
) -> DecompositionProbe:
    """Probe a sampled transform for a shockwave decomposition.

    Central second differences of G in the xi direction measure how far G
    is from being xi-affine (a vanishing second difference is consistent
    with a clean decomposition), and each candidate component is scored by
    its shockwave residual on the same grid.
    """
    XI, ETA = np.meshgrid(np.asarray(xi, float), np.asarray(eta, float), indexing="ij")
    d2 = (np.asarray(G(XI + h, ETA)) - 2.0 * np.asarray(G(XI, ETA)) + np.asarray(G(XI - h, ETA))) / h**2
    residuals = tuple(shockwave_residual(f, xi, eta, h) for f in candidates)
    return DecompositionProbe(
        max_second_difference=float(np.max(np.abs(d2))),
        candidate_residuals=residuals,
        grid_shape=(len(np.atleast_1d(xi)), len(np.atleast_1d(eta))),
    )
