"""Sparse exterior algebra over R^(2n) with the standard complex structure.

Real coordinates are interleaved as (x_1, y_1, ..., x_n, y_n): basis index
2j is the x-direction of the j-th complex coordinate and 2j+1 its
y-direction.  The complex structure J sends e_(2j) -> e_(2j+1) and
e_(2j+1) -> -e_(2j).

The calibrating pairing used throughout is omega^p / p! where
omega = sum_j dx_j ^ dy_j.  Evaluated on a unit 2p-blade it is at most 1,
with equality exactly on complex p-planes; that inequality backs both the
comass optimizer certificate and the lower half of the mass bracket.

Permutation signs are computed exactly in integer arithmetic; only the
coefficients are floats.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "Multivector",
    "Blade",
    "KahlerData",
    "MassBounds",
    "ComassResult",
    "WirtingerReport",
    "RankDeficientFrameError",
    "wedge",
    "blade_from_frame",
    "complex_plane_blade",
    "kahler_multivector",
    "kahler_eval",
    "kahler_eval_frames",
    "comass_estimate",
    "wirtinger_check",
    "mass_bounds",
    "random_unit_frames",
    "complex_structure_matrix",
    "j_invariance_defect",
    "complex_row_sets",
]

DEFAULT_TOL = 1e-9


class RankDeficientFrameError(ValueError):
    """Raised when a spanning set handed to a blade constructor is degenerate."""


def _merged_key_and_sign(a: Tuple[int, ...], b: Tuple[int, ...]):
    """Merge two strictly increasing index tuples.

    Returns (key, sign) with sign in {+1, -1}, or (None, 0) when the tuples
    share an index (the wedge vanishes).  The sign is the parity of the
    permutation sorting a + b, computed exactly.
    """
    if not a:
        return b, 1
    if not b:
        return a, 1
    inversions = 0
    for j in b:
        # indices of a strictly greater than j must hop over j
        inversions += len(a) - bisect_right(a, j)
        if j in a:
            return None, 0
    key = tuple(sorted(a + b))
    return key, (-1 if inversions % 2 else 1)


@dataclass
class Multivector:
    """Homogeneous multivector with sparse coefficients.

    coeffs maps strictly increasing index tuples (0-based, in [0, 2n)) to
    float coefficients.  The zero multivector has an empty dict.
    """

    n: int
    grade: int
    coeffs: Dict[Tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        dim = 2 * self.n
        for key in self.coeffs:
            if len(key) != self.grade:
                raise ValueError(f"key {key} has wrong grade (expected {self.grade})")
            if any(not (0 <= i < dim) for i in key):
                raise ValueError(f"key {key} out of range for dimension {dim}")
            if tuple(sorted(set(key))) != key:
                raise ValueError(f"key {key} is not strictly increasing")

    def copy(self) -> "Multivector":
        return Multivector(self.n, self.grade, dict(self.coeffs))

    def __add__(self, other: "Multivector") -> "Multivector":
        if self.n != other.n or self.grade != other.grade:
            raise ValueError("can only add multivectors of equal dimension and grade")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            w = out.get(k, 0.0) + v
            if w == 0.0:
                out.pop(k, None)
            else:
                out[k] = w
        return Multivector(self.n, self.grade, out)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (other * -1.0)

    def __mul__(self, s: float) -> "Multivector":
        if s == 0.0:
            return Multivector(self.n, self.grade, {})
        return Multivector(self.n, self.grade, {k: s * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.coeffs.values())))

    def dot(self, other: "Multivector") -> float:
        if self.n != other.n or self.grade != other.grade:
            raise ValueError("dot requires equal dimension and grade")
        small, big = (self.coeffs, other.coeffs)
        if len(big) < len(small):
            small, big = big, small
        return float(sum(v * big.get(k, 0.0) for k, v in small.items()))

    def allclose(self, other: "Multivector", tol: float = 1e-12) -> bool:
        return (self - other).norm() <= tol

    def __repr__(self):
        body = ", ".join(f"e{list(k)}: {v:.6g}" for k, v in sorted(self.coeffs.items()))
        return f"Multivector(n={self.n}, grade={self.grade}, {{{body}}})"


def wedge(a: Multivector, b: Multivector) -> Multivector:
    """Exterior product.  Grade overflow beyond 2n gives the zero multivector."""
    if a.n != b.n:
        raise ValueError("wedge requires matching ambient dimension")
    grade = a.grade + b.grade
    if grade > 2 * a.n:
        return Multivector(a.n, grade, {})
    out: Dict[Tuple[int, ...], float] = {}
    for ka, va in a.coeffs.items():
        for kb, vb in b.coeffs.items():
            key, sign = _merged_key_and_sign(ka, kb)
            if key is None:
                continue
            w = out.get(key, 0.0) + sign * va * vb
            if w == 0.0:
                out.pop(key, None)
            else:
                out[key] = w
    return Multivector(a.n, grade, out)


def _vector_mv(n: int, v: np.ndarray) -> Multivector:
    coeffs = {(i,): float(v[i]) for i in range(2 * n) if v[i] != 0.0}
    return Multivector(n, 1, coeffs)


@dataclass
class Blade:
    """Decomposable multivector carried together with a spanning frame.

    frame has shape (2n, r); expansion is the wedge of its columns.
    """

    frame: np.ndarray
    expansion: Multivector

    @property
    def grade(self) -> int:
        return self.expansion.grade

    def norm(self) -> float:
        return self.expansion.norm()


def blade_from_frame(vectors: Sequence[np.ndarray] | np.ndarray, normalize: bool = False) -> Blade:
    """Wedge an ordered set of vectors in R^(2n) into a Blade.

    vectors: sequence of length-2n arrays, or a (2n, r) matrix of columns.
    Raises RankDeficientFrameError for linearly dependent input.
    """
    F = np.asarray(vectors, dtype=float)
    if F.ndim != 2:
        raise ValueError("expected a 2-d array of frame vectors")
    if F.shape[0] < F.shape[1]:
        # rows were given; make columns
        F = F.T if F.shape[1] % 2 == 0 else F
    if F.shape[0] % 2 != 0:
        F = F.T
    if F.shape[0] % 2 != 0:
        raise ValueError("ambient dimension must be even")
    n = F.shape[0] // 2
    r = F.shape[1]
    s = np.linalg.svd(F, compute_uv=False)
    if s[-1] <= 1e-10 * max(1.0, s[0]):
        raise RankDeficientFrameError("frame vectors are linearly dependent")
    mv = _vector_mv(n, F[:, 0])
    for j in range(1, r):
        mv = wedge(mv, _vector_mv(n, F[:, j]))
    if normalize:
        nrm = mv.norm()
        mv = mv * (1.0 / nrm)
    return Blade(frame=F.copy(), expansion=mv)


def complex_structure_matrix(n: int) -> np.ndarray:
    """Matrix of the standard complex structure on interleaved coordinates."""
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[2 * j + 1, 2 * j] = 1.0
        J[2 * j, 2 * j + 1] = -1.0
    return J


def _realify(v: np.ndarray) -> np.ndarray:
    """Complex vector in C^n -> real vector in interleaved R^(2n)."""
    out = np.empty(2 * v.shape[0])
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def complex_plane_blade(n: int, p: int, complex_frame: Sequence[np.ndarray] | np.ndarray) -> Blade:
    """Unit blade of the complex p-plane spanned by p complex vectors.

    The real frame is (v_1, i v_1, ..., v_p, i v_p), which carries the
    complex orientation; the expansion is normalized to unit euclidean norm,
    so the omega^p/p! pairing evaluates to exactly 1 on the result.
    """
    V = np.asarray(complex_frame, dtype=complex)
    if V.ndim == 1:
        V = V.reshape(1, -1)
    if V.shape == (n, p) and p != n:
        V = V.T
    if V.shape != (p, n):
        raise ValueError(f"expected {p} complex vectors of length {n}")
    s = np.linalg.svd(V, compute_uv=False)
    if s[-1] <= 1e-10 * max(1.0, s[0]):
        raise RankDeficientFrameError("complex frame has rank below p")
    cols = []
    for k in range(p):
        cols.append(_realify(V[k]))
        cols.append(_realify(1j * V[k]))
    F = np.stack(cols, axis=1)
    blade = blade_from_frame(F, normalize=True)
    return blade


@dataclass
class KahlerData:
    """Dimension data (n, p) for the omega^p/p! pairing."""

    n: int
    p: int

    def __post_init__(self):
        if not (1 <= self.p <= self.n):
            raise ValueError("need 1 <= p <= n")


def complex_row_sets(n: int, p: int) -> List[Tuple[int, ...]]:
    """Index sets {x_j1, y_j1, ..., x_jp, y_jp} for j1 < ... < jp.

    omega^p/p! has coefficient exactly +1 on each of these basis 2p-vectors
    (interleaved ordering makes every permutation sign +1) and 0 elsewhere.
    """
    sets = []
    for combo in combinations(range(n), p):
        rows: List[int] = []
        for j in combo:
            rows.extend((2 * j, 2 * j + 1))
        sets.append(tuple(rows))
    return sets


def kahler_multivector(n: int, p: int) -> Multivector:
    """omega^p/p! expressed as a 2p-multivector (metric dual of the form)."""
    return Multivector(n, 2 * p, {rows: 1.0 for rows in complex_row_sets(n, p)})


def kahler_eval(k: KahlerData, z: Multivector | Blade) -> float:
    """Evaluate omega^p/p! on a 2p-multivector."""
    mv = z.expansion if isinstance(z, Blade) else z
    if mv.n != k.n:
        raise ValueError("dimension mismatch between pairing and multivector")
    if mv.grade != 2 * k.p:
        raise ValueError(f"pairing of grade {2 * k.p} applied to grade {mv.grade}")
    total = 0.0
    for rows in complex_row_sets(k.n, k.p):
        total += mv.coeffs.get(rows, 0.0)
    return float(total)


# ----------------------------------------------------------------------------
# frame-based evaluation (vectorized) and the comass optimizer
# ----------------------------------------------------------------------------


def _pairing_rowsets(k: Optional[KahlerData], form: Optional[Multivector]):
    if form is not None:
        return [(list(rows), w) for rows, w in sorted(form.coeffs.items())]
    assert k is not None
    return [(list(rows), 1.0) for rows in complex_row_sets(k.n, k.p)]


def kahler_eval_frames(k: KahlerData, frames: np.ndarray) -> np.ndarray:
    """omega^p/p! of the column-wedges of a batch of frames.

    frames: (N, 2n, 2p).  Returns (N,) values; each value is the sum of the
    2p x 2p minors of the frame taken on complex row sets (Cauchy-Binet form
    of the pairing), so no sparse expansion is built.
    """
    frames = np.asarray(frames, dtype=float)
    vals = np.zeros(frames.shape[0])
    for rows in complex_row_sets(k.n, k.p):
        vals += np.linalg.det(frames[:, rows, :])
    return vals


def random_unit_frames(n: int, r: int, count: int, seed: int = 0) -> np.ndarray:
    """Batch of orthonormal r-frames in R^(2n), Haar-ish via QR of gaussians."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((count, 2 * n, r))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.einsum("nii->ni", R))
    signs[signs == 0] = 1.0
    return Q * signs[:, None, :]


def _cofactor_matrix(M: np.ndarray) -> np.ndarray:
    m = M.shape[0]
    if m == 1:
        return np.ones((1, 1))
    C = np.empty_like(M)
    idx = np.arange(m)
    for r in range(m):
        rows = idx[idx != r]
        sub = M[rows]
        for c in range(m):
            cols = idx[idx != c]
            C[r, c] = ((-1.0) ** (r + c)) * np.linalg.det(sub[:, cols])
    return C


def _frame_value(F: np.ndarray, rowsets) -> float:
    val = 0.0
    for rows, w in rowsets:
        val += w * np.linalg.det(F[rows, :])
    return float(val)


def _frame_grad(F: np.ndarray, rowsets) -> np.ndarray:
    G = np.zeros_like(F)
    for rows, w in rowsets:
        G[rows, :] += w * _cofactor_matrix(F[rows, :])
    return G


def _qr_retract(M: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(M)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d[None, :]


@dataclass
class ComassResult:
    value: float
    argmax: Blade
    restarts: int
    iterations: int


def comass_estimate(
    k: Optional[KahlerData] = None,
    restarts: int = 32,
    seed: int = 0,
    form: Optional[Multivector] = None,
    step0: float = 0.1,
    min_step: float = 1e-12,
    max_iter: int = 500,
    tol: float = DEFAULT_TOL,
) -> ComassResult:
    """Estimate the comass of omega^p/p! (or a user form) over unit blades.

    Projected gradient ascent on the Stiefel manifold of orthonormal
    2p-frames, restarted from random frames.  The step starts at step0 and
    halves on non-improvement; a restart stops once the step drops below
    min_step.  For the standard pairing the result is certified against the
    calibration bound: values above 1 + tol raise.
    """
    if (k is None) == (form is None):
        raise ValueError("pass exactly one of k or form")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if form is not None:
        n = form.n
        r = form.grade
    else:
        n = k.n
        r = 2 * k.p
    rowsets = _pairing_rowsets(k, form)
    rng = np.random.default_rng(seed)
    best_val = -np.inf
    best_F = None
    total_iters = 0
    for _ in range(restarts):
        F = _qr_retract(rng.standard_normal((2 * n, r)))
        val = _frame_value(F, rowsets)
        step = step0
        for _ in range(max_iter):
            total_iters += 1
            g = _frame_grad(F, rowsets)
            sym = F.T @ g
            g_t = g - F @ ((sym + sym.T) / 2.0)
            if np.linalg.norm(g_t) < 1e-14:
                break
            moved = False
            while step >= min_step:
                F_try = _qr_retract(F + step * g_t)
                v_try = _frame_value(F_try, rowsets)
                if v_try > val + 1e-16:
                    F, val = F_try, v_try
                    moved = True
                    break
                step *= 0.5
            if not moved:
                break
        if val > best_val:
            best_val, best_F = val, F
    if form is None and best_val > 1.0 + tol:
        raise RuntimeError(
            f"comass ascent exceeded the calibration bound: {best_val} > 1 + {tol}"
        )
    return ComassResult(
        value=float(best_val),
        argmax=blade_from_frame(best_F),
        restarts=restarts,
        iterations=total_iters,
    )


# ----------------------------------------------------------------------------
# Wirtinger check and distance of a plane from the complex ones
# ----------------------------------------------------------------------------


def j_invariance_defect(basis: np.ndarray) -> float:
    """Frobenius norm of the part of J(span) sticking out of span.

    basis: (2n, r) with orthonormal columns spanning the plane.
    Vanishes exactly on J-invariant (complex) planes.
    """
    B = np.asarray(basis, dtype=float)
    n = B.shape[0] // 2
    J = complex_structure_matrix(n)
    JB = J @ B
    resid = JB - B @ (B.T @ JB)
    return float(np.linalg.norm(resid))


@dataclass
class WirtingerReport:
    value: float
    satisfied: bool
    complex_distance: float


def wirtinger_check(k: KahlerData, blade: Blade, tol: float = DEFAULT_TOL) -> WirtingerReport:
    """Evaluate omega^p/p! on a unit blade and report the calibration margin.

    complex_distance is the J-invariance defect of the blade's span, zero
    exactly when the span is a complex p-plane (the equality case).
    Non-unit blades are rejected.
    """
    nrm = blade.norm()
    if abs(nrm - 1.0) > 1e-6:
        raise ValueError(f"wirtinger_check expects a unit blade (norm {nrm:.3e})")
    value = kahler_eval(k, blade)
    Q = np.linalg.qr(blade.frame)[0]
    dist = j_invariance_defect(Q)
    return WirtingerReport(value=value, satisfied=value <= 1.0 + tol, complex_distance=dist)


# ----------------------------------------------------------------------------
# mass bracket
# ----------------------------------------------------------------------------


@dataclass
class MassBounds:
    lower: float
    upper: float
    witness: List[Blade]


def _antisymmetric_matrix(z: Multivector) -> np.ndarray:
    A = np.zeros((2 * z.n, 2 * z.n))
    for (i, j), v in z.coeffs.items():
        A[i, j] = v
        A[j, i] = -v
    return A


def _grade2_decomposition(z: Multivector) -> List[Blade]:
    """Orthogonal blade decomposition of a 2-vector via the real Schur form.

    For 2-vectors the sum of the rotation angles theta_k is the exact mass
    norm, so the bracket closes whenever this path applies.
    """
    from scipy.linalg import schur

    A = _antisymmetric_matrix(z)
    T, Q = schur(A, output="real")
    blades: List[Blade] = []
    dim = A.shape[0]
    i = 0
    while i < dim - 1:
        theta = T[i, i + 1]
        if abs(theta) > 1e-14:
            u = Q[:, i]
            v = Q[:, i + 1]
            pair = np.stack([u * theta, v], axis=1)
            blades.append(blade_from_frame(pair))
            i += 2
        else:
            i += 1
    return blades


def _hodge_star(z: Multivector) -> Multivector:
    dim = 2 * z.n
    full = tuple(range(dim))
    out: Dict[Tuple[int, ...], float] = {}
    for key, v in z.coeffs.items():
        comp = tuple(i for i in full if i not in key)
        _, sign = _merged_key_and_sign(key, comp)
        out[comp] = sign * v
    return Multivector(z.n, dim - z.grade, out)


def _complement_frame(frame: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span."""
    U, s, _ = np.linalg.svd(frame, full_matrices=True)
    r = frame.shape[1]
    return U[:, r:]


def mass_bounds(
    z: Multivector,
    k: Optional[KahlerData] = None,
    decomposition_strategy: str = "greedy",
    witness: Optional[List[Blade]] = None,
    tol: float = DEFAULT_TOL,
) -> MassBounds:
    """Certified bracket around the mass norm of an even-grade multivector.

    lower: the omega^p/p! pairing (valid because the form has comass 1).
    upper: the blade-sum of an explicit decomposition.  Strategy "greedy"
    peels orthogonal blades spectrally for grade 2 (exact there), reduces
    co-grade-2 input by Hodge duality, and falls back to the basis-blade
    decomposition in the remaining middle grades.  Strategy "given" verifies
    a user witness list and sums its norms.
    """
    if z.grade % 2 != 0 or z.grade == 0:
        raise ValueError("mass bracket is defined for even grade >= 2")
    if k is None:
        if z.grade % 2 != 0:
            raise ValueError("grade must be even")
        k = KahlerData(z.n, z.grade // 2)
    if 2 * k.p != z.grade or k.n != z.n:
        raise ValueError("pairing dimensions do not match the multivector")
    lower = kahler_eval(k, z)

    if decomposition_strategy == "given":
        if not witness:
            raise ValueError("strategy 'given' requires witness blades")
        total = Multivector(z.n, z.grade, {})
        for b in witness:
            total = total + b.expansion
        if not total.allclose(z, tol=1e-8 * max(1.0, z.norm())):
            raise ValueError("witness blades do not sum to the multivector")
        blades = list(witness)
    elif decomposition_strategy == "greedy":
        dim = 2 * z.n
        if z.grade == dim:
            key = tuple(range(dim))
            c = z.coeffs.get(key, 0.0)
            frame = np.eye(dim) * abs(c) ** (1.0 / dim) if c != 0 else np.eye(dim)
            if c != 0:
                frame = np.eye(dim)
                frame[:, 0] *= c
            blades = [Blade(frame=frame, expansion=z.copy())] if c != 0 else []
        elif z.grade == 2:
            blades = _grade2_decomposition(z)
        elif z.grade == dim - 2:
            dual = _hodge_star(z)
            dual_blades = _grade2_decomposition(dual)
            blades = []
            for db in dual_blades:
                co = _complement_frame(np.linalg.qr(db.frame)[0])
                cand = blade_from_frame(co)
                scale = db.norm() / cand.norm()
                target = _hodge_star(db.expansion)
                if cand.expansion.dot(target) < 0:
                    scale = -scale
                frame = cand.frame.copy()
                frame[:, 0] *= scale
                blades.append(blade_from_frame(frame))
        else:
            blades = []
            for key, v in sorted(z.coeffs.items()):
                frame = np.eye(dim)[:, list(key)]
                frame = frame * 1.0
                frame[:, 0] *= v
                blades.append(blade_from_frame(frame))
    else:
        raise ValueError(f"unknown decomposition strategy {decomposition_strategy!r}")

    if blades:
        total = blades[0].expansion.copy()
        for b in blades[1:]:
            total = total + b.expansion
        if not total.allclose(z, tol=1e-7 * max(1.0, z.norm())):
            raise RuntimeError("internal decomposition failed to reproduce the input")
    elif z.norm() > 1e-12:
        raise RuntimeError("internal decomposition lost a nonzero multivector")
    upper = sum(b.norm() for b in blades)
    if lower > upper + tol:
        raise RuntimeError(f"mass bracket inverted: lower {lower} > upper {upper}")
    return MassBounds(lower=float(lower), upper=float(upper), witness=blades)
