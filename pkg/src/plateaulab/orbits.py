"""CR-orbit tracing: slice clouds, component topology, the orbit function nu.

Away from complex tangencies the example surfaces are nowhere-minimal CR
manifolds whose orbits are the level sets of the ambient level coordinate
x_n.  This module samples those level sets as point clouds, decides their
connected-component structure at cloud scale (radius graph + union-find,
with a two-radius stability certificate), counts the components of the
singular orbit through a special 1-hyperbolic point, builds the global
orbit function nu together with its graph lift, and audits the
connected-fiber condition of the lifted boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph as csgraph
from scipy.spatial import cKDTree

from .normalform import ComplexPointRecord, classify_point, classify_surface
from .surfaces import SurfaceModel

__all__ = [
    "SliceCloud",
    "SigmaReport",
    "NuFunction",
    "LiftedBoundary",
    "HAuditReport",
    "UnstableComponentsError",
    "slice_sample",
    "component_labels",
    "component_count",
    "sigma_components",
    "sphere_like_proxy",
    "build_nu",
    "graph_lift",
    "condition_H_audit",
]


class UnstableComponentsError(RuntimeError):
    """Component count changed under radius doubling; resample at higher density."""


# ----------------------------------------------------------------------------
# slice sampling
# ----------------------------------------------------------------------------


@dataclass
class SliceCloud:
    """Sampled points of S intersected with one level of the slicing coordinate."""

    level: float
    points: np.ndarray
    adjacency_radius: Optional[float]
    singular: bool = False
    certificate: Optional[str] = None
    max_residual: float = 0.0

    @property
    def empty(self) -> bool:
        return self.points.shape[0] == 0

    def __len__(self) -> int:
        return self.points.shape[0]


def _newton_onto_slice(
    S: SurfaceModel,
    seeds: np.ndarray,
    level: float,
    max_iter: int = 60,
    tol: float = 1e-11,
) -> np.ndarray:
    """Batched Gauss-Newton projection onto S within {x_n = level}.

    Returns the subset of seeds that converged inside the box.
    """
    free = [i for i in range(S.dim) if i != S.level_index]
    X = np.array(seeds, dtype=float)
    X[:, S.level_index] = level
    alive = np.ones(X.shape[0], dtype=bool)
    for _ in range(max_iter):
        F = S.residuals(X)
        err = np.max(np.abs(F), axis=-1)
        active = alive & (err > tol)
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        G = S.gradients(X[idx])[:, :, free]
        M = G @ np.swapaxes(G, -1, -2)
        det = np.linalg.det(M)
        scale = np.maximum(np.einsum("nii->n", M) / S.m, 1e-30) ** S.m
        ok = det > 1e-14 * scale
        alive[idx[~ok]] = False
        if np.any(ok):
            sub = idx[ok]
            lam = np.linalg.solve(M[ok], F[sub][..., None])[..., 0]
            step = np.einsum("nmf,nm->nf", G[ok], lam)
            Xf = X[np.ix_(sub, free)] - step
            for j, col in enumerate(free):
                X[sub, col] = Xf[:, j]
    F = S.residuals(X)
    good = alive & (np.max(np.abs(F), axis=-1) <= tol)
    slack = 1e-9
    inside = np.all(X >= S.box[:, 0] - slack, axis=1) & np.all(
        X <= S.box[:, 1] + slack, axis=1
    )
    return X[good & inside]


def _farthest_point_subsample(pool: np.ndarray, k: int, rng) -> np.ndarray:
    """Pick k points spreading coverage: iteratively the farthest from those chosen.

    Equalizes the spacing of a non-uniformly projected cloud so that the
    median nearest-neighbor distance is representative of the worst gaps.
    """
    n = pool.shape[0]
    if k >= n:
        return pool
    chosen = np.empty(k, dtype=int)
    chosen[0] = int(rng.integers(n))
    dmin = np.linalg.norm(pool - pool[chosen[0]], axis=1)
    for i in range(1, k):
        nxt = int(np.argmax(dmin))
        chosen[i] = nxt
        np.minimum(dmin, np.linalg.norm(pool - pool[nxt], axis=1), out=dmin)
    return pool[chosen]


def _slice_seeds(S: SurfaceModel, level: float, count: int, rng) -> np.ndarray:
    lo = S.box[:, 0].copy()
    hi = S.box[:, 1].copy()
    seeds = lo + (hi - lo) * rng.random((count, S.dim))
    seeds[:, S.level_index] = level
    return seeds


def _tangential_level_gradient(S: SurfaceModel, X: np.ndarray) -> np.ndarray:
    """Norm of the projection of the level-coordinate direction onto T_x S."""
    P, ok = S.tangent_projectors(X)
    v = P[:, :, S.level_index]
    out = np.linalg.norm(v, axis=-1)
    out[~ok] = 0.0
    return out


def _refined_min_tangential_gradient(
    S: SurfaceModel,
    points: np.ndarray,
    level: float,
    rng,
    candidates: int = 5,
    rounds: int = 5,
    local: int = 24,
) -> float:
    """Derivative-free descent of the tangential level-gradient along the slice.

    The slice is singular (pinched) exactly where the level coordinate has a
    critical point on S; the minimum over a finite sample overestimates it,
    so the best few samples are refined by shrinking-radius resampling.
    """
    tang = _tangential_level_gradient(S, points)
    order = np.argsort(tang)[:candidates]
    centers = points[order].copy()
    best = np.min(tang[order]) if order.size else np.inf
    radius = 2.0 * adjacency_radius(points, multiplier=0.5) if points.shape[0] > 1 else 0.1
    radius = max(radius, 1e-3)
    for _ in range(rounds):
        seeds = np.repeat(centers, local, axis=0)
        seeds = seeds + radius * rng.normal(size=seeds.shape)
        refined = _newton_onto_slice(S, seeds, level)
        if refined.shape[0]:
            t = _tangential_level_gradient(S, refined)
            k = int(np.argmin(t))
            if t[k] < best:
                best = float(t[k])
                centers = np.vstack([refined[k][None, :], centers[:-1]])
        radius *= 0.5
    return float(best)


def slice_sample(
    S: SurfaceModel,
    level: float,
    density: int = 2000,
    seed: int = 0,
    oversample: int = 3,
    certify_empty: bool = True,
) -> SliceCloud:
    """Sample S on the slice {x_n = level} to a target cloud size.

    Seeds are drawn uniformly in the bounding box and Gauss-Newton
    projected onto the slice.  An empty result carries an explicit
    certificate: the range check for levels outside the surface's
    parameter range, otherwise a density^2-seed sweep that found nothing.
    The cloud is flagged singular when some sampled point has a nearly
    vanishing tangential gradient of the level coordinate (pinched slice).
    """
    if density < 1:
        raise ValueError("density must be positive")
    rng = np.random.default_rng(seed)
    if not S.in_level_range(level):
        return SliceCloud(
            level=float(level),
            points=np.zeros((0, S.dim)),
            adjacency_radius=None,
            certificate=f"level {level:g} outside parameter range {S.level_range}",
        )
    accepted = _newton_onto_slice(S, _slice_seeds(S, level, oversample * density, rng), level)
    tried = oversample * density
    rounds = 0
    while accepted.shape[0] < density and rounds < 3:
        more = _newton_onto_slice(
            S, _slice_seeds(S, level, 2 * oversample * density, rng), level
        )
        accepted = np.vstack([accepted, more])
        tried += 2 * oversample * density
        rounds += 1
    if accepted.shape[0] == 0:
        certificate = f"no solutions found from {tried} seeds"
        if certify_empty:
            target = density * density
            while tried < target:
                chunk = min(100_000, target - tried)
                more = _newton_onto_slice(S, _slice_seeds(S, level, chunk, rng), level)
                tried += chunk
                if more.shape[0]:
                    accepted = more
                    break
            else:
                certificate = f"no solutions found from {tried} seeds"
        if accepted.shape[0] == 0:
            return SliceCloud(
                level=float(level),
                points=np.zeros((0, S.dim)),
                adjacency_radius=None,
                certificate=certificate,
            )
    if accepted.shape[0] > density:
        accepted = _farthest_point_subsample(accepted, density, rng)
    min_tang = _refined_min_tangential_gradient(S, accepted, level, rng)
    singular = bool(min_tang < 5e-2)
    radius = adjacency_radius(accepted)
    return SliceCloud(
        level=float(level),
        points=accepted,
        adjacency_radius=radius,
        singular=singular,
        max_residual=float(np.max(np.abs(S.residuals(accepted)))),
    )


def adjacency_radius(points: np.ndarray, multiplier: float = 4.0) -> float:
    """Default component-graph radius: multiplier x median nearest-neighbor gap."""
    if points.shape[0] < 2:
        return 0.0
    tree = cKDTree(points)
    d, _ = tree.query(points, k=2)
    return float(multiplier * np.median(d[:, 1]))


# ----------------------------------------------------------------------------
# components at cloud scale
# ----------------------------------------------------------------------------


def _radius_graph(points: np.ndarray, radius: float) -> scipy.sparse.csr_matrix:
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    n = points.shape[0]
    if pairs.size == 0:
        return scipy.sparse.csr_matrix((n, n))
    w = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
    m = scipy.sparse.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([pairs[:, 0], pairs[:, 1]]),
                                  np.concatenate([pairs[:, 1], pairs[:, 0]]))),
        shape=(n, n),
    )
    return m.tocsr()


def component_labels(points: np.ndarray, radius: float) -> np.ndarray:
    """Connected-component labels of the radius graph."""
    graph = _radius_graph(points, radius)
    _, labels = csgraph.connected_components(graph, directed=False)
    return labels


def component_count(
    cloud: SliceCloud,
    radius: Optional[float] = None,
    check_stability: bool = True,
) -> int:
    """Number of connected components of a slice cloud at its adjacency radius.

    The count must agree with the count at twice the radius; otherwise an
    UnstableComponentsError asks for a denser resample.
    """
    if cloud.empty:
        raise ValueError("cannot count components of an empty cloud")
    r = radius if radius is not None else cloud.adjacency_radius
    if not r or r <= 0:
        raise ValueError("adjacency radius must be positive")
    labels = component_labels(cloud.points, r)
    count = int(labels.max()) + 1
    if check_stability:
        labels2 = component_labels(cloud.points, 2.0 * r)
        count2 = int(labels2.max()) + 1
        if count2 != count:
            raise UnstableComponentsError(
                f"component count {count} at radius {r:.4g} became {count2} at "
                f"doubled radius; resample at higher density"
            )
    return count


# ----------------------------------------------------------------------------
# sphere-likeness heuristic
# ----------------------------------------------------------------------------


def sphere_like_proxy(
    points: np.ndarray,
    radius: float,
    ratio_threshold: float = 6.0,
    max_points: int = 2500,
    seed: int = 0,
) -> bool:
    """Heuristic absence of essential 1-cycles at cloud scale.

    Builds the radius graph and its minimum spanning tree; a non-tree edge
    whose endpoints stay far apart in the graph without it (graph distance
    >> edge length) witnesses a cycle that does not collapse under radius
    growth — a hole.  Returns True when the cloud is connected and every
    candidate cycle collapses.  Reported as a heuristic only.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        pts = pts[rng.choice(pts.shape[0], size=max_points, replace=False)]
    graph = _radius_graph(pts, radius)
    ncomp, _ = csgraph.connected_components(graph, directed=False)
    if ncomp != 1:
        return False
    mst = csgraph.minimum_spanning_tree(graph)
    mst = mst + mst.T
    # tree distances from an arbitrary root give candidate cycle lengths
    dist_tree = csgraph.dijkstra(mst, indices=0)
    order, preds = csgraph.breadth_first_order(mst, 0, return_predecessors=True)
    # full tree path length between u, v needs an LCA; bound it instead with
    # the dijkstra distance on the tree, computed exactly for the candidates
    coo = scipy.sparse.triu(graph).tocoo()
    in_tree = set()
    mst_coo = scipy.sparse.triu(mst).tocoo()
    for i, j in zip(mst_coo.row, mst_coo.col):
        in_tree.add((min(i, j), max(i, j)))
    candidates = []
    for i, j, w in zip(coo.row, coo.col, coo.data):
        key = (min(i, j), max(i, j))
        if key in in_tree:
            continue
        # cheap upper bound on the non-edge path: via-root tree path
        bound = dist_tree[i] + dist_tree[j]
        if bound > ratio_threshold * w:
            candidates.append((i, j, w))
    if not candidates:
        return True
    # verify candidates with an exact tree geodesic (the graph minus the edge
    # is at least as short, so a collapsing tree path certifies collapse)
    lil = mst.tolil()
    for i, j, w in candidates[:200]:
        d = csgraph.dijkstra(mst, indices=i, min_only=True)[j]
        if d <= ratio_threshold * w:
            continue
        # the tree path is long: ask the full graph without this edge
        g2 = graph.tolil(copy=True)
        g2[i, j] = 0.0
        g2[j, i] = 0.0
        d2 = csgraph.dijkstra(g2.tocsr(), indices=i, min_only=True)[j]
        if d2 > ratio_threshold * w:
            return False
    return True


# ----------------------------------------------------------------------------
# the singular orbit through a 1-hyperbolic point
# ----------------------------------------------------------------------------


@dataclass
class SigmaReport:
    """Component structure of the singular orbit with the center removed."""

    components: int
    closures_sphere_like: bool
    cloud: SliceCloud
    labels: np.ndarray
    center: np.ndarray
    epsilon: float


def sigma_components(
    S: SurfaceModel,
    h: "np.ndarray | ComplexPointRecord",
    epsilon: float = 1.0,
    density: int = 6000,
    seed: int = 0,
    record: Optional[ComplexPointRecord] = None,
) -> SigmaReport:
    """Components of Sigma' = {level of h} minus ball(h, epsilon).

    The center must be a special 1-hyperbolic tangency (classified on the
    fly when a raw point is passed).  Returns the component count at the
    cloud's adjacency radius — stability-checked — plus the sphere-likeness
    heuristic for the component closures.
    """
    if isinstance(h, ComplexPointRecord):
        record = h
        center = np.asarray(record.point, dtype=float)
    else:
        center = np.asarray(h, dtype=float)
        if record is None:
            record = classify_point(S, center)
    if record.kind != "special_1_hyperbolic":
        raise ValueError(
            f"sigma components are defined at special 1-hyperbolic points; got {record.kind}"
        )
    level = float(center[S.level_index])
    cloud = slice_sample(S, level, density=density, seed=seed)
    if cloud.empty:
        raise RuntimeError("singular slice produced no samples")
    keep = np.linalg.norm(cloud.points - center, axis=1) >= epsilon
    pts = cloud.points[keep]
    if pts.shape[0] < 10:
        raise RuntimeError("nearly all samples fell inside the excluded ball")
    radius = adjacency_radius(pts)
    trimmed = SliceCloud(
        level=level, points=pts, adjacency_radius=radius,
        singular=cloud.singular, max_residual=cloud.max_residual,
    )
    count = component_count(trimmed)
    labels = component_labels(pts, radius)
    sphere_like = all(
        sphere_like_proxy(pts[labels == c], radius) for c in range(count)
    )
    return SigmaReport(
        components=count,
        closures_sphere_like=sphere_like,
        cloud=trimmed,
        labels=labels,
        center=center,
        epsilon=float(epsilon),
    )


# ----------------------------------------------------------------------------
# the orbit function nu and its graph lift
# ----------------------------------------------------------------------------


@dataclass
class NuFunction:
    """Global orbit function: mesh samples of S with one scalar value each."""

    mesh: np.ndarray
    values: np.ndarray
    critical_set: np.ndarray
    critical_levels: Tuple[float, ...]
    records: Tuple[ComplexPointRecord, ...]
    min_tangential_gradient: float


def build_nu(
    S: SurfaceModel,
    records: Optional[Sequence[ComplexPointRecord]] = None,
    levels_per_interval: int = 8,
    density: int = 400,
    seed: int = 0,
    critical_margin: float = 1e-3,
) -> NuFunction:
    """Construct the orbit function nu = x_n on a mesh of slice samples.

    Requires every complex tangency to be classified special and
    non-parabolic.  The mesh stacks slice clouds on a ladder of levels
    between consecutive critical values (the tangency levels), skipping a
    margin around each; nu's level sets then coincide with the slice
    partition by construction, and values agree across the components of
    any shared slice — the gluing constraint.
    """
    if records is None:
        records = classify_surface(S)
    records = list(records)
    for r in records:
        if r.kind == "parabolic" or not r.kind.startswith("special"):
            raise ValueError(
                f"orbit function requires special non-parabolic tangencies; "
                f"found {r.kind} at level {r.level:+.3f}"
            )
    crit = sorted({round(r.level, 9) for r in records})
    lo, hi = (S.level_range if S.level_range is not None else (min(crit), max(crit)))
    cuts = [lo] + [c for c in crit if lo < c < hi] + [hi]
    mesh_parts, value_parts = [], []
    rng = np.random.default_rng(seed)
    for a, b in zip(cuts[:-1], cuts[1:]):
        inner = np.linspace(a + critical_margin, b - critical_margin, levels_per_interval)
        for lvl in inner:
            cloud = slice_sample(S, float(lvl), density=density, seed=int(rng.integers(2**31)))
            if cloud.empty:
                continue
            mesh_parts.append(cloud.points)
            value_parts.append(np.full(len(cloud), float(lvl)))
    if not mesh_parts:
        raise RuntimeError("no slice produced samples; cannot build the orbit function")
    mesh = np.vstack(mesh_parts)
    values = np.concatenate(value_parts)
    critical_set = np.array([r.point for r in records])
    tang = _tangential_level_gradient(S, mesh)
    away = np.ones(mesh.shape[0], dtype=bool)
    for r in records:
        away &= np.linalg.norm(mesh - r.point, axis=1) > 0.1
    min_tang = float(np.min(tang[away])) if np.any(away) else 0.0
    return NuFunction(
        mesh=mesh,
        values=values,
        critical_set=critical_set,
        critical_levels=tuple(float(c) for c in crit),
        records=tuple(records),
        min_tangential_gradient=min_tang,
    )


@dataclass
class LiftedBoundary:
    """The graph {(nu(z), z)} with its projection and marked singular set."""

    surface: SurfaceModel
    nu: NuFunction
    points: np.ndarray  # (N, 1 + 2n): nu value prepended
    tau_points: np.ndarray
    tau_levels: Tuple[float, ...]

    def projection(self) -> np.ndarray:
        return self.points[:, 0]


def graph_lift(
    S: SurfaceModel,
    nu: NuFunction,
    sigma_density: int = 3000,
    seed: int = 0,
) -> LiftedBoundary:
    """Lift the surface to the graph of nu, marking the singular set tau.

    tau collects the complex tangencies and, for each special 1-hyperbolic
    point, a sample of the closure of its singular orbit.  A constant nu is
    rejected (critical everywhere).
    """
    if np.ptp(nu.values) < 1e-12:
        raise ValueError("orbit function is constant; every point is critical")
    lifted = np.concatenate([nu.values[:, None], nu.mesh], axis=1)
    tau_parts = [nu.critical_set]
    tau_levels = {round(float(v), 9) for v in nu.critical_levels}
    for rec in nu.records:
        if rec.kind == "special_1_hyperbolic":
            cloud = slice_sample(S, rec.level, density=sigma_density, seed=seed)
            if not cloud.empty:
                tau_parts.append(cloud.points)
            tau_levels.add(round(float(rec.level), 9))
    tau_points = np.vstack(tau_parts)
    return LiftedBoundary(
        surface=S,
        nu=nu,
        points=lifted,
        tau_points=tau_points,
        tau_levels=tuple(sorted(tau_levels)),
    )


# ----------------------------------------------------------------------------
# condition (H) audit
# ----------------------------------------------------------------------------


@dataclass
class HAuditReport:
    """Per-level fiber connectivity table with the excluded-level candidates."""

    L_candidates: Tuple[float, ...]
    fiber_table: List[Dict]

    def flagged_levels(self) -> List[float]:
        return [row["level"] for row in self.fiber_table if row["flagged"]]


def condition_H_audit(
    N: LiftedBoundary,
    levels: Sequence[float],
    density: int = 2000,
    seed: int = 0,
    tau_margin: float = 1e-3,
) -> HAuditReport:
    """Audit fiber connectivity of the lifted boundary over a list of levels.

    Each fiber k^-1(level) is resampled and component-counted; a fiber is
    flagged when it is disconnected, unstable, empty, or meets the singular
    set tau (level within tau_margin of a tau level).  L_candidates
    collects the flagged levels together with the detected critical values.
    The audit is total: sampling failures flag the level instead of raising.
    """
    S = N.surface
    table: List[Dict] = []
    candidates = set(N.tau_levels)
    for k, level in enumerate(levels):
        row: Dict = {"level": float(level)}
        tau_hit = any(abs(level - t) <= tau_margin for t in N.tau_levels)
        row["tau_intersects"] = bool(tau_hit)
        try:
            cloud = slice_sample(S, float(level), density=density, seed=seed + k)
            if cloud.empty:
                row["components"] = 0
                row["note"] = cloud.certificate
                row["flagged"] = True
            else:
                try:
                    row["components"] = component_count(cloud)
                    row["flagged"] = bool(tau_hit or row["components"] != 1)
                except UnstableComponentsError as exc:
                    row["components"] = None
                    row["note"] = str(exc)
                    row["flagged"] = True
        except Exception as exc:  # audit is total
            row["components"] = None
            row["note"] = f"sampling failed: {exc}"
            row["flagged"] = True
        if row["flagged"]:
            candidates.add(round(float(level), 9))
        table.append(row)
    return HAuditReport(
        L_candidates=tuple(sorted(candidates)),
        fiber_table=table,
    )
