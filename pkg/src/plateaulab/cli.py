"""Command-line laboratory driver.

Subcommands: wirtinger (random-blade calibration sweep + comass ascent),
classify (complex tangencies and signed count), orbits (slice clouds,
component counts, lift audit), plateau (leaf volumes, mixed volume,
competitor monotonicity), moment (moment integrals, Cauchy transform
sweep, shock residual), demo (all of the above).  Every report embeds the
resolved configuration, the seed, and the package version; JSON and CSV
outputs are deterministic for a fixed seed.  Each command also renders a
PNG figure next to its delimited output.  Exit status 0 means every check
in the requested run passed, 1 means some check failed, 2 means the
configuration was invalid.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import __version__
from .moment import (
    CurveModel,
    NuLambdaFrame,
    cauchy_G_oracle,
    differential_form,
    disc_curve,
    lambda_sweep,
    moment_integral,
    shockwave_order,
    shockwave_residual,
)
from .multivector import (
    KahlerData,
    comass_estimate,
    kahler_eval_frames,
    random_unit_frames,
    wirtinger_check,
)
from .normalform import classify_surface, euler_signed_count
from .orbits import (
    UnstableComponentsError,
    build_nu,
    component_count,
    component_labels,
    condition_H_audit,
    graph_lift,
    sigma_components,
    slice_sample,
)
from .plateau import (
    BallDomain,
    DiscDomain,
    ball_family,
    calibration_gap,
    competitor_perturb,
    mixed_volume,
    planar_leaf,
    random_polynomial_form,
    stokes_check,
)
from .surfaces import BUILTIN_SURFACES, SurfaceModel

__all__ = ["RunConfig", "ConfigError", "main", "run_command"]

COMMANDS = ("wirtinger", "classify", "orbits", "plateau", "moment", "demo")


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    """Resolved options for one CLI run."""

    command: str
    surface: str = "horned_sphere"
    levels: Optional[Tuple[float, ...]] = None
    density: int = 2000
    seed: int = 0
    restarts: int = 8
    tol: float = 1e-6
    out: str = "plateaulab_out"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        if self.density <= 0:
            raise ConfigError("density must be a positive integer")
        if self.restarts <= 0:
            raise ConfigError("restarts must be a positive integer")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")


# ----------------------------------------------------------------------------
# helpers
# ----------------------------------------------------------------------------


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _write_json(out_dir: Path, name: str, payload: Dict) -> Path:
    path = out_dir / name
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_ready(payload), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return path


def _write_csv(out_dir: Path, name: str, header: Sequence[str], rows) -> Path:
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def _resolve_surface(cfg: RunConfig) -> SurfaceModel:
    if cfg.surface in BUILTIN_SURFACES:
        return SurfaceModel.builtin(cfg.surface)
    path = Path(cfg.surface)
    if not path.exists():
        raise ConfigError(
            f"surface {cfg.surface!r} is neither a builtin "
            f"({', '.join(sorted(BUILTIN_SURFACES))}) nor a file"
        )
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return SurfaceModel.from_polynomials(
            data["equations"],
            n=int(data["n"]),
            box=data["box"],
            level_range=tuple(data["level_range"]) if data.get("level_range") else None,
            name=data.get("name", path.stem),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"could not load surface file {path}: {exc}") from exc


def _report_skeleton(cfg: RunConfig) -> Dict:
    return {"config": asdict(cfg), "seed": cfg.seed, "version": __version__}


def _default_level_ladder(S: SurfaceModel, critical: Sequence[float], total: int = 16):
    lo, hi = S.level_range if S.level_range is not None else (-1.0, 1.0)
    cuts = [lo] + [c for c in sorted(critical) if lo < c < hi] + [hi]
    intervals = list(zip(cuts[:-1], cuts[1:]))
    per = max(total // len(intervals), 2)
    levels: List[float] = []
    for a, b in intervals:
        w = b - a
        levels.extend(np.linspace(a + 0.2 * w, b - 0.2 * w, per))
    return [float(l) for l in levels]


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------


def run_wirtinger(cfg: RunConfig, out_dir: Path) -> Tuple[Dict, bool]:
    report = _report_skeleton(cfg)
    pairs = ((2, 1), (3, 1), (3, 2))
    trials = max(cfg.density, 1)
    rows = []
    ok = True
    fig, axes = plt.subplots(1, len(pairs), figsize=(4 * len(pairs), 3))
    for ax, (n, p) in zip(np.atleast_1d(axes), pairs):
        k = KahlerData(n, p)
        frames = random_unit_frames(n, 2 * p, trials, seed=cfg.seed)
        vals = kahler_eval_frames(k, frames)
        violations = int(np.sum(vals > 1.0 + 1e-9))
        res = comass_estimate(k, restarts=cfg.restarts, seed=cfg.seed)
        check = wirtinger_check(k, res.argmax)
        row = {
            "n": n,
            "p": p,
            "samples": trials,
            "max_sample_value": float(np.max(vals)),
            "violations": violations,
            "comass_value": res.value,
            "comass_iterations": res.iterations,
            "argmax_complex_distance": check.complex_distance,
        }
        row["passed"] = bool(
            violations == 0 and res.value >= 1.0 - 1e-5 and check.complex_distance < 1e-3
        )
        ok = ok and row["passed"]
        rows.append(row)
        ax.hist(vals, bins=60, color="#3b6ea5")
        ax.axvline(1.0, color="#c23b22", lw=1)
        ax.set_title(f"n={n}, p={p}")
        ax.set_xlabel(r"$\omega^p/p!$ on random blades")
    report["pairs"] = rows
    report["all_passed"] = ok
    fig.tight_layout()
    fig.savefig(out_dir / "wirtinger.png", dpi=110)
    plt.close(fig)
    _write_json(out_dir, "wirtinger.json", report)
    return report, ok


def run_classify(cfg: RunConfig, out_dir: Path) -> Tuple[Dict, bool]:
    report = _report_skeleton(cfg)
    S = _resolve_surface(cfg)
    records = classify_surface(S, tol=cfg.tol)
    signed = euler_signed_count(records)
    report["surface"] = S.name
    report["points"] = [
        {
            "point": r.point,
            "level": r.level,
            "kind": r.kind,
            "index": r.index,
            "lambdas": None if r.lambdas is None else list(r.lambdas),
            "defect": r.defect,
            "flat_residual": r.flat_residual,
        }
        for r in records
    ]
    report["signed_count"] = signed
    report["euler_characteristic"] = S.chi
    chi_ok = S.chi is None or signed == S.chi
    report["signed_count_matches_euler"] = bool(chi_ok)
    ok = bool(chi_ok and records is not None)
    report["all_passed"] = ok

    fig, ax = plt.subplots(figsize=(5, 4))
    palette = {"special_elliptic": "#2d7dd2", "special_1_hyperbolic": "#c23b22",
               "parabolic": "#777777"}
    for r in records:
        color = palette.get(r.kind, "#e08e45")
        ax.scatter(r.point[1], r.level, s=70, color=color, zorder=3)
        ax.annotate(f"{r.kind} ({r.index:+d})", (r.point[1], r.level),
                    textcoords="offset points", xytext=(8, 4), fontsize=8)
    ax.set_xlabel("$y_1$")
    ax.set_ylabel("level")
    ax.set_title(f"{S.name}: tangencies, signed count {signed}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_dir / "classify.png", dpi=110)
    plt.close(fig)
    _write_json(out_dir, "classify.json", report)
    return report, ok


def run_orbits(cfg: RunConfig, out_dir: Path) -> Tuple[Dict, bool]:
    report = _report_skeleton(cfg)
    S = _resolve_surface(cfg)
    records = classify_surface(S, tol=cfg.tol)
    critical = sorted({round(r.level, 9) for r in records})
    report["surface"] = S.name
    report["critical_levels"] = critical

    requested = list(cfg.levels) if cfg.levels else _default_level_ladder(S, critical)
    levels, excluded = [], []
    for l in requested:
        near = [c for c in critical if abs(l - c) <= 1e-3]
        if near:
            print(
                f"warning: level {l:g} is within 1e-3 of the critical value "
                f"{near[0]:g}; excluded from the sweep",
                file=sys.stderr,
            )
            excluded.append(l)
        else:
            levels.append(l)
    report["levels"] = levels
    report["excluded_levels"] = excluded

    ok = True
    level_rows = []
    csv_rows = []
    for i, level in enumerate(levels):
        density = cfg.density
        entry = {"level": level}
        for attempt in range(3):
            cloud = slice_sample(S, level, density=density, seed=cfg.seed + i)
            if cloud.empty:
                entry.update(points=0, components=None, stable=False, note=cloud.certificate)
                ok = False
                break
            try:
                entry["components"] = component_count(cloud)
                entry.update(points=len(cloud), density=density, stable=True,
                             singular=cloud.singular, max_residual=cloud.max_residual)
                break
            except UnstableComponentsError:
                density *= 2  # the certificate failed; resample denser as advised
        else:
            entry.update(points=len(cloud), components=None, stable=False, density=density)
            ok = False
        if entry.get("components") is not None:
            labels = component_labels(cloud.points, cloud.adjacency_radius)
            keep = 2 * S.n - 1 if S.n == 3 else 2 * S.n
            for pt, lab in zip(cloud.points, labels):
                csv_rows.append([*(f"{v:.12g}" for v in pt[:keep]), f"{level:g}", int(lab)])
            ok = ok and entry["max_residual"] <= 1e-6
        level_rows.append(entry)
    report["slices"] = level_rows

    sigma_rows = []
    for r in records:
        if r.kind == "special_1_hyperbolic":
            try:
                rep = sigma_components(S, r, epsilon=1.0, density=max(cfg.density, 5000),
                                       seed=cfg.seed)
                sigma_rows.append({
                    "level": r.level,
                    "components": rep.components,
                    "closures_sphere_like": rep.closures_sphere_like,
                })
            except (UnstableComponentsError, RuntimeError) as exc:
                sigma_rows.append({"level": r.level, "components": None, "note": str(exc)})
                ok = False
    report["sigma"] = sigma_rows

    try:
        nu = build_nu(S, records=records, density=min(400, cfg.density), seed=cfg.seed)
        lift = graph_lift(S, nu, sigma_density=min(2000, cfg.density), seed=cfg.seed)
        audit = condition_H_audit(lift, levels, density=cfg.density, seed=cfg.seed)
        report["audit"] = {
            "tau_levels": list(lift.tau_levels),
            "L_candidates": list(audit.L_candidates),
            "fiber_table": audit.fiber_table,
        }
    except ValueError as exc:
        report["audit"] = {"error": str(exc)}
    report["all_passed"] = ok

    header = (["x1", "y1", "x2", "y2", "x3"] if S.n == 3
              else [f"{a}{j}" for j in range(1, S.n + 1) for a in ("x", "y")])
    _write_csv(out_dir, "orbit_clouds.csv", header + ["level", "component_id"], csv_rows)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    got = [(e["level"], e["components"]) for e in level_rows if e.get("components")]
    if got:
        ax1.plot([g[0] for g in got], [g[1] for g in got], "o-", color="#3b6ea5")
    for c in critical:
        ax1.axvline(c, color="#c23b22", lw=1, ls="--")
    ax1.set_xlabel("level")
    ax1.set_ylabel("components")
    ax1.set_title("slice component counts")
    if csv_rows:
        arr = np.array([[float(r[1]), float(r[-2]), float(r[-1])] for r in csv_rows])
        ax2.scatter(arr[:, 0], arr[:, 1], c=arr[:, 2], s=2, cmap="coolwarm")
        ax2.set_xlabel("$y_1$")
        ax2.set_ylabel("level")
        ax2.set_title("orbit clouds by component")
    fig.tight_layout()
    fig.savefig(out_dir / "orbits.png", dpi=110)
    plt.close(fig)
    _write_json(out_dir, "orbits.json", report)
    return report, ok


def run_plateau(cfg: RunConfig, out_dir: Path) -> Tuple[Dict, bool]:
    report = _report_skeleton(cfg)
    ok = True

    disc = planar_leaf(2, (0, 1), DiscDomain(1.0), label="flat holomorphic disc")
    gap = calibration_gap(disc)
    report["disc"] = {"volume": gap.volume, "energy": gap.energy, "gap": gap.gap,
                      "is_complex": gap.is_complex}
    ok = ok and abs(gap.volume - math.pi) < 1e-6 and gap.gap >= -1e-9

    fam = ball_family()
    target = 8 * math.pi**2 / 15
    mv0 = mixed_volume(fam)
    report["mixed_volume"] = {"value": mv0, "target": target,
                             "relative_error": abs(mv0 - target) / target}
    ok = ok and abs(mv0 - target) <= 1e-4 * target

    amplitudes = (0.05, 0.1, 0.2)
    base_leaf = fam.leaf_family(0.0)
    base_gap = calibration_gap(base_leaf)
    vols, energies = [], []
    for a in amplitudes:
        g = calibration_gap(competitor_perturb(base_leaf, a))
        vols.append(g.volume)
        energies.append(g.energy)
    monotone = base_gap.volume < vols[0] < vols[1] < vols[2]
    energy_drift = max(abs(e - base_gap.energy) for e in energies) / abs(base_gap.energy)
    report["competitors"] = {
        "amplitudes": list(amplitudes),
        "leaf_volumes": vols,
        "leaf_energies": energies,
        "base_volume": base_gap.volume,
        "base_energy": base_gap.energy,
        "monotone_increasing": bool(monotone),
        "energy_relative_drift": energy_drift,
    }
    ok = ok and monotone and energy_drift < 1e-6

    params = np.linspace(-0.9, 0.9, 13)
    leaf_rows = []
    for l in params:
        leaf = fam.leaf_family(float(l))
        g = calibration_gap(leaf)
        leaf_rows.append((float(l), g.volume, g.energy, g.gap))
        ok = ok and g.gap >= -1e-9
    _write_csv(
        out_dir,
        "leaf_table.csv",
        ["leaf_parameter", "volume", "energy", "gap"],
        [[f"{a:.12g}" for a in row] for row in leaf_rows],
    )

    ball = planar_leaf(2, (0, 1, 2, 3), BallDomain(1.0), label="flat complex 2-ball")
    worst = 0.0
    for s in range(5):
        worst = max(worst, stokes_check(
            disc, random_polynomial_form(2, 3, 1, seed=cfg.seed + s)).residual)
        worst = max(worst, stokes_check(
            ball, random_polynomial_form(2, 3, 3, seed=cfg.seed + 50 + s)).residual)
    report["stokes_worst_residual"] = worst
    ok = ok and worst < 1e-5
    report["all_passed"] = ok

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    arr = np.array(leaf_rows)
    ax1.plot(arr[:, 0], arr[:, 1], "o-", label="volume", color="#3b6ea5")
    ax1.plot(arr[:, 0], arr[:, 2], "s--", label="energy", color="#2d9d78")
    ax1.set_xlabel("leaf parameter")
    ax1.legend()
    ax1.set_title("leaf volume and energy")
    ax2.plot([0.0, *amplitudes], [base_gap.volume, *vols], "o-", color="#c23b22",
             label="volume")
    ax2.plot([0.0, *amplitudes], [base_gap.energy, *energies], "s--", color="#2d9d78",
             label="energy")
    ax2.set_xlabel("competitor amplitude")
    ax2.legend()
    ax2.set_title("competitor monotonicity")
    fig.tight_layout()
    fig.savefig(out_dir / "plateau.png", dpi=110)
    plt.close(fig)
    _write_json(out_dir, "plateau.json", report)
    return report, ok


def run_moment(cfg: RunConfig, out_dir: Path) -> Tuple[Dict, bool]:
    report = _report_skeleton(cfg)
    ok = True

    circle = CurveModel.from_expressions(["exp(I*t)", "0*t"], label="unit circle")
    nonbounding = CurveModel.from_expressions(["exp(I*t)", "exp(-I*t)"], label="conjugate pair")
    bounding_moment = abs(moment_integral(circle, {1: "z2"}))
    nb = moment_integral(nonbounding, {1: "z2"})
    report["moments"] = {
        "bounding_z2_dz1": bounding_moment,
        "nonbounding_z2_dz1": nb,
        "nonbounding_error": abs(nb - 2j * math.pi),
    }
    ok = ok and bounding_moment < 1e-10 and abs(nb - 2j * math.pi) < 1e-8

    rng = np.random.default_rng(cfg.seed)
    import sympy as sp

    z1, z2 = sp.symbols("z1 z2", complex=True)
    worst = 0.0
    for _ in range(5):
        P = sum(
            sp.Rational(int(rng.integers(-5, 6)), 3)
            * z1 ** int(rng.integers(0, 4)) * z2 ** int(rng.integers(0, 4))
            for _ in range(4)
        )
        for c in (circle, nonbounding):
            worst = max(worst, abs(moment_integral(c, differential_form(P, 2))))
    report["exact_differentials_worst"] = worst
    ok = ok and worst < 1e-10

    xi = np.linspace(0.28, 0.32, 9)
    eta = np.linspace(0.18, 0.22, 9)
    f = lambda x, e: x / (1.0 - e)
    shock = shockwave_residual(f, xi, eta, h=1e-3)
    order = shockwave_order(f, xi, eta, h=1e-3)
    report["shockwave"] = {"residual": shock, "observed_order": order,
                           "grid_center": [0.3, 0.2], "h": 1e-3}
    ok = ok and shock < 1e-6 and 1.8 <= order <= 2.2

    frame = NuLambdaFrame(lam=0.0, xi1=0.0, xi2=0.0, eta1=1.0, eta2=1.0, etap1=1.0, etap2=1.0)
    lambdas = np.linspace(-0.4, 0.4, 20)
    sweep = lambda_sweep(0.5, frame, lambdas)
    sweep_err = max(abs(g - o) for _, g, o in sweep)
    report["cauchy_sweep"] = {
        "z3": 0.5,
        "lambdas": [s[0] for s in sweep],
        "worst_oracle_error": sweep_err,
    }
    ok = ok and sweep_err < 1e-8
    report["all_passed"] = ok

    _write_csv(
        out_dir,
        "cauchy_sweep.csv",
        ["lambda", "re_G", "im_G", "re_oracle", "im_oracle", "abs_error"],
        [
            [f"{l:.12g}", f"{g.real:.12g}", f"{g.imag:.12g}",
             f"{o.real:.12g}", f"{o.imag:.12g}", f"{abs(g - o):.3e}"]
            for l, g, o in sweep
        ],
    )

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot([s[0] for s in sweep], [s[1].real for s in sweep], "o-",
             color="#3b6ea5", label="Re G")
    ax1.plot([s[0] for s in sweep], [s[1].imag for s in sweep], "s--",
             color="#2d9d78", label="Im G")
    ax1.set_xlabel(r"$\lambda$")
    ax1.legend()
    ax1.set_title("Cauchy transform along the frame")
    hs = np.array([4e-3, 2e-3, 1e-3, 5e-4])
    ax2.loglog(hs, [shockwave_residual(f, xi, eta, h=h) for h in hs], "o-", color="#c23b22")
    ax2.loglog(hs, hs**2 * (shock / 1e-6), "--", color="#777777", label=r"$h^2$")
    ax2.set_xlabel("h")
    ax2.set_ylabel("shock residual")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "moment.png", dpi=110)
    plt.close(fig)
    _write_json(out_dir, "moment.json", report)
    return report, ok


def run_demo(cfg: RunConfig, out_dir: Path) -> Tuple[Dict, bool]:
    summary = _report_skeleton(cfg)
    results = {}
    ok = True
    for name, fn in (
        ("wirtinger", run_wirtinger),
        ("classify", run_classify),
        ("orbits", run_orbits),
        ("plateau", run_plateau),
        ("moment", run_moment),
    ):
        sub = RunConfig(**{**asdict(cfg), "command": name})
        _, passed = fn(sub, out_dir)
        results[name] = bool(passed)
        ok = ok and passed
        print(f"[demo] {name}: {'pass' if passed else 'FAIL'}")
    summary["commands"] = results
    summary["all_passed"] = ok
    _write_json(out_dir, "demo.json", summary)
    return summary, ok


RUNNERS = {
    "wirtinger": run_wirtinger,
    "classify": run_classify,
    "orbits": run_orbits,
    "plateau": run_plateau,
    "moment": run_moment,
    "demo": run_demo,
}


def run_command(cfg: RunConfig) -> Tuple[Dict, bool]:
    cfg.validate()
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return RUNNERS[cfg.command](cfg, out_dir)


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plateaulab",
        description="numerical laboratory for calibrated fillings and CR orbits",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with default option values")
    parser.add_argument("--surface", help="builtin surface id or surface JSON file")
    parser.add_argument("--levels", help="comma-separated slice levels")
    parser.add_argument("--density", type=int, help="points per slice cloud")
    parser.add_argument("--seed", type=int, help="random seed recorded in every output")
    parser.add_argument("--restarts", type=int, help="comass ascent restarts")
    parser.add_argument("--tol", type=float, help="classification tolerance")
    parser.add_argument("--out", help="output directory")
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    values: Dict = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"could not read config file {args.config}: {exc}") from exc
    for key in ("surface", "density", "seed", "restarts", "tol", "out"):
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    if args.levels is not None:
        try:
            values["levels"] = tuple(float(v) for v in args.levels.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"could not parse --levels {args.levels!r}") from exc
    elif "levels" in values and values["levels"] is not None:
        values["levels"] = tuple(float(v) for v in values["levels"])
    allowed = {f.name for f in RunConfig.__dataclass_fields__.values()}
    unknown = set(values) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(command=args.command, **values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        report, ok = run_command(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    print(f"{cfg.command}: {'all checks passed' if ok else 'CHECKS FAILED'} "
          f"(outputs in {cfg.out})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
