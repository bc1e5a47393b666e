"""Command-line front end.

Every subcommand reads a JSON configuration::

    {"physics": {"omega": [0, 0, 0.5], "N": 2.0},
     "ellipsoid": {"semi_axes": [1, 1, 1]}}

writes its CSV/JSON outputs into ``--out`` and finishes with ``manifest.json``.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.  Failures are
reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, KelvinWavesError
from .geometry import Ellipsoid, best_chart, chart_coordinates
from .model import PhysicalConfig, classify_frequency, frequency_bounds

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
MANIFEST = "manifest.json"


@dataclass
class RunManifest:
    config_sha256: str
    version: str
    subcommand: str
    parameters: dict
    seed: int | None
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)


@dataclass
class RunContext:
    cfg: PhysicalConfig
    ellipsoid: Ellipsoid
    out: Path
    outputs: list = field(default_factory=list)

    def path(self, name):
        self.outputs.append(name)
        return self.out / name


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _atomic_json(path: Path, obj):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".manifest-", suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_config(path):
    """Parse the configuration file; returns (PhysicalConfig, Ellipsoid, sha256 of the raw bytes)."""
    raw = Path(path).read_bytes()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "physics" not in data:
        raise ConfigError("config must be an object with a 'physics' block")
    cfg = PhysicalConfig.from_dict(data["physics"])
    ell = data.get("ellipsoid", {"semi_axes": [1.0, 1.0, 1.0]})
    if not isinstance(ell, dict) or "semi_axes" not in ell:
        raise ConfigError("'ellipsoid' block needs 'semi_axes'")
    try:
        ellipsoid = Ellipsoid.from_dict(ell)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, ellipsoid, hashlib.sha256(raw).hexdigest()


# ---------------------------------------------------------------------------
# subcommands

def cmd_bands(ctx: RunContext, args):
    b = frequency_bounds(ctx.cfg)
    out = {"omega_minus": b.omega_minus, "omega_plus": b.omega_plus}
    write_json(ctx.path("bands.json"), out)
    print(json.dumps(out))


def cmd_ellipticity_map(ctx: RunContext, args):
    from .symbols import classify_many

    # cell-centred longitude/latitude grid on the unit sphere, pushed to E
    lon = -math.pi + (np.arange(args.nlon) + 0.5) * 2 * math.pi / args.nlon
    lat = -math.pi / 2 + (np.arange(args.nlat) + 0.5) * math.pi / args.nlat
    la, lo = np.meshgrid(lat, lon, indexing="ij")
    y = np.stack([np.cos(la) * np.cos(lo), np.cos(la) * np.sin(lo), np.sin(la)], -1).reshape(-1, 3)
    x = y * np.array(ctx.ellipsoid.semi_axes)
    status = classify_many(ctx.cfg, args.omega, ctx.ellipsoid.normal_covector(x))
    rows = []
    for xi, st in zip(x, status):
        c = best_chart(ctx.ellipsoid, xi)
        q = chart_coordinates(ctx.ellipsoid, c, xi)
        rows.append((c, q[0], q[1], xi[0], xi[1], xi[2], st.value))
    write_csv(ctx.path("ellipticity_map.csv"), ["chart_id", "q1", "q2", "x1", "x2", "x3", "status"], rows)


def _method(args, n):
    if args.method != "auto":
        return args.method
    return "direct" if n <= AUTO_DIRECT_MAX else "graded"


AUTO_DIRECT_MAX = 10


def _degree_spectrum(cfg, ellipsoid, n, method):
    """(eigenvalues, residuals) of the eigenpairs new at degree n."""
    from . import galerkin, graded

    if method == "graded":
        hp, g = graded.degree_block_matrices(cfg, ellipsoid, n)
        res = galerkin.solve_spectrum(hp, g, n)
        return res.eigenvalues, res.residuals
    res = galerkin.degree_block(cfg, ellipsoid, n)
    return res.eigenvalues, res.residuals


def cmd_spectrum(ctx: RunContext, args):
    rows = []
    for n in range(0, args.nmax + 1):
        w, r = _degree_spectrum(ctx.cfg, ctx.ellipsoid, n, _method(args, n))
        for i, (wi, ri) in enumerate(zip(w, r)):
            rows.append((n, i, wi, classify_frequency(ctx.cfg, wi).value, ri))
    write_csv(ctx.path("spectrum.csv"), ["n", "index", "omega", "band", "residual"], rows)


def cmd_count(ctx: RunContext, args):
    from .galerkin import count_low_band

    rows = []
    for n in range(1, args.nmax + 1):
        w, _ = _degree_spectrum(ctx.cfg, ctx.ellipsoid, n, _method(args, n))
        rows.append((n, count_low_band(ctx.cfg, w), 2 * n + 3))
    write_csv(ctx.path("count.csv"), ["n", "count_low_band", "bound_2n_plus_3"], rows)


def cmd_pressure_harmonics(ctx: RunContext, args):
    from .galerkin import degree_block, pressure_from_eigenpair, state_fields
    from .harmonics import pressure_purity

    rows, skipped = [], []
    for n in range(1, args.nmax + 1):
        res = degree_block(ctx.cfg, ctx.ellipsoid, n)
        for j, w in enumerate(res.eigenvalues):
            u, rho = state_fields(res.basis, res.eigenvectors[:, j])
            phi = pressure_from_eigenpair(ctx.cfg, u, rho, w)
            pur = pressure_purity(phi, ctx.ellipsoid.lmap, n + 1)
            if pur.degenerate:
                skipped.append({"n": n, "index": j, "omega": w})
                continue
            rows.append((n, w, n + 1, pur.value))
    write_csv(ctx.path("pressure_harmonics.csv"), ["n", "omega", "l_target", "purity"], rows)
    write_json(ctx.path("pressure_harmonics.json"), {"degenerate_pressures": skipped, "rows": len(rows)})


def read_seeds(path):
    seeds = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"chart", "q1", "q2", "p_angle"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ConfigError(f"seeds file needs columns {sorted(need)}")
        for row in reader:
            try:
                seeds.append((int(row["chart"]), float(row["q1"]), float(row["q2"]), float(row["p_angle"])))
            except ValueError as exc:
                raise ConfigError(f"bad seed row {row!r}: {exc}") from exc
    if not seeds:
        raise ConfigError("seeds file is empty")
    return seeds


def cmd_rays(ctx: RunContext, args):
    from .errors import InsufficientData
    from .raytrace import RaySystem, detect_attractor, integrate_ray, seed_ray

    seeds = read_seeds(args.seeds)
    system = RaySystem(ctx.cfg, args.omega, ctx.ellipsoid)

    def run(seed):
        chart, q1, q2, ang = seed
        s0 = seed_ray(ctx.cfg, args.omega, ctx.ellipsoid, chart, (q1, q2), ang)
        traj = integrate_ray(system, s0, args.T, rtol=args.tol, atol=args.tol * 1e-2, dt_init=args.dt_init)
        try:
            report = detect_attractor(traj, ctx.ellipsoid).to_dict()
        except InsufficientData as exc:
            report = {"classification": None, "error": exc.code, "message": str(exc)}
        return traj, report

    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    reports = []
    header = ["t", "chart_id", "q1", "q2", "p1", "p2", "log_scale", "x1", "x2", "x3", "k"]
    for i, (traj, rep) in enumerate(results):
        rows = zip(traj.t, traj.chart, traj.q[:, 0], traj.q[:, 1], traj.p[:, 0], traj.p[:, 1],
                   traj.log_scale, traj.x[:, 0], traj.x[:, 1], traj.x[:, 2], traj.k)
        write_csv(ctx.path(f"ray_{i:03d}.csv"), header, rows)
        reports.append({"ray": i, "seed": list(seeds[i]), "steps": len(traj), "chart_switches": traj.switches,
                        "max_abs_k": float(np.max(np.abs(traj.k))), **rep})
    write_json(ctx.path("attractors.json"), reports)


def cmd_weyl(ctx: RunContext, args):
    from .weyl import conjecture_report

    b = args.b if args.b is not None else frequency_bounds(ctx.cfg).omega_minus
    rep = conjecture_report(ctx.cfg, ctx.ellipsoid, (args.a, b), args.nmax, n_samples=args.samples,
                            seed=args.seed, method="graded" if args.method == "auto" else args.method,
                            threads=args.threads)
    write_csv(ctx.path("weyl.csv"), ["n", "measured", "predicted", "ratio"], rep.rows())
    write_json(ctx.path("weyl.json"), rep.to_dict())


COMMANDS = {
    "bands": cmd_bands,
    "ellipticity-map": cmd_ellipticity_map,
    "spectrum": cmd_spectrum,
    "count": cmd_count,
    "pressure-harmonics": cmd_pressure_harmonics,
    "rays": cmd_rays,
    "weyl": cmd_weyl,
}


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--out", default="kelvinwaves-out", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="RNG seed")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads")

    p = argparse.ArgumentParser(prog="kelvinwaves", description="Gravito-inertial surface waves in ellipsoids.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("bands", parents=[common], help="band edges omega_-, omega_+")

    s = sub.add_parser("ellipticity-map", parents=[common], help="classify the boundary on a lon/lat grid")
    s.add_argument("--omega", type=float, required=True)
    s.add_argument("--nlon", type=_positive_int, default=360)
    s.add_argument("--nlat", type=_positive_int, default=180)

    for name, hlp in [("spectrum", "Galerkin eigenvalues by degree"), ("count", "low-band counts by degree")]:
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--nmax", type=int, required=True)
        s.add_argument("--method", choices=["auto", "direct", "graded"], default="auto")

    s = sub.add_parser("pressure-harmonics", parents=[common], help="spherical-harmonic purity of eigenpressures")
    s.add_argument("--nmax", type=_positive_int, required=True)

    s = sub.add_parser("rays", parents=[common], help="trace boundary rays and look for attractors")
    s.add_argument("--seeds", required=True, help="CSV with columns chart,q1,q2,p_angle")
    s.add_argument("--omega", type=float, required=True)
    s.add_argument("--T", type=float, default=100.0)
    s.add_argument("--dt-init", type=float, default=1e-2)
    s.add_argument("--tol", type=float, default=1e-10)

    s = sub.add_parser("weyl", parents=[common], help="Monte Carlo evidence for the counting conjecture")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=None, help="upper end (default omega_-)")
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--nmax", type=_positive_int, default=10)
    s.add_argument("--method", choices=["auto", "direct", "graded"], default="auto")
    return p


def _validate(args):
    if getattr(args, "nmax", 0) is not None and getattr(args, "nmax", 0) < 0:
        raise ConfigError("--nmax must be >= 0")
    if args.command in ("ellipticity-map", "rays"):
        from .model import require_low_band

        require_low_band(args._cfg, args.omega)
    if args.command == "rays" and not (args.T > 0 and args.dt_init > 0 and args.tol > 0):
        raise ConfigError("--T, --dt-init and --tol must be positive")
    if args.command == "weyl" and args.samples < 10_000:
        raise ConfigError("--samples must be at least 10000")


def _fail(exc, code):
    err = {"error": getattr(exc, "code", type(exc).__name__), "message": str(exc), "exit_code": code}
    print(json.dumps(err), file=sys.stderr)
    return code


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg, ellipsoid, digest = load_config(args.config)
        args._cfg = cfg
        _validate(args)
    except FileNotFoundError as exc:
        return _fail(exc, EXIT_INVALID)
    except (KelvinWavesError, ValueError, OSError) as exc:
        return _fail(exc, EXIT_INVALID)
    del args._cfg
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(cfg, ellipsoid, out)
    try:
        COMMANDS[args.command](ctx, args)
    except (FileNotFoundError, ConfigError) as exc:
        return _fail(exc, EXIT_INVALID)
    except ArithmeticError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except (KelvinWavesError, ValueError) as exc:
        return _fail(exc, EXIT_INVALID)
    params = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out", "seed")}
    manifest = RunManifest(digest, __version__, args.command, params, args.seed,
                           time.perf_counter() - t0, list(ctx.outputs))
    _atomic_json(out / MANIFEST, asdict(manifest))
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
