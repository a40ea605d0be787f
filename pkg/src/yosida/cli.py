"""Command-line experiment runner.

    yosida catalog
    yosida scan --function weierstrass --out runs/wp
    yosida growth --config wp.ini
    yosida verify --suite pole_counts

Configuration is an INI file; command-line flags override it.  Exit codes:
0 success, 1 verification or computation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import catalog, io
from .catalog import MeromorphicMap, recentre_map
from .expansion import convergence_report
from .locate import AnnulusSector, Disc, PointSet, Rect, Region, locate_in_region
from .nevanlinna import GROWTH_COLUMNS, geometric_radii, growth_table, order_fit
from .painleve import (
    PInitialData,
    first_integral_drift,
    integrate_ray,
    pole_free_arcs,
    roundtrip_errors,
)
from .rescale import marty_scan, ray_h_samples
from .sphere import ScalingParams
from .verify import ALIASES, SUITES, Context, SuiteResult, run_suite

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "main", "run_subcommand"]

SUBCOMMANDS = ("catalog", "scan", "growth", "rescale", "expand", "painleve", "verify")

_KEYS = {
    "experiment": {"function", "seed", "out", "threads", "manifest", "alpha", "beta"},
    "region": {"shape", "center", "radius", "half_width", "half_height", "r1", "r2", "th1", "th2", "polar_inner", "cell"},
    "locate": {"tol"},
    "growth": {"r0", "r1", "per_decade", "radii", "tol", "t_as", "fprime", "density", "max_init_panels", "model"},
    "rescale": {"h_min", "h_max", "n_moduli", "n_angles", "offset", "grid_radius", "density"},
    "expand": {"m", "recentre", "radii", "test_points", "test_radius", "clearance"},
    "painleve": {"z0", "w0", "w0p", "direction", "r_max", "tol"},
}


class ConfigError(ValueError):
    """Malformed or unknown configuration; reported as a usage error."""


@dataclass
class ExperimentConfig:
    function: str = "weierstrass"
    seed: int = 0
    out: str = "yosida-out"
    threads: int = 1
    manifest: Optional[str] = None
    claimed: Optional[ScalingParams] = None
    sections: dict = field(default_factory=dict)

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def getfloat(self, section: str, key: str, default: float) -> float:
        v = self.get(section, key)
        return default if v is None else float(v)

    def getint(self, section: str, key: str, default: int) -> int:
        v = self.get(section, key)
        return default if v is None else int(v)

    def getcomplex(self, section: str, key: str, default: complex) -> complex:
        v = self.get(section, key)
        return default if v is None else complex(v.replace(" ", ""))

    def getbool(self, section: str, key: str, default: bool) -> bool:
        v = self.get(section, key)
        if v is None:
            return default
        if v.lower() in ("1", "yes", "true", "on"):
            return True
        if v.lower() in ("0", "no", "false", "off"):
            return False
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {v!r}")

    def getlist(self, section: str, key: str) -> Optional[list[float]]:
        v = self.get(section, key)
        return None if v is None else [float(t) for t in v.split(",") if t.strip()]


def load_config(text: Optional[str] = None) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    if text:
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
    sections = {}
    for s in cp.sections():
        allowed = _KEYS.get(s)
        if allowed is None:
            raise ConfigError(f"unknown section [{s}]")
        extra = sorted(set(cp[s]) - allowed)
        if extra:
            raise ConfigError(f"unknown keys in [{s}]: {', '.join(extra)}")
        sections[s] = dict(cp[s])
    ex = sections.get("experiment", {})
    claimed = None
    if "alpha" in ex or "beta" in ex:
        claimed = ScalingParams(float(ex.get("alpha", 0.0)), float(ex.get("beta", 0.0)))
    try:
        return ExperimentConfig(
            function=ex.get("function", "weierstrass"),
            seed=int(ex.get("seed", 0)),
            out=ex.get("out", "yosida-out"),
            threads=int(ex.get("threads", 1)),
            manifest=ex.get("manifest"),
            claimed=claimed,
            sections=sections,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- helpers

class _Usage(Exception):
    pass


class _Failure(Exception):
    pass


def _manifest(cfg: ExperimentConfig) -> dict:
    try:
        return catalog.load_manifest(cfg.manifest)
    except (OSError, configparser.Error) as exc:
        raise _Usage(f"manifest: {exc}") from exc


def _function(cfg: ExperimentConfig) -> MeromorphicMap:
    try:
        return catalog.build(cfg.function, _manifest(cfg))
    except KeyError as exc:
        raise _Usage(f"catalog: {exc.args[0]}") from exc
    except ValueError as exc:
        raise _Usage(f"catalog: {exc}") from exc


def _region(cfg: ExperimentConfig, default_radius: float) -> Region:
    shape = cfg.get("region", "shape", "disc")
    c = cfg.getcomplex("region", "center", 0j)
    if shape == "disc":
        return Disc(c, cfg.getfloat("region", "radius", default_radius))
    if shape == "rect":
        return Rect(c, cfg.getfloat("region", "half_width", default_radius), cfg.getfloat("region", "half_height", default_radius))
    if shape == "annulus":
        return AnnulusSector(
            cfg.getfloat("region", "r1", 1.0),
            cfg.getfloat("region", "r2", default_radius),
            cfg.getfloat("region", "th1", -math.pi),
            cfg.getfloat("region", "th2", math.pi),
            c,
        )
    raise ConfigError(f"[region] shape must be disc, rect or annulus, got {shape!r}")


def _locate_kw(cfg: ExperimentConfig) -> dict:
    kw = {}
    if cfg.get("region", "polar_inner") is not None:
        kw["polar_inner"] = cfg.getfloat("region", "polar_inner", 1.0)
    if cfg.get("region", "cell") is not None:
        kw["cell"] = cfg.getfloat("region", "cell", 1.0)
    return kw


def _cached_points(cfg: ExperimentConfig, f: MeromorphicMap, region: Region, out: Path) -> tuple[PointSet, bool, Path]:
    tol = cfg.getfloat("locate", "tol", 1e-9)
    kw = _locate_kw(cfg)
    section = _manifest(cfg).get(cfg.function, {})
    extra = ";".join(f"{k}={section[k]}" for k in sorted(section)) + "|" + ";".join(f"{k}={kw[k]!r}" for k in sorted(kw))
    cache = io.PointSetCache(out / "cache")
    key = cache.key(f.name, region, tol, cfg.seed, extra)
    ps, hit = cache.fetch(key, lambda: locate_in_region(f, region, tol, seed=cfg.seed, **kw))
    return ps, hit, cache.path(key)


def _radii(cfg: ExperimentConfig) -> np.ndarray:
    listed = cfg.getlist("growth", "radii")
    if listed is not None:
        return np.array(sorted(listed))
    return geometric_radii(cfg.getfloat("growth", "r0", 5.0), cfg.getfloat("growth", "r1", 30.0), cfg.getint("growth", "per_decade", 12))


def _say(msg: str) -> None:
    print(msg, flush=True)


# ---------------------------------------------------------------- subcommands

def cmd_catalog(cfg: ExperimentConfig, args) -> int:
    man = _manifest(cfg)
    rows = []
    for name in sorted(man):
        f = catalog.build(name, man)
        cl = f.claimed
        rows.append([name, man[name].get("constructor", name), "" if cl is None else f"{cl.alpha:g}", "" if cl is None else f"{cl.beta:g}",
                     "yes" if f.known_points is not None else "no"])
        _say(f"{name:<20} {rows[-1][1]:<22} claimed=({rows[-1][2] or '-'}, {rows[-1][3] or '-'}) oracle={rows[-1][4]}")
    if args.out:
        io.write_csv(Path(cfg.out) / "catalog.csv", ["name", "constructor", "alpha", "beta", "oracle"], rows, "yosida-catalog v1")
    return 0


def cmd_scan(cfg: ExperimentConfig, args) -> int:
    f = _function(cfg)
    out = Path(cfg.out)
    region = _region(cfg, 20.0)
    ps, hit, path = _cached_points(cfg, f, region, out)
    target = out / f"{f.name}.pointset"
    io.atomic_write(target, path.read_text(encoding="utf-8"))
    _say(f"scan: {len(ps.zeros())} zero records, {len(ps.poles())} pole records, complete={ps.complete}, "
         f"{'cache hit' if hit else 'computed'} -> {target}")
    return 0 if ps.complete else 1


def cmd_growth(cfg: ExperimentConfig, args) -> int:
    f = _function(cfg)
    out = Path(cfg.out)
    radii = _radii(cfg)
    region = Disc(0j, cfg.getfloat("region", "radius", 1.05 * float(radii[-1])))
    ps, hit, _ = _cached_points(cfg, f, region, out)
    kw = {}
    if cfg.get("growth", "density") is not None:
        kw["density"] = cfg.getfloat("growth", "density", 4.0)
    if cfg.get("growth", "max_init_panels") is not None:
        kw["max_init_panels"] = cfg.getint("growth", "max_init_panels", 2048)
    rows = growth_table(
        f, radii, ps, cfg.getfloat("growth", "tol", 1e-8),
        with_T_as=cfg.getbool("growth", "t_as", False),
        with_fprime=cfg.getbool("growth", "fprime", True),
        **kw,
    )
    io.write_csv(out / f"{f.name}.growth.csv", GROWTH_COLUMNS, [[getattr(r, c) for c in GROWTH_COLUMNS] for r in rows], "yosida-growth v1")
    fits = {}
    models = [cfg.get("growth", "model")] if cfg.get("growth", "model") else ["power", "log", "log-squared"]
    for fld in ("ninf", "T_nev"):
        for model in models:
            try:
                fits[f"{fld}:{model}"] = order_fit(rows, fld, model).as_dict()
            except ValueError as exc:
                fits[f"{fld}:{model}"] = {"error": str(exc)}
    io.write_json(out / f"{f.name}.growth.json", {"function": f.name, "rows": [r.as_dict() for r in rows], "fits": fits,
                                                  "points_complete": ps.complete}, "yosida-growth v1")
    for k, v in fits.items():
        if "coefficient" in v:
            _say(f"growth: {k} coefficient={v['coefficient']:.6g} residual={v['residual']:.6g}")
    return 0 if ps.complete else 1


def cmd_rescale(cfg: ExperimentConfig, args) -> int:
    f = _function(cfg)
    params = cfg.claimed or f.claimed or ScalingParams(0.0, 0.0)
    hs = ray_h_samples(
        cfg.getfloat("rescale", "h_min", 5.0), cfg.getfloat("rescale", "h_max", 100.0),
        cfg.getint("rescale", "n_moduli", 8), cfg.getint("rescale", "n_angles", 8), cfg.getfloat("rescale", "offset", 0.0),
    )
    rep = marty_scan(f, params, hs, cfg.getfloat("rescale", "grid_radius", 1.0), cfg.getint("rescale", "density", 16))
    io.write_json(Path(cfg.out) / f"{f.name}.normality.json", rep.as_dict(), "yosida-normality v1")
    _say(f"rescale: {f.name} (alpha={params.alpha:g}, beta={params.beta:g}) max sharp={rep.m_f:.6g} "
         f"bounded={rep.sups_bounded} nonconstant={rep.nonconstant} first_category={rep.first_category}")
    return 0


def _test_points(ps: PointSet, n: int, radius: float, clearance: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    special = ps.positions
    out = []
    for _ in range(1000 * n):
        if len(out) == n:
            break
        z = radius * math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if special.size == 0 or np.min(np.abs(special - z)) >= clearance:
            out.append(z)
    if len(out) < n:
        raise _Failure("expand: could not place test points away from the special points")
    return np.array(out)


def cmd_expand(cfg: ExperimentConfig, args) -> int:
    f = _function(cfg)
    out = Path(cfg.out)
    radii = cfg.getlist("expand", "radii") or [10.0, 15.0, 20.0, 25.0, 30.0]
    j0 = f.evaluate(np.array([0j]))
    singular_origin = abs(j0.g0[0]) < 1e-12  # zero of f or of 1/f
    c = cfg.getcomplex("expand", "recentre", 1.0 / 3.0 if singular_origin else 0j)
    g = recentre_map(f, c) if c != 0 else f
    region = Disc(0j, 1.05 * max(radii) + 1.0)
    tol = cfg.getfloat("locate", "tol", 1e-9)
    cache = io.PointSetCache(out / "cache")
    key = cache.key(g.name, region, tol, cfg.seed, f"recentre={c!r}")
    ps, _ = cache.fetch(key, lambda: locate_in_region(g, region, tol, seed=cfg.seed, **_locate_kw(cfg)))
    pts = _test_points(ps, cfg.getint("expand", "test_points", 20), cfg.getfloat("expand", "test_radius", 1.5),
                       cfg.getfloat("expand", "clearance", 0.25), cfg.seed)
    rep = convergence_report(g, ps.zeros(), ps.poles(), cfg.getint("expand", "m", 2), radii, pts)
    io.write_csv(out / f"{f.name}.expansion.csv", ["R", "max_err", "rms_err"], rep.rows(), "yosida-expansion v1")
    payload = rep.as_dict()
    payload.update(function=f.name, recentre=c, points_complete=ps.complete)
    io.write_json(out / f"{f.name}.expansion.json", payload, "yosida-expansion v1")
    for R, e, _ in rep.rows():
        _say(f"expand: R={R:g} max_err={e:.6g}")
    _say(f"expand: slope={rep.ml_slope:.6g}")
    return 0 if ps.complete else 1


def cmd_painleve(cfg: ExperimentConfig, args) -> int:
    init = PInitialData(
        cfg.getcomplex("painleve", "z0", 0j), cfg.getcomplex("painleve", "w0", 0j), cfg.getcomplex("painleve", "w0p", 0j)
    )
    d = cfg.getcomplex("painleve", "direction", 1.0 + 0j)
    traj = integrate_ray(init, d / abs(d), cfg.getfloat("painleve", "r_max", 50.0), cfg.getfloat("painleve", "tol", 1e-10))
    out = Path(cfg.out)
    io.write_trajectory(out / "painleve.trajectory", traj)
    arcs = pole_free_arcs(traj)
    drift = max((first_integral_drift(traj, a, b) for a, b in arcs), default=math.nan)
    rt = roundtrip_errors(traj)
    summary = {"poles": len(traj.poles), "span": list(traj.span), "drift_max": drift,
               "roundtrip_max": max(rt, default=math.nan), "pole_positions": [p.p for p in traj.poles]}
    io.write_json(out / "painleve.json", summary, "yosida-painleve v1")
    _say(f"painleve: {len(traj.poles)} poles to t={traj.span[1]:.6g}, drift_max={drift:.3g}, roundtrip_max={summary['roundtrip_max']:.3g}")
    return 0


def cmd_verify(cfg: ExperimentConfig, args) -> int:
    names = list(SUITES) if args.suite in (None, "all") else [args.suite]
    for n in names:
        if n not in SUITES and n not in ALIASES:
            raise _Usage(f"verify: unknown suite {n!r}; known: {', '.join(list(SUITES) + list(ALIASES))}")
    man = _manifest(cfg)
    if args.function is not None and args.function not in man:
        raise _Usage(f"catalog: unknown function {args.function!r}; known: {', '.join(sorted(man))}")
    ctx = Context(args.function, cfg.seed, man)
    lines, ok = [], True
    for n in names:
        try:
            res = run_suite(n, ctx)
        except Exception as exc:  # surfaced as a failed suite, not a crash
            key = ALIASES.get(n, n)
            res = SuiteResult(key, list(SUITES).index(key) + 1, False, {"error": f"{type(exc).__name__}: {exc}"})
        lines.append(res.line())
        _say(lines[-1])
        ok &= res.passed
    if args.out:
        io.atomic_write(Path(cfg.out) / "verify.txt", "\n".join(lines) + "\n")
    return 0 if ok else 1


_COMMANDS = {
    "catalog": cmd_catalog,
    "scan": cmd_scan,
    "growth": cmd_growth,
    "rescale": cmd_rescale,
    "expand": cmd_expand,
    "painleve": cmd_painleve,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------- entry points

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="yosida", description="Experiments on rescaled families of meromorphic functions.")
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", metavar="PATH", help="INI experiment configuration")
    p.add_argument("--function", metavar="NAME", help="catalog function (overrides the config)")
    p.add_argument("--suite", metavar="NAME", help="verify: suite name or 'all'")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--seed", type=int, metavar="N", help="random seed")
    p.add_argument("--threads", type=int, metavar="N", help="worker threads (computations currently run in one thread)")
    return p


def run_subcommand(argv: Sequence[str]) -> int:
    try:
        args = _parser().parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else None
        cfg = load_config(text)
        if args.function is not None:
            cfg.function = args.function
        if args.out is not None:
            cfg.out = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            cfg.threads = args.threads
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, _Usage, OSError) as exc:
        print(f"yosida: {exc}", file=sys.stderr)
        return 2
    except _Failure as exc:
        print(f"yosida: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        mod = type(exc).__module__.replace("yosida.", "")
        print(f"yosida {args.command}: {mod}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run_subcommand(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
