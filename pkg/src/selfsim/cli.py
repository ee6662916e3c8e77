"""Command-line drivers: named example systems in, CSV/JSON files out.

Five commands cover the library surface: ``attractor`` iterates a
set-level system and logs convergence, ``measure`` solves an invariant
density (single- or multi-component), ``fourier`` tabulates the
transform product, ``weyl`` tabulates ball averages over a
cut-and-project point set, and ``padic`` emits the exact coset
densities with a pass/fail check.  Exit codes: 0 success, 1 bad
configuration, 2 non-convergence or a failed exactness check, 3 a
resource cap.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional

import click

from .compactsets import AffineMap, ConvexPolygon, IFSSystem, IntervalSet, iterate_attractor
from .errors import ConfigError, ConvergenceError, ResourceCapError
from .measures import (
    DiscreteMeasure,
    FiniteFamily,
    GridDensity,
    PointMassFamily,
    UniformFamily,
    family_as_grid,
    fourier_hat,
    raster_interval_set,
    raster_polygon,
    solve_density,
)
from .modelsets import project_points, weyl_average
from .multicomponent import MCSystem, solve_mc_density
from .padic import DEFAULT_PRECISION, PadicDensity, solve_padic_system
from .systems import BUILTIN_NAMES, BuiltinSystem, builtin


@dataclass(frozen=True)
class ExperimentConfig:
    """Merged run parameters: system descriptor, numerics, output.

    ``system`` is a builtin name or an inline dict (see
    ``system_from_spec``); every numeric field is validated on
    construction, before any computation starts.
    """

    system: object = None
    out: str = "."
    fmt: str = "csv"
    tol: float = 1e-8
    grid_step: Optional[float] = None
    radii: Optional[tuple] = None
    centers: tuple = (0.0,)
    terms: int = 40
    precision: int = DEFAULT_PRECISION
    max_iter: Optional[int] = None
    k_min: float = 0.0
    k_max: float = 5.0
    k_step: float = 0.01

    def __post_init__(self):
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.grid_step is not None and not self.grid_step > 0:
            raise ConfigError("grid step must be positive")
        if self.radii is not None:
            if not self.radii or any(not float(r) > 0 for r in self.radii):
                raise ConfigError("radii must be positive")
        if self.terms < 1:
            raise ConfigError("terms must be at least 1")
        if self.precision < 2:
            raise ConfigError("K must be at least 2")
        if self.max_iter is not None and self.max_iter < 1:
            raise ConfigError("max-iter must be at least 1")
        if not self.k_step > 0:
            raise ConfigError("k-step must be positive")
        if self.k_max < self.k_min:
            raise ConfigError("k-max must not be below k-min")


def build_config(config_path: Optional[str], defaults=None, **flags) -> ExperimentConfig:
    """Layer defaults, an optional JSON config file, and explicit flags."""
    data = {}
    if config_path is not None:
        try:
            data = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = dict(defaults or {})
    merged.update(data)
    merged.update({k: v for k, v in flags.items() if v is not None})
    if merged.get("radii") is not None:
        merged["radii"] = tuple(float(v) for v in merged["radii"])
    if merged.get("centers") is not None:
        merged["centers"] = tuple(
            tuple(float(u) for u in v) if isinstance(v, (list, tuple)) else float(v)
            for v in merged["centers"]
        )
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc))


# ---------------------------------------------------------------------------
# inline system descriptors


def _family_from_spec(spec) -> object:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("family spec must be a dict with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "uniform":
            region = IntervalSet.closed(float(spec["lo"]), float(spec["hi"]))
            return UniformFamily(region, float(spec.get("mass", 1.0)))
        if kind == "atoms":
            atoms = [(float(loc), float(w)) for loc, w in spec["atoms"]]
            return FiniteFamily(DiscreteMeasure(atoms))
        if kind == "point":
            return PointMassFamily(float(spec["location"]), float(spec.get("mass", 1.0)))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad {kind!r} family spec: {exc}")
    raise ConfigError(f"unknown family kind {kind!r}")


def system_from_spec(spec: dict) -> BuiltinSystem:
    """Build a 1D system from an inline JSON descriptor.

    Recognized keys: ``a`` (the shared contraction), ``maps`` (nested
    per-component translation lists, each entry ``{"t": ...}`` with an
    optional per-map ``"a"``), ``seeds`` / ``windows`` (seed intervals
    as [lo, hi] pairs), ``family`` (single-component measure spec),
    ``sigma`` and ``m`` (multi-component entries and mass vector), and
    an optional ``s`` cross-checked against the family masses.
    """
    if "a" not in spec:
        raise ConfigError("inline system needs the contraction 'a'")
    a = float(spec["a"])
    ifs = seeds = None
    if "maps" in spec:
        try:
            grid = [
                [
                    [
                        AffineMap(float(m.get("a", a)), float(m["t"]))
                        for m in cell
                    ]
                    for cell in row
                ]
                for row in spec["maps"]
            ]
            ifs = IFSSystem(grid)
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigError(f"bad inline maps: {exc}")
        except ValueError as exc:
            raise ConfigError(str(exc))
        raw_seeds = spec.get("seeds", spec.get("windows"))
        if raw_seeds is None:
            raw_seeds = [[-1.0, 1.0]] * ifs.n
        try:
            seeds = tuple(
                IntervalSet.closed(float(lo), float(hi)) for lo, hi in raw_seeds
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad inline seeds: {exc}")
    family = _family_from_spec(spec["family"]) if "family" in spec else None
    mc = None
    if "sigma" in spec:
        sigma = [
            [None if cell is None else _family_from_spec(cell) for cell in row]
            for row in spec["sigma"]
        ]
        try:
            mc = MCSystem(a, sigma, m=spec.get("m"))
        except ValueError as exc:
            raise ConfigError(str(exc))
        if "s" in spec:
            stated = spec["s"]
            for i in range(mc.n):
                for j in range(mc.n):
                    if abs(float(stated[i][j]) - mc.s[i, j]) > 1e-9:
                        raise ConfigError(
                            f"stated s[{i}][{j}] disagrees with the family masses"
                        )
    return BuiltinSystem(
        name="inline",
        summary="inline system from config",
        ifs=ifs,
        seeds=seeds,
        family=family,
        contraction=a,
        mc=mc,
    )


def resolve_system(cfg: ExperimentConfig) -> BuiltinSystem:
    if cfg.system is None:
        raise ConfigError(
            f"no system given; pass --system or put one in the config "
            f"(builtins: {', '.join(BUILTIN_NAMES)})"
        )
    if isinstance(cfg.system, str):
        return builtin(cfg.system)
    if isinstance(cfg.system, dict):
        return system_from_spec(cfg.system)
    raise ConfigError("system must be a builtin name or an inline dict")


# ---------------------------------------------------------------------------
# output plumbing


def _g17(x) -> str:
    return format(float(x), ".17g")


def _cell(v) -> str:
    if isinstance(v, bool):
        raise TypeError("no boolean cells")
    if isinstance(v, int):
        return str(v)
    return _g17(v)


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid_rows(g: GridDensity):
    if g.dim == 1:
        xs = g.nodes()
        return [(float(x), float(v)) for x, v in zip(xs, g.values)]
    xs, ys = g.nodes()
    rows = []
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            rows.append((float(x), float(y), float(g.values[j, i])))
    return rows


def _grid_json(g: GridDensity) -> dict:
    return {
        "origin": g.origin if g.dim == 1 else list(g.origin),
        "step": g.step,
        "counts": list(g.values.shape),
        "weights": g.values.tolist(),
        "mass": g.mass,
    }


def _write_grid(g: GridDensity, path_base: Path, fmt: str) -> Path:
    if fmt == "csv":
        path = path_base.with_suffix(".csv")
        header = "x,density" if g.dim == 1 else "x,y,density"
        _write_csv(path, header, _grid_rows(g))
    else:
        path = path_base.with_suffix(".json")
        _write_json(path, _grid_json(g))
    return path


def _set_json(s) -> dict:
    if isinstance(s, IntervalSet):
        return {"intervals": [[float(lo), float(hi)] for lo, hi in s.intervals]}
    if isinstance(s, ConvexPolygon):
        return {"vertices": [[float(x), float(y)] for x, y in s.vertices]}
    return {"parts": [_set_json(part) for part in s]}


def _set_rows(s):
    """part,lo,hi rows for interval sets; part,x,y vertex rows for polygons."""
    if isinstance(s, IntervalSet):
        return "part,lo,hi", [
            (k, float(lo), float(hi)) for k, (lo, hi) in enumerate(s.intervals)
        ]
    parts = s if isinstance(s, tuple) else (s,)
    rows = []
    for k, poly in enumerate(parts):
        rows.extend((k, float(x), float(y)) for x, y in poly.vertices)
    return "part,x,y", rows


def _handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            fn(*args, **kwargs)
        except ConfigError as exc:
            _die(str(exc), 1)
        except ConvergenceError as exc:
            _die(str(exc), 2)
        except ResourceCapError as exc:
            _die(str(exc), 3)
        except (ValueError, TypeError) as exc:
            _die(str(exc), 1)

    return wrapper


def _die(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _echo_wrote(path: Path) -> None:
    click.echo(f"wrote {path}")


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(package_name="selfsim", prog_name="selfsim")
def main() -> None:
    """Attractors, self-similar measures, and model-set experiments."""


_system_option = click.option("--system", "system", default=None, help="builtin system name")
_config_option = click.option("--config", "config_path", default=None, type=click.Path(), help="JSON config file")
_out_option = click.option("--out", default=None, help="output directory (default: current)")
_format_option = click.option("--format", "fmt", default=None, help="output format: csv or json (default csv)")


@main.command("attractor")
@_system_option
@_config_option
@_out_option
@_format_option
@click.option("--tol", type=float, default=None, help="Hausdorff stop tolerance (default 1e-12)")
@click.option("--max-iter", "max_iter", type=int, default=None)
@_handled
def cmd_attractor(system, config_path, out, fmt, tol, max_iter) -> None:
    """Iterate a system's union map and write the attractor sets."""
    cfg = build_config(
        config_path,
        defaults={"tol": 1e-12},
        system=system,
        out=out,
        fmt=fmt,
        tol=tol,
        max_iter=max_iter,
    )
    b = resolve_system(cfg)
    if b.ifs is None:
        raise ConfigError(f"system {b.name!r} has no attractor variant")
    log = []
    sets, iters, delta = iterate_attractor(
        b.ifs,
        b.seeds,
        cfg.tol,
        max_iter=cfg.max_iter or 200,
        on_iterate=lambda k, _sets, d: log.append((k, d)),
    )
    out_dir = _out_dir(cfg)
    if cfg.fmt == "csv":
        for i, s in enumerate(sets):
            header, rows = _set_rows(s)
            path = out_dir / f"attractor_component_{i + 1}.csv"
            _write_csv(path, header, rows)
            _echo_wrote(path)
        path = out_dir / "convergence.csv"
        _write_csv(path, "iteration,delta", log)
        _echo_wrote(path)
    else:
        path = out_dir / "attractor.json"
        _write_json(
            path,
            {
                "system": b.name,
                "components": [_set_json(s) for s in sets],
                "iterations": iters,
                "log": [{"iteration": k, "delta": d} for k, d in log],
            },
        )
        _echo_wrote(path)
    click.echo(f"converged in {iters} iterations (delta {delta:.3e})")


@main.command("measure")
@_system_option
@_config_option
@_out_option
@_format_option
@click.option("--grid-step", "grid_step", type=float, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--max-iter", "max_iter", type=int, default=None)
@_handled
def cmd_measure(system, config_path, out, fmt, grid_step, tol, max_iter) -> None:
    """Solve the invariant density and write it as grid data."""
    cfg = build_config(
        config_path,
        system=system,
        out=out,
        fmt=fmt,
        grid_step=grid_step,
        tol=tol,
        max_iter=max_iter,
    )
    b = resolve_system(cfg)
    if not b.has_density:
        raise ConfigError(
            f"system {b.name!r} has atomic translation families and no "
            f"density to solve; try its -max counterpart"
        )
    step = cfg.grid_step if cfg.grid_step is not None else b.default_step
    out_dir = _out_dir(cfg)
    max_iter = cfg.max_iter or 500
    if b.mc is not None:
        result = solve_mc_density(b.mc, step, tol=cfg.tol, max_iter=max_iter)
        files = []
        for i, g in enumerate(result.components):
            base = out_dir / f"density_component_{i + 1}"
            files.append(_write_grid(g, base, cfg.fmt))
        manifest = {
            "system": b.name,
            "n": result.n,
            "masses": [g.mass for g in result.components],
            "target_masses": list(result.masses),
            "grid_step": result.components[0].step,
            "files": [f.name for f in files],
        }
        path = out_dir / "measure.json"
        _write_json(path, manifest)
        for f in files:
            _echo_wrote(f)
        _echo_wrote(path)
        for i, g in enumerate(result.components):
            click.echo(f"component {i + 1} mass {g.mass:.6f}")
        return
    if b.family is None:
        raise ConfigError(f"system {b.name!r} has no measure variant")
    h = family_as_grid(b.family, step)
    g = solve_density(h, b.contraction, tol=cfg.tol, max_iter=max_iter)
    path = _write_grid(g, out_dir / "density", cfg.fmt)
    manifest = {
        "system": b.name,
        "grid_step": g.step,
        "mass": g.mass,
        "files": [path.name],
    }
    mpath = out_dir / "measure.json"
    _write_json(mpath, manifest)
    _echo_wrote(path)
    _echo_wrote(mpath)
    click.echo(f"mass {g.mass:.6f}")


@main.command("fourier")
@_system_option
@_config_option
@_out_option
@_format_option
@click.option("--terms", type=int, default=None, help="product truncation (default 40)")
@_handled
def cmd_fourier(system, config_path, out, fmt, terms) -> None:
    """Tabulate the transform product over a frequency range."""
    cfg = build_config(config_path, system=system, out=out, fmt=fmt, terms=terms)
    b = resolve_system(cfg)
    if b.family is None or b.family.dim != 1:
        raise ConfigError(f"system {b.name!r} has no one-dimensional family")
    a = float(b.contraction)
    count = int(math.floor((cfg.k_max - cfg.k_min) / cfg.k_step + 1e-9)) + 1
    rows = []
    for i in range(count):
        k = cfg.k_min + i * cfg.k_step
        val = fourier_hat(b.family, a, k, cfg.terms)
        rows.append((k, val.real, val.imag))
    out_dir = _out_dir(cfg)
    if cfg.fmt == "csv":
        path = out_dir / "fourier.csv"
        _write_csv(path, "k,re,im", rows)
    else:
        path = out_dir / "fourier.json"
        _write_json(
            path,
            {
                "system": b.name,
                "terms": cfg.terms,
                "rows": [{"k": k, "re": re, "im": im} for k, re, im in rows],
            },
        )
    _echo_wrote(path)
    click.echo(f"{count} frequencies, {cfg.terms} terms each")


@main.command("weyl")
@_system_option
@_config_option
@_out_option
@_format_option
@click.option("--radius", type=float, default=None, help="single ball radius")
@click.option("--radii", "radii_text", default=None, help="comma-separated ball radii")
@click.option("--grid-step", "grid_step", type=float, default=None, help="window indicator raster step")
@_handled
def cmd_weyl(system, config_path, out, fmt, radius, radii_text, grid_step) -> None:
    """Average the window indicator over model-set patches."""
    radii = None
    if radii_text is not None:
        try:
            radii = tuple(float(r) for r in radii_text.split(","))
        except ValueError:
            raise ConfigError(f"cannot parse radii {radii_text!r}")
    elif radius is not None:
        radii = (radius,)
    cfg = build_config(
        config_path, system=system, out=out, fmt=fmt, radii=radii, grid_step=grid_step
    )
    b = resolve_system(cfg)
    if b.scheme is None:
        raise ConfigError(f"system {b.name!r} has no cut-and-project scheme")
    radii = cfg.radii if cfg.radii is not None else b.default_radii
    step = cfg.grid_step if cfg.grid_step is not None else b.weyl_step
    planar = b.scheme.phys_dim == 2
    if planar:
        # scalar centers shift along the first axis
        centers = tuple(
            c if isinstance(c, tuple) else (float(c), 0.0) for c in cfg.centers
        )
        norms = [math.hypot(*c) for c in centers]
    else:
        centers = tuple(
            float(c[0]) if isinstance(c, tuple) else float(c) for c in cfg.centers
        )
        norms = [abs(c) for c in centers]
    reach = max(r + n for r in radii for n in norms)
    patch_radius = int(math.ceil(reach)) + 4  # margin so the rim is populated
    points = project_points(b.scheme, b.window, patch_radius)
    if isinstance(b.window, IntervalSet):
        g = raster_interval_set(b.window, step, float(b.window.measure()))
    else:
        g = raster_polygon(b.window, step, float(b.window.area))
    table = weyl_average(b.scheme, points, g, radii, centers=centers)
    if planar:
        header = "radius,center_x,center_y,average,limit,abs_error"
        rows = [
            (row.radius, row.center[0], row.center[1], row.average, row.limit, row.abs_error)
            for row in table
        ]
    else:
        header = "radius,center,average,limit,abs_error"
        rows = [
            (row.radius, row.center, row.average, row.limit, row.abs_error)
            for row in table
        ]
    out_dir = _out_dir(cfg)
    if cfg.fmt == "csv":
        path = out_dir / "weyl.csv"
        _write_csv(path, header, rows)
    else:
        path = out_dir / "weyl.json"
        _write_json(
            path,
            {
                "system": b.name,
                "points_enumerated": len(points),
                "rows": [
                    {
                        "radius": row.radius,
                        "center": list(row.center) if planar else row.center,
                        "average": row.average,
                        "limit": row.limit,
                        "abs_error": row.abs_error,
                    }
                    for row in table
                ],
            },
        )
    _echo_wrote(path)
    for row in table:
        c = row.center if planar else (row.center,)
        ctext = ",".join(f"{v:g}" for v in c)
        click.echo(
            f"r={row.radius:g} center={ctext}: average {row.average:.6f}, "
            f"limit {row.limit:.6f}, error {row.abs_error:.2e}"
        )


def _padic_expected(precision: int) -> tuple:
    n = 3**precision
    out = []
    for base in (1, 3, 0):
        out.append(
            PadicDensity(
                precision,
                [Fraction(9) if r % 9 == base else Fraction(0) for r in range(n)],
            )
        )
    return tuple(out)


@main.command("padic")
@_config_option
@_out_option
@_format_option
@click.option("--K", "precision", type=int, default=None, help="coset depth (default 5)")
@click.option("--max-iter", "max_iter", type=int, default=None)
@_handled
def cmd_padic(config_path, out, fmt, precision, max_iter) -> None:
    """Solve the 3-adic component system and check the closed form."""
    cfg = build_config(
        config_path, out=out, fmt=fmt, precision=precision, max_iter=max_iter
    )
    comps = solve_padic_system(cfg.precision, max_iter=cfg.max_iter)
    out_dir = _out_dir(cfg)
    if cfg.fmt == "csv":
        for i, c in enumerate(comps):
            rows = [
                (r, w.numerator, w.denominator) for r, w in enumerate(c.weights)
            ]
            path = out_dir / f"padic_component_{i + 1}.csv"
            _write_csv(path, "residue,weight_num,weight_den", rows)
            _echo_wrote(path)
    else:
        path = out_dir / "padic.json"
        _write_json(
            path,
            {
                "precision": cfg.precision,
                "components": [
                    {
                        "component": i + 1,
                        "mass": [c.mass.numerator, c.mass.denominator],
                        "weights": [[w.numerator, w.denominator] for w in c.weights],
                    }
                    for i, c in enumerate(comps)
                ],
            },
        )
        _echo_wrote(path)
    if comps == _padic_expected(cfg.precision):
        click.echo("PASS: densities equal 9 on the residues 1, 3, 0 mod 9")
    else:
        click.echo("FAIL: densities differ from the mod-9 closed form")
        sys.exit(2)


if __name__ == "__main__":
    main()
