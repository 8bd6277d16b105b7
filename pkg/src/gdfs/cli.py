"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 I/O error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import fourier as ft
from . import io as gio
from . import symmetry as sym
from .catalog import get_function
from .manifolds import REGISTERED, get_manifold
from .verify import run_battery

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4

# random evaluation points written by approx
APPROX_POINTS = 200


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    manifold: str | None = None
    params: dict = field(default_factory=dict)
    function: str | None = None
    degree: int | None = None
    degrees: list[int] | None = None
    grid: int | None = None
    shape: str = "circular"
    seed: int = an.DEFAULT_SEED
    out: str | None = None


def _int_list(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


def build_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    params = dict(base.get("params", {}))
    for item in args.param or []:
        if "=" not in item:
            raise ConfigError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()

    def pick(name, default=None):
        value = getattr(args, name, None)
        return base.get(name, default) if value is None else value

    try:
        degrees = pick("degrees")
        cfg = RunConfig(
            command=args.command,
            manifold=pick("manifold"),
            params=params,
            function=pick("function"),
            degree=None if pick("degree") is None else int(pick("degree")),
            degrees=None if degrees is None else _int_list(degrees),
            grid=None if pick("grid") is None else int(pick("grid")),
            shape=pick("shape", "circular"),
            seed=int(pick("seed", an.DEFAULT_SEED)),
            out=pick("out"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad option value: {exc}") from exc
    if cfg.shape not in ("circular", "rectangular"):
        raise ConfigError(f"unknown --shape {cfg.shape!r}")
    return cfg


def _manifold(cfg: RunConfig):
    if not cfg.manifold:
        raise ConfigError("--manifold is required")
    try:
        return get_manifold(cfg.manifold, cfg.params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _function(cfg: RunConfig, t):
    if not cfg.function:
        raise ConfigError("--function is required")
    try:
        return get_function(cfg.function, t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid(cfg: RunConfig, t, h: int) -> ft.GridSpec:
    if cfg.grid is None:
        return ft.default_grid(t.d, h)
    if cfg.grid < 2 or cfg.grid % 2:
        raise ConfigError("--grid must be an even integer >= 2")
    grid = ft.GridSpec((cfg.grid,) * t.d, 0.5)
    if min(grid.window()) < h:
        raise ConfigError(f"--grid {cfg.grid} cannot resolve degree {h}")
    return grid


def _out_dir(cfg: RunConfig) -> Path:
    if not cfg.out:
        raise ConfigError("--out is required")
    path = Path(cfg.out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _emit(obj) -> None:
    sys.stdout.write(gio.dumps(obj))


def run_info(cfg: RunConfig) -> int:
    t = _manifold(cfg)
    report = t.describe()
    report["registered"] = list(REGISTERED)
    _emit(report)
    return EXIT_OK


def run_approx(cfg: RunConfig) -> int:
    t = _manifold(cfg)
    entry, f = _function(cfg, t)
    if cfg.degree is None or cfg.degree < 0:
        raise ConfigError("--degree must be a non-negative integer")
    h = cfg.degree
    grid = _grid(cfg, t, h)
    out = _out_dir(cfg)

    c = ft.coefficients(ft.sample_dfs(t, f, grid), t.name)
    omega = ft.index_set(t, h, cfg.shape)
    union = sorted(sym.orbit_union(t.group, omega))
    rng = np.random.default_rng(cfg.seed)
    x = np.concatenate([t.sample_d1(rng, APPROX_POINTS), t.d2_representatives(rng)])
    xi = t.phi(x)
    exact = np.asarray(f(xi), dtype=complex)
    approx = ft.dfs_partial_sum(t, c, omega, xi)
    err = np.abs(exact - approx)
    if not np.all(np.isfinite(err)):
        raise FloatingPointError("non-finite values in the approximation")

    header = [f"x{j + 1}" for j in range(t.d)] + [f"xi{j + 1}" for j in range(t.dprime)]
    header += ["f_re", "f_im", "approx_re", "approx_im", "abs_error"]
    rows = [
        list(map(float, x[k])) + list(map(float, xi[k]))
        + [exact[k].real, exact[k].imag, approx[k].real, approx[k].imag, err[k]]
        for k in range(len(x))
    ]
    gio.write_coefficients(out / "coefficients.json", c, t.name, t.dprime, union)
    gio.write_csv(out / "evaluation.csv", header, rows)
    summary = {
        "manifold": t.name,
        "function": entry.id,
        "degree": h,
        "shape": cfg.shape,
        "grid": list(grid.sizes),
        "basis_size": len(omega),
        "points": len(x),
        "max_abs_error": float(err.max()),
    }
    if entry.cls is not None and entry.cls.admits_rate(t.d) and h > 0:
        m = an.error_constant(t.d, t.dprime, entry.cls.k, entry.cls.alpha, cfg.shape)
        summary["bound"] = m * entry.norm_upper_bound * h ** an.theoretical_rate(t.d, entry.cls.k, entry.cls.alpha)
    _emit(summary)
    return EXIT_OK


def run_convergence(cfg: RunConfig) -> int:
    t = _manifold(cfg)
    entry, f = _function(cfg, t)
    degrees = cfg.degrees
    if not degrees or len(degrees) < 3:
        raise ConfigError("--degrees needs at least 3 values")
    if any(b <= a for a, b in zip(degrees, degrees[1:])) or degrees[0] < 1:
        raise ConfigError("--degrees must be positive and strictly increasing")
    if cfg.grid is not None:
        raise ConfigError("--grid is not used by convergence (grids follow each degree)")
    out = _out_dir(cfg)
    record = an.convergence_study(
        t, f, degrees, seed=cfg.seed, cls=entry.cls, norm_upper_bound=entry.norm_upper_bound,
        shape=cfg.shape, label=entry.id,
    )
    rate = None
    if entry.cls is not None and entry.cls.admits_rate(t.d):
        rate = an.theoretical_rate(t.d, entry.cls.k, entry.cls.alpha)
    try:
        fit = an.fit_rate(record)
        fit_json = {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared, "degenerate": False}
    except ValueError:
        fit_json = {"slope": None, "intercept": None, "r_squared": None, "degenerate": True}
    fit_json.update({
        "theoretical_rate": rate,
        "manifold": t.name,
        "function": entry.id,
        "shape": cfg.shape,
        "max_sup_error": float(record.errors.max()),
    })
    gio.atomic_write(out / "convergence.csv", gio.convergence_csv(record))
    gio.write_json(out / "rate.json", fit_json)
    _emit(fit_json)
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    if (cfg.manifold or "all") == "all":
        targets = [get_manifold(n) for n in REGISTERED]
    else:
        targets = [_manifold(cfg)]
    report = run_battery(targets)
    if cfg.out:
        path = Path(cfg.out)
        if path.parent and not path.parent.exists():
            raise OSError(f"directory {path.parent} does not exist")
        gio.write_json(path, report)
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {"info": run_info, "approx": run_approx, "convergence": run_convergence, "verify": run_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdfs", description="Fourier approximation on manifolds via the torus")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("info", "describe a manifold"),
        ("approx", "approximate a catalog function and write coefficients and point errors"),
        ("convergence", "run a convergence study and fit the rate"),
        ("verify", "run the verification battery"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifold")
        p.add_argument("--param", action="append", metavar="K=V")
        p.add_argument("--function")
        p.add_argument("--degree", type=int)
        p.add_argument("--degrees")
        p.add_argument("--grid", type=int)
        p.add_argument("--shape", choices=("circular", "rectangular"))
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
