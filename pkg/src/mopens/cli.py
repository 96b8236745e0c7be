"""Command-line front end.

    mopens equilibrium --kind single --V 0,0,0.5 --grid 400
    mopens kernel --kind tracy-widom --t-grid -6:4:0.1
    mopens sample --ensemble gue --n 50 --batches 100 --seed 7
    mopens mop --family hermite --nu 2

Settings are resolved as command-line flags over ``--config`` JSON values
over defaults; the resolved settings are echoed to ``manifest.json`` in the
output directory.  Exit codes: 0 success, 2 configuration error,
3 convergence not reached, 4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .io import write_csv, write_json

OUTPUT_ENV = "MOPENS_OUTPUT_DIR"
DEFAULT_OUTPUT = "mopens-output"

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_DEGENERATE = 0, 2, 3, 4
HELP_WIDTH = 88


class ConfigError(ValueError):
    pass


class Degenerate(ArithmeticError):
    pass


class NotConverged(RuntimeError):
    pass


# option tables


@dataclass(frozen=True)
class Opt:
    type: str          # str, int, float, floats, ints, range, flag
    default: object
    help: str
    choices: tuple | None = None
    required: bool = False


COMMON = {
    "out": Opt("str", None, f"output directory (default: ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})"),
    "seed": Opt("int", 0, "random seed"),
    "workers": Opt("int", 1, "worker processes; never changes numerical output"),
}

COMMANDS = {
    "equilibrium": {
        "kind": Opt("str", None, "equilibrium problem", ("single", "source", "twomatrix"), True),
        "V": Opt("floats", (0.0, 0.0, 0.5), "potential V, ascending polynomial coefficients"),
        "a": Opt("float", None, "source strength a > 0 (kind source)"),
        "tau": Opt("float", None, "coupling tau != 0 (kind twomatrix)"),
        "grid": Opt("int", 400, "cells of the real grid of mu_1"),
        "half_width": Opt("float", None, "half width of the real grid (default: 2.5, 5, 4 by kind)"),
        "imag_grid": Opt("int", None, "cells of the imaginary grid (default: 1600 source, 960 twomatrix)"),
        "imag_half_width": Opt("float", None, "half width of the imaginary grid (default: 40 source, 24 twomatrix)"),
        "max_iters": Opt("int", 5000, "solver iteration limit"),
        "tol": Opt("float", 1e-9, "projected-gradient stationarity tolerance"),
        "gap_threshold": Opt("float", 1e-3, "relative density below which cells count as a gap"),
    },
    "kernel": {
        "kind": Opt("str", None, "kernel", ("finite-n", "sine", "airy", "pearcey", "tracy-widom"), True),
        "family": Opt("str", "gue", "weight family (kind finite-n)", ("gue", "hermite", "source", "bessel", "two-matrix")),
        "n": Opt("int", 30, "number of particles |nu| (kind finite-n)"),
        "nu": Opt("ints", None, "multi-index (default: balanced over the weights)"),
        "a": Opt("floats", None, "source strengths or starting points (default: 0 for r=1, 1,-1 for r=2)"),
        "tau": Opt("float", 1.0, "two-matrix coupling"),
        "alpha": Opt("float", 0.0, "squared Bessel order"),
        "t": Opt("float", 0.5, "observation time in (0, 1)"),
        "V": Opt("floats", (0.0, 0.0, 0.5), "potential V, ascending polynomial coefficients"),
        "points": Opt("int", 401, "density grid points (kind finite-n)"),
        "b": Opt("float", 0.0, "Pearcey parameter b"),
        "R": Opt("float", 6.0, "Pearcey contour truncation radius"),
        "m_c": Opt("int", 64, "Pearcey quadrature points per ray"),
        "grid": Opt("int", 5, "points per axis of the kernel grid"),
        "range": Opt("range", (-3.0, 3.0), "kernel grid range lo:hi"),
        "t_grid": Opt("range", (-6.0, 4.0, 0.1), "Tracy-Widom abscissae lo:hi:step"),
        "m": Opt("int", 60, "Nystrom nodes for Tracy-Widom"),
    },
    "sample": {
        "ensemble": Opt("str", None, "ensemble", ("gue", "source", "nibm"), True),
        "n": Opt("int", None, "matrix size", None, True),
        "a": Opt("float", 0.0, "source strength or bridge starting point"),
        "t": Opt("float", 0.5, "bridge time in (0, 1) (ensemble nibm)"),
        "batches": Opt("int", 1, "number of batches"),
        "batch_size": Opt("int", 1, "samples per batch"),
        "bins": Opt("int", 40, "histogram bins"),
        "range": Opt("range", None, "histogram range lo:hi (default: pooled min:max)"),
        "tracy_widom": Opt("flag", False, "compare the largest eigenvalue with Tracy-Widom"),
        "c": Opt("float", 1.0, "Tracy-Widom scaling constant c"),
    },
    "mop": {
        "family": Opt("str", None, "weight family", ("gue", "hermite", "source", "bessel", "two-matrix"), True),
        "nu": Opt("ints", None, "multi-index, e.g. 2 or 1,1,1", None, True),
        "n": Opt("int", None, "weight scale n (default: |nu|)"),
        "a": Opt("floats", None, "source strengths or starting points (default: 0 for r=1, 1,-1 for r=2)"),
        "tau": Opt("float", 1.0, "two-matrix coupling"),
        "alpha": Opt("float", 0.0, "squared Bessel order"),
        "t": Opt("float", 0.5, "observation time in (0, 1)"),
        "V": Opt("floats", (0.0, 0.0, 0.5), "potential V, ascending polynomial coefficients"),
    },
}


def _flag(name):
    return "--" + name.replace("_", "-")


def _show(v, sep=","):
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return sep.join(f"{x:g}" for x in v) if v else "none"
    return str(v)


def _parse_value(opt: Opt, raw, name):
    try:
        if opt.type == "flag":
            return bool(raw)
        if opt.type == "str":
            value = str(raw)
        elif opt.type == "int":
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError
            value = int(raw)
        elif opt.type == "float":
            value = float(raw)
        elif opt.type in ("floats", "ints"):
            cast = float if opt.type == "floats" else int
            items = raw if isinstance(raw, (list, tuple)) else str(raw).split(",")
            value = tuple(cast(str(x).strip()) for x in items if str(x).strip() != "")
            if not value:
                raise ValueError
        elif opt.type == "range":
            items = raw if isinstance(raw, (list, tuple)) else str(raw).split(":")
            value = tuple(float(x) for x in items)
            if len(value) not in (2, 3):
                raise ValueError
        else:
            raise AssertionError(opt.type)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value {raw!r} for {_flag(name)}") from None
    if opt.choices and value not in opt.choices:
        raise ConfigError(f"{_flag(name)} must be one of {', '.join(opt.choices)}")
    return value


def build_parser() -> argparse.ArgumentParser:
    fmt = lambda prog: argparse.HelpFormatter(prog, width=HELP_WIDTH)  # noqa: E731
    parser = argparse.ArgumentParser(prog="mopens", formatter_class=fmt,
                                     description="Multiple orthogonal polynomial ensembles: kernels, "
                                                 "equilibrium problems and samplers.")
    parser.add_argument("--version", action="version", version=f"mopens {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for cmd, table in COMMANDS.items():
        p = sub.add_parser(cmd, formatter_class=fmt, help=f"run the {cmd} computation",
                           argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file of settings (flags override it)")
        for name, opt in {**table, **COMMON}.items():
            # help texts that describe a computed default keep their own wording
            default = "" if opt.required or "(default:" in opt.help else f" (default: {_show(opt.default, ':' if opt.type == 'range' else ',')})"
            text = opt.help + (" [required]" if opt.required else default)
            if opt.type == "flag":
                p.add_argument(_flag(name), dest=name, action="store_true", help=text)
            else:
                metavar = "|".join(opt.choices) if opt.choices else name.upper()
                p.add_argument(_flag(name), dest=name, metavar=metavar, help=text)
    return parser


def resolve(command: str, cli: dict) -> dict:
    """Defaults, then the config file, then command-line flags."""
    table = {**COMMANDS[command], **COMMON}
    settings = {name: opt.default for name, opt in table.items()}
    config_path = cli.pop("config", None)
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, raw in data.items():
            name = key.replace("-", "_")
            if name not in table:
                raise ConfigError(f"unknown config key {key!r}")
            settings[name] = _parse_value(table[name], raw, name)
    for name, raw in cli.items():
        settings[name] = _parse_value(table[name], raw, name)
    for name, opt in table.items():
        if opt.required and settings[name] is None:
            raise ConfigError(f"missing required setting {_flag(name)}")
    if settings["workers"] < 1:
        raise ConfigError("--workers must be at least 1")
    if settings["out"] is None:
        settings["out"] = os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)
    return settings


# commands


def _family(s: dict, nu_default_total: int | None = None):
    from .mop import MultiIndex
    from .weights import WeightFamily

    fam = s["family"]
    r = {"gue": 1, "bessel": 2, "two-matrix": 3}.get(fam)
    if r is None:
        r = len(s["nu"]) if s.get("nu") else (len(s["a"]) if s.get("a") else 2)
    total = nu_default_total if nu_default_total is not None else sum(s["nu"])
    nu = MultiIndex.of(s["nu"]) if s.get("nu") else MultiIndex.balanced(total, r)
    if nu.r != r:
        raise ConfigError(f"family {fam} needs a multi-index with {r} entries")
    scale = s.get("n_scale") or nu.total
    a = s.get("a")
    if a is None:
        a = (0.0,) if r == 1 else (1.0, -1.0) if r == 2 else tuple(np.linspace(1.0, -1.0, r))
    if fam in ("hermite", "source") and len(a) != r:
        raise ConfigError(f"--a needs {r} values for multi-index {nu.entries}")
    if fam == "gue":
        return WeightFamily.gue(scale), nu
    if fam == "hermite":
        return WeightFamily.multiple_hermite(a, s["t"], 1.0, scale), nu
    if fam == "source":
        return WeightFamily.external_source(s["V"], a, scale), nu
    if fam == "bessel":
        return WeightFamily.squared_bessel_pair(s["alpha"], abs(a[0]) or 1.0, s["t"], 1.0), nu
    return WeightFamily.two_matrix_induced(s["V"], s["tau"], scale), nu


def cmd_equilibrium(s: dict, out: Path) -> int:
    from .equilibrium import Grid, active_interval, make_single_ep, make_source_ep, make_twomatrix_ep, \
        minimize, support_gap

    kind = s["kind"]
    hw = s["half_width"] or {"single": 2.5, "source": 5.0, "twomatrix": 4.0}[kind]
    grid = Grid.symmetric(hw, s["grid"])
    if kind == "single":
        problem = make_single_ep(s["V"], grid)
    else:
        cells = s["imag_grid"] or (1600 if kind == "source" else 960)
        ihw = s["imag_half_width"] or (40.0 if kind == "source" else 24.0)
        igrid = Grid.symmetric(ihw, cells)
        if kind == "source":
            if s["a"] is None:
                raise ConfigError("missing required setting --a for kind source")
            problem = make_source_ep(s["V"], s["a"], grid, igrid)
        else:
            if s["tau"] is None:
                raise ConfigError("missing required setting --tau for kind twomatrix")
            problem = make_twomatrix_ep(s["V"], s["tau"], grid, igrid, igrid)
    result = minimize(problem, s["max_iters"], s["tol"])
    diag = result.diagnostics()
    for k, mu in enumerate(result.measures, start=1):
        act = mu.cap_active()
        write_csv(out / f"measure_{k}.csv", ["coordinate", "density", "cap_active"],
                  zip(mu.centers, mu.density, act))
        diag[f"measure_{k}"] = {
            "axis": mu.axis.value,
            "mass": float(np.sum(mu.masses)),
            "gaps": support_gap(mu, s["gap_threshold"]),
            "cap_active_interval": active_interval(mu),
        }
    mu1 = result.measures[0]
    inner = [g for g in support_gap(mu1, s["gap_threshold"]) if g[0] > mu1.grid.lo and g[1] < mu1.grid.hi]
    diag["gap_around_zero"] = any(lo < 0.0 < hi for lo, hi in inner)
    write_json(out / "diagnostics.json", diag)
    if not result.converged:
        raise NotConverged(f"stationarity {result.stationarity:.3e} not below {s['tol']:g} "
                           f"after {result.iterations} iterations")
    return EXIT_OK


def _grid(s):
    lo, hi = s["range"][:2]
    if s["grid"] < 1:
        raise ConfigError("--grid must be positive")
    return np.linspace(lo, hi, s["grid"])


def cmd_kernel(s: dict, out: Path) -> int:
    from . import limits
    from .mop import build_kernel, mean_density

    kind = s["kind"]
    summary = {"kind": kind}
    if kind == "finite-n":
        if s["n"] < 1:
            raise ConfigError("--n must be positive")
        s = dict(s, n_scale=s["n"])
        fam, nu = _family(s, s["n"])
        K = build_kernel(fam, nu)
        lo, hi = K.interval
        x = np.linspace(lo, hi, s["points"])
        write_csv(out / "density.csv", ["x", "density"], zip(x, mean_density(K, x)))
        summary.update(n=K.n, interval=K.interval, integral=K.trace() / K.n, condition=K.condition)
    elif kind in ("sine", "airy"):
        g = _grid(s)
        X, Y = np.meshgrid(g, g, indexing="ij")
        fn = limits.sine_kernel if kind == "sine" else limits.airy_kernel
        V = fn(X, Y)
        write_csv(out / "kernel.csv", ["x", "y", "value"], zip(X.ravel(), Y.ravel(), np.ravel(V)))
    elif kind == "pearcey":
        g = _grid(s)
        params = limits.PearceyParams(s["b"], s["R"], s["m_c"])
        X, Y = np.meshgrid(g, g, indexing="ij")
        A = limits.pearcey_kernel_int(X, Y, params)
        B = limits.pearcey_kernel_ode(X, Y, params)
        diff = np.abs(A - B)
        write_csv(out / "kernel.csv", ["x", "y", "int", "ode", "abs_diff"],
                  zip(X.ravel(), Y.ravel(), A.ravel(), B.ravel(), diff.ravel()))
        summary.update(b=s["b"], max_diff=float(np.max(diff)),
                       max_rel_diff=float(np.max(diff / np.maximum(np.abs(B), 1e-300))))
    else:
        tg = s["t_grid"]
        if len(tg) != 3 or tg[2] <= 0 or tg[1] < tg[0]:
            raise ConfigError("--t-grid needs lo:hi:step with step > 0")
        count = int(np.floor((tg[1] - tg[0]) / tg[2] + 1e-9)) + 1
        t = tg[0] + tg[2] * np.arange(count)
        F = [limits.tracy_widom_cdf(float(v), s["m"]) for v in t]
        write_csv(out / "tracy_widom.csv", ["t", "F"], zip(t, F))
        summary.update(monotone=bool(np.all(np.diff(F) >= 0)))
    write_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_sample(s: dict, out: Path) -> int:
    from .sampling import empirical_density, largest_eigenvalue_cdf, sample_batches

    if s["n"] < 1:
        raise ConfigError("--n must be a positive integer")
    if s["batches"] < 1 or s["batch_size"] < 1 or s["bins"] < 1:
        raise ConfigError("--batches, --batch-size and --bins must be positive")
    params = {"a": s["a"]}
    if s["ensemble"] == "nibm":
        params["t"] = s["t"]
    samples = sample_batches(s["ensemble"], s["n"], s["seed"], s["batches"], s["batch_size"],
                             s["workers"], **params)
    rows = ((k, j, v) for k, smp in enumerate(samples) for j, v in enumerate(smp.eigenvalues))
    write_csv(out / "samples.csv", ["sample_id", "eigenvalue_index", "value"], rows)
    values = np.concatenate([smp.eigenvalues for smp in samples])
    lo, hi = s["range"][:2] if s["range"] else (float(values.min()), float(values.max()))
    if not hi > lo:
        lo, hi = lo - 0.5, hi + 0.5
    hist = empirical_density(samples, np.linspace(lo, hi, s["bins"] + 1))
    write_csv(out / "histogram.csv", ["bin_lo", "bin_hi", "density"],
              zip(hist.edges[:-1], hist.edges[1:], hist.values))
    summary = {"samples": len(samples), "descriptor": samples[0].ensemble, "outside_range": hist.outside}
    if s["tracy_widom"]:
        ecdf = largest_eigenvalue_cdf(samples, c=s["c"])
        write_csv(out / "largest_eigenvalue_cdf.csv", ["t", "empirical_cdf"], zip(ecdf.values, ecdf.levels))
        summary["ks_distance"] = ecdf.ks_distance
    write_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_mop(s: dict, out: Path) -> int:
    from .mop import compute_mop, default_rule, mop_condition, mop_residuals

    if any(v < 0 for v in s["nu"]):
        raise ConfigError("--nu entries must be nonnegative")
    s = dict(s, n_scale=s["n"])
    fam, nu = _family(s)
    rule = default_rule(fam, nu)
    P = compute_mop(fam, nu, rule)
    res = mop_residuals(P, fam, nu, rule)
    write_csv(out / "mop.csv", ["degree", "coefficient"], enumerate(P.to_monomial()))
    labels = [(k, j) for k, nk in enumerate(nu) for j in range(nk)]
    write_csv(out / "residuals.csv", ["weight", "power", "residual"],
              ((k, j, r) for (k, j), r in zip(labels, res)))
    write_json(out / "mop.json", {
        "family": s["family"], "nu": nu.entries, "degree": nu.total,
        "condition": mop_condition(fam, nu, rule),
        "max_residual": float(np.max(np.abs(res))) if res.size else 0.0,
    })
    return EXIT_OK


HANDLERS = {"equilibrium": cmd_equilibrium, "kernel": cmd_kernel, "sample": cmd_sample, "mop": cmd_mop}


def _degeneracy_errors():
    from .limits import ContourTruncationError
    from .mop import NonUniqueMOP, SingularGram
    from .numerics.fredholm import SingularDiscretization
    return (NonUniqueMOP, SingularGram, SingularDiscretization, ContourTruncationError, Degenerate,
            np.linalg.LinAlgError)


def _attach_negative_values(argv):
    # "--t-grid -6:4:0.1" would read the value as an option
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and len(tok) > 1 \
                and tok[0] == "-" and (tok[1].isdigit() or tok[1] == "."):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if ns.command is None:
        parser.print_usage(sys.stderr)
        print("mopens: error: a command is required", file=sys.stderr)
        return EXIT_CONFIG
    cli = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        settings = resolve(ns.command, cli)
        out = Path(settings["out"])
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "manifest.json", {"command": ns.command, "version": __version__,
                                           "settings": settings})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return HANDLERS[ns.command](settings, out)
    except ConfigError as exc:
        print(f"mopens: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotConverged as exc:
        print(f"mopens: not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except _degeneracy_errors() as exc:
        print(f"mopens: numerical degeneracy: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"mopens: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
