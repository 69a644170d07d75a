"""Command-line interface: ``circspec {law,density,simulate,graph,compare}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 capacity exceeded.  Failures also print a JSON object on stderr.

Indices on the command line and in files are one-based (``re_1``, ``--eigen 1``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import analytic, io
from .exceptions import CircSpecError, InvalidParameterError
from .graphs import GraphSpec, graph_columns, graph_spectrum, surrogate_params
from .model import EtaSample, FirstColumn, ModelParams
from .numerics import chi_square, ks_statistic
from .presets import PRESETS, get_preset
from .sampler import (
    DEFAULT_MEMORY_BUDGET,
    Observable,
    auto_edges,
    histogram_build,
    iter_ensemble,
    pool,
    sample_ensemble,
)

DENSITIES = ("ordered", "unordered", "marginal", "pair", "unordered-pair", "re", "im", "wishart")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("config", message, 2)
        raise SystemExit(2)


def _emit_error(kind, message, code, **extra):
    doc = {"error": kind, "message": str(message), "exit_code": code}
    doc.update(extra)
    sys.stderr.write(json.dumps(doc) + "\n")


def _vector(text, n=None):
    try:
        vals = [float(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise InvalidParameterError(f"cannot parse vector {text!r}") from None
    if n is not None and len(vals) == 1:
        vals = vals * n
    return vals


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "y", "on"):
        return True
    if t in ("0", "false", "no", "n", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _grid(text):
    """``MIN:MAX:STEP`` to the inclusive array of grid points (None passes through)."""
    if text is None:
        return None
    try:
        lo, hi, step = (float(Fraction(p)) for p in str(text).split(":"))
    except (ValueError, ZeroDivisionError):
        raise InvalidParameterError(f"grid must be MIN:MAX:STEP, got {text!r}") from None
    if step <= 0 or hi <= lo:
        raise InvalidParameterError("grid needs MAX > MIN and STEP > 0")
    count = int(round((hi - lo) / step))
    return lo + step * np.arange(count + 1)


def _add_model_args(p, graph=True):
    g = p.add_argument_group("model")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--params", metavar="FILE", help="ModelParams JSON document")
    g.add_argument("--n", type=int)
    g.add_argument("--u", help="comma-separated means of a (scalar broadcasts)")
    g.add_argument("--v", help="comma-separated means of b")
    g.add_argument("--sigma2", help="comma-separated variances of a")
    g.add_argument("--tau2", help="comma-separated variances of b")
    g.add_argument("--method", choices=("closed-form", "matrix-product"), default="closed-form")
    if graph:
        _add_graph_args(p)


def _add_graph_args(p):
    g = p.add_argument_group("graph surrogate")
    g.add_argument("--kind", choices=("directed", "undirected", "double"))
    g.add_argument("--p1", type=lambda s: float(Fraction(s)))
    g.add_argument("--p2", type=lambda s: float(Fraction(s)))
    g.add_argument("--tau-scenario", choices=("zero", "eps"), default=None)
    g.add_argument("--epsilon", type=float, default=None)


def _add_output_args(p):
    g = p.add_argument_group("output")
    g.add_argument("--out", metavar="PREFIX", help="write PREFIX.<artifact> files instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--force", action="store_true", help="overwrite existing outputs")


def _graph_spec(args, preset=None):
    base = preset["graph"] if preset and "graph" in preset else None
    if base is None and args.kind is None:
        return None
    kw = base.to_dict() if base is not None else {"n": args.n, "kind": args.kind, "p1": args.p1, "p2": args.p2}
    if base is None and (args.n is None or args.p1 is None):
        raise InvalidParameterError("graph runs need --n and --p1")
    for key in ("tau_scenario", "epsilon"):
        if getattr(args, key, None) is not None:
            kw[key] = getattr(args, key)
    return GraphSpec(**kw)


def _resolve(args):
    """Return ``(params, graph_spec, preset)`` from the model arguments."""
    preset = get_preset(args.preset) if getattr(args, "preset", None) else None
    spec = _graph_spec(args, preset) if hasattr(args, "kind") else None
    if spec is not None:
        return surrogate_params(spec), spec, preset
    if preset is not None:
        return preset["params"], None, preset
    if args.params:
        return io.read_params(args.params), None, None
    if args.n is not None:
        if args.sigma2 is None or args.tau2 is None:
            raise InvalidParameterError("inline parameters need --sigma2 and --tau2")
        n = args.n
        params = ModelParams(
            _vector(args.u or "0", n),
            _vector(args.v or "0", n),
            _vector(args.sigma2, n),
            _vector(args.tau2, n),
        )
        if params.n != n:
            raise InvalidParameterError(f"--n {n} disagrees with vector length {params.n}")
        return params, None, None
    raise InvalidParameterError("no model given: use --preset, --params, inline --n ... or --kind")


def _path(args, suffix):
    return None if args.out is None else f"{args.out}.{suffix}"


def _config(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def _table(args, stem, header, rows):
    """Write one table as ``PREFIX.<stem>.csv`` or ``.json`` per ``--format`` (stdout without ``--out``)."""
    if args.format == "json":
        rows = [[v if isinstance(v, (int, np.integer)) else float(v) for v in r] for r in rows]
        io.write_json(_path(args, f"{stem}.json"), {"columns": list(header), "rows": rows}, args.force)
    else:
        io.write_csv(_path(args, f"{stem}.csv"), header, rows, args.force)


def _write_meta(args, seed=None, params=None, extra=None):
    if args.out is not None:
        doc = io.metadata(args.command, _config(args), seed, params, extra)
        io.write_json(_path(args, "meta.json"), doc, args.force)


# --- law -------------------------------------------------------------------


def cmd_law(args):
    params, spec, _ = _resolve(args)
    law = analytic.spectral_law(params, args.method)
    n2 = 2 * law.n
    nu_rows = [(k + 1, law.nu[k]) for k in range(n2)]
    t_rows = [(k + 1, m + 1, law.T[k, m]) for k in range(n2) for m in range(n2)]
    if args.format == "json":
        doc = {"n": law.n, "nu": law.nu.tolist(), "T": law.T.tolist(), "params": params.to_dict()}
        io.write_json(_path(args, "json"), doc, args.force)
    elif args.out is None:
        io.write_csv(None, ["k", "nu"], nu_rows)
        sys.stdout.write("\n")
        io.write_csv(None, ["k", "l", "T"], t_rows)
    else:
        io.write_csv(_path(args, "nu.csv"), ["k", "nu"], nu_rows, args.force)
        io.write_csv(_path(args, "T.csv"), ["k", "l", "T"], t_rows, args.force)
    _write_meta(args, params=params, extra={"graph": spec.to_dict() if spec else None})
    return 0


# --- density ---------------------------------------------------------------


def _tabulate(args, law):
    kind = args.density
    if kind in ("ordered", "unordered"):
        if not args.points:
            raise InvalidParameterError(f"--density {kind} needs --points FILE with 2N eta columns")
        _, pts = io.read_csv(args.points)
        fn = analytic.log_jpdf_ordered if kind == "ordered" else analytic.log_jpdf_unordered
        logd = fn(law, pts)
        header = EtaSample.csv_header(law.n) + ["density", "log_density"]
        return header, [list(p) + [float(np.exp(ld)), float(ld)] for p, ld in zip(pts, logd)]
    x = _grid(args.grid)
    if x is None:
        raise InvalidParameterError(f"--density {kind} needs --grid MIN:MAX:STEP")
    if kind in ("pair", "unordered-pair"):
        y = _grid(args.grid_y) if args.grid_y is not None else x
        X, Y = np.meshgrid(x, y, indexing="ij")
        if kind == "pair":
            d = analytic.pair_density(law, _eigen(args, law), X, Y)
        else:
            d = analytic.unordered_pair_density(law, X, Y)
        return ["x", "y", "density"], zip(X.ravel(), Y.ravel(), d.ravel())
    if kind == "marginal":
        if args.index is None or not 1 <= args.index <= 2 * law.n:
            raise InvalidParameterError(f"--density marginal needs --index in 1..{2 * law.n}")
        d = analytic.marginal_joint(law, [args.index - 1], x[:, None])
    elif kind in ("re", "im"):
        d = analytic.mixture_marginal(law, kind, x, args.exclude_forced_real)
    else:
        j = None if args.eigen is None else _eigen(args, law)
        d = analytic.wishart_density(law, x, j)
    return ["x", "density"], zip(x, d)


def _eigen(args, law):
    if args.eigen is None or not 1 <= args.eigen <= law.n:
        raise InvalidParameterError(f"--eigen must be given in 1..{law.n}")
    return args.eigen - 1


def cmd_density(args):
    params, _, _ = _resolve(args)
    law = analytic.spectral_law(params, args.method)
    header, rows = _tabulate(args, law)
    _table(args, "density", header, rows)
    _write_meta(args, params=params)
    return 0


# --- simulate ----------------------------------------------------------------


def _sample_header(obs, n, ordered):
    if obs is Observable.ETA:
        return EtaSample.csv_header(n) if ordered else ["re", "im"]
    return [f"{obs.value}_{j}" for j in range(1, n + 1)] if ordered else [obs.value]


def _hist_values(values, obs, ordered, component):
    if component is not None:
        if not ordered:
            raise InvalidParameterError("--component applies to ordered runs only")
        if not 1 <= component <= values.shape[1]:
            raise InvalidParameterError(f"--component must be in 1..{values.shape[1]}")
        return values[:, component - 1]
    return pool(values, obs) if ordered else values


def _edges(args, values):
    two_d = values.ndim == 2
    if args.grid is not None:
        x = _grid(args.grid)
        return (x, _grid(args.grid_y) if args.grid_y is not None else x) if two_d else x
    return "auto" if not two_d else (auto_edges(values[:, 0]), auto_edges(values[:, 1]))


def cmd_simulate(args):
    params, _, preset = _resolve(args)
    preset = preset or {}
    m = args.m if args.m is not None else preset.get("m")
    if m is None:
        raise InvalidParameterError("simulate needs --m")
    obs = Observable.coerce(args.observable or preset.get("observable", "eta"))
    ordered = args.ordered if args.ordered is not None else preset.get("ordered", True)
    hist = None
    if args.no_samples:
        edges = None
        for block in iter_ensemble(params, m, obs, args.seed):
            vals = _hist_values(block if ordered else pool(block, obs), obs, ordered, args.component)
            edges = _edges(args, vals) if edges is None else edges
            part = histogram_build(vals, edges)
            hist = part if hist is None else hist.merge(part)
    else:
        samples = sample_ensemble(params, m, obs, ordered, args.seed, memory_budget=args.memory_budget)
        hist_vals = _hist_values(samples, obs, ordered, args.component)
        hist = histogram_build(hist_vals, _edges(args, hist_vals))
        header = _sample_header(obs, params.n, ordered)
        rows = samples if samples.ndim == 2 else samples[:, None]
        _table(args, "samples", header, rows.tolist())
    if args.out is not None or args.no_samples:
        _table(args, "hist", hist.header(), hist.rows())
    _write_meta(
        args,
        seed=args.seed,
        params=params,
        extra={"m": m, "observable": obs.value, "ordered": ordered, "outside_histogram": hist.outside},
    )
    return 0


# --- graph -----------------------------------------------------------------


def cmd_graph(args):
    preset = get_preset(args.preset) if args.preset else None
    spec = _graph_spec(args, preset)
    if spec is None:
        raise InvalidParameterError("graph needs --kind (or a graph preset)")
    m = args.m if args.m is not None else (preset or {}).get("m")
    if m is None:
        raise InvalidParameterError("graph needs --m")
    spectrum = graph_spectrum(spec, m, args.seed)
    _table(args, "spectrum", ["re", "im"], spectrum.tolist())
    params = surrogate_params(spec)
    if args.out is not None:
        io.write_json(_path(args, "params.json"), params.to_dict(), args.force)
        if args.columns:
            cols = graph_columns(spec, m, args.seed)
            _table(args, "columns", FirstColumn.csv_header(spec.n), cols.tolist())
    _write_meta(args, seed=args.seed, params=params, extra={"graph": spec.to_dict(), "m": m})
    return 0


# --- compare -----------------------------------------------------------------


def _load_samples(args):
    header, data = io.read_csv(args.samples)
    if args.column is not None:
        if args.column not in header:
            raise InvalidParameterError(f"column {args.column!r} not in {header}")
        x = data[:, header.index(args.column)]
    elif args.density == "wishart" and {"re", "im"} <= set(header):
        x = data[:, header.index("re")] ** 2 + data[:, header.index("im")] ** 2
    elif args.density == "im" and "im" in header:
        x = data[:, header.index("im")]
    elif args.density == "re" and "re" in header:
        x = data[:, header.index("re")]
    else:
        x = data[:, 0]
    if args.drop_zero:
        scale = max(1.0, float(np.max(np.abs(x))))
        x = x[np.abs(x) > 1e-12 * scale]
    if x.size == 0:
        raise InvalidParameterError("no samples left to compare")
    return x


def cmd_compare(args):
    params, _, _ = _resolve(args)
    law = analytic.spectral_law(params, args.method)
    x = _load_samples(args)
    if args.density == "wishart":
        j = None if args.eigen is None else _eigen(args, law)

        def cdf(t):
            return analytic.wishart_cdf(law, np.maximum(t, 0.0), j)
    else:

        def cdf(t):
            return analytic.mixture_marginal_cdf(law, args.density, t, args.exclude_forced_real)

    ks = ks_statistic(x, cdf)
    hist = histogram_build(x, _grid(args.grid) if args.grid is not None else "auto", mode="counts")
    edges = hist.edges[0]
    stat, dof, resid = chi_square(hist.counts, edges, cdf)
    expected = hist.total * np.diff(cdf(edges))
    report = {
        "density": args.density,
        "exclude_forced_real": args.exclude_forced_real,
        "n_samples": int(x.size),
        "ks": ks,
        "chi_square": stat,
        "chi_square_dof": dof,
        "outside_bins": hist.outside,
    }
    io.write_json(_path(args, "compare.json"), report, args.force)
    if args.out is not None:
        rows = [
            (edges[i], edges[i + 1], int(hist.counts[i]), float(expected[i]), float(resid[i]))
            for i in range(len(edges) - 1)
        ]
        _table(args, "residuals", ["left", "right", "count", "expected", "residual"], rows)
    _write_meta(args, params=params, extra={"report": report})
    return 0


def build_parser():
    parser = _Parser(prog="circspec", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--config",
        metavar="FILE",
        help="JSON object of option values (keys as in the meta.json config echo); flags override it",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("law", help="mean vector and covariance of the eigenvalue coordinates")
    _add_model_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("density", help="tabulate an analytic density")
    _add_model_args(p)
    p.add_argument("--density", choices=DENSITIES, required=True)
    p.add_argument("--grid", help="MIN:MAX:STEP")
    p.add_argument("--grid-y", help="second axis for 2-D densities")
    p.add_argument("--points", metavar="FILE", help="CSV of eta rows for full joint densities")
    p.add_argument("--index", type=int, help="eta coordinate (1..2N) for --density marginal")
    p.add_argument("--eigen", type=int, help="eigenvalue index (1..N) for pair/wishart")
    p.add_argument("--exclude-forced-real", action="store_true")
    _add_output_args(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simulate", help="Monte Carlo ensemble of the matrix model")
    _add_model_args(p, graph=False)
    p.add_argument("--m", type=int)
    p.add_argument("--observable", choices=[o.value for o in Observable])
    p.add_argument("--ordered", type=_bool, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", help="histogram edges MIN:MAX:STEP (default: Freedman-Diaconis)")
    p.add_argument("--grid-y", help="second histogram axis for unordered eta")
    p.add_argument("--component", type=int, help="histogram one ordered column (1-based)")
    p.add_argument("--no-samples", action="store_true", help="stream a histogram only")
    p.add_argument("--memory-budget", type=int, default=DEFAULT_MEMORY_BUDGET)
    _add_output_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("graph", help="spectra of random circulant graphs")
    p.add_argument("--preset", choices=sorted(k for k, v in PRESETS.items() if "graph" in v))
    p.add_argument("--n", type=int)
    _add_graph_args(p)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--columns", action="store_true", help="also write the sampled edge patterns")
    _add_output_args(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("compare", help="KS and chi-square of samples against an analytic density")
    _add_model_args(p)
    p.add_argument("--samples", required=True, metavar="FILE")
    p.add_argument("--column")
    p.add_argument("--density", choices=("re", "im", "wishart"), required=True)
    p.add_argument("--exclude-forced-real", action="store_true")
    p.add_argument("--drop-zero", action="store_true", help="ignore samples that are exactly zero")
    p.add_argument("--eigen", type=int)
    p.add_argument("--grid", help="chi-square bin edges")
    _add_output_args(p)
    p.set_defaults(func=cmd_compare)
    return parser


def _load_config(argv):
    """Option defaults from ``--config FILE``, or None when no config was given."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    ns, _ = pre.parse_known_args(argv)
    if not ns.config:
        return None
    try:
        with open(ns.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameterError(f"cannot read config {ns.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise InvalidParameterError("config file must hold a JSON object")
    return cfg


def _apply_config(parser, cfg):
    """Install ``cfg`` as subcommand defaults so explicit flags still win."""
    for sub in parser._subparsers._group_actions[0].choices.values():
        known = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in cfg.items() if k in known})
        for action in sub._actions:
            if action.dest in cfg:
                action.required = False


def main(argv=None):
    parser = build_parser()
    try:
        cfg = _load_config(argv)
    except CircSpecError as exc:
        _emit_error(type(exc).__name__, exc, exc.exit_code)
        return exc.exit_code
    if cfg is not None:
        _apply_config(parser, cfg)
    args = parser.parse_args(argv)
    try:
        if cfg is not None and cfg.get("command", args.command) != args.command:
            raise InvalidParameterError(f"config is for {cfg['command']!r}, not {args.command!r}")
        code = args.func(args)
        sys.stdout.flush()
        return code
    except CircSpecError as exc:
        extra = exc.to_dict() if hasattr(exc, "to_dict") else {}
        if extra.get("directions"):
            # name the zero-based eta coordinates the way CSV headers do
            extra["columns"] = [("re_", "im_")[k % 2] + str(k // 2 + 1) for k in extra["directions"]]
        _emit_error(type(exc).__name__, exc, exc.exit_code, **extra)
        return exc.exit_code
    except BrokenPipeError:
        # downstream reader closed early (``| head``); silence the final flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except OSError as exc:
        _emit_error("io", exc, 2)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
