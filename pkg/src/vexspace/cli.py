"""Command-line entry point: ``vex <command> [options]``.

Exit status: 0 on success, 2 on configuration or input errors, 3 when a
theorem hypothesis is violated, 4 when ``--assert`` is set and the verdict fails.
"""

from __future__ import annotations

import argparse
import re
import sys

from . import density, lebesgue, maximal, reports, riesz, vexf
from .errors import HypothesisViolation, VexError
from .exprparse import parse, sample_to_field
from .grid import ExponentField, Grid, SampledField, gradient, l2_norm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_ASSERT = 4

DEFAULT_ALPHAS = "0.4,0.2,0.1,0.05,0.025"
DEFAULT_LAMBDAS = "2,4,8"
# smooth bump exp(-1/(1 - x1^2)) on (-1, 1); min() keeps the unused branch finite
DEFAULT_BUMP = "step(exp(-1/(1 - min(x1^2, 0.999999))), 0, x1^2 - 1)"


class ConfigError(VexError):
    pass


def _floats(text: str, what: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _grid(args) -> Grid:
    dim = args.dim
    if dim not in (1, 2, 3):
        raise ConfigError(f"--dim must be 1, 2 or 3, got {dim}")
    box = _floats(args.box, "--box")
    if len(box) == 2:
        box = box * dim
    if len(box) != 2 * dim:
        raise ConfigError(f"--box needs 2 or {2 * dim} numbers, got {len(box)}")
    nodes = [int(v) for v in _floats(args.nodes, "--nodes")]
    if len(nodes) == 1:
        nodes = nodes * dim
    if len(nodes) != dim:
        raise ConfigError(f"--nodes needs 1 or {dim} integers, got {len(nodes)}")
    return Grid.from_box(box[0::2], box[1::2], nodes)


def _load(path) -> SampledField:
    try:
        return vexf.read(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _inputs(args, need_f=True, need_p=True, default_f=None, default_p=None):
    """Build f and p from expressions or VEXF files on a common grid.

    Files fix the grid; otherwise it comes from --dim/--box/--nodes.
    """
    specs = {}
    for name, needed, default in (("f", need_f, default_f), ("p", need_p, default_p)):
        if not needed:
            continue
        expr, path = getattr(args, name, None), getattr(args, f"{name}_file", None)
        if expr is not None and path is not None:
            raise ConfigError(f"give either --{name} or --{name}-file, not both")
        if expr is None and path is None:
            if default is None:
                raise ConfigError(f"missing --{name} or --{name}-file")
            expr = default
        specs[name] = (expr, path)

    loaded = {name: _load(path) for name, (expr, path) in specs.items() if path is not None}
    grid = next(iter(loaded.values())).grid if loaded else _grid(args)
    fields = {}
    for name, (expr, path) in specs.items():
        if path is not None:
            fields[name] = loaded[name]
        else:
            if callable(expr):
                expr = expr(grid.dim)
            fields[name] = sample_to_field(parse(expr, grid.dim), grid)
    if len(fields) == 2 and not fields["f"].grid.same_as(fields["p"].grid):
        raise ConfigError("f and p live on different grids")
    p = ExponentField(fields["p"]) if "p" in fields else None
    return fields.get("f"), p


def _emit(text: str, args) -> None:
    if args.out:
        reports.write(text, args.out)
    else:
        sys.stdout.write(text)


def _workers(args):
    return args.threads


# ---------------------------------------------------------------- commands

def cmd_norm(args) -> int:
    f, p = _inputs(args)
    results = {"f": lebesgue.luxemburg_norm(f, p)}
    if args.sobolev:
        for j, d in enumerate(gradient(f)):
            results[f"D{j + 1}f"] = lebesgue.luxemburg_norm(d, p)
    if args.out:
        reports.write(reports.norm_report(results), args.out)
    for name, r in results.items():
        print(f"{name}: norm={r.norm!r} modular={r.modular_at_norm!r} iterations={r.iterations}")
    if args.sobolev:
        print(f"sobolev norm={sum(r.norm for r in results.values())!r}")
    return EXIT_OK


def cmd_riesz(args) -> int:
    f, _ = _inputs(args, need_p=False)
    if args.alpha is None:
        raise ConfigError("riesz needs --alpha")
    kwargs = {} if args.method == "direct" else {"workers": _workers(args)}
    out = riesz.riesz_potential(f, args.alpha, args.method, **kwargs)
    if args.out:
        vexf.write(out, args.out)
    centre = tuple(m // 2 for m in out.grid.shape)
    print(f"alpha={args.alpha!r} method={args.method} l2_norm={l2_norm(out)!r} "
          f"centre_value={float(out.values[centre])!r}")
    return EXIT_OK


def cmd_lemma1(args) -> int:
    f, _ = _inputs(args, need_p=False, default_f=DEFAULT_BUMP)
    schedule = _floats(args.alpha_schedule, "--alpha-schedule")
    report = riesz.lemma1_experiment(f, schedule, method=args.method, workers=_workers(args))
    _emit(reports.lemma1_report(report), args)
    if args.out:
        print(f"verdict={'pass' if report.verdict else 'fail'}")
    if args.assert_ and not report.verdict:
        print("assertion failed: L2 error not strictly decreasing or norms not converging", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def cmd_maximal(args) -> int:
    _, p = _inputs(args, need_f=False)
    grid = p.grid
    corpus, ids = [], []
    for k, expr in enumerate(args.f or []):
        corpus.append(sample_to_field(parse(expr, grid.dim), grid))
        ids.append(f"f{k}")
    for path in args.f_file or []:
        corpus.append(_load(path))
        ids.append(path)
    report = maximal.local_boundedness_probe(p, corpus, ids)
    _emit(reports.probe_report(report), args)
    if args.out:
        print(f"ratio={report.ratio!r}")
    if args.assert_ and args.bound is not None and report.ratio > args.bound:
        print(f"assertion failed: ratio {report.ratio!r} exceeds {args.bound!r}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def cmd_logholder(args) -> int:
    if args.levels < 1:
        raise ConfigError("--levels must be at least 1")
    if args.p_file is not None and args.levels > 1:
        raise ConfigError("--levels > 1 needs --p rather than --p-file")
    _, p = _inputs(args, need_f=False)
    estimates = [maximal.log_holder_estimate(p, seed=args.seed)]
    for level in range(1, args.levels):
        grid = p.grid.refined(2 ** level)
        finer = ExponentField(sample_to_field(parse(args.p, grid.dim), grid))
        estimates.append(maximal.log_holder_estimate(finer, seed=args.seed))
    _emit(reports.logholder_report(estimates), args)
    return EXIT_OK


def cmd_density_check(args) -> int:
    if args.p is not None or args.p_file is not None:
        _, p = _inputs(args, need_f=False)
        pmin, pmax, n = p.p_minus, p.p_plus, p.grid.dim
    else:
        if args.pmin is None or args.pmax is None or args.n is None:
            raise ConfigError("density-check needs --n, --pmin and --pmax (or --p)")
        pmin, pmax, n = args.pmin, args.pmax, args.n
    v = density.density_condition(pmin, pmax, n, maximal_bounded=args.maximal_bounded,
                                  log_holder=args.log_holder)
    print(v.verdict.value)
    print(f"reason: {v.reason}")
    if args.assert_ and not v.dense:
        return EXIT_ASSERT
    return EXIT_OK


def _tent_product(dim: int) -> str:
    return "*".join(f"max(0, 1 - abs(x{k + 1}))" for k in range(dim))


def cmd_approx(args) -> int:
    if args.pmin_violation:
        if args.p is not None or args.p_file is not None:
            raise ConfigError("--pmin-violation replaces --p; give only one")
        args.p = "1.5"
    f, p = _inputs(args, default_f=_tent_product, default_p="2.5 + 0.4*sin(x1)")
    schedule = _floats(args.lambda_schedule, "--lambda-schedule")
    report = density.approximate_by_smooth(f, p, schedule, workers=_workers(args))
    _emit(reports.approx_report(report, f.grid.dim), args)
    if args.out:
        print(f"verdict: decreasing={'true' if report.verdict else 'false'}")
    if args.assert_ and not report.verdict:
        print("assertion failed: Sobolev error column is not nonincreasing", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _seed(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vex", description="Variable exponent Sobolev space experiments.")
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("grid")
    g.add_argument("--dim", type=int, default=1, help="spatial dimension (1-3)")
    g.add_argument("--box", default="-2,2", help="lo,hi for every axis or lo1,hi1,lo2,hi2,...")
    g.add_argument("--nodes", default="257", help="nodes per axis, one value or one per axis")
    common.add_argument("--out", help="report path (CSV, or VEXF for riesz)")
    common.add_argument("--assert", dest="assert_", action="store_true",
                        help="exit 4 when the experiment verdict fails")
    common.add_argument("--seed", type=_seed, default=maximal.DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=None, help="FFT worker count")

    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    def field_opts(sp, f=True, p=True):
        if f:
            sp.add_argument("--f", help="expression for f")
            sp.add_argument("--f-file", help="VEXF file for f")
        if p:
            sp.add_argument("--p", help="expression for the exponent p")
            sp.add_argument("--p-file", help="VEXF file for p")

    sp = add("norm", cmd_norm, "Luxemburg norm of f in L^p(.)")
    field_opts(sp)
    sp.add_argument("--sobolev", action="store_true", help="also report the gradient norms")

    sp = add("riesz", cmd_riesz, "Riesz potential of f")
    field_opts(sp, p=False)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--method", choices=sorted(riesz.METHODS), default="gridconv")

    sp = add("lemma1", cmd_lemma1, "convergence of I_alpha f to f as alpha -> 0")
    field_opts(sp, p=False)
    sp.add_argument("--alpha-schedule", default=DEFAULT_ALPHAS)
    sp.add_argument("--method", choices=sorted(riesz.METHODS), default="gridconv")

    sp = add("maximal", cmd_maximal, "probe ||Mf|| / ||f|| in L^p(.)")
    sp.add_argument("--f", action="append", help="corpus expression (repeatable)")
    sp.add_argument("--f-file", action="append", help="corpus VEXF file (repeatable)")
    sp.add_argument("--p", help="expression for the exponent p")
    sp.add_argument("--p-file", help="VEXF file for p")
    sp.add_argument("--bound", type=float, help="ratio bound checked by --assert")

    sp = add("logholder", cmd_logholder, "estimate the log-Hoelder constant of p")
    field_opts(sp, f=False)
    sp.add_argument("--levels", type=int, default=1, help="number of successive grid halvings")

    sp = add("density-check", cmd_density_check, "decide which density criterion applies")
    field_opts(sp, f=False)
    sp.add_argument("--n", type=int)
    sp.add_argument("--pmin", type=float)
    sp.add_argument("--pmax", type=float)
    sp.add_argument("--maximal-bounded", action="store_true")
    sp.add_argument("--log-holder", action="store_true")

    sp = add("approx", cmd_approx, "smooth approximation errors along a lambda schedule")
    field_opts(sp)
    sp.add_argument("--lambda-schedule", default=DEFAULT_LAMBDAS)
    sp.add_argument("--pmin-violation", action="store_true", help="force p = 1.5")
    return ap


_NUMERIC_LIST = re.compile(r"^-[\d.]")
_LIST_FLAGS = ("--box", "--alpha-schedule", "--lambda-schedule", "--alpha", "--pmin", "--pmax")


def _join_negative_values(argv):
    """Let ``--box -4,4`` through argparse by rewriting it as ``--box=-4,4``."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LIST_FLAGS and i + 1 < len(argv) and _NUMERIC_LIST.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except HypothesisViolation as exc:
        print(f"HypothesisViolation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (VexError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
