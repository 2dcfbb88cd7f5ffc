"""CSV report writers.

Every report starts with a ``# experiment: <name>`` comment line followed by
the column header. Floats are written with ``repr`` so identical runs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(experiment: str, columns, rows, trailer: list[str] | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# experiment: {experiment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    for line in trailer or ():
        buf.write(f"# {line}\n")
    return buf.getvalue()


def norm_report(results: dict) -> str:
    """``results`` maps a quantity name to a NormResult."""
    rows = [(name, float(r.norm), float(r.modular_at_norm), r.iterations) for name, r in results.items()]
    return render("luxemburg norm", ["quantity", "lambda", "modular_at_lambda", "iterations"], rows)


def lemma1_report(report) -> str:
    rows = [(float(r.alpha), float(r.l2_error), float(r.l2_norm), float(r.inner_product), r.verdict)
            for r in report.rows]
    return render("riesz potential convergence",
                  ["alpha", "l2_error", "l2_norm_Ialpha", "inner_product", "verdict"], rows)


def probe_report(report) -> str:
    rows = [(r.field_id, float(r.norm_f), float(r.norm_Mf), float(r.ratio)) for r in report.rows]
    return render("maximal operator boundedness probe", ["field_id", "norm_f", "norm_Mf", "ratio"], rows)


def logholder_report(estimates) -> str:
    rows = [(float(e.h), float(e.c0_hat), e.worst_pair[0], e.worst_pair[1]) for e in estimates]
    return render("log-hoelder modulus estimate", ["h", "c0_hat", "worst_i", "worst_j"], rows)


def approx_report(report, dim: int) -> str:
    cols = ["lambda", "lp_error"] + [f"grad_error_{j + 1}" for j in range(dim)] + ["sobolev_error"]
    rows = [(float(lam), float(lp), *map(float, ge), float(se))
            for lam, lp, ge, se in zip(report.lambda_schedule, report.lp_errors,
                                       report.grad_errors, report.sobolev_errors)]
    trailer = [f"verdict: decreasing={_fmt(bool(report.verdict))}"] if rows else None
    return render("smooth approximation", cols, rows, trailer)


def write(text: str, path) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
