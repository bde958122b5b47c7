"""Command-line front end: pricing, Green-function tabulation, American-option
kernel and boundary evaluation, and residue-engine demos.

Exit codes: 0 success, 2 usage/validation error, 3 numerical non-convergence
(output is still emitted with per-row flags where partial results exist).
Config precedence: command-line flags override the optional key=value config
file, which overrides built-in defaults.  Machine formats (json/csv) emit
every number with 17 significant digits and are byte-deterministic for a
given configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

from . import bs_pricer, fractional_green, laplace_american, mellin_core
from .bs_pricer import OptionContract
from .fractional_green import FractionalDiffusionParams
from .laplace_american import AmericanConstants, UnreliableInversionError
from .mellin_core import (
    Contour,
    Direction,
    GammaFraction,
    GammaLinearFactor,
    PowerFactor,
    residue_1d,
    enumerate_poles_1d,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_DEFAULTS = {
    "tol": 1e-10,
    "max_terms": 400,
    "format": "human",
    "out": None,
    "theta": 0.0,
    "mu": 1.0,
    "side": "left",
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _json_render(obj, indent=0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = [f'{pad}  {json.dumps(k)}: {_json_render(v, indent + 2).lstrip()}'
                 for k, v in sorted(obj.items())]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        items = [_json_render(v, indent + 2) for v in obj]
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return pad + json.dumps(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return pad + json.dumps(str(obj))
        return pad + _fmt(obj)
    return pad + json.dumps(obj)


class _Report:
    """Collects a command's params, result rows and diagnostics; renders
    human/json/csv."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = params
        self.summary: dict = {}
        self.columns: list = []
        self.rows: list = []
        self.diagnostics: dict = {}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            payload = {
                "command": self.command,
                "params": self.params,
                "results": {"summary": self.summary,
                            "columns": self.columns,
                            "rows": self.rows},
                "diagnostics": self.diagnostics,
            }
            return _json_render(payload) + "\n"
        if fmt == "csv":
            lines = [",".join(self.columns)]
            for row in self.rows:
                lines.append(",".join(_fmt(v) for v in row))
            return "\n".join(lines) + "\n"
        # human
        lines = [f"command: {self.command}"]
        for k in sorted(self.params):
            lines.append(f"  {k} = {_fmt(self.params[k])}")
        if self.summary:
            lines.append("summary:")
            for k in sorted(self.summary):
                lines.append(f"  {k} = {_fmt(self.summary[k])}")
        if self.rows:
            lines.append("  ".join(str(c) for c in self.columns))
            for row in self.rows:
                lines.append("  ".join(_fmt(v) for v in row))
        for k in sorted(self.diagnostics):
            lines.append(f"# {k}: {_fmt(self.diagnostics[k])}")
        return "\n".join(lines) + "\n"


def _emit(report: _Report, opts: dict) -> None:
    text = report.render(opts["format"])
    if opts.get("out"):
        with open(opts["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_grid(text: str) -> list:
    """lo:hi:step inclusive grid (within half a step of hi)."""
    try:
        lo, hi, step = (float(tok) for tok in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must be lo:hi:step, got {text!r}")
    if step <= 0 or hi < lo:
        raise ValueError(f"bad grid bounds {text!r}")
    out = []
    k = 0
    while True:
        x = lo + k * step
        if x > hi + 0.5 * step:
            break
        out.append(x)
        k += 1
    return out


def _read_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    vals: dict = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {raw.rstrip()}")
            key, val = (tok.strip() for tok in line.split("=", 1))
            vals[key.replace("-", "_")] = val
    return vals


_STR_KEYS = {"format", "out", "side", "x_grid", "tau_grid"}
_INT_KEYS = {"max_terms", "n", "m"}


def _coerce(key: str, val):
    if isinstance(val, str) and key not in _STR_KEYS:
        return int(val) if key in _INT_KEYS else float(val)
    if key in _INT_KEYS and val is not None:
        return int(val)
    return val


def _merge_options(args: argparse.Namespace, needed: list) -> dict:
    """flags > config file > defaults; missing required keys are usage errors."""
    given = vars(args)
    config = _read_config(given.get("config"))
    out: dict = {}
    for key in needed + ["tol", "max_terms", "format", "out"]:
        if key in given and given[key] is not None:
            out[key] = _coerce(key, given[key])
        elif key in config:
            out[key] = _coerce(key, config[key])
        elif key in _DEFAULTS:
            out[key] = _DEFAULTS[key]
        else:
            raise _UsageError(f"missing required option --{key.replace('_', '-')}")
    if out["format"] not in ("human", "json", "csv"):
        raise _UsageError(f"unknown format {out['format']!r}")
    if not out["tol"] > 0:
        raise _UsageError("tolerance must be positive")
    if out["max_terms"] < 1:
        raise _UsageError("max-terms must be >= 1")
    return out


class _UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_price(args) -> int:
    opts = _merge_options(args, ["spot", "strike", "tau", "sigma", "rate"])
    try:
        contract = OptionContract(spot=opts["spot"], strike=opts["strike"],
                                  tau=opts["tau"], rate=opts["rate"], sigma=opts["sigma"])
    except ValueError as exc:
        raise _UsageError(str(exc))
    closed = bs_pricer.bs_closed_form(contract)
    series = bs_pricer.bs_series(contract, tol=opts["tol"], max_shells=opts["max_terms"])
    fwd = bs_pricer.forward_term(contract)
    series_price = series.value if series.converged else closed
    report = _Report("price", {k: opts[k] for k in ("spot", "strike", "tau", "sigma", "rate", "tol", "max_terms")})
    report.summary = {
        "closed_form": closed,
        "series": float(series.value),
        "forward_term": fwd,
        "converged": series.converged,
        "gap_abs": abs(float(series.value) - closed),
        "gap_rel": abs(float(series.value) - closed) / abs(closed) if closed else float("inf"),
        "terms_used": series.terms_used,
    }
    report.columns = ["n", "m", "value"]
    shell = 0
    emitted = 0
    while emitted < series.terms_used and shell < opts["max_terms"]:
        for n in range(shell + 1):
            m = shell - n
            v = bs_pricer.bs_series_term(n, m, contract)
            if v != 0.0:
                report.rows.append([n, m, v])
                emitted += 1
        shell += 1
    if not series.converged:
        report.diagnostics["warning"] = ("series not converged; closed form is authoritative "
                                         f"(reported price {series_price})")
    _emit(report, opts)
    return EXIT_OK if series.converged else EXIT_NUMERICAL


def cmd_green(args) -> int:
    opts = _merge_options(args, ["alpha", "gamma_t", "theta", "mu", "tau", "x_grid"])
    try:
        params = FractionalDiffusionParams(alpha=opts["alpha"], gamma_t=opts["gamma_t"],
                                           theta=opts["theta"], mu=opts["mu"])
        grid = _parse_grid(opts["x_grid"])
        if opts["tau"] <= 0:
            raise ValueError("tau must be positive")
    except ValueError as exc:
        raise _UsageError(str(exc))
    report = _Report("green", {k: opts[k] for k in ("alpha", "gamma_t", "theta", "mu", "tau", "x_grid", "tol", "max_terms")})
    report.columns = ["x", "density", "flag"]
    failed = 0
    kept = []
    for x in grid:
        if x == 0.0:
            report.rows.append([x, float("nan"), "domain"])
            continue
        res = fractional_green.green_fractional_series(x, opts["tau"], params,
                                                       tol=opts["tol"], max_terms=opts["max_terms"])
        if res.converged:
            report.rows.append([x, float(res.value), "ok"])
            kept.append((x, float(res.value)))
        else:
            report.rows.append([x, float(res.value), "not-converged"])
            failed += 1
    if len(kept) >= 2:
        import numpy as np
        xs, ys = zip(*kept)
        report.summary["normalization_estimate"] = float(np.trapezoid(ys, xs))
    report.summary["points_failed"] = failed
    _emit(report, opts)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_american(args) -> int:
    sub = args.american_command
    if sub == "boundary":
        opts = _merge_options(args, ["rate", "sigma", "tau_grid"])
        try:
            if opts["rate"] <= 0 or opts["sigma"] <= 0:
                raise ValueError("boundary requires rate > 0 and sigma > 0")
            grid = _parse_grid(opts["tau_grid"])
        except ValueError as exc:
            raise _UsageError(str(exc))
        report = _Report("american-boundary",
                         {k: opts[k] for k in ("rate", "sigma", "tau_grid", "tol", "max_terms")})
        report.columns = ["tau", "boundary_over_strike", "talbot", "vertical", "agreement", "flag"]
        failures = 0
        for tau in grid:
            try:
                inv = laplace_american.exercise_boundary(tau, opts["rate"], opts["sigma"],
                                                         tol=opts["tol"])
                agree = abs(inv.talbot - inv.vertical) / max(1.0, abs(inv.talbot))
                report.rows.append([tau, inv.value, inv.talbot, inv.vertical, agree, "ok"])
            except (UnreliableInversionError, laplace_american.BranchCrossingError) as exc:
                report.rows.append([tau, float("nan"), float("nan"), float("nan"),
                                    float("nan"), f"unreliable: {exc}"])
                failures += 1
        _emit(report, opts)
        return EXIT_NUMERICAL if failures else EXIT_OK

    if sub == "kernel":
        opts = _merge_options(args, ["rate", "sigma", "n", "m", "tau"])
        try:
            consts = AmericanConstants.from_rates(opts["rate"], opts["sigma"])
            if opts["n"] < 1 or opts["m"] < 1 or opts["tau"] <= 0:
                raise ValueError("kernel requires n, m >= 1 and tau > 0")
        except ValueError as exc:
            raise _UsageError(str(exc))
        report = _Report("american-kernel",
                         {k: opts[k] for k in ("rate", "sigma", "n", "m", "tau", "tol", "max_terms")})
        report.columns = ["n", "m", "series", "oracle", "gap"]
        try:
            series = laplace_american.american_kernel_series(
                opts["n"], opts["m"], opts["tau"], consts,
                tol=opts["tol"], max_shells=opts["max_terms"])
            oracle = laplace_american.american_kernel_oracle(opts["n"], opts["m"], opts["tau"], consts)
        except UnreliableInversionError as exc:
            report.diagnostics["error"] = str(exc)
            _emit(report, opts)
            return EXIT_NUMERICAL
        gap = abs(float(series.value) - oracle)
        report.rows.append([opts["n"], opts["m"], float(series.value), oracle, gap])
        report.summary = {"converged": series.converged, "terms_used": series.terms_used}
        _emit(report, opts)
        return EXIT_OK if series.converged else EXIT_NUMERICAL

    raise _UsageError("american needs a subcommand: boundary or kernel")


def _demo_fraction(kind: str, xs: list) -> tuple:
    if kind == "exp":
        frac = GammaFraction(numerator=(GammaLinearFactor((1.0,), 0.0),),
                             powers=(PowerFactor(xs[0], (-1.0,), 0.0),))
        return frac, Contour((1.0,)), math.exp(-xs[0])
    if kind == "beta":
        frac = GammaFraction(numerator=(GammaLinearFactor((1.0,), 0.0),
                                        GammaLinearFactor((-1.0,), 1.0)),
                             powers=(PowerFactor(xs[0], (-1.0,), 0.0),))
        return frac, Contour((0.5,)), 1.0 / (1.0 + xs[0])
    raise _UsageError(f"unknown demo {kind!r}")


def cmd_demo(args) -> int:
    kind = args.demo_command
    opts = _merge_options(args, ["side"] if kind == "beta" else [])
    xvals = [float(v) for v in args.x]
    if kind in ("exp", "beta"):
        if len(xvals) != 1 or xvals[0] <= 0:
            raise _UsageError(f"demo {kind} needs one positive --x value")
        frac, contour, reference = _demo_fraction(kind, xvals)
        direction = Direction.LEFT
        if kind == "beta" and opts["side"] == "right":
            direction = Direction.RIGHT
        elif kind == "beta" and opts["side"] not in ("left", "right"):
            raise _UsageError("--side must be left or right")
        report = _Report(f"demo-{kind}", {"x": xvals[0], "side": opts.get("side", "left"),
                                          "tol": opts["tol"]})
        report.columns = ["pole", "residue_term", "partial_sum"]
        orient = 1.0 if direction is Direction.LEFT else -1.0
        total = 0.0
        shown = 0
        for loc, order in enumerate_poles_1d(frac, direction, opts["max_terms"], contour):
            if order == 0:
                continue
            term = orient * complex(residue_1d(frac, loc)).real
            total += term
            report.rows.append([loc, term, total])
            shown += 1
            if shown >= 30 or (shown > 3 and abs(term) < opts["tol"] * max(1.0, abs(total))):
                break
        report.summary = {"reference": reference, "partial_sum": total,
                          "abs_error": abs(total - reference)}
        _emit(report, opts)
        return EXIT_OK
    if kind == "exp2d":
        if len(xvals) != 2 or min(xvals) <= 0:
            raise _UsageError("demo exp2d needs --x X1 X2 (both positive)")
        frac = GammaFraction(
            numerator=(GammaLinearFactor((1.0, 0.0), 0.0), GammaLinearFactor((0.0, 1.0), 0.0)),
            powers=(PowerFactor(xvals[0], (-1.0, 0.0), 0.0), PowerFactor(xvals[1], (0.0, -1.0), 0.0)))
        contour = Contour((1.0, 1.0))
        cone = mellin_core.compatible_cone_2d(frac, contour)
        report = _Report("demo-exp2d", {"x1": xvals[0], "x2": xvals[1], "tol": opts["tol"]})
        report.columns = ["shell", "shell_sum", "partial_sum"]
        total = 0.0
        reference = math.exp(-(xvals[0] + xvals[1]))
        for shell in range(30):
            ssum = 0.0
            for k1 in range(shell + 1):
                k2 = shell - k1
                term = complex(mellin_core.grothendieck_residue_2d(frac, (-float(k1), -float(k2)))).real
                ssum += term
            total += ssum
            report.rows.append([shell, ssum, total])
            if shell > 3 and abs(ssum) < opts["tol"] * max(1.0, abs(total)):
                break
        report.summary = {"reference": reference, "partial_sum": total,
                          "abs_error": abs(total - reference),
                          "cone": [f.value for f in cone.faces]}
        _emit(report, opts)
        return EXIT_OK
    raise _UsageError(f"unknown demo {kind!r}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-terms", dest="max_terms", type=int, default=None)
    p.add_argument("--format", choices=("human", "json", "csv"), default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mellinbarnes",
        description="Mellin-Barnes residue engine: option pricing, fractional "
                    "Green functions, American-option kernels and demos.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser("price", help="Black-Scholes call: closed form and residue series")
    for flag in ("--spot", "--strike", "--tau", "--sigma", "--rate"):
        p_price.add_argument(flag, type=float, default=None)
    _add_common(p_price)
    p_price.set_defaults(func=cmd_price)

    p_green = sub.add_parser("green", help="fractional-diffusion Green function table")
    for flag in ("--alpha", "--gamma-t", "--theta", "--mu", "--tau"):
        p_green.add_argument(flag, type=float, default=None)
    p_green.add_argument("--x-grid", dest="x_grid", default=None, help="lo:hi:step")
    _add_common(p_green)
    p_green.set_defaults(func=cmd_green)

    p_am = sub.add_parser("american", help="exercise boundary and kernel evaluation")
    am_sub = p_am.add_subparsers(dest="american_command", required=True)
    p_bdy = am_sub.add_parser("boundary")
    p_bdy.add_argument("--rate", type=float, default=None)
    p_bdy.add_argument("--sigma", type=float, default=None)
    p_bdy.add_argument("--tau-grid", dest="tau_grid", default=None, help="lo:hi:step")
    _add_common(p_bdy)
    p_bdy.set_defaults(func=cmd_american)
    p_ker = am_sub.add_parser("kernel")
    p_ker.add_argument("--rate", type=float, default=None)
    p_ker.add_argument("--sigma", type=float, default=None)
    p_ker.add_argument("--n", type=int, default=None)
    p_ker.add_argument("--m", type=int, default=None)
    p_ker.add_argument("--tau", type=float, default=None)
    _add_common(p_ker)
    p_ker.set_defaults(func=cmd_american)

    p_demo = sub.add_parser("demo", help="pedagogical residue summations")
    demo_sub = p_demo.add_subparsers(dest="demo_command", required=True)
    for name in ("exp", "beta", "exp2d"):
        pd = demo_sub.add_parser(name)
        pd.add_argument("--x", nargs="+", required=True)
        if name == "beta":
            pd.add_argument("--side", choices=("left", "right"), default=None)
        _add_common(pd)
        pd.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnreliableInversionError, fractional_green.ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
