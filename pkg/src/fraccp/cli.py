"""Command-line entry point: pmf tables, moments, Z curves, simulation and residual reports.

Every subcommand builds library objects from the flags, calls one library
function and formats the result; no numerics live here.

Exit codes: 0 success, 1 a residual report failed its tolerance, 2 invalid
arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
from collections.abc import Sequence

import numpy as np

from . import compound, fracpoisson, jumplaws, subord, verify
from .compound import ProcessSpec
from .errors import NumericalError

EXIT_OK, EXIT_FAILED_CHECK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
SEED_ENV = "FRACCP_SEED"


class UsageError(Exception):
    """Invalid combination of arguments; reported with exit code 2."""


# ---- argument types ---------------------------------------------------------

def _ranged(name: str, lo: float, hi: float, lo_open: bool = True, hi_open: bool = True):
    left, right = ("(" if lo_open else "["), (")" if hi_open else "]")
    legal = f"{left}{lo:g}, {'inf' if hi == math.inf else format(hi, 'g')}{right}"

    def parse(text: str) -> float:
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number in {legal}, got {text!r}")
        ok_lo = x > lo if lo_open else x >= lo
        ok_hi = x < hi if hi_open else x <= hi
        if not (ok_lo and ok_hi and math.isfinite(x)):
            raise argparse.ArgumentTypeError(f"{name} must be in {legal}, got {text}")
        return x

    return parse


def _nonneg_int(name: str, minimum: int = 0):
    def parse(text: str) -> int:
        try:
            x = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer >= {minimum}, got {text!r}")
        if x < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be an integer >= {minimum}, got {x}")
        return x

    return parse


def _time_list(text: str) -> list[float]:
    parse = _ranged("t", 0.0, math.inf, lo_open=False)
    values = [parse(part) for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("t needs at least one value >= 0")
    return values


def _nu_grid(text: str) -> np.ndarray:
    """``a:b:s`` with both endpoints included."""
    try:
        a, b, s = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"nu-grid must look like start:stop:step, got {text!r}")
    if not (s > 0 and b >= a):
        raise argparse.ArgumentTypeError("nu-grid needs step > 0 and stop >= start")
    n = int(math.floor((b - a) / s + 1e-9)) + 1
    return np.round(a + s * np.arange(n), 12)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be a nonnegative integer, got {raw!r}")
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be a nonnegative integer, got {seed}")
    return seed


# ---- parser -----------------------------------------------------------------

def _add_family(p: argparse.ArgumentParser, need_nu: bool = True):
    g = p.add_argument_group("process")
    g.add_argument("--family", choices=["pa", "pig", "nb", "ztnb"],
                   help="pa: --p --lambda; pig: --beta --mu; nb: --p; ztnb: --alpha --r --lambda")
    g.add_argument("--p", type=_ranged("p", 0, 1))
    g.add_argument("--beta", type=_ranged("beta", 0, math.inf))
    g.add_argument("--mu", type=_ranged("mu", 0, math.inf))
    g.add_argument("--alpha", type=_ranged("alpha", 0, 1))
    g.add_argument("--r", type=_ranged("r", -1, math.inf))
    g.add_argument("--lambda", dest="lam", type=_ranged("lambda", 0, math.inf))
    if need_nu:
        g.add_argument("--nu", type=_ranged("nu", 0, math.inf), required=True,
                       help="fractional order: (0, 1) time-fractional, > 1 space-fractional")
        g.add_argument("--eta", type=_ranged("eta", 0, 1, hi_open=False), default=1.0)


def _add_output(p: argparse.ArgumentParser, default_format: str = "csv"):
    p.add_argument("--format", choices=["csv", "json"], default=default_format)
    p.add_argument("--output", help="file to write instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraccp",
        description="Fractional compound Poisson processes: tables, simulation, equation checks.",
        epilog=f"--config FILE reads key=value lines (flag names without dashes); explicit "
               f"flags override the file. {SEED_ENV} sets the default seed.")
    parser.add_argument("--config", help="key=value file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="compound pmf table P(M(t) = k)")
    _add_family(p)
    p.add_argument("--t", type=_time_list, required=True, help="time or comma-separated times")
    p.add_argument("--k-max", type=_nonneg_int("k-max"), required=True)
    p.add_argument("--method", choices=["newton", "series"], default="newton",
                   help="space-fractional evaluation (newton: exact finite form, series: "
                        "alternating series for lambda^(1/nu) t <= 20)")
    _add_output(p)

    p = sub.add_parser("conv", help="n-fold convolutions of the jump law")
    _add_family(p, need_nu=False)
    p.add_argument("--n-max", type=_nonneg_int("n-max"), required=True)
    p.add_argument("--k-max", type=_nonneg_int("k-max"), required=True)
    _add_output(p)

    p = sub.add_parser("moments", help="mean, variance and overdispersion gap (0 < nu <= 1)")
    _add_family(p, need_nu=False)
    p.add_argument("--nu", type=_ranged("nu", 0, 1, hi_open=False))
    p.add_argument("--nu-grid", type=_nu_grid, help="start:stop:step instead of --nu")
    p.add_argument("--t", type=_time_list, required=True)
    _add_output(p)

    p = sub.add_parser("zcurve", help="overdispersion factor Z(nu)")
    p.add_argument("--nu-grid", type=_nu_grid, required=True, help="start:stop:step in (0, 1]")
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo counts through the mixed representation")
    _add_family(p)
    p.add_argument("--t", type=_ranged("t", 0, math.inf, lo_open=False), required=True)
    p.add_argument("--n", type=_nonneg_int("n", 1), required=True)
    p.add_argument("--seed", type=_nonneg_int("seed"))
    p.add_argument("--workers", type=_nonneg_int("workers", 1), default=1)
    _add_output(p)

    p = sub.add_parser("verify", help="residual report for one governing equation")
    p.add_argument("--system", required=True,
                   choices=["kolmogorov", "pa-recursion", "two-param-pa", "two-param-pig",
                            "space-difference", "space-classical"])
    _add_family(p)
    p.add_argument("--k-max", type=_nonneg_int("k-max"))
    p.add_argument("--t", type=_time_list, help="comma-separated positive times")
    p.add_argument("--h", type=_ranged("h", 0, math.inf), default=1e-3)
    p.add_argument("--quad-tol", type=_ranged("quad-tol", 0, math.inf), default=1e-10)
    p.add_argument("--fd-step", type=_ranged("fd-step", 0, math.inf), default=1e-4)
    p.add_argument("--tolerance", type=_ranged("tolerance", 0, math.inf))
    p.add_argument("--n", type=_nonneg_int("n", 2), default=4000,
                   help="Monte Carlo size for exploratory eta < 1 reports")
    p.add_argument("--seed", type=_nonneg_int("seed"))
    _add_output(p, default_format="json")

    p = sub.add_parser("transform-check", help="Monte Carlo checks of the Laplace/mgf identities")
    p.add_argument("--n", type=_nonneg_int("n", 2), default=100_000)
    p.add_argument("--seed", type=_nonneg_int("seed"))
    _add_output(p, default_format="json")
    return parser


# ---- config file ------------------------------------------------------------

def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into flag tokens; ``#`` starts a comment."""
    tokens: list[str] = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise UsageError(f"cannot read config file {path!r}: {err.strerror}")
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config {path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        tokens += ["--" + key.replace("_", "-"), value]
    return tokens


def _merge_config(argv: list[str]) -> list[str]:
    """Place config-file flags right after the subcommand so later explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    pos = next((j for j, tok in enumerate(rest) if tok in COMMANDS), None)
    if pos is None:
        raise UsageError("a subcommand is required")
    return rest[: pos + 1] + read_config(path) + rest[pos + 1:]


# ---- process construction ---------------------------------------------------

def _require(args, family: str, *names: str):
    missing = [n for n in names if getattr(args, n if n != "lambda" else "lam") is None]
    if missing:
        flags = ", ".join("--" + m for m in missing)
        raise UsageError(f"--family {family} needs {flags}")


def _forbid(args, family: str, *names: str):
    given = [n for n in names if getattr(args, n if n != "lambda" else "lam") is not None]
    if given:
        flags = ", ".join("--" + g for g in given)
        raise UsageError(f"--family {family} does not take {flags}")


def build_law(args):
    """Jump law and Poisson rate from the family flags (rate ``None`` if not determined)."""
    fam = args.family
    if fam is None:
        raise UsageError("--family is required (one of pa, pig, nb, ztnb)")
    if fam == "pa":
        _require(args, fam, "p")
        _forbid(args, fam, "beta", "mu", "alpha", "r")
        return jumplaws.polya_aeppli_law(args.p), args.lam
    if fam == "pig":
        _require(args, fam, "beta", "mu")
        _forbid(args, fam, "p", "alpha", "r", "lambda")
        return jumplaws.pig_law(args.beta), jumplaws.pig_lambda(args.beta, args.mu)
    if fam == "nb":
        _require(args, fam, "p")
        _forbid(args, fam, "beta", "mu", "alpha", "r", "lambda")
        return jumplaws.negative_binomial_law(args.p), -math.log(args.p)
    _require(args, fam, "alpha", "r")
    _forbid(args, fam, "p", "beta", "mu")
    return jumplaws.JumpLaw(args.alpha, args.r), args.lam


def build_spec(args, nu: float | None = None) -> ProcessSpec:
    law, lam = build_law(args)
    if lam is None:
        raise UsageError(f"--family {args.family} needs --lambda")
    nu = args.nu if nu is None else nu
    if nu == 1 and args.command not in ("moments",):
        raise UsageError("nu must differ from 1 (nu = 1 is the classical Poisson process)")
    return ProcessSpec(law, lam, nu, getattr(args, "eta", 1.0))


# ---- output -----------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    return str(x)


def to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def _table_out(args, header, rows) -> str:
    if args.format == "csv":
        return to_csv(header, rows)
    return to_json([dict(zip(header, row)) for row in rows])


# ---- commands ---------------------------------------------------------------

def cmd_pmf(args) -> tuple[str, int]:
    spec = build_spec(args)
    if spec.eta != 1:
        raise UsageError("pmf tables need --eta 1 (no series pmf exists for eta < 1)")
    table = compound.compound_pmf_table(spec, args.t, args.k_max, space_method=args.method)
    if len(args.t) == 1:
        return _table_out(args, ["k", "prob"], [(k, p) for k, p in enumerate(table[0])]), EXIT_OK
    rows = [(t, k, p) for t, row in zip(args.t, table) for k, p in enumerate(row)]
    return _table_out(args, ["t", "k", "prob"], rows), EXIT_OK


def cmd_conv(args) -> tuple[str, int]:
    law, _ = build_law(args)
    rows = [(n, k, jumplaws.conv_pmf(law, n, k))
            for n in range(args.n_max + 1) for k in range(args.k_max + 1)]
    return _table_out(args, ["n", "k", "prob"], rows), EXIT_OK


def cmd_moments(args) -> tuple[str, int]:
    if (args.nu is None) == (args.nu_grid is None):
        raise UsageError("moments needs exactly one of --nu or --nu-grid")
    nus = [args.nu] if args.nu is not None else list(args.nu_grid)
    if any(not 0 < nu <= 1 for nu in nus):
        raise UsageError("nu must be in (0, 1] for finite moments")
    if any(t <= 0 for t in args.t):
        raise UsageError("t must be > 0 for moments")
    law, lam = build_law(args)
    if lam is None:
        raise UsageError(f"--family {args.family} needs --lambda")
    rows = []
    for nu in nus:
        spec = ProcessSpec(law, lam, float(nu))
        for t in args.t:
            rows.append((nu, t) + compound.compound_moments(spec, t))
    return _table_out(args, ["nu", "t", "mean", "variance", "gap"], rows), EXIT_OK


def cmd_zcurve(args) -> tuple[str, int]:
    grid = args.nu_grid
    if np.any(grid <= 0) or np.any(grid > 1):
        raise UsageError("nu-grid values must lie in (0, 1]")
    z = fracpoisson.overdispersion_factor(grid)
    return _table_out(args, ["nu", "Z"], list(zip(grid, np.atleast_1d(z)))), EXIT_OK


def cmd_simulate(args) -> tuple[str, int]:
    spec = build_spec(args)
    seed = _default_seed() if args.seed is None else args.seed
    draws = subord.simulate_counts(spec, args.t, args.n, seed, workers=args.workers)
    counts = np.bincount(draws)
    rows = [(k, int(c), c / args.n) for k, c in enumerate(counts)]
    return _table_out(args, ["k", "count", "freq"], rows), EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    kw = {}
    if args.t is not None:
        kw["t_grid"] = args.t
    if args.k_max is not None:
        kw["k_max"] = args.k_max
    if args.tolerance is not None:
        kw["tolerance"] = args.tolerance
    system = args.system
    if system == "space-difference":
        # plain space-fractional Poisson process: only lambda and nu matter
        if args.lam is None:
            raise UsageError("--system space-difference needs --lambda")
        if args.family is not None:
            raise UsageError("--system space-difference takes --lambda and --nu, not --family")
        report = verify.spacefrac_op_residuals(args.lam, args.nu, step=args.fd_step, **kw)
    else:
        spec = build_spec(args)
        ops = {"h": args.h, "quad_tol": args.quad_tol}
        if system == "kolmogorov":
            report = verify.kolmogorov_residuals(spec, **ops, **kw)
        elif system == "pa-recursion":
            report = verify.pa_recursion_residuals(spec, **ops, **kw)
        elif system == "space-classical":
            report = verify.space_classical_residuals(spec, step=args.fd_step, **kw)
        else:
            seed = _default_seed() if args.seed is None else args.seed
            which = "pa" if system == "two-param-pa" else "pig"
            report = verify.two_param_residuals(spec, which, n_samples=args.n, seed=seed,
                                                **ops, **kw)
    status = EXIT_OK if report.passed or report.exploratory else EXIT_FAILED_CHECK
    if args.format == "json":
        return to_json(report.to_dict()), status
    rows = [(k, t, r) for k, row in zip(report.k_range, report.residuals)
            for t, r in zip(report.t_grid, row)]
    return to_csv(["k", "t", "residual"], rows), status


def cmd_transform_check(args) -> tuple[str, int]:
    seed = _default_seed() if args.seed is None else args.seed
    report = verify.transform_checks(seed=seed, n_samples=args.n)
    status = EXIT_OK if report.passed else EXIT_FAILED_CHECK
    if args.format == "json":
        return to_json(report.to_dict()), status
    header = ["identity", "variant", "theta", "t", "nu", "mc_mean", "exact", "std_err", "z", "pass"]
    rows = [(c.identity, c.variant, c.theta, c.t, "" if c.nu is None else c.nu, c.mc_mean,
             c.exact, c.std_err, c.z, c.passed) for c in report.checks]
    return to_csv(header, rows), status


COMMANDS = {
    "pmf": cmd_pmf,
    "conv": cmd_conv,
    "moments": cmd_moments,
    "zcurve": cmd_zcurve,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "transform-check": cmd_transform_check,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run one command and return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(stderr):
            args = parser.parse_args(_merge_config(argv))
    except UsageError as err:
        print(f"fraccp: error: {err}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse reports its own usage errors
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        text, status = COMMANDS[args.command](args)
    except NumericalError as err:
        print(f"fraccp: numerical error: {err}", file=stderr)
        return EXIT_NUMERICAL
    except (UsageError, ValueError) as err:
        print(f"fraccp: error: {err}", file=stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
