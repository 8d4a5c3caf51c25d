"""Command-line front end: ``tailwedge {mgf,critical,tail,simulate,validate}``.

Every command writes CSV (17 significant digits, header row first) to
standard output or ``--out``.  Warnings and notes go to standard error.

Options may also come from ``--config FILE``: one ``key = value`` per line,
``#`` starts a comment, keys are option names without the leading dashes.
Flags given on the command line win over the file.  The worker count is
taken from ``--workers``, then ``TAILWEDGE_WORKERS``, then the file.

Exit codes: 0 success, 1 validation failure, 2 bad arguments or violated
preconditions, 3 numerical or domain failure.
"""

import argparse
import csv
import io
import math
import os
import sys
import warnings

from . import riccati
from .critical import SuperpositionSpec, corollary_band, critical_moments, cir_mgf_model, mu_plus
from .errors import InvalidInputError, NumericalError, PreconditionError, TailwedgeError
from .models import GammaParams, HestonParams, VarianceGammaParams, gamma_model, heston_log_mgf, vg_model
from .montecarlo import WILSON_Z, McConfig, estimate
from .riccati import CirParams
from .tauberian import chernoff_upper, legendre, tail_band

__all__ = ["main", "run", "load_config", "EXIT_OK", "EXIT_VALIDATION", "EXIT_USAGE", "EXIT_NUMERICAL"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

WORKERS_ENV = "TAILWEDGE_WORKERS"
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- parsing

def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return value


def _finite_list(text):
    items = [s.strip() for s in str(text).split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return [_finite(s) for s in items]


def _count(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _workers(text):
    if text == "auto":
        return text
    value = _count(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"workers must be positive or 'auto', got {text!r}")
    return value


def _add_model(p, models):
    p.add_argument("--model", choices=models)
    g = p.add_argument_group("model parameters")
    for name in ("k", "theta", "c", "g", "m", "a", "b", "sigma", "v0", "rho", "l1", "l2", "t"):
        if name == "c" and "vg" not in models:
            continue
        g.add_argument(f"--{name}", type=_finite)


def _add_io(p):
    p.add_argument("--config", metavar="PATH", help="key = value file; flags override it")
    p.add_argument("--out", metavar="PATH", help="write CSV here instead of standard output")


def build_parser():
    parser = _Parser(prog="tailwedge", description="Right-tail asymptotics from exploding moment generating functions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mgf", help="log moment generating function")
    _add_model(p, ("gamma", "vg", "cir", "heston"))
    p.add_argument("--p", type=_finite_list, default=[1.0], help="comma-separated arguments (default 1)")
    _add_io(p)

    p = sub.add_parser("critical", help="critical moments and blow-up coefficients")
    _add_model(p, ("cir",))
    p.add_argument("--side", choices=("plus", "minus", "both"), default="both")
    _add_io(p)

    p = sub.add_parser("tail", help="Legendre transform, Chernoff bound and tail bands")
    _add_model(p, ("gamma", "vg", "cir"))
    p.add_argument("--R", type=_finite_list, help="comma-separated tail levels (required)")
    _add_io(p)

    p = sub.add_parser("simulate", help="Monte Carlo tail and MGF estimates")
    _add_model(p, ("cir",))
    p.add_argument("--R", type=_finite_list, help="comma-separated tail levels")
    p.add_argument("--p", type=_finite_list, help="comma-separated MGF arguments")
    p.add_argument("--paths", type=_count, default=200_000)
    p.add_argument("--steps", type=_count, default=256)
    p.add_argument("--seed", type=_count, default=0)
    p.add_argument("--workers", type=_workers)
    _add_io(p)

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated check names or numbers")
    p.add_argument("--quick", action="store_true", help="reduced path and sample counts")
    _add_io(p)
    return parser


def load_config(path):
    """Read ``key = value`` lines into an ordered dict of strings."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config {path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise UsageError(f"config {path}:{lineno}: empty key")
            entries[key.replace("_", "-")] = value
    return entries


def _config_tokens(subparser, entries):
    actions = {opt: a for a in subparser._actions for opt in a.option_strings}
    tokens = []
    for key, value in entries.items():
        opt = f"--{key}"
        action = actions.get(opt)
        if action is None or key in ("config", "help"):
            raise UsageError(f"config: unknown key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in _TRUE:
                tokens.append(opt)
            elif value.lower() not in _FALSE:
                raise UsageError(f"config: {key} expects true or false, got {value!r}")
        else:
            tokens += [opt, value]
    return tokens


def parse(argv):
    """Parse ``argv``, folding in ``--config`` entries under the flags."""
    parser = build_parser()
    args = parser.parse_args(argv)
    file_workers = None
    if args.config:
        try:
            entries = load_config(args.config)
        except OSError as exc:
            raise UsageError(f"config: cannot read {args.config}: {exc.strerror}") from None
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        if args.command == "simulate" and "workers" in entries:
            # the file sits below TAILWEDGE_WORKERS, so keep it out of the flags
            try:
                file_workers = _workers(entries.pop("workers"))
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config: {exc}") from None
        args = parser.parse_args([args.command, *_config_tokens(subparser, entries), *argv[1:]])
    args.file_workers = file_workers
    if args.command != "validate" and args.model is None:
        raise UsageError("--model is required")
    if args.command == "tail" and not args.R:
        raise UsageError("--R is required")
    return args


def _resolve_workers(args):
    if args.workers is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return _workers(env.strip())
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{WORKERS_ENV}: {exc}") from None
    return args.file_workers or 1


# ---------------------------------------------------------------- helpers

def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing-parameter: --{', --'.join(missing)} required for model {args.model}")
    return [getattr(args, n) for n in names]


def _cir(args):
    a, b, sigma, v0 = _need(args, "a", "b", "sigma", "v0")
    return CirParams(a, b, sigma, v0)


def _spec(args):
    (t,) = _need(args, "t")
    return SuperpositionSpec(args.l1 or 0.0, args.l2 or 0.0, t)


def _mgf_model(args):
    if args.model == "gamma":
        return gamma_model(GammaParams(*_need(args, "k", "theta")))
    if args.model == "vg":
        return vg_model(VarianceGammaParams(*_need(args, "c", "g", "m")))
    return cir_mgf_model(_cir(args), _spec(args))


def fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _write_csv(out, header, rows):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


# ---------------------------------------------------------------- commands

def cmd_mgf(args, err):
    rows = []
    if args.model == "cir":
        params, spec = _cir(args), _spec(args)
        for p in args.p:
            rows.append((p, riccati.log_mgf(params, p * spec.l1, p * spec.l2, spec.t)))
    elif args.model == "heston":
        params = HestonParams(_cir(args), args.rho or 0.0)
        (t,) = _need(args, "t")
        for p in args.p:
            rows.append((p, heston_log_mgf(params, p, t)))
    else:
        model = _mgf_model(args)
        rows = [(p, model.log_mgf(p)) for p in args.p]
    rows = [(p, lam, math.exp(lam) if lam < 709.0 else math.inf) for p, lam in rows]
    return ["p", "logmgf", "mgf"], rows


def cmd_critical(args, err):
    params, spec = _cir(args), _spec(args)
    if not (spec.l1 or spec.l2):
        raise PreconditionError("precondition-violated: l1 and l2 are both zero")
    sides = ("plus", "minus") if args.side == "both" else (args.side,)
    if args.side == "plus":
        mu_plus(params, spec)
    elif args.side == "minus":
        mu_plus(params, spec.negated())
    res = critical_moments(params, spec)
    rows = []
    for side in sides:
        rows.append((side, *(getattr(res, f"{name}_{side}") for name in
                             ("mu", "omega", "log_coeff", "resid", "omega_closed"))))
    return ["side", "mu_star", "omega", "log_coeff", "fit_resid", "omega_closed"], rows


def cmd_tail(args, err):
    model = _mgf_model(args)
    cir = args.model == "cir"
    params, spec = (_cir(args), _spec(args)) if cir else (None, None)
    rows = []
    for R in args.R:
        band = tail_band(model, R)
        lp = legendre(model, R)
        if cir:
            cb = corollary_band(params, spec, R)
            centre, c_lo, c_hi = cb.center, *cb.c_interval
        else:
            centre = c_lo = c_hi = math.nan
        rows.append((R, lp.p_star, lp.lambda_star, chernoff_upper(model, R), *band.exponent_interval,
                     band.log_upper, band.log_lower_limsup, centre, c_lo, c_hi))
    print("note: exponent and corollary intervals constrain limsup as R -> inf, not finite R", file=err)
    header = ["R", "p_star", "lambda_star", "chernoff_bound", "band_lower", "band_upper", "log_upper",
              "log_lower_limsup", "corollary_center", "corollary_c_low", "corollary_c_high"]
    return header, rows


def cmd_simulate(args, err):
    params, spec = _cir(args), _spec(args)
    if not args.R and not args.p:
        raise UsageError("simulate needs --R and/or --p")
    config = McConfig(args.paths, args.steps, args.seed, _resolve_workers(args))
    tails, mgfs = estimate(params, spec, config, args.R or (), args.p or ())
    model = None
    if tails:
        try:
            model = cir_mgf_model(params, spec)
        except PreconditionError:
            pass
    rows = []
    for est in tails:
        bound = math.nan
        if model is not None:
            bound = 1.0 if est.R <= model.mean else chernoff_upper(model, est.R)
        se = math.sqrt(est.p_hat * (1.0 - est.p_hat) / est.n_paths)
        rows.append(("tail", est.R, est.p_hat, est.ci_low, est.ci_high, est.n_exceed, se, bound))
        if est.zero_exceedance:
            print(f"warning: zero-exceedance at R={fmt(est.R)}; upper end is the rule-of-three bound", file=err)
    for est in mgfs:
        exact = math.exp(riccati.log_mgf(params, est.p * spec.l1, est.p * spec.l2, spec.t))
        half = WILSON_Z * est.std_error
        rows.append(("mgf", est.p, est.estimate, est.estimate - half, est.estimate + half,
                     math.nan, est.std_error, exact))
    header = ["kind", "x", "estimate", "ci_low", "ci_high", "n_exceed", "std_error", "closed_form"]
    return header, rows


def cmd_validate(args, out, err):
    from .validation import CHECKS, run_checks

    only = None
    if args.only:
        known = {name: number for number, name, *_ in CHECKS}
        only = []
        for item in args.only.split(","):
            item = item.strip()
            if item.isdigit() and int(item) in known.values():
                only.append(int(item))
            elif item in known:
                only.append(known[item])
            else:
                raise UsageError(f"unknown check {item!r}; known: {', '.join(known)}")
    failed = False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for res in run_checks(only, args.quick):
            print(res.line(), file=out, flush=True)
            failed |= not res.passed and not res.soft
    return EXIT_VALIDATION if failed else EXIT_OK


_COMMANDS = {"mgf": cmd_mgf, "critical": cmd_critical, "tail": cmd_tail, "simulate": cmd_simulate}


def main(argv=None, stdout=None, stderr=None):
    """Run the CLI and return the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        args = parse(argv)
        if args.command == "validate":
            if args.out:
                buf = io.StringIO()
                code = cmd_validate(args, buf, err)
                with open(args.out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(buf.getvalue())
                return code
            return cmd_validate(args, out, err)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            header, rows = _COMMANDS[args.command](args, err)
        for w in caught:
            print(f"warning: {w.message}", file=err)
        buf = io.StringIO()
        _write_csv(buf, header, rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            out.write(buf.getvalue())
        return EXIT_OK
    except UsageError as exc:
        print(f"error: invalid-arguments: {exc}", file=err)
        return EXIT_USAGE
    except InvalidInputError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERICAL
    except TailwedgeError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_NUMERICAL
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


def run():
    sys.exit(main())
