"""Command-line front end.

Every subcommand parses and validates its flags, calls into the library and
formats the result. Exit codes: 0 success, 1 runtime error, 2 usage error.
Errors go to stderr as a single line ``tsallisexp: <usage-error|error>: msg``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

from . import simlab
from .errors import DomainError, TsallisExpError
from .estimators import (
    BoxBound,
    EstimatorKind,
    IGPrior,
    baee,
    bayes,
    bz_finite,
    bz_smooth,
    confidence_interval,
    mle_plugin,
    stein,
)
from .expmodel import (
    EntropicConfig,
    PopulationParams,
    check_entropic_index,
    read_sample_csv,
    summarize,
    tsallis_joint,
)

PROG = "tsallisexp"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        raise UsageError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class Output:
    text: str
    failed: bool = False


# -- subcommand adapters ---------------------------------------------------------
# Each ``_prepare_*`` turns parsed args into a zero-argument job; DomainError raised
# while preparing is a usage error, anything raised by the job is a runtime error.


def _params(args, k: int) -> PopulationParams:
    u = args.u if args.u is not None else (0.0,) * k
    p = PopulationParams(u, args.sigma)
    if len(p.u) != k:
        raise DomainError(f"--u needs {k} comma-separated values (got {len(p.u)})")
    return p


def _prepare_entropy(args) -> Callable[[], Output]:
    check_entropic_index(args.q)
    if args.n is not None:
        EntropicConfig(args.k, args.n, args.q)
    if not args.sigma > 0:
        raise DomainError("sigma must be positive")
    return lambda: Output(_fmt(tsallis_joint(args.k, args.q, args.sigma)) + "\n")


def _load_stats(args):
    data = read_sample_csv(args.data)
    cfg = EntropicConfig(data.shape[0], data.shape[1], args.q)
    return cfg, data


def _prior(args, required: bool) -> IGPrior | None:
    if args.alpha is None and args.beta is None:
        if required:
            raise DomainError("--method bayes requires --alpha and --beta")
        return None
    if args.alpha is None or args.beta is None:
        raise DomainError("--alpha and --beta must be given together")
    return IGPrior(args.alpha, args.beta)


def _prepare_estimate(args) -> Callable[[], Output]:
    cfg, data = _load_stats(args)
    kind = EstimatorKind(args.method)
    prior = _prior(args, kind is EstimatorKind.BAYES)
    r = None
    if kind is EstimatorKind.BZ_FINITE:
        if args.r is None:
            raise DomainError("--method bz-finite requires --r")
        r = BoxBound(args.r)
        if len(r.r) != cfg.k:
            raise DomainError(f"--r needs {cfg.k} values")

    def job():
        stats = summarize(data)
        est = {
            EstimatorKind.MLE: lambda: mle_plugin(stats, cfg),
            EstimatorKind.BAEE: lambda: baee(stats, cfg),
            EstimatorKind.STEIN: lambda: stein(stats, cfg),
            EstimatorKind.BZ_FINITE: lambda: bz_finite(stats, cfg, r),
            EstimatorKind.BZ_SMOOTH: lambda: bz_smooth(stats, cfg),
            EstimatorKind.BAYES: lambda: bayes(stats, cfg, prior),
        }[kind]()
        row = dict(method=kind.value, value=est.value, multiplier=est.multiplier, t=stats.t,
                   k=cfg.k, n=cfg.n, q=cfg.q)
        return Output(_render([row], args.format))

    return job


def _prepare_ci(args) -> Callable[[], Output]:
    cfg, data = _load_stats(args)
    if not 0.0 < args.level < 1.0:
        raise DomainError("--level must lie in (0, 1)")

    def job():
        stats = summarize(data)
        lo, hi = confidence_interval(stats, cfg, 1.0 - args.level)
        row = dict(lower=lo, upper=hi, level=args.level, t=stats.t, k=cfg.k, n=cfg.n, q=cfg.q)
        return Output(_render([row], args.format))

    return job


def _prepare_ci_coverage(args) -> Callable[[], Output]:
    cfg = EntropicConfig(args.k, args.n, args.q)
    params = _params(args, cfg.k)
    params.check(cfg)
    if not 0.0 < args.level < 1.0:
        raise DomainError("--level must lie in (0, 1)")
    if args.M < simlab.MIN_REPLICATIONS:
        raise DomainError(f"--M must be at least {simlab.MIN_REPLICATIONS}")

    def job():
        cov = simlab.ci_coverage(cfg, params, 1.0 - args.level, args.M, args.seed)
        row = dict(k=cfg.k, n=cfg.n, q=cfg.q, level=args.level, coverage=cov, M=args.M, seed=args.seed)
        return Output(_render([row], args.format))

    return job


def _grid(args) -> simlab.ExperimentGrid:
    if args.M < simlab.MIN_REPLICATIONS:
        raise DomainError(f"--M must be at least {simlab.MIN_REPLICATIONS}")
    if args.preset is not None:
        if args.preset not in simlab.PRESETS:
            raise DomainError(f"--preset must be one of {sorted(simlab.PRESETS)} here")
        return simlab.preset_grid(args.preset, M=args.M, base_seed=args.seed, sigma=args.sigma)
    if args.n is None or args.q is None:
        raise DomainError("give --preset or both --n and --q")
    cfg = EntropicConfig(args.k, args.n, args.q)
    params = _params(args, cfg.k)
    return simlab.ExperimentGrid(
        u_values=(params.u,), q_values=(cfg.q,), n_values=(cfg.n,), sigma=params.sigma,
        k=cfg.k, M=args.M, base_seed=args.seed,
    )


def _prepare_pri_table(args) -> Callable[[], Output]:
    grid = _grid(args)

    def job():
        cells = simlab.run_grid(grid, workers=args.workers)
        return Output(simlab.format_table(cells, args.format))

    return job


def _prepare_risk_table(args) -> Callable[[], Output]:
    grid = _grid(args)
    kinds = [EstimatorKind(m) for m in (args.method or ["baee", "stein", "bz-smooth"])]
    prior = _prior(args, EstimatorKind.BAYES in kinds)
    if EstimatorKind.BZ_FINITE in kinds:
        raise DomainError("risk-table does not support bz-finite; use bz-smooth")

    def job():
        rows = simlab.risk_rows(grid, kinds, workers=args.workers, prior=prior)
        return Output(_render(rows, args.format))

    return job


def _prepare_oracle_check(args) -> Callable[[], Output]:
    if not args.tol > 0:
        raise DomainError("--tol must be positive")

    def job():
        from .oracle import run_checks

        checks = run_checks(tolerance=args.tol)
        rows = [
            dict(quantity=c.quantity, k=c.k, n=c.n, q=c.q, detail=c.detail, closed_form=repr(c.closed_form),
                 oracle=repr(c.oracle), abs_gap=f"{c.abs_gap:.3e}", rel_gap=f"{c.rel_gap:.3e}",
                 result="pass" if c.passed else "fail")
            for c in checks
        ]
        return Output(_render(rows, args.format), failed=not all(c.passed for c in checks))

    return job


def _prepare_plot_data(args) -> Callable[[], Output]:
    if args.preset not in simlab.FIGURE_PRESETS:
        raise DomainError(f"--preset must be one of {sorted(simlab.FIGURE_PRESETS)}")
    if args.M < simlab.MIN_REPLICATIONS:
        raise DomainError(f"--M must be at least {simlab.MIN_REPLICATIONS}")

    def job():
        rows = simlab.figure_data(args.preset, M=args.M, seed=args.seed, exact=not args.no_exact)
        return Output(_render(rows, args.format))

    return job


def _render(rows: Sequence[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, default=list) + "\n"
    return simlab.rows_to_csv(rows)


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Tsallis entropy estimation for exponential populations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, prepare, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(prepare=prepare)
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        return p

    p = add("entropy", _prepare_entropy, "joint Tsallis entropy of k populations")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)

    p = add("estimate", _prepare_estimate, "estimate Θ(σ) from a CSV sample")
    p.add_argument("--data", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--method", choices=[k.value for k in EstimatorKind], default="baee")
    p.add_argument("--r", type=_floats)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)

    p = add("ci", _prepare_ci, "confidence interval for σ^{k(1−q)} from a CSV sample")
    p.add_argument("--data", required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--level", type=float, default=0.95, help="confidence level 1−α")

    def sim_flags(p, m_default=10000):
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--n", type=int)
        p.add_argument("--q", type=float)
        p.add_argument("--sigma", type=float, default=1.0)
        p.add_argument("--u", type=_floats)
        p.add_argument("--M", type=int, default=m_default)
        p.add_argument("--seed", type=_seed, default=0)

    p = add("ci-coverage", _prepare_ci_coverage, "Monte-Carlo coverage of the interval")
    sim_flags(p, 50000)
    p.add_argument("--level", type=float, default=0.95, help="confidence level 1−α")

    for name, prep, help_ in (
        ("risk-table", _prepare_risk_table, "Monte-Carlo risks per grid cell and estimator"),
        ("pri-table", _prepare_pri_table, "PRI of Stein and Brewster-Zidek estimators vs BAEE"),
    ):
        p = add(name, prep, help_)
        sim_flags(p)
        p.add_argument("--preset", choices=sorted(simlab.PRESETS))
        p.add_argument("--workers", type=int, default=1)
        if name == "risk-table":
            p.add_argument("--method", action="append",
                           choices=[k.value for k in EstimatorKind if k is not EstimatorKind.BZ_FINITE])
            p.add_argument("--alpha", type=float)
            p.add_argument("--beta", type=float)

    p = add("oracle-check", _prepare_oracle_check, "closed forms vs quadrature oracle")
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("plot-data", _prepare_plot_data, "series behind the figures")
    p.add_argument("--preset", choices=sorted(simlab.FIGURE_PRESETS), required=True)
    p.add_argument("--M", type=int, default=10000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--no-exact", action="store_true", help="skip quadrature PRI columns for fig1")
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(f"{PROG}: {kind}: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        job = args.prepare(args)
    except UsageError as exc:
        return _fail("usage-error", exc, 2)
    except (DomainError, ValueError) as exc:
        return _fail("usage-error", exc, 2)
    except OSError as exc:
        return _fail("error", exc, 1)
    try:
        out = job()
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(out.text)
        else:
            sys.stdout.write(out.text)
    except (TsallisExpError, OSError, ArithmeticError) as exc:
        return _fail("error", exc, 1)
    return 1 if out.failed else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
