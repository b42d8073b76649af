"""Command-line front end: analytic, simulate, sweep and validate.

Every run echoes its fully resolved configuration as leading ``#`` comment
lines, so any output file is reproducible from its own header.  Values are
printed with 10 significant digits in text mode; CSV carries full precision.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import SystemParams, mean_aoi
from .distributions import ServiceDistribution, parse_distribution
from .errors import DegenerateRegimeError, NoDataError, UnsupportedConfigurationError
from .simulator import SimConfig, run
from .svgplot import write_line_plot

_CSV_HEADER = "lambda,m,method,mean_aoi,ci_halfwidth"


# ---------------------------------------------------------------------------
# argument helpers

def parse_lambda_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive stop) or an explicit ``a,b,c`` list."""
    text = text.strip()
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise ValueError(f"bad lambda grid {text!r}; expected start:stop:step")
        start, stop, step_ = (float(p) for p in pieces)
        if step_ <= 0 or stop < start:
            raise ValueError(f"bad lambda grid {text!r}")
        n = int(round((stop - start) / step_))
        grid = [start + i * step_ for i in range(n + 1)]
        grid = [g for g in grid if g <= stop + 1e-12]
    else:
        grid = [float(p) for p in text.split(",") if p.strip()]
    if not grid:
        raise ValueError("lambda grid is empty")
    if any(g <= 0 for g in grid):
        raise ValueError("all lambda values must be positive")
    return grid


def parse_m_list(text: str) -> list[int]:
    out = [int(p) for p in text.split(",") if p.strip()]
    if not out:
        raise ValueError("m list is empty")
    if any(m < 1 for m in out):
        raise ValueError("all m values must be >= 1")
    return out


@dataclass(frozen=True)
class SweepSpec:
    """A grid of (lambda, m) cells plus how to evaluate each one."""

    lambda_grid: list[float]
    m_list: list[int]
    service: ServiceDistribution
    method: str  # analytic | sim | both
    horizon: float
    warmup: float | None
    seed: int
    replications: int
    jobs: int


def _case_seed(master: int, index: int) -> int:
    # per-case streams derived from the master seed and the case index
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def _echo(command: str, settings: dict) -> list[str]:
    lines = [f"# aoiq {command}"]
    for key, value in settings.items():
        lines.append(f"# {key} = {value}")
    return lines


def _write_out(lines: list[str], out_path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _csv_row(lam: float, m: int, method: str, value: float, half: float) -> str:
    return f"{float(lam)!r},{m},{method},{float(value)!r},{float(half)!r}"


# ---------------------------------------------------------------------------
# analytic

def cmd_analytic(args) -> int:
    service = parse_distribution(args.service)
    if args.m >= 4:
        raise UnsupportedConfigurationError(
            f"no closed form for m={args.m}; use `aoiq simulate` instead"
        )
    params = SystemParams(lam=args.lam, m=args.m, service=service)
    est = mean_aoi(params)
    echo = _echo("analytic", {
        "m": args.m,
        "lambda": args.lam,
        "service": service.spec_string(),
        "format": args.format,
    })
    if args.format == "csv":
        lines = echo + [_CSV_HEADER, _csv_row(args.lam, args.m, "analytic", est.mean_aoi, 0.0)]
    else:
        lines = echo + [f"mean_aoi = {est.mean_aoi:.10g}"]
    _write_out(lines, args.out)
    return 0


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    service = parse_distribution(args.service)
    params = SystemParams(lam=args.lam, m=args.m, service=service)
    interarrival = parse_distribution(args.arrivals) if args.arrivals else None
    config = SimConfig(
        params=params,
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed,
        replications=args.replications,
        interarrival=interarrival,
    )
    result = run(config, event_log_path=args.event_log)
    est = result.estimate
    echo = _echo("simulate", {
        "m": args.m,
        "lambda": args.lam,
        "service": service.spec_string(),
        "arrivals": config.resolved_interarrival().spec_string(),
        "poisson": config.is_poisson(),
        "horizon": args.horizon,
        "warmup": config.resolved_warmup(),
        "seed": args.seed,
        "replications": args.replications,
        "format": args.format,
    })
    if args.format == "csv":
        lines = echo + [
            _CSV_HEADER,
            _csv_row(args.lam, args.m, "simulated", est.mean_aoi, est.ci_halfwidth),
        ]
    else:
        lines = echo + [
            f"mean_aoi = {est.mean_aoi:.10g}",
            f"ci95_halfwidth = {est.ci_halfwidth:.10g}",
            f"departures = {result.departures}",
            f"drop_fraction = {result.drop_fraction:.10g}",
        ]
    _write_out(lines, args.out)
    return 0


# ---------------------------------------------------------------------------
# sweep

def _sweep_rows(spec: SweepSpec) -> list[tuple[float, int, str, float, float]]:
    if spec.method in ("analytic", "both") and any(m >= 4 for m in spec.m_list):
        raise UnsupportedConfigurationError(
            "analytic sweep is limited to m in {1,2,3}; re-run with --method sim "
            "for larger buffers"
        )
    rows = []
    if spec.method in ("analytic", "both"):
        for lam in spec.lambda_grid:
            for m in spec.m_list:
                params = SystemParams(lam=lam, m=m, service=spec.service)
                rows.append((lam, m, "analytic", mean_aoi(params).mean_aoi, 0.0))
    if spec.method in ("sim", "both"):
        cells = [
            (idx, lam, m)
            for idx, (lam, m) in enumerate(
                (lam, m) for lam in spec.lambda_grid for m in spec.m_list
            )
        ]

        def one(cell):
            idx, lam, m = cell
            config = SimConfig(
                params=SystemParams(lam=lam, m=m, service=spec.service),
                horizon=spec.horizon,
                warmup=spec.warmup,
                seed=_case_seed(spec.seed, idx),
                replications=spec.replications,
            )
            est = run(config).estimate
            return (lam, m, "simulated", est.mean_aoi, est.ci_halfwidth)

        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            rows.extend(pool.map(one, cells))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def cmd_sweep(args) -> int:
    service = parse_distribution(args.service)
    spec = SweepSpec(
        lambda_grid=parse_lambda_grid(args.lambdas),
        m_list=parse_m_list(args.m_list),
        service=service,
        method=args.method,
        horizon=args.horizon,
        warmup=args.warmup,
        seed=args.seed,
        replications=args.replications,
        jobs=args.jobs,
    )
    rows = _sweep_rows(spec)
    echo = _echo("sweep", {
        "lambdas": ",".join(format(x, "g") for x in spec.lambda_grid),
        "m_list": ",".join(str(m) for m in spec.m_list),
        "service": service.spec_string(),
        "method": spec.method,
        "horizon": spec.horizon,
        "warmup": spec.warmup if spec.warmup is not None else 0.05 * spec.horizon,
        "seed": spec.seed,
        "replications": spec.replications,
        "jobs": spec.jobs,
    })
    lines = echo + [_CSV_HEADER] + [_csv_row(*row) for row in rows]
    _write_out(lines, args.out)
    if args.plot:
        curves = []
        for m in sorted(set(spec.m_list)):
            for method in ("analytic", "simulated"):
                pts = [(r[0], r[3]) for r in rows if r[1] == m and r[2] == method]
                if pts:
                    label = f"m={m} ({method})"
                    curves.append((label, [p[0] for p in pts], [p[1] for p in pts]))
        write_line_plot(
            args.plot,
            curves,
            title=f"mean age of information, service {service.spec_string()}",
            xlabel="arrival rate",
            ylabel="mean AoI",
        )
    return 0


# ---------------------------------------------------------------------------
# validate

@dataclass(frozen=True)
class ValidationCase:
    m: int
    lam: float
    service: ServiceDistribution


@dataclass(frozen=True)
class CaseResult:
    case: ValidationCase
    analytic: float
    sim_mean: float
    se: float
    passed: bool
    wide_ci: bool

    @property
    def z(self) -> float:
        return (self.sim_mean - self.analytic) / self.se if self.se > 0 else float("inf")


def default_validation_cases(lambdas=(0.5, 1.0, 4.0)) -> list[ValidationCase]:
    """12 buffer-3 cases over four service laws plus 6 each at m = 1 and 2."""
    m3_specs = ("det:1", "exp:1", "erlang:3:3", "gamma:0.5:0.5")
    small_specs = ("det:1", "exp:1")
    cases = [
        ValidationCase(3, lam, parse_distribution(s)) for s in m3_specs for lam in lambdas
    ]
    for m in (1, 2):
        cases.extend(
            ValidationCase(m, lam, parse_distribution(s)) for s in small_specs for lam in lambdas
        )
    return cases


def run_validation(
    cases: list[ValidationCase],
    horizon: float,
    replications: int,
    seed: int,
    warmup: float | None = None,
    jobs: int = 2,
) -> list[CaseResult]:
    """Run analytic vs simulation for each case; PASS iff inside the 3-sigma band."""
    if replications < 2:
        raise ValueError("validation needs at least 2 replications for a dispersion estimate")

    def one(item):
        idx, case = item
        params = SystemParams(lam=case.lam, m=case.m, service=case.service)
        ana = mean_aoi(params).mean_aoi
        config = SimConfig(
            params=params,
            horizon=horizon,
            warmup=warmup,
            seed=_case_seed(seed, idx),
            replications=replications,
        )
        result = run(config)
        se = result.se
        passed = abs(result.estimate.mean_aoi - ana) <= 3.0 * se
        wide = 3.0 * se > 0.05 * ana
        return CaseResult(
            case=case,
            analytic=ana,
            sim_mean=result.estimate.mean_aoi,
            se=se,
            passed=passed,
            wide_ci=wide,
        )

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, enumerate(cases)))


def cmd_validate(args) -> int:
    lambdas = parse_lambda_grid(args.lambdas)
    cases = default_validation_cases(tuple(lambdas))
    results = run_validation(
        cases,
        horizon=args.horizon,
        replications=args.replications,
        seed=args.seed,
        warmup=args.warmup,
        jobs=args.jobs,
    )
    echo = _echo("validate", {
        "lambdas": ",".join(format(x, "g") for x in lambdas),
        "cases": len(cases),
        "horizon": args.horizon,
        "warmup": args.warmup if args.warmup is not None else 0.05 * args.horizon,
        "seed": args.seed,
        "replications": args.replications,
        "jobs": args.jobs,
    })
    lines = list(echo)
    if args.format == "csv":
        lines.append("m,lambda,service,analytic,sim_mean,se,z,passed,wide_ci")
        for r in results:
            lines.append(
                f"{r.case.m},{float(r.case.lam)!r},{r.case.service.spec_string()},"
                f"{float(r.analytic)!r},{float(r.sim_mean)!r},{float(r.se)!r},"
                f"{float(r.z)!r},{int(r.passed)},{int(r.wide_ci)}"
            )
    else:
        lines.append(
            f"{'m':>2} {'lambda':>8} {'service':<14} {'analytic':>14} "
            f"{'sim_mean':>14} {'3se':>12} {'z':>8}  verdict"
        )
        for r in results:
            note = " (wide-ci)" if r.wide_ci else ""
            lines.append(
                f"{r.case.m:>2} {r.case.lam:>8g} {r.case.service.spec_string():<14} "
                f"{r.analytic:>14.10g} {r.sim_mean:>14.10g} {3 * r.se:>12.4g} "
                f"{r.z:>8.2f}  {'PASS' if r.passed else 'FAIL'}{note}"
            )
        n_fail = sum(not r.passed for r in results)
        lines.append(f"{len(results) - n_fail}/{len(results)} cases passed")
    _write_out(lines, args.out)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# parser

def _add_common_sim_flags(sub, horizon_default: float):
    sub.add_argument("--horizon", type=float, default=horizon_default,
                     help=f"simulated time span (default {horizon_default:g})")
    sub.add_argument("--warmup", type=float, default=None,
                     help="discarded initial time (default 5%% of horizon)")
    sub.add_argument("--seed", type=int, default=3, help="master seed (default 3)")
    sub.add_argument("--replications", type=int, default=8,
                     help="independent replications (default 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoiq",
        description="Mean age of information for single-server LIFO-pushout buffers.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("analytic", help="closed-form mean AoI for m in {1,2,3}")
    p.add_argument("--m", type=int, required=True, help="buffer size (1, 2 or 3)")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="arrival rate")
    p.add_argument("--service", required=True,
                   help="service law: det:<d>, exp:<mu>, erlang:<k>:<nu>, gamma:<a>:<nu>")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", default=None, help="write output to this path instead of stdout")
    p.set_defaults(func=cmd_analytic)

    p = subs.add_parser("simulate", help="simulate the buffer for any m >= 1")
    p.add_argument("--m", type=int, required=True, help="buffer size")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="arrival rate")
    p.add_argument("--service", required=True, help="service law spec")
    p.add_argument("--arrivals", default=None,
                   help="interarrival law spec (default exp:<lambda>, i.e. Poisson)")
    _add_common_sim_flags(p, 1e6)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", default=None)
    p.add_argument("--event-log", default=None,
                   help="write one JSON record per departure to this path")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("sweep", help="mean AoI over a lambda grid, CSV and optional SVG")
    p.add_argument("--lambdas", required=True, help="grid: start:stop:step or a,b,c")
    p.add_argument("--m-list", dest="m_list", required=True, help="buffer sizes, e.g. 1,2,3")
    p.add_argument("--service", required=True, help="service law spec")
    p.add_argument("--method", choices=("analytic", "sim", "both"), default="analytic")
    _add_common_sim_flags(p, 1e6)
    p.add_argument("--jobs", type=int, default=2, help="parallel simulation cells")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--plot", default=None, help="also write an SVG line chart here")
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("validate", help="analytic vs simulation on the default grid")
    p.add_argument("--lambdas", default="0.5,1,4", help="lambda values (default 0.5,1,4)")
    _add_common_sim_flags(p, 1e7)
    p.add_argument("--jobs", type=int, default=2, help="parallel cases")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, UnsupportedConfigurationError, DegenerateRegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NoDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
