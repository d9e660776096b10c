"""Command-line front end.

Subcommands: ``measure``, ``staff``, ``retrial``, ``bistability``, ``table``
and ``figure2``. Reports are CSV (figure data as tab-separated lines) or
JSON, with every number printed to six decimals. Exit status is 0 on
success, 1 on I/O failure, 2 on a domain error, 3 when a solver fails to
converge or a self-check fails, and 64 on bad usage.
"""

import argparse
import io
import csv
import json
import sys
from dataclasses import asdict, dataclass, field, fields

from .admission import parse_policy
from .bistability import figure2_data, solve_problem3, solve_problem4
from .exceptions import ConsistencyError, ConvergenceError, DomainError
from .performance import decomposed_measures
from .retrials import cohen_residual, solve_cohen
from .staffing import CONSISTENT, FROZEN, StaffingProblem, staff_refined

EXIT_OK = 0
EXIT_IO = 1
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3
EXIT_USAGE = 64

COMMANDS = ("measure", "staff", "retrial", "bistability", "table", "figure2")
DEFAULT_EPS_LIST = tuple(round(0.01 * k, 2) for k in range(1, 11))
TABLE_COLUMNS = ("epsilon", "lambda_opt", "lambda_star", "lambda_bullet", "r_bullet",
                 "constraint_at_star", "constraint_at_bullet")
DECIMALS = 6


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs. Defaults are part of the interface."""

    command: str
    servers: int = 100
    epsilon: float = 0.01
    policy_spec: str = "loss"
    variant: str = "dfr"
    retrials: bool = False
    format: str = "csv"
    tol: float = 1e-10
    output_path: str = None
    load: float = None
    eps_list: tuple = DEFAULT_EPS_LIST
    servers_list: tuple = ()
    grid_size: int = 256
    problem: int = 3
    retrial_load: str = CONSISTENT

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key in ("eps_list", "servers_list"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass(frozen=True)
class Report:
    """Named columns and rows of numbers, rounded to the printed precision."""

    kind: str
    columns: tuple
    rows: tuple
    groups: tuple = field(default=())

    @classmethod
    def build(cls, kind, columns, rows, groups=()):
        clean = tuple(tuple(_round(v) for v in row) for row in rows)
        return cls(kind, tuple(columns), clean, tuple(groups))


def _round(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    return round(float(value), DECIMALS)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return f"{value:.{DECIMALS}f}"


def emit(report, fmt):
    """Serialise ``report`` as ``csv`` or ``json`` text."""
    if fmt == "json":
        body = {"kind": report.kind, "columns": list(report.columns),
                "rows": [dict(zip(report.columns, row)) for row in report.rows]}
        if report.groups:
            body["groups"] = list(report.groups)
        return json.dumps(body, indent=2) + "\n"
    if fmt != "csv":
        raise UsageError(f"unknown format {fmt!r}")
    if report.kind == "figure2":
        return _emit_figure2(report)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit_figure2(report):
    lines = []
    multi = len(set(report.groups)) > 1
    current = None
    for s, row in zip(report.groups, report.rows):
        if multi and s != current:
            lines.append(f"# s={s}")
            current = s
        lines.append("\t".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_report(text, fmt, kind=None):
    """Inverse of :func:`emit` for numeric reports."""
    if fmt == "json":
        body = json.loads(text)
        cols = tuple(body["columns"])
        rows = tuple(tuple(r[c] for c in cols) for r in body["rows"])
        return Report(body["kind"], cols, rows, tuple(body.get("groups", ())))
    if kind == "figure2":
        groups, rows, current = [], [], None
        for line in text.splitlines():
            if line.startswith("# s="):
                current = int(line[4:])
                continue
            d, v = line.split("\t")
            groups.append(current)
            rows.append((float(d), float(v)))
        return Report("figure2", ("delta", "value"), tuple(rows), tuple(groups))
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    rows = tuple(tuple(_parse_cell(c) for c in row) for row in reader)
    return Report(kind or "table", header, rows)


def _parse_cell(cell):
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    if "." in cell or "e" in cell or "inf" in cell or "nan" in cell:
        return float(cell)
    return int(cell)


def _problem(config, policy, epsilon):
    return StaffingProblem(config.servers, epsilon, policy, config.variant.upper(), config.retrials)


def _staff_row(config, policy, epsilon, err):
    sol = staff_refined(_problem(config, policy, epsilon), retrial_load=config.retrial_load)
    for msg in sol.warnings:
        print(f"warning: {msg}", file=err)
    if abs(sol.achieved_opt - epsilon) > max(config.tol, 1e-9):
        raise ConsistencyError(f"achieved {sol.achieved_opt!r} at lambda_opt misses target {epsilon!r}")
    return (epsilon, sol.lambda_opt, sol.lambda_star, sol.lambda_bullet, sol.r_bullet,
            sol.achieved_star, sol.achieved_bullet)


def run_table(config, policy, err):
    rows = [_staff_row(config, policy, eps, err) for eps in config.eps_list]
    return Report.build("table", TABLE_COLUMNS, rows)


def run_staff(config, policy, err):
    return Report.build("table", TABLE_COLUMNS, [_staff_row(config, policy, config.epsilon, err)])


def _require_load(config):
    if config.load is None:
        raise UsageError("--lambda is required for this command")
    return config.load


def run_measure(config, policy, err):
    lam = _require_load(config)
    s = config.servers
    cols = ["s", "lambda", "erlang_b", "erlang_c", "d_f", "d_f_r", "q"]
    row = [s, lam]
    if config.retrials:
        sol = _checked_cohen(config, policy, lam)
        m = decomposed_measures(s, lam + sol.omega, policy)
        cols += ["omega"]
        row += [m.b, m.c, m.d_f, m.d_f_r, m.q, sol.omega]
    else:
        m = decomposed_measures(s, lam, policy)
        row += [m.b, m.c, m.d_f, m.d_f_r, m.q]
    return Report.build("measure", cols, [row])


def _checked_cohen(config, policy, lam):
    sol = solve_cohen(config.servers, lam, policy)
    resid = abs(cohen_residual(config.servers, lam, sol.omega, policy))
    if resid > config.tol:
        raise ConvergenceError(f"retrial fixed point residual {resid:.3g} exceeds {config.tol:g}")
    return sol


def run_retrial(config, policy, err):
    lam = _require_load(config)
    sol = _checked_cohen(config, policy, lam)
    m = decomposed_measures(config.servers, lam + sol.omega, policy)
    cols = ["s", "lambda", "omega", "a", "gamma", "residual", "d_f", "d_f_r"]
    row = [config.servers, lam, sol.omega, sol.a, sol.gamma, sol.residual, m.d_f, m.d_f_r]
    return Report.build("retrial", cols, [row])


def run_bistability(config, policy, err):
    if config.problem == 4:
        res = solve_problem4(config.servers, config.epsilon)
    elif config.problem == 3:
        res = solve_problem3(config.servers, config.epsilon, policy, config.variant.upper())
    else:
        raise UsageError(f"--problem must be 3 or 4, got {config.problem!r}")
    if res.resolution:
        print(f"note: {res.resolution}", file=err)
    cols = ["index", "lambda"]
    rows = [(i, lam) for i, lam in enumerate(res.solutions)]
    return Report.build("bistability", cols, rows)


def run_figure2(config, policy, err):
    servers = config.servers_list or (config.servers,)
    rows, groups = [], []
    for s in servers:
        for d, v in figure2_data(s, config.grid_size):
            rows.append((d, v))
            groups.append(s)
    return Report.build("figure2", ("delta", "value"), rows, groups)


_RUNNERS = {
    "measure": run_measure,
    "staff": run_staff,
    "retrial": run_retrial,
    "bistability": run_bistability,
    "table": run_table,
    "figure2": run_figure2,
}


def run(config, out=None, err=None):
    """Execute ``config``; returns the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        if config.command not in _RUNNERS:
            raise UsageError(f"unknown command {config.command!r}")
        if config.variant not in ("df", "dfr"):
            raise UsageError(f"variant must be df or dfr, got {config.variant!r}")
        if config.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {config.format!r}")
        if config.retrial_load not in (CONSISTENT, FROZEN):
            raise UsageError(f"retrial load must be {CONSISTENT} or {FROZEN}")
        try:
            policy = parse_policy(config.policy_spec)
        except (DomainError, OSError) as exc:
            raise UsageError(f"bad policy spec {config.policy_spec!r}: {exc}") from exc
        text = emit(_RUNNERS[config.command](config, policy, err), config.format)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=err)
        return EXIT_DOMAIN
    except (ConvergenceError, ConsistencyError) as exc:
        print(f"convergence error: {exc}", file=err)
        return EXIT_CONVERGENCE
    try:
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            out.write(text)
    except OSError as exc:
        print(f"i/o error: {exc}", file=err)
        return EXIT_IO
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _eps_list(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list: {text!r}") from None


def build_parser():
    parser = _Parser(prog="qedstaff", description="Many-server staffing with admission control and retrials.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, servers_many=False):
        if servers_many:
            p.add_argument("--servers", type=_positive_int, nargs="+", default=[1, 5, 10, 50, 100])
        else:
            p.add_argument("--servers", type=_positive_int, default=100)
        p.add_argument("--policy", default="loss", dest="policy_spec",
                       help="loss | delay | bernoulli:P | threshold:M | series:PATH")
        p.add_argument("--variant", choices=("df", "dfr"), default="dfr")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--output", dest="output_path", default=None)

    p = sub.add_parser("measure", help="stationary measures at one load")
    common(p)
    p.add_argument("--lambda", dest="load", type=float, required=True)
    p.add_argument("--retrials", action="store_true")

    p = sub.add_parser("retrial", help="retrial rate and inflated-load measures")
    common(p)
    p.add_argument("--lambda", dest="load", type=float, required=True)

    for name, helptext in (("staff", "staffing levels for one target"),
                           ("table", "staffing levels over a list of targets")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--retrials", action="store_true")
        p.add_argument("--retrial-load", choices=(CONSISTENT, FROZEN), default=CONSISTENT,
                       help="retrial rate used for the constraint columns")
        if name == "staff":
            p.add_argument("--epsilon", type=float, required=True)
        else:
            p.add_argument("--eps-list", type=_eps_list, default=DEFAULT_EPS_LIST)

    p = sub.add_parser("bistability", help="carried-traffic targets")
    common(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--problem", type=int, choices=(3, 4), default=3)

    p = sub.add_parser("figure2", help="scaled carried-traffic curves")
    common(p, servers_many=True)
    p.add_argument("--grid-size", type=int, default=256)
    return parser


def config_from_args(argv=None):
    ns = build_parser().parse_args(argv)
    values = {k: v for k, v in vars(ns).items() if v is not None}
    if ns.command == "figure2":
        values["servers_list"] = tuple(values["servers"])
        values["servers"] = values["servers_list"][0]
    if "retrials" in values:
        values["retrials"] = bool(values["retrials"])
    if "eps_list" in values:
        values["eps_list"] = tuple(values["eps_list"])
    return RunConfig(**values)


def main(argv=None):
    try:
        config = config_from_args(argv)
    except SystemExit as exc:
        return exc.code
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
