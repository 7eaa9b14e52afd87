"""Command-line front end.

Subcommands: ``hd``, ``fd-robust``, ``sweep``, ``threshold``, ``split-study``
and ``oracle-check``.  Settings come from the ``RunSpec`` defaults, then an
optional ``--config`` file, then explicit flags.

Config grammar: one ``key = value`` per line, ``#`` starts a comment, keys are
exactly the :class:`RunSpec` field names.  List values are comma separated;
``splits`` entries are written ``KtxKr`` (e.g. ``4x8, 6x6, 8x4``).

Exit codes: 0 success, 1 usage error, 2 numerical or bracket failure.
"""

import argparse
import configparser
import csv
import dataclasses
import io
import sys
import typing
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import MODES, SystemConfig
from .errors import FdRelayError, InvalidInputError, NoCrossingError
from .montecarlo import (SEED_SCHEME, DesignKnobs, antenna_split_study, find_threshold,
                         oracle_instances, sweep_t, trial_channels)
from .rates import hd_optimal
from .robust import (DEFAULT_INNER_TOL, DEFAULT_MAX_INNER, DEFAULT_MAX_OUTER, DEFAULT_OUTER_TOL,
                     DEFAULT_SHRINK, DEFAULT_STOP_RULE, STOP_RULES, brute_force_worst_case,
                     robust_design, worst_case_inner)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

COMMANDS = ("hd", "fd-robust", "sweep", "threshold", "split-study", "oracle-check")
SWEEP_COLUMNS = ("t_over_p", "mean_hd", "se_hd", "mean_fd", "se_fd")
UB_COLUMNS = ("mean_ub", "se_ub")


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    command: str = "sweep"
    # system
    m_src: int = 2
    k_tx: int = 2
    k_rx: int = 3
    n_dst: int = 3
    p_src: float = 5.0
    p_relay: float = 5.0
    t_bound: float = 0.0
    mode: str = "full_duplex"
    channel_variance: float = 2.0
    # algorithm knobs
    shrink_c: float = DEFAULT_SHRINK
    outer_tol: float = DEFAULT_OUTER_TOL
    inner_tol: float = DEFAULT_INNER_TOL
    max_outer: int = DEFAULT_MAX_OUTER
    max_inner: int = DEFAULT_MAX_INNER
    stop_rule: str = DEFAULT_STOP_RULE
    # experiment
    l_trials: int = 2000
    master_seed: typing.Optional[int] = None
    output_path: typing.Optional[str] = None
    workers: int = 1
    trial_index: int = 0
    t_over_p: typing.Tuple[float, ...] = (0.0,)
    upper_bound: bool = False
    equal_antennas: typing.Tuple[int, ...] = ()
    t_lo: float = 1.0
    t_hi: float = 3.0
    threshold_tol: float = 1e-3
    total_relay_antennas: typing.Optional[int] = None
    splits: typing.Tuple[typing.Tuple[int, int], ...] = ()
    streams: int = 2
    instances: int = 50
    grid_points: int = 2000
    gap_limit: float = 0.05

    def system(self, **override):
        fields = dict(m_src=self.m_src, k_tx=self.k_tx, k_rx=self.k_rx, n_dst=self.n_dst,
                      p_src=self.p_src, p_relay=self.p_relay, t_bound=self.t_bound,
                      mode=self.mode, channel_variance=self.channel_variance)
        fields.update(override)
        return SystemConfig(**fields)

    def knobs(self):
        return DesignKnobs(self.shrink_c, self.outer_tol, self.inner_tol, self.max_outer,
                           self.max_inner, self.stop_rule)

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.master_seed is None:
            raise UsageError("a master seed is required (--seed or master_seed in the config)")
        if not 0.9 <= self.shrink_c < 1.0:
            raise UsageError(f"shrink_c must lie in [0.9, 1), got {self.shrink_c}")
        if not (self.outer_tol > 0 and self.inner_tol > 0 and self.threshold_tol > 0):
            raise UsageError("tolerances must be positive")
        if self.max_outer < 1 or self.max_inner < 1 or self.l_trials < 1 or self.workers < 1:
            raise UsageError("iteration limits, l_trials and workers must be >= 1")
        if self.stop_rule not in STOP_RULES:
            raise UsageError(f"stop_rule must be one of {sorted(STOP_RULES)}")
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}")


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_list(text, item):
    return tuple(item(x) for x in text.replace(",", " ").split())


def _parse_split(text):
    a, sep, b = text.strip().lower().partition("x")
    if not sep:
        raise ValueError(f"split must look like 4x8, got {text!r}")
    return int(a), int(b)


def _parse_optional_int(text):
    return None if text.strip().lower() in ("", "none") else int(text)


_PARSERS = {
    "master_seed": _parse_optional_int,
    "total_relay_antennas": _parse_optional_int,
    "output_path": lambda s: s.strip() or None,
    "upper_bound": _parse_bool,
    "t_over_p": lambda s: _parse_list(s, float),
    "equal_antennas": lambda s: _parse_list(s, int),
    "splits": lambda s: tuple(_parse_split(x) for x in s.split(",") if x.strip()),
}


def _field_parser(name):
    if name in _PARSERS:
        return _PARSERS[name]
    kind = {f.name: f.type for f in dataclasses.fields(RunSpec)}[name]
    return {int: int, float: float, str: str.strip}[kind]


def parse_value(name, text):
    try:
        return _field_parser(name)(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad value for {name}: {exc}") from None


def read_config(path):
    """Parse a ``key = value`` config file into a dict of RunSpec fields."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text, source=path)
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc.message.splitlines()[0]}") from None
    known = {f.name for f in dataclasses.fields(RunSpec)}
    values = {}
    for key, raw in parser["run"].items():
        if key not in known:
            raise UsageError(f"unknown config key {key!r} in {path}")
        values[key] = parse_value(key, raw)
    return values


def format_number(x):
    """Positional decimal with 16 significant digits (round-trips to ~1e-16)."""
    return np.format_float_positional(float(x), precision=16, unique=False, fractional=False,
                                      trim="k")


def _config_tag(cfg):
    return ";".join(f"{f.name}={getattr(cfg, f.name)}" for f in dataclasses.fields(cfg))


def report_header(reports, extra=""):
    r = reports[0]
    knobs = ";".join(f"{k}={v}" for k, v in dataclasses.asdict(r.knobs).items())
    cfgs = " | ".join(_config_tag(x.config) for x in reports)
    return (f"# fdrelay {__version__} config=[{cfgs}] L={r.l_trials} seed={r.master_seed} "
            f"knobs=[{knobs}] seeding=[{r.seed_scheme}]{extra}")


def _sweep_rows(report, lead=()):
    with_ub = report.mean_rates_ub is not None
    for i, t in enumerate(report.t_over_p_values):
        row = list(lead) + [format_number(t), format_number(report.mean_rates_hd[i]),
                            format_number(report.se_hd[i]), format_number(report.mean_rates_fd[i]),
                            format_number(report.se_fd[i])]
        if with_ub:
            row += [format_number(report.mean_rates_ub[i]), format_number(report.se_ub[i])]
        yield row


def emit_csv(report, path, lead_columns=(), lead_values=None):
    """Write one or more :class:`SweepReport` as CSV.

    ``report`` may be a list; ``lead_columns`` then names per-report leading
    columns whose values come from ``lead_values`` (one tuple per report).
    """
    reports = report if isinstance(report, (list, tuple)) else [report]
    lead_values = lead_values or [()] * len(reports)
    columns = list(lead_columns) + list(SWEEP_COLUMNS)
    if reports[0].mean_rates_ub is not None:
        columns += list(UB_COLUMNS)
    buf = io.StringIO()
    buf.write(report_header(reports) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rep, lead in zip(reports, lead_values):
        for row in _sweep_rows(rep, [str(v) for v in lead]):
            writer.writerow(row)
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_csv(path):
    """Inverse of :func:`emit_csv`: returns ``(header_line, {column: ndarray})``."""
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        rows = list(csv.reader(fh))
    names = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(names))
    return header, {name: data[:, j] for j, name in enumerate(names)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p):
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="key = value file; keys are RunSpec field names")
    g.add_argument("--seed", dest="master_seed", type=int, help="master seed (required)")
    g.add_argument("--out", dest="output_path", help="output file (default: stdout)")
    g.add_argument("--workers", type=int, help="worker processes; results do not depend on it")
    s = p.add_argument_group("system")
    s.add_argument("--m-src", dest="m_src", type=int, help="source antennas M")
    s.add_argument("--k-tx", dest="k_tx", type=int, help="relay transmit antennas K_t")
    s.add_argument("--k-rx", dest="k_rx", type=int, help="relay receive antennas K_r")
    s.add_argument("--n-dst", dest="n_dst", type=int, help="destination antennas N")
    s.add_argument("--p-src", dest="p_src", type=float, help="source power budget P_s")
    s.add_argument("--p-relay", dest="p_relay", type=float, help="relay power budget P_r")
    s.add_argument("--t-bound", dest="t_bound", type=float, help="RSI trace bound T")
    s.add_argument("--channel-variance", dest="channel_variance", type=float,
                   help="per-entry E|h|^2 of the random channels")
    k = p.add_argument_group("algorithm")
    k.add_argument("--c", dest="shrink_c", type=float, help="relay budget back-off factor in [0.9, 1)")
    k.add_argument("--outer-tol", dest="outer_tol", type=float, help="outer-loop tolerance (bits)")
    k.add_argument("--inner-tol", dest="inner_tol", type=float, help="inner-loop tolerance")
    k.add_argument("--max-outer", dest="max_outer", type=int, help="outer iteration limit")
    k.add_argument("--max-inner", dest="max_inner", type=int, help="inner iteration limit")
    k.add_argument("--stop-rule", dest="stop_rule", choices=sorted(STOP_RULES),
                   help="outer stopping rule")


def build_parser():
    parser = _Parser(prog="fdrelay", description="Robust full-duplex MIMO relay design tools.")
    parser.add_argument("--version", action="version", version=f"fdrelay {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("hd", help="optimal half-duplex design on one seeded channel draw")
    _add_common(p)
    p.add_argument("--trial", dest="trial_index", type=int, help="trial index of the draw")

    p = sub.add_parser("fd-robust", help="robust full-duplex design on one seeded channel draw")
    _add_common(p)
    p.add_argument("--trial", dest="trial_index", type=int, help="trial index of the draw")

    p = sub.add_parser("sweep", help="mean HD/FD rates over a T/P grid (CSV)")
    _add_common(p)
    p.add_argument("--trials", dest="l_trials", type=int, help="Monte-Carlo trials L")
    p.add_argument("--t-over-p", dest="t_over_p", help="comma-separated ascending T/P values")
    p.add_argument("--upper-bound", dest="upper_bound", action="store_const", const=True,
                   help="add known-RSI upper-bound columns")
    p.add_argument("--equal-antennas", dest="equal_antennas",
                   help="comma-separated counts; one sweep per count with M=K_t=K_r=N")

    p = sub.add_parser("threshold", help="HD/FD mode-switching threshold T*/P")
    _add_common(p)
    p.add_argument("--trials", dest="l_trials", type=int, help="Monte-Carlo trials L")
    p.add_argument("--tlo", dest="t_lo", type=float, help="lower T/P bracket")
    p.add_argument("--thi", dest="t_hi", type=float, help="upper T/P bracket")
    p.add_argument("--tol", dest="threshold_tol", type=float, help="bisection tolerance")

    p = sub.add_parser("split-study", help="sweeps over relay transmit/receive antenna splits (CSV)")
    _add_common(p)
    p.add_argument("--trials", dest="l_trials", type=int, help="Monte-Carlo trials L")
    p.add_argument("--t-over-p", dest="t_over_p", help="comma-separated ascending T/P values")
    p.add_argument("--total", dest="total_relay_antennas", type=int, help="K_t + K_r")
    p.add_argument("--splits", dest="splits", help="comma-separated KtxKr splits, e.g. 4x8,6x6")

    p = sub.add_parser("oracle-check", help="inner adversary versus the grid oracle")
    _add_common(p)
    p.add_argument("--streams", type=int, help="stream count (2 or 3)")
    p.add_argument("--instances", type=int, help="number of random instances")
    p.add_argument("--grid", dest="grid_points", type=int, help="simplex grid points")
    p.add_argument("--gap-limit", dest="gap_limit", type=float,
                   help="fail when any relative gap exceeds this (default 0.05)")
    return parser


_LIST_FLAGS = ("t_over_p", "equal_antennas", "splits")


def resolve(argv):
    """argv -> validated RunSpec (defaults < config file < flags)."""
    ns = build_parser().parse_args(argv)
    values = {}
    if ns.config:
        values.update(read_config(ns.config))
    for key, val in vars(ns).items():
        if key == "config" or val is None:
            continue
        values[key] = parse_value(key, val) if key in _LIST_FLAGS else val
    values["command"] = ns.command
    spec = RunSpec(**values)
    spec.validate()
    return spec


def _write_text(spec, text):
    if spec.output_path:
        with open(spec.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _vec(x):
    return "[" + ", ".join(format_number(v) for v in x) + "]"


def cmd_hd(spec):
    cfg = spec.system(mode="half_duplex")
    h1, h2 = trial_channels(cfg, spec.master_seed, spec.trial_index)
    d = hd_optimal(h1, h2, cfg.p_src, cfg.p_relay)
    lines = [f"seed = {spec.master_seed}", f"trial = {spec.trial_index}",
             f"r_sr = {format_number(d.rate.r_sr)}", f"r_rd = {format_number(d.rate.r_rd)}",
             f"r_end2end = {format_number(d.rate.r_end2end)}",
             f"gamma_s = {_vec(d.alloc_src.powers)}", f"gamma_r = {_vec(d.alloc_relay.powers)}"]
    _write_text(spec, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_fd_robust(spec):
    cfg = spec.system(mode="full_duplex")
    h1, h2 = trial_channels(cfg, spec.master_seed, spec.trial_index)
    res = robust_design(h1, h2, cfg, spec.shrink_c, spec.outer_tol, spec.inner_tol,
                        spec.max_outer, spec.max_inner, spec.stop_rule)
    lines = [f"seed = {spec.master_seed}", f"trial = {spec.trial_index}",
             f"t_bound = {format_number(cfg.t_bound)}",
             f"r_sr = {format_number(res.rates.r_sr)}", f"r_rd = {format_number(res.rates.r_rd)}",
             f"r_end2end = {format_number(res.rates.r_end2end)}",
             f"relay_budget_used = {format_number(res.relay_budget_used)}",
             f"outer_iterations = {len(res.trace)}", f"best_index = {res.best_index}",
             f"inner_converged = {res.inner_converged}",
             f"lower_bound_only = {res.lower_bound_only}",
             f"gamma_s = {_vec(res.gamma_s)}", f"gamma_r = {_vec(res.gamma_r)}",
             f"sigr_sq = {_vec(res.sigr_sq)}"]
    _write_text(spec, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(spec):
    knobs = spec.knobs()
    if spec.equal_antennas:
        reports = [sweep_t(spec.system(m_src=a, k_tx=a, k_rx=a, n_dst=a), spec.t_over_p,
                           spec.l_trials, spec.master_seed, knobs, spec.workers, spec.upper_bound)
                   for a in spec.equal_antennas]
        emit_csv(reports, spec.output_path, ("antennas",), [(a,) for a in spec.equal_antennas])
    else:
        report = sweep_t(spec.system(), spec.t_over_p, spec.l_trials, spec.master_seed, knobs,
                         spec.workers, spec.upper_bound)
        emit_csv(report, spec.output_path)
    return EXIT_OK


def cmd_threshold(spec):
    t = find_threshold(spec.system(), spec.t_lo, spec.t_hi, spec.l_trials, spec.master_seed,
                       spec.threshold_tol, spec.knobs(), spec.workers)
    _write_text(spec, format_number(t) + "\n")
    return EXIT_OK


def cmd_split_study(spec):
    if spec.total_relay_antennas is None or not spec.splits:
        raise UsageError("split-study needs total_relay_antennas and splits")
    reports = antenna_split_study(spec.m_src, spec.n_dst, spec.total_relay_antennas, spec.splits,
                                  spec.t_over_p, spec.l_trials, spec.master_seed, spec.p_src,
                                  spec.channel_variance, spec.knobs(), spec.workers)
    emit_csv(reports, spec.output_path, ("k_tx", "k_rx"), list(spec.splits))
    return EXIT_OK


def oracle_table(streams, instances, master_seed, grid_points, p=5.0, channel_variance=2.0,
                 inner_tol=DEFAULT_INNER_TOL, max_inner=DEFAULT_MAX_INNER):
    """Rows ``(index, T, algorithm, oracle, relative gap, grid bound, converged)``."""
    rows = []
    for i, (s1, gr, pw, t) in enumerate(oracle_instances(streams, instances, master_seed, p,
                                                         channel_variance)):
        alg = worst_case_inner(s1, streams, gr, pw, t, inner_tol, max_inner)
        ora = brute_force_worst_case(s1, gr, pw, t, grid_points)
        gap = (alg.rate_sr - ora.rate_sr) / max(abs(ora.rate_sr), 1e-12)
        rows.append((i, t, alg.rate_sr, ora.rate_sr, gap, ora.resolution, alg.converged))
    return rows


def cmd_oracle_check(spec):
    if spec.streams not in (1, 2, 3):
        raise UsageError("oracle-check supports 1 to 3 streams")
    if spec.grid_points < 100:
        raise UsageError("grid must be at least 100 points")
    rows = oracle_table(spec.streams, spec.instances, spec.master_seed, spec.grid_points,
                        spec.p_src, spec.channel_variance, spec.inner_tol, spec.max_inner)
    buf = io.StringIO()
    buf.write(f"# fdrelay {__version__} oracle-check streams={spec.streams} "
              f"instances={spec.instances} grid={spec.grid_points} seed={spec.master_seed} "
              f"seeding=[{SEED_SCHEME}]\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["instance", "t_bound", "algorithm_rate", "oracle_rate", "relative_gap",
                     "grid_bound", "converged"])
    worst = 0.0
    for i, t, a, o, gap, res, conv in rows:
        writer.writerow([i, format_number(t), format_number(a), format_number(o),
                         format_number(gap), format_number(res), int(conv)])
        worst = max(worst, abs(gap))
    _write_text(spec, buf.getvalue())
    if worst > spec.gap_limit:
        print(f"fdrelay: oracle gap {worst:.4g} exceeds {spec.gap_limit:g}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


_DISPATCH = {"hd": cmd_hd, "fd-robust": cmd_fd_robust, "sweep": cmd_sweep,
             "threshold": cmd_threshold, "split-study": cmd_split_study,
             "oracle-check": cmd_oracle_check}


def parse_and_dispatch(argv):
    """Run one command; returns the process exit status."""
    try:
        spec = resolve(argv)
        return _DISPATCH[spec.command](spec)
    except UsageError as exc:
        print(f"fdrelay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoCrossingError as exc:
        print(f"fdrelay: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InvalidInputError as exc:
        print(f"fdrelay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fdrelay: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FdRelayError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"fdrelay: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    sys.exit(parse_and_dispatch(argv))
