"""Command-line front end: ``hankel-p3 <command> [options]``.

Every command writes CSV (default) or JSON to stdout or ``-o PATH``. Exit
codes: 0 success, 1 residual violations (``verify``), 2 precision failure
after one retry at doubled precision, 64 usage error, 74 unwritable output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import mpmath

from .difference import (check_initial_conditions, check_r_difference, check_R_difference,
                         check_sigma_difference, compare_with_hankel)
from .errors import DomainError, HankelError, PrecisionFailure
from .hankel_core import compute_recurrence, gaussian_table
from .ladder import check_ladder_relations, check_S_identities, compute_aux, gaussian_aux
from .moments import Family, WeightSpec, build_moment_table
from .painleve import (integrate_p3_with_log, initial_state, log_derivative_residuals, p3_residual,
                       riccati_residuals, sigma_ode_residual)
from .precision import PREC_ENV_VAR, PrecisionConfig, to_mpf
from .scaling import H_equation_residual, convergence_report, laguerre_correspondence_check
from .series import Regime, eval_series, get_series

log = logging.getLogger("hankel_p3")

EXIT_OK, EXIT_VIOLATION, EXIT_PRECISION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 74

COMMANDS = ("compute", "verify", "recursion", "integrate", "scale", "series", "dump-moments")
VERIFY_GROUPS = ("ladder", "difference", "ode", "correspondence")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    args: dict = field(default_factory=dict)
    t_grid: tuple = ()
    prec: PrecisionConfig | None = None
    output: str | None = None
    format: str = "csv"
    jobs: int = 1


@dataclass
class Table:
    header: list
    rows: list
    extra: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)


# --- grids and precision -------------------------------------------------------

def parse_grid(value=None, start=None, stop=None, count=None, spacing="linear"):
    """Explicit comma list, or ``count`` points from ``start`` to ``stop``; returned as strings."""
    if value is not None:
        items = [v.strip() for v in str(value).split(",") if v.strip()]
        if not items:
            raise UsageError("empty grid")
        return tuple(items)
    if start is None or stop is None or count is None:
        raise UsageError("give a value list or start, stop and count")
    if count < 1:
        raise UsageError("grid count must be >= 1")
    with mpmath.workprec(128):
        a, b = to_mpf(start), to_mpf(stop)
        if count == 1:
            pts = [a]
        elif spacing == "log":
            if a <= 0 or b <= 0:
                raise UsageError("log spacing needs positive endpoints")
            la, lb = mpmath.log10(a), mpmath.log10(b)
            pts = [mpmath.power(10, la + (lb - la) * k / (count - 1)) for k in range(count)]
        else:
            pts = [a + (b - a) * k / (count - 1) for k in range(count)]
        return tuple(mpmath.nstr(p, 30) for p in pts)


def resolve_precision(order: int, bits=None, guard=None, env=None) -> PrecisionConfig:
    """Precision for Hankel orders up to ``order``: flag, then environment, then default policy."""
    base = PrecisionConfig.for_order(order)
    env = os.environ if env is None else env
    if bits is None and env.get(PREC_ENV_VAR):
        try:
            bits = int(env[PREC_ENV_VAR])
        except ValueError:
            raise UsageError(f"{PREC_ENV_VAR} must be an integer") from None
    work = bits if bits is not None else base.work_bits
    g = guard if guard is not None else min(base.guard_bits, work // 2)
    try:
        return PrecisionConfig(work, g)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _fmt(x, digits):
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, digits, min_fixed=-5, max_fixed=5) if x else "0.0"
    return str(x)


# --- command bodies (module level so they pickle into worker processes) ----------

RECURRENCE_COLS = ["n", "t", "h_n", "beta_n", "p_n", "logD_n"]
AUX_COLS = ["n", "t", "R_n", "r_n", "sigma_n", "dR_n", "dr_n", "dsigma_n"]
SINGLE = {"h": "h_n", "beta": "beta_n", "p": "p_n", "logD": "logD_n", "R": "R_n", "r": "r_n",
          "sigma": "sigma_n", "dR": "dR_n", "dr": "dr_n", "dsigma": "dsigma_n"}


def _compute_at(t, n_lo, n_hi, quantity, prec):
    table = gaussian_table(t, n_hi + 1, prec, 2)
    rec = compute_recurrence(table, n_hi + 1, prec, 2)
    aux = compute_aux(rec, table, prec)
    rows = []
    with prec.workprec():
        for n in range(n_lo, n_hi + 1):
            full = {"h_n": rec.h[n], "beta_n": rec.beta[n], "p_n": rec.p_coeff[n], "logD_n": rec.logD[n],
                    "R_n": aux.R[n], "r_n": aux.r[n], "sigma_n": aux.sigma[n], "dR_n": aux.dR[n],
                    "dr_n": aux.dr[n], "dsigma_n": aux.dsigma[n]}
            cols = (RECURRENCE_COLS if quantity == "recurrence" else AUX_COLS if quantity == "aux"
                    else ["n", "t", SINGLE[quantity]])
            rows.append([n, rec.t] + [full[c] for c in cols[2:]])
    return rows


def _verify_at(t, n_max, groups, prec):
    rows = []

    def add(reports):
        for rep in reports.values() if isinstance(reports, dict) else reports:
            rows.extend(rep.rows())

    if {"ladder", "difference", "ode"} & set(groups):
        _, rec, aux = gaussian_aux(t, n_max, prec, 3 if "ode" in groups else 2)
        if "ladder" in groups:
            add(check_S_identities(aux, rec, prec))
            add(check_ladder_relations(rec, aux, prec=prec))
        if "difference" in groups:
            add([check_r_difference(aux, prec), check_R_difference(aux, prec), check_sigma_difference(aux, prec)])
            add(check_initial_conditions(aux, prec))
        if "ode" in groups:
            for fn in (riccati_residuals, log_derivative_residuals, p3_residual, sigma_ode_residual):
                add(fn(aux, prec))
    if "correspondence" in groups:
        m = max(n_max // 2, 1)
        cprec = PrecisionConfig(max(prec.work_bits, PrecisionConfig.for_order(2 * m + 1).work_bits), prec.guard_bits)
        add(laguerre_correspondence_check(t, m, cprec))
        for alpha in ("1/2", "-1/2"):
            for rep in H_equation_residual(m, alpha, [t], cprec).values():
                rows.extend((f"H_equation[alpha={alpha}]", n, tt, r) for _, n, tt, r in rep.rows())
    return rows


def _run_grid(fn, t_grid, jobs, *args):
    if jobs > 1 and len(t_grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(fn, t_grid, *[[a] * len(t_grid) for a in args]))
    else:
        parts = [fn(t, *args) for t in t_grid]
    return [row for part in parts for row in part]


def cmd_compute(cfg: RunConfig) -> Table:
    a = cfg.args
    q = a["quantity"]
    rows = _run_grid(_compute_at, cfg.t_grid, cfg.jobs, a["n_lo"], a["n_hi"], q, cfg.prec)
    header = RECURRENCE_COLS if q == "recurrence" else AUX_COLS if q == "aux" else ["n", "t", SINGLE[q]]
    rows.sort(key=lambda r: (r[1], r[0]))
    return Table(header, rows)


def cmd_verify(cfg: RunConfig) -> Table:
    a = cfg.args
    groups = VERIFY_GROUPS if a["what"] == "all" else (a["what"],)
    rows = _run_grid(_verify_at, cfg.t_grid, cfg.jobs, a["n_max"], groups, cfg.prec)
    tol = cfg.prec.tolerance
    out = []
    violations = []
    for name, n, t, r in sorted(rows, key=lambda x: (x[0], x[2], x[1])):
        ok = r <= tol
        out.append([name, n, t, r, "pass" if ok else "FAIL"])
        if not ok:
            violations.append((name, n, t, r))
    return Table(["identity", "n", "t", "residual", "status"], out, {"tolerance": tol}, violations)


def cmd_recursion(cfg: RunConfig) -> Table:
    a = cfg.args
    rows = []
    growth = {}
    for t in cfg.t_grid:
        hank_prec = cfg.prec
        _, _, aux = gaussian_aux(t, a["n_target"] + 1, hank_prec, 2)
        rec_prec = PrecisionConfig(a["rec_bits"] or 2 * hank_prec.work_bits, hank_prec.guard_bits)
        comp = compare_with_hankel(a["quantity"], aux, a["n_target"], rec_prec)
        for n, v in enumerate(comp.recursion.values):
            rows.append([comp.quantity.value, n, aux.t, v, comp.recursion.source.value, comp.deviation[n]])
        env = comp.growth_envelope
        growth[str(t)] = {"growth": [_fmt(comp.growth[n], 6) for n in sorted(comp.growth)],
                          "envelope": [_fmt(env[n], 6) for n in sorted(env)],
                          "divergence_index": comp.divergence_index}
    return Table(["quantity", "n", "t", "value", "source", "residual"], rows, {"error_growth": growth})


def cmd_integrate(cfg: RunConfig) -> Table:
    a = cfg.args
    n = a["n"]
    init = initial_state(n, a["t_start"], cfg.prec)
    end, entry = integrate_p3_with_log(n, a["t_start"], a["t_end"], init, cfg.prec, a["step_tol"], a["order"])
    rows = [[n, init.t, init.y, init.dy], [n, end.t, end.y, end.dy]]
    return Table(["n", "t", "R_n", "dR_n"], rows, {"integration": json.loads(entry.to_json())})


def cmd_scale(cfg: RunConfig) -> Table:
    a = cfg.args
    rows = []
    fits = {}
    for s in a["s"]:
        rep = convergence_report(a["quantity"], s, a["n_list"], None if a["auto_prec"] else cfg.prec, a["regime"])
        rows.extend(rep.rows())
        fits[s] = {"rate": rep.rate, "constant": rep.constant, "status": rep.status, "monotone": rep.monotone}
    return Table(["quantity", "regime", "n", "s", "t", "sample", "series", "next_term_bound", "deviation"], rows,
                 {"fits": fits})


def cmd_series(cfg: RunConfig) -> Table:
    a = cfg.args
    rows = []
    for reg in a["regimes"]:
        ser = get_series(a["which"], reg, a["alpha"])
        for s in a["s"]:
            v = eval_series(ser, s, a["truncation"], cfg.prec)
            rows.append([a["which"], ser.regime.value, to_mpf(s), v.terms_used, v.value, v.next_term_bound])
    return Table(["name", "regime", "s", "terms", "value", "next_term_bound"], rows)


def cmd_dump_moments(cfg: RunConfig) -> Table:
    a = cfg.args
    tables = []
    for t in cfg.t_grid:
        spec = WeightSpec(Family(a["family"]), t, a["alpha"])
        tables.append(json.loads(build_moment_table(spec, a["k_min"], a["k_max"], cfg.prec).to_json(cfg.prec.digits)))
    rows = []
    for tab in tables:
        for k, mu, dmu in zip(tab["k"], tab["mu"], tab["dmu"]):
            rows.append([tab["family"], tab["t"], tab["alpha"], k, mu, dmu])
    return Table(["family", "t", "alpha", "k", "mu", "dmu"], rows, {"tables": tables})


DISPATCH = {"compute": cmd_compute, "verify": cmd_verify, "recursion": cmd_recursion, "integrate": cmd_integrate,
            "scale": cmd_scale, "series": cmd_series, "dump-moments": cmd_dump_moments}


# --- output ----------------------------------------------------------------------

def render(table: Table, fmt: str, digits: int) -> str:
    cells = [[_fmt(c, digits) if c is not None else "" for c in row] for row in table.rows]
    if fmt == "json":
        payload = {"columns": table.header, "rows": [dict(zip(table.header, r)) for r in cells]}
        for k, v in table.extra.items():
            payload[k] = _jsonable(v, digits)
        return json.dumps(payload, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    w.writerows(cells)
    return buf.getvalue()


def _jsonable(v, digits):
    if isinstance(v, mpmath.mpf):
        return _fmt(v, digits)
    if isinstance(v, dict):
        return {str(k): _jsonable(x, digits) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x, digits) for x in v]
    return v


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute ``cfg`` and write the artifact; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        try:
            table = DISPATCH[cfg.command](cfg)
        except PrecisionFailure as exc:
            log.warning("%s; retrying at %d bits", exc, 2 * cfg.prec.work_bits)
            cfg = replace(cfg, prec=cfg.prec.doubled())
            table = DISPATCH[cfg.command](cfg)
    except PrecisionFailure as exc:
        print(f"precision failure after retry: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HankelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    text = render(table, cfg.format, cfg.prec.digits)
    if cfg.output in (None, "-"):
        stdout.write(text)
    else:
        try:
            with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write {cfg.output}: {exc}", file=sys.stderr)
            return EXIT_IO
    if table.violations:
        print(f"{len(table.violations)} residual(s) above tolerance {mpmath.nstr(table.extra['tolerance'], 5)}:",
              file=sys.stderr)
        for name, n, t, r in table.violations[:20]:
            print(f"  {name} n={n} t={mpmath.nstr(t, 8)} residual={mpmath.nstr(r, 5)}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# --- argument parsing --------------------------------------------------------------

def _add_common(p):
    p.add_argument("--prec-bits", type=int, help=f"working precision in bits (default: ${PREC_ENV_VAR} or by order)")
    p.add_argument("--guard-bits", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_t(p, required=True):
    p.add_argument("--t", help="comma-separated t values")
    p.add_argument("--t-start")
    p.add_argument("--t-stop")
    p.add_argument("--t-count", type=int)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hankel-p3", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="h_n, beta_n, p(n,t), ln D_n and R_n, r_n, sigma_n")
    p.add_argument("--n", type=int, help="single order")
    p.add_argument("--n-max", type=int, help="all orders 0..n-max")
    p.add_argument("--quantity", default="recurrence", choices=["recurrence", "aux"] + sorted(SINGLE))
    _add_t(p)
    _add_common(p)

    p = sub.add_parser("verify", help="residuals of identities and equations")
    p.add_argument("--what", default="all", choices=VERIFY_GROUPS + ("all",))
    p.add_argument("--n-max", type=int, required=True)
    _add_t(p)
    _add_common(p)

    p = sub.add_parser("recursion", help="forward difference-equation recursion vs Hankel data")
    p.add_argument("--quantity", choices=("r", "R", "sigma"), default="r")
    p.add_argument("--n-target", type=int, required=True)
    p.add_argument("--rec-bits", type=int, help="recursion precision (default twice the Hankel precision)")
    _add_t(p)
    _add_common(p)

    p = sub.add_parser("integrate", help="integrate the R_n equation from moment-derived initial data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t-start", required=True)
    p.add_argument("--t-end", required=True)
    p.add_argument("--step-tol", default="1e-25")
    p.add_argument("--order", type=int, default=30)
    _add_common(p)

    p = sub.add_parser("scale", help="double-scaling samples against the series")
    p.add_argument("--quantity", choices=("C1", "C2", "sigma", "sigma2", "Delta", "Delta2"), required=True)
    p.add_argument("--s", required=True, help="comma-separated s values")
    p.add_argument("--n-list", required=True, help="comma-separated ascending n values")
    p.add_argument("--regime", default="best", choices=("best", "small", "large"))
    _add_common(p)

    p = sub.add_parser("series", help="evaluate an expansion")
    p.add_argument("--which", required=True, choices=("C", "H", "Delta", "C1", "C2", "sigma1", "sigma2",
                                                       "Delta1", "Delta2"))
    p.add_argument("--regime", default="both", choices=("small", "large", "both"))
    p.add_argument("--s", required=True)
    p.add_argument("--truncation", default="auto")
    p.add_argument("--alpha")
    _add_common(p)

    p = sub.add_parser("dump-moments", help="moment table as JSON")
    p.add_argument("--family", choices=[f.value for f in Family], default=Family.GAUSSIAN.value)
    p.add_argument("--alpha")
    p.add_argument("--k-min", type=int, default=0)
    p.add_argument("--k-max", type=int, required=True)
    _add_t(p)
    _add_common(p)
    return ap


def _t_grid(ns):
    return parse_grid(ns.t, ns.t_start, ns.t_stop, ns.t_count, ns.spacing)


def config_from_args(ns) -> RunConfig:
    c = ns.command
    args = {}
    t_grid = ()
    order = 1
    if c == "compute":
        if (ns.n is None) == (ns.n_max is None):
            raise UsageError("give exactly one of --n, --n-max")
        lo, hi = (ns.n, ns.n) if ns.n is not None else (0, ns.n_max)
        if lo < 0:
            raise UsageError("n must be non-negative")
        args = {"n_lo": lo, "n_hi": hi, "quantity": ns.quantity}
        t_grid, order = _t_grid(ns), hi + 1
    elif c == "verify":
        if ns.n_max < 3:
            raise UsageError("--n-max must be >= 3")
        args = {"what": ns.what, "n_max": ns.n_max}
        t_grid, order = _t_grid(ns), ns.n_max
    elif c == "recursion":
        args = {"quantity": ns.quantity, "n_target": ns.n_target, "rec_bits": ns.rec_bits}
        t_grid, order = _t_grid(ns), ns.n_target + 1
    elif c == "integrate":
        args = {"n": ns.n, "t_start": ns.t_start, "t_end": ns.t_end, "step_tol": ns.step_tol, "order": ns.order}
        order = max(ns.n, 1)
    elif c == "scale":
        n_list = [int(x) for x in ns.n_list.split(",")]
        args = {"quantity": ns.quantity, "s": parse_grid(ns.s), "n_list": n_list,
                "regime": ns.regime if ns.regime == "best" else Regime.parse(ns.regime),
                "auto_prec": ns.prec_bits is None and not os.environ.get(PREC_ENV_VAR)}
        order = 2 * max(n_list) + 2
    elif c == "series":
        trunc = ns.truncation if ns.truncation == "auto" else int(ns.truncation)
        regimes = list(Regime) if ns.regime == "both" else [Regime.parse(ns.regime)]
        args = {"which": ns.which, "regimes": regimes, "s": parse_grid(ns.s), "truncation": trunc,
                "alpha": ns.alpha}
    elif c == "dump-moments":
        args = {"family": ns.family, "alpha": ns.alpha, "k_min": ns.k_min, "k_max": ns.k_max}
        t_grid = _t_grid(ns)
    if ns.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    prec = resolve_precision(order, ns.prec_bits, ns.guard_bits)
    return RunConfig(c, args, t_grid, prec, ns.output, ns.format, ns.jobs)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(ns)
    except (UsageError, ValueError) as exc:
        print(f"hankel-p3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
