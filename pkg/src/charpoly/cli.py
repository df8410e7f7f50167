"""Command-line interface: estimation, quadrature, theory predictors,
verification suites, and convergence studies.

Output is a flat table (CSV, or JSON with the config echoed).  The stable
column set is

    spec_version, n, p, lambda0, x1, x2, method, quantity,
    value_log, value_sign, std_error, regime, seed

where the represented value is value_sign * exp(value_log) (sign 0 means an
exact zero) and blank cells mean "not applicable".  cmd-specific columns are
appended after the stable set (intrep adds imag_rel; --timing appends
wall_time, off by default so that repeated runs are byte-identical).

A config file (INI, one section per subcommand) supplies defaults; explicit
flags win.  Thread count comes from --threads or CHARPOLY_THREADS; results do
not depend on it.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time

import numpy as np

from . import SPEC_VERSION, algebra, asymptotics, detkit, ensemble, intrep, kernels, saddle
from .logdomain import LogSignedValue

BASE_COLUMNS = [
    "spec_version", "n", "p", "lambda0", "x1", "x2", "method", "quantity",
    "value_log", "value_sign", "std_error", "regime", "seed",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


class Table:
    def __init__(self, extra_columns=(), timing=False):
        self.columns = list(BASE_COLUMNS) + list(extra_columns)
        if timing:
            self.columns.append("wall_time")
        self.timing = timing
        self.rows = []

    def add(self, **cells):
        cells.setdefault("spec_version", SPEC_VERSION)
        if not self.timing:
            cells.pop("wall_time", None)
        unknown = set(cells) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns: {sorted(unknown)}")
        self.rows.append([cells.get(c) for c in self.columns])

    def add_value(self, value: LogSignedValue, **cells):
        if value.zero:
            cells.update(value_log=float("-inf"), value_sign=0.0)
        else:
            cells.update(value_log=value.log_magnitude, value_sign=value.sign)
        self.add(**cells)

    def write_csv(self, stream):
        stream.write(",".join(self.columns) + "\n")
        for row in self.rows:
            stream.write(",".join(_fmt(c) for c in row) + "\n")

    def write_json(self, stream, config_echo):
        payload = {
            "spec_version": SPEC_VERSION,
            "config": config_echo,
            "columns": self.columns,
            "rows": [
                {c: r[i] for i, c in enumerate(self.columns) if r[i] is not None}
                for r in self.rows
            ],
        }
        json.dump(payload, stream, indent=2, sort_keys=True, default=_fmt)
        stream.write("\n")


def _emit(table: Table, args, config_echo):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            if args.format == "csv":
                table.write_csv(fh)
            else:
                table.write_json(fh, config_echo)
    else:
        if args.format == "csv":
            table.write_csv(sys.stdout)
        else:
            table.write_json(sys.stdout, config_echo)


def _parse_offsets(raw: str):
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip() != "")
    except ValueError:
        raise SystemExit(f"could not parse offset list {raw!r}")


def _add_common(sub):
    sub.add_argument("--n", help="matrix size (comma list where a sweep applies)")
    sub.add_argument("--p", type=float, help="sparsity parameter")
    sub.add_argument("--lambda0", type=float, help="spectral base point")
    sub.add_argument("--x", help="comma-separated offsets x_1..x_2m")
    sub.add_argument("--m", type=int, help="order m (F_2m)")
    sub.add_argument("--samples", type=int, help="Monte Carlo sample count")
    sub.add_argument("--seed", type=int, help="base seed")
    sub.add_argument("--nodes", type=int, help="quadrature nodes per axis")
    sub.add_argument("--truncation", type=float, help="quadrature box radius R")
    sub.add_argument("--gamma", type=float, help="contour shift override")
    sub.add_argument("--format", choices=("csv", "json"), help="output format")
    sub.add_argument("--out", help="output path (default stdout)")
    sub.add_argument("--threads", type=int, help="worker threads")
    sub.add_argument("--timing", action="store_true", default=None,
                     help="append a wall_time column (breaks byte-reproducibility)")


_DEFAULTS = {
    "format": "csv",
    "seed": 0,
    "samples": 10000,
    "m": 1,
    "lambda0": 0.0,
    "timing": False,
    "scale": "bulk",
}


def _apply_config(args, parser_name: str):
    """Config-file values fill unset flags; built-in defaults fill the rest."""
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        read = cp.read(args.config)
        if not read:
            raise SystemExit(f"config file {args.config!r} not found")
        if cp.has_section(parser_name):
            for key, raw in cp.items(parser_name):
                attr = key.replace("-", "_")
                if getattr(args, attr, None) is None:
                    setattr(args, attr, raw)
    for key, val in _DEFAULTS.items():
        if getattr(args, key, None) is None and hasattr(args, key):
            setattr(args, key, val)
    # config values arrive as strings
    for key in ("p", "lambda0", "gamma", "truncation", "c"):
        v = getattr(args, key, None)
        if isinstance(v, str):
            setattr(args, key, float(v))
    for key in ("m", "samples", "seed", "nodes", "threads"):
        v = getattr(args, key, None)
        if isinstance(v, str):
            setattr(args, key, int(v))
    if isinstance(getattr(args, "timing", None), str):
        args.timing = args.timing.lower() in ("1", "true", "yes")
    return args


def _n_list(args):
    if args.n is None:
        raise SystemExit("--n is required")
    return [int(tok) for tok in str(args.n).split(",")]


def _setup_threads(args):
    if getattr(args, "threads", None):
        kernels.set_threads(args.threads)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_estimate(args) -> int:
    _setup_threads(args)
    n = _n_list(args)[0]
    offsets = _parse_offsets(args.x) if args.x else (1.0, -1.0)
    if args.m != 1 or len(offsets) != 2:
        raise SystemExit("the estimate table is order m = 1 (two offsets); "
                         "higher orders are available through the Python API")
    params = ensemble.EnsembleParams(n=n, p=args.p, seed=args.seed)
    scale = getattr(args, "scale", "bulk") or "bulk"
    table = Table(timing=args.timing)
    t0 = time.perf_counter()
    est = detkit.mc_estimate_D(params, args.lambda0, offsets, args.samples,
                               scale=scale)
    dt = time.perf_counter() - t0
    common = dict(n=n, p=args.p, lambda0=args.lambda0, method="mc",
                  seed=args.seed, regime="", wall_time=dt)
    table.add_value(est.numerator.mean, quantity="F2",
                    x1=offsets[0], x2=offsets[1],
                    std_error=est.numerator.std_error_rel, **common)
    for j, den in enumerate(est.denominators):
        table.add_value(den.mean, quantity=f"F2_den{j+1}",
                        x1=offsets[j], x2=offsets[j],
                        std_error=den.std_error_rel, **common)
    table.add_value(LogSignedValue.from_real(est.value), quantity="D2",
                    x1=offsets[0], x2=offsets[1],
                    std_error=est.std_error, **common)
    _emit(table, args, {"subcommand": "estimate", "n": n, "p": args.p,
                        "lambda0": args.lambda0, "x": list(offsets),
                        "samples": args.samples, "seed": args.seed,
                        "scale": scale})
    return 0


def cmd_intrep(args) -> int:
    _setup_threads(args)
    n = _n_list(args)[0]
    offsets = _parse_offsets(args.x) if args.x else (1.0, -1.0)
    if len(offsets) != 2:
        raise SystemExit("quadrature works at order m = 1: give two offsets")
    x1, x2 = offsets
    if args.confluent and x1 != x2:
        raise SystemExit("--confluent requires x1 == x2")
    spec = intrep.contour_advisor(n, args.p, args.lambda0, offsets=offsets)
    overrides = {}
    if args.nodes is not None:
        overrides["nodes"] = args.nodes
    if args.truncation is not None:
        overrides["truncation"] = args.truncation
    if args.gamma is not None:
        overrides["gamma"] = args.gamma
    if getattr(args, "rule", None):
        overrides["rule"] = args.rule
    if overrides:
        spec = intrep.QuadratureSpec(
            truncation=overrides.get("truncation", spec.truncation),
            nodes=overrides.get("nodes", spec.nodes),
            rule=overrides.get("rule", spec.rule),
            gamma=overrides.get("gamma", spec.gamma),
        )
    table = Table(extra_columns=("imag_rel",), timing=args.timing)
    status = 0
    t0 = time.perf_counter()
    try:
        if args.confluent or x1 == x2:
            res = intrep.quadrature_F2_confluent(n, args.p, args.lambda0, x1, spec=spec)
        else:
            res = intrep.quadrature_F2(n, args.p, args.lambda0, x1, x2, spec=spec)
        table.add_value(res.value, n=n, p=args.p, lambda0=args.lambda0,
                        x1=x1, x2=x2, method="quadrature", quantity="F2",
                        regime=res.regime, seed=args.seed,
                        imag_rel=res.imag_residual_rel,
                        wall_time=time.perf_counter() - t0)
        if args.d2 and x1 != x2:
            d2 = intrep.quadrature_D2(n, args.p, args.lambda0, x1, x2)
            table.add_value(LogSignedValue.from_real(d2), n=n, p=args.p,
                            lambda0=args.lambda0, x1=x1, x2=x2,
                            method="quadrature", quantity="D2",
                            regime=res.regime, seed=args.seed,
                            wall_time=time.perf_counter() - t0)
    except (intrep.QuadratureConvergenceError, intrep.ContourSingularityError) as exc:
        table.add(n=n, p=args.p, lambda0=args.lambda0, x1=x1, x2=x2,
                  method="quadrature", quantity="F2", seed=args.seed,
                  regime=f"error: {exc}")
        status = 1
    _emit(table, args, {"subcommand": "intrep", "n": n, "p": args.p,
                        "lambda0": args.lambda0, "x": list(offsets),
                        "spec": {"truncation": spec.truncation,
                                 "nodes": spec.nodes, "rule": spec.rule,
                                 "gamma": spec.gamma},
                        "seed": args.seed})
    return status


def cmd_theory(args) -> int:
    table = Table(timing=args.timing)
    status = 0
    what = args.predictor

    def error_row(quantity, message, **cells):
        table.add(method="asymptotic", quantity=quantity,
                  regime=f"error: {message}", seed=args.seed, **cells)

    if what == "lambda-star":
        val = asymptotics.lambda_star(args.p)
        table.add_value(LogSignedValue.from_real(val), p=args.p,
                        method="asymptotic", quantity="lambda_star",
                        regime="", seed=args.seed)
    elif what in ("d2-bulk", "d2-outside"):
        offsets = _parse_offsets(args.x) if args.x else (1.0, -1.0)
        try:
            if what == "d2-bulk":
                val = asymptotics.d2_bulk_limit(args.lambda0, offsets[0],
                                                offsets[1], args.p)
                quantity = "D2_bulk_limit"
            else:
                val = asymptotics.d2_outside_limit(args.lambda0, args.p)
                quantity = "D2_outside_limit"
            table.add_value(LogSignedValue.from_real(val), p=args.p,
                            lambda0=args.lambda0, x1=offsets[0], x2=offsets[1],
                            method="asymptotic", quantity=quantity,
                            regime="", seed=args.seed)
        except saddle.RegimeError as exc:
            error_row("D2_limit", str(exc), p=args.p, lambda0=args.lambda0,
                      x1=offsets[0], x2=offsets[1])
            status = 1
    elif what in ("f2-bulk", "f2-outside"):
        n = _n_list(args)[0]
        offsets = _parse_offsets(args.x) if args.x else (1.0, -1.0)
        fn = (asymptotics.f2_bulk_asymptotic if what == "f2-bulk"
              else asymptotics.f2_outside_asymptotic)
        try:
            val = fn(n, args.p, args.lambda0, offsets[0], offsets[1])
            table.add_value(val, n=n, p=args.p, lambda0=args.lambda0,
                            x1=offsets[0], x2=offsets[1], method="asymptotic",
                            quantity=what.replace("-", "_"), regime="",
                            seed=args.seed)
        except saddle.RegimeError as exc:
            error_row(what.replace("-", "_"), str(exc), n=n, p=args.p,
                      lambda0=args.lambda0, x1=offsets[0], x2=offsets[1])
            status = 1
    elif what == "crossover":
        ns = [float(v) for v in _n_list(args)]
        deltas = _parse_offsets(args.delta)
        cls = asymptotics.crossover_scale(ns, deltas)
        table.add_value(LogSignedValue.from_real(cls.n_exponent),
                        method="asymptotic", quantity="crossover_exponent",
                        regime=f"branch {cls.branch}: {cls.label}",
                        seed=args.seed)
    elif what == "s-hat":
        offsets = _parse_offsets(args.x)
        val = asymptotics.s_hat_2m(offsets, args.lambda0)
        ref = asymptotics.s_hat_2m((1.0,) * len(offsets), args.lambda0)
        table.add_value(LogSignedValue.from_real(val), lambda0=args.lambda0,
                        x1=offsets[0], x2=offsets[1], method="asymptotic",
                        quantity="s_hat", regime="", seed=args.seed)
        table.add_value(LogSignedValue.from_real(val / ref),
                        lambda0=args.lambda0, x1=offsets[0], x2=offsets[1],
                        method="asymptotic", quantity="s_hat_ratio",
                        regime="", seed=args.seed)
    elif what == "d2-edge":
        offsets = _parse_offsets(args.x) if args.x else (0.0, 1.0)
        val = asymptotics.d2_edge_limit(offsets[0], offsets[1], args.c or 0.0)
        table.add_value(LogSignedValue.from_real(val), lambda0=2.0,
                        x1=offsets[0], x2=offsets[1], method="asymptotic",
                        quantity="D2_edge_limit", regime="", seed=args.seed)
    _emit(table, args, {"subcommand": "theory", "predictor": what})
    return status


def _verify_lemma2(samples, seed, tolerance):
    report = saddle.verify_lemma2(sample_count=samples, seed=seed,
                                  violation_tol=tolerance)
    lines = [
        f"lemma2 randomized: {report.samples} samples, "
        f"{report.violations} violations, max gap {report.max_gap:.3e}",
        "lemma2 equality families: "
        + ", ".join(f"{k}={v:.2e}" for k, v in sorted(report.equality_gaps.items())),
        f"lemma2 perturbation: min strict drop {report.perturbation_min_drop:.3e}",
    ]
    return report.passed, lines


def _verify_grassmann(samples, seed, tolerance):
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    worst = 0.0
    count = max(8, min(samples, 200))
    for i in range(count):
        n = 1 + i % 4
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        e = algebra.grassmann_exp(algebra.bilinear_form(n, -a))
        got = algebra.berezin_integrate_full(e)
        worst = max(worst, abs(got - np.linalg.det(a)))
    return worst < tolerance, [
        f"grassmann determinant identity: {count} matrices (sizes 1-4), "
        f"max residual {worst:.3e}"
    ]


def _verify_wedge(samples, seed, tolerance):
    from .algebra.exterior import ExteriorOperator, wedge_operators

    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    worst = 0.0
    pairs = 0
    for n in (2, 3, 4):
        for q in (1, 2):
            for r in (1, 2):
                if q + r > min(n, 3):
                    continue
                for _ in range(max(2, samples // 40)):
                    a = ExteriorOperator(n, q, rng.standard_normal(
                        (math.comb(n, q),) * 2))
                    b = ExteriorOperator(n, r, rng.standard_normal(
                        (math.comb(n, r),) * 2))
                    ab = wedge_operators(a, b)
                    ba = wedge_operators(b, a)
                    worst = max(worst, np.abs(ab.matrix - ba.matrix).max())
                    pairs += 1
    return worst < tolerance, [
        f"wedge commutativity: {pairs} random pairs, max deviation {worst:.3e}"
    ]


def _verify_hciz(samples, seed, tolerance):
    rng = np.random.Generator(np.random.Philox(key=[seed, 2]))
    lines = []
    ok = True
    for trial in range(3):
        a = np.diag(rng.standard_normal(2) * 1.5)
        b = rng.standard_normal(2)
        z = 0.5 + rng.random()
        rep = algebra.hciz_check(a, b, z, n_samples=samples, seed=seed + trial)
        ok &= rep.passed
        lines.append(
            f"hciz n=2 trial {trial}: z-score {rep.z_score:.2f} "
            f"(mc {rep.mc_mean:.6g} vs closed {rep.closed_form:.6g})"
        )
    return ok, lines


def _verify_hs(samples, seed, tolerance):
    r1 = algebra.hubbard_stratonovich_check(0.0, 1.0)
    r2 = algebra.hubbard_stratonovich_check(1.3, 2.0)
    y = algebra.psi_bar(2, 1) * algebra.psi(2, 1) + algebra.psi_bar(2, 2) * algebra.psi(2, 2)
    r3 = algebra.hubbard_stratonovich_grassmann_check(y, 1.5)
    ok = r1 < 1e-12 and r2 < 1e-10 and r3 < 1e-12
    return ok, [
        f"scalar identity residuals: {r1:.2e} (y=0), {r2:.2e} (y=1.3, a=2)",
        f"grassmann even-argument residual: {r3:.2e}",
    ]


def _verify_airy(samples, seed, tolerance):
    import math as _m

    a0 = asymptotics.airy(0.0)
    gap0 = abs(a0.ai - 3.0 ** (-2 / 3) / _m.gamma(2 / 3))
    gap1 = abs(a0.ai_prime + 3.0 ** (-1 / 3) / _m.gamma(1 / 3))
    h = 5e-4
    worst = 0.0
    for x in np.linspace(-10, 5, 61):
        second = (asymptotics.airy(x + h).ai - 2 * asymptotics.airy(x).ai
                  + asymptotics.airy(x - h).ai) / h**2
        worst = max(worst, abs(second - x * asymptotics.airy(x).ai))
    ok = gap0 < 1e-12 and gap1 < 1e-12 and worst < 1e-6
    return ok, [
        f"airy constants at 0: gaps {gap0:.2e}, {gap1:.2e}",
        f"airy ODE residual on [-10, 5]: max {worst:.2e}",
    ]


_SUITES = {
    "lemma2": _verify_lemma2,
    "grassmann": _verify_grassmann,
    "wedge": _verify_wedge,
    "hciz": _verify_hciz,
    "hs": _verify_hs,
    "airy": _verify_airy,
}

_VERIFY_BUDGET = {
    "lemma2": 1_000_000,
    "grassmann": 100,
    "wedge": 200,
    "hciz": 200_000,
    "hs": 1,
    "airy": 1,
}


def cmd_verify(args) -> int:
    if args.tolerance is not None and args.tolerance <= 0:
        raise SystemExit("--tolerance must be positive")
    tolerance = args.tolerance if args.tolerance is not None else 1e-12
    samples = args.samples or _VERIFY_BUDGET[args.suite]
    ok, lines = _SUITES[args.suite](samples, args.seed, tolerance)
    for line in lines:
        print(line)
    print(f"{'PASS' if ok else 'FAIL'}: {args.suite}")
    return 0 if ok else 1


def cmd_converge(args) -> int:
    _setup_threads(args)
    ns = _n_list(args)
    offsets = _parse_offsets(args.x) if args.x else (1.0, -1.0)
    x1, x2 = offsets[0], offsets[1]
    table = Table(timing=args.timing)
    errors = []
    status = 0
    for n in ns:
        if args.p_rule == "const":
            p = args.p if args.p is not None else 8.0
        elif args.p_rule == "n":
            p = float(n)
        elif args.p_rule == "sqrt-n":
            p = math.sqrt(n)
        else:  # c-n23
            p = n ** (2.0 / 3.0) / (args.c or 1.0)
        t0 = time.perf_counter()
        if args.study in ("bulk", "outside"):
            d2 = intrep.quadrature_D2(n, p, args.lambda0, x1, x2)
            if args.study == "bulk":
                limit = asymptotics.d2_bulk_limit(args.lambda0, x1, x2, p)
            else:
                limit = asymptotics.d2_outside_limit(args.lambda0, p)
            regime = args.study
        else:  # edge, edge-sparse
            c13 = n ** (1.0 / 3.0)
            d2 = intrep.quadrature_D2(n, p, 2.0, x1 * c13, x2 * c13)
            if args.study == "edge":
                c_lim = 0.0 if args.p_rule == "n" else (args.c or 0.0)
                limit = asymptotics.d2_edge_limit(x1, x2, c_lim)
            else:
                limit = asymptotics.d2_edge_sparse_limit()
            regime = args.study
        dt = time.perf_counter() - t0
        err = abs(d2 - limit)
        errors.append((n, err))
        common = dict(n=n, p=p, lambda0=args.lambda0 if args.study in ("bulk", "outside") else 2.0,
                      x1=x1, x2=x2, regime=regime, seed=args.seed)
        table.add_value(LogSignedValue.from_real(d2), method="quadrature",
                        quantity="D2", wall_time=dt, **common)
        table.add_value(LogSignedValue.from_real(limit), method="asymptotic",
                        quantity="D2_limit", wall_time=dt, **common)
    _emit(table, args, {"subcommand": "converge", "study": args.study,
                        "n": ns, "x": list(offsets)})
    dec = all(errors[i][1] > errors[i + 1][1] for i in range(len(errors) - 1))
    summary = "; ".join(f"n={n}: |err|={e:.4g}" for n, e in errors)
    print(f"# convergence ({args.study}): {summary}; "
          f"{'decreasing' if dec else 'NOT decreasing'}", file=sys.stderr)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="charpoly",
        description="Characteristic-polynomial correlators of sparse random matrices",
    )
    parser.add_argument("--config", help="INI config file (one section per subcommand)")
    subs = parser.add_subparsers(dest="command", required=True)

    est = subs.add_parser("estimate", help="Monte Carlo estimation of F_2 and D_2")
    _add_common(est)
    est.add_argument("--scale", choices=("bulk", "edge"), help="offset scaling")

    ir = subs.add_parser("intrep", help="deterministic quadrature of F_2")
    _add_common(ir)
    ir.add_argument("--rule", choices=("gauss_legendre_tensor", "trapezoid"))
    ir.add_argument("--confluent", action="store_true",
                    help="coincident evaluation points (requires x1 == x2)")
    ir.add_argument("--d2", action="store_true", help="also emit the D_2 ratio")

    th = subs.add_parser("theory", help="closed-form limit predictors")
    th.add_argument("predictor", choices=(
        "lambda-star", "d2-bulk", "d2-outside", "f2-bulk", "f2-outside",
        "crossover", "s-hat", "d2-edge"))
    _add_common(th)
    th.add_argument("--c", type=float, help="edge parameter c = lim n^(2/3)/p")
    th.add_argument("--delta", help="comma list of crossover deltas (with --n list)")

    ver = subs.add_parser("verify", help="verification suites")
    ver.add_argument("suite", choices=sorted(_SUITES))
    ver.add_argument("--samples", type=int)
    ver.add_argument("--seed", type=int)
    ver.add_argument("--tolerance", type=float)

    con = subs.add_parser("converge", help="error-vs-n convergence studies")
    _add_common(con)
    con.add_argument("--study", choices=("bulk", "outside", "edge", "edge-sparse"),
                     default=None)
    con.add_argument("--p-rule", choices=("const", "n", "sqrt-n", "c-n23"),
                     default=None)
    con.add_argument("--c", type=float, help="constant for the c-n23 rule")
    return parser


_COMMANDS = {
    "estimate": cmd_estimate,
    "intrep": cmd_intrep,
    "theory": cmd_theory,
    "verify": cmd_verify,
    "converge": cmd_converge,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(args, args.command)
    if args.command == "verify":
        if args.seed is None:
            args.seed = 0
        return _COMMANDS[args.command](args)
    if args.command == "converge" and args.study is None:
        raise SystemExit("--study is required for converge")
    if args.command == "converge" and args.p_rule is None:
        args.p_rule = "const"
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, saddle.RegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
