"""Command-line front end.

    kplane exponents pipeline --name sharpp --d 10 --k 4
    kplane exponents kcrit --d 7 --seed bourgain
    kplane verify plancherel --d 3 --n 64 --functions 8 --directions 256
    kplane transform xray --input f.gf --direction 0,0,1 --out g.gf
    kplane scaling --family ball --d 2 --k 1 --deltas 0.2,0.1,0.05,0.025

Exit codes: 0 success, 1 usage / configuration / file error, 2 a rule or
theorem applied outside its hypotheses, 3 a verification budget failed.
``--save-config`` writes the run configuration; ``--replay`` reruns one.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import budgets, lab
from . import exponents as ex
from .grassmann import HemisphereChart
from .parallel import THREADS_ENV
from .records import FormatError, RunConfig, Table, format_rational, parse_rational, read_grid, \
    trace_table, write_grid
from .transforms import gaussian_mixture, indicator_ball, xray

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_BUDGET = 0, 1, 2, 3

PIPELINES = {"sharpp": ex.Pipeline.SHARP_P, "nonl2": ex.Pipeline.NON_L2, "l2": ex.Pipeline.L2,
             "nak": ex.Pipeline.NAK_THEOREM, "dimkt": ex.Pipeline.DIM_KT, "dimwolff": ex.Pipeline.DIM_WOLFF}
KCRIT = {"bourgain": ex.KcritKind.BOURGAIN, "katztao": ex.KcritKind.KATZ_TAO}
SEEDS = {"katztao": ex.SeedKind.KATZ_TAO, "katztaoweak": ex.SeedKind.KATZ_TAO_WEAK, "wolff": ex.SeedKind.WOLFF}
RULES = {"xray": ex.xray_step, "interp": ex.interp_step, "l2": ex.l2_step,
         "qrestrict": ex.q_restrict, "praise": ex.p_raise, "weaken": ex.weaken_alpha}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# argument types


def rational_arg(s: str):
    try:
        return parse_rational(s)
    except FormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def float_list(s: str) -> list:
    try:
        return [float(Fraction(x)) for x in s.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from exc


def positive_int(s: str) -> int:
    try:
        n = int(s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from exc
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def number_arg(s: str) -> float:
    try:
        return float(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from exc


# ---------------------------------------------------------------------------
# parser


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="output format")
    common.add_argument("--threads", type=positive_int, default=None,
                        help=f"worker threads (default ${THREADS_ENV} or 1); results do not depend on it")
    common.add_argument("--save-config", metavar="FILE", help="write the run configuration to FILE")

    top = Parser(prog="kplane", description="k-plane maximal operator exponents and transforms")
    top.add_argument("--replay", metavar="FILE", help="rerun a saved configuration")
    groups = top.add_subparsers(dest="group", parser_class=Parser)

    g = groups.add_parser("exponents", help="exact exponent derivations")
    sub = g.add_subparsers(dest="sub", parser_class=Parser)
    s = sub.add_parser("pipeline", parents=[common])
    s.add_argument("--name", choices=sorted(PIPELINES), required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--j", type=int, default=None)
    s = sub.add_parser("kcrit", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", choices=sorted(KCRIT), default="katztao")
    s = sub.add_parser("dim", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", choices=["katztao", "wolff"], default="katztao")
    s = sub.add_parser("step", parents=[common])
    s.add_argument("--rule", choices=sorted(RULES), required=True)
    s.add_argument("--operator", choices=["plate", "plane"], default="plate")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--p", type=rational_arg, required=True)
    s.add_argument("--q", type=rational_arg, required=True)
    s.add_argument("--alpha", type=rational_arg, default=None)
    s.add_argument("--eps", action="store_true", help="the input carries an epsilon loss")
    s.add_argument("--support-unit-ball", action="store_true")
    s.add_argument("--value", type=rational_arg, default=None,
                   help="target exponent for qrestrict / praise / weaken")

    g = groups.add_parser("verify", help="numerical checks against frozen budgets")
    sub = g.add_subparsers(dest="sub", parser_class=Parser)
    s = sub.add_parser("plancherel", parents=[common])
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--n", type=positive_int, default=64)
    s.add_argument("--functions", type=positive_int, default=8)
    s.add_argument("--directions", type=positive_int, default=256)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("highpass", parents=[common])
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--n", type=positive_int, default=128)
    s.add_argument("--radii", type=float_list, default=[2.0, 4.0, 8.0, 16.0])
    s.add_argument("--functions", type=positive_int, default=4)
    s.add_argument("--directions", type=positive_int, default=32)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("lpcheck", parents=[common])
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--n", type=positive_int, default=64)
    s.add_argument("--delta", type=number_arg, default=1 / 32)
    s.add_argument("--functions", type=positive_int, default=20)
    s.add_argument("--band-directions", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("holder", parents=[common])
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--r", type=number_arg, default=2.0)
    s.add_argument("--n", type=positive_int, default=40)
    s.add_argument("--delta", type=number_arg, default=0.1)
    s.add_argument("--functions", type=positive_int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("graproduct", parents=[common])
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--samples", type=positive_int, default=100_000)
    s.add_argument("--seed", type=int, default=0)

    g = groups.add_parser("transform", help="grid-function files")
    sub = g.add_subparsers(dest="sub", parser_class=Parser)
    s = sub.add_parser("xray", parents=[common])
    s.add_argument("--input", required=True)
    s.add_argument("--direction", type=float_list, required=True)
    s.add_argument("--out", required=True)
    s = sub.add_parser("make", parents=[common], help="write a sample grid function")
    s.add_argument("--kind", choices=["ball", "gaussian"], default="ball")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=positive_int, required=True)
    s.add_argument("--radius", type=number_arg, default=0.5)
    s.add_argument("--out", required=True)

    s = groups.add_parser("scaling", parents=[common], help="necessity sweeps in delta")
    s.add_argument("--family", choices=["ball", "plate"], required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--deltas", type=float_list, required=True)
    s.add_argument("--p", type=rational_arg, default=Fraction(2))
    s.add_argument("--q", type=rational_arg, default=Fraction(2))
    s.add_argument("--n", type=positive_int, default=None, help="grid nodes per axis (default: 10/min delta)")
    s.add_argument("--frames", type=positive_int, default=64)
    s.add_argument("--seed", type=int, default=0)
    return top


_META = ("group", "sub", "replay", "format", "threads", "save_config")


def config_from_args(args) -> RunConfig:
    command = [args.group] + ([args.sub] if getattr(args, "sub", None) else [])
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _META}
    return RunConfig(command, params, args.format)


# ---------------------------------------------------------------------------
# commands: each returns (exit code, output text)


def _bound_from_params(p) -> ex.BoundSpec:
    op = ex.Operator.MAXIMAL_PLATE if p["operator"] == "plate" else ex.Operator.MAXIMAL_PLANE
    return ex.BoundSpec(op, p["d"], p["k"], p["p"], p["q"], p["alpha"], p["eps"], p["support_unit_ball"])


def _closed_form_table(trace: ex.DerivationTrace, name: ex.Pipeline, p) -> Table:
    t = Table(["quantity", "derived", "closed_form", "match"])
    cf = ex.closed_form(name, p["d"], p["k"], p.get("j"))
    b = trace.final
    derived = {"operator": b.operator.value, "p": b.p, "q": b.q, "alpha": b.alpha}
    for key in ("operator", "p", "q", "alpha"):
        if key not in cf:
            continue
        want = cf[key].value if isinstance(cf[key], ex.Operator) else cf[key]
        got = derived[key]
        t.add(key, got, want, "exact" if got == want else "mismatch")
    return t


def cmd_exponents(sub: str, p: dict, fmt: str, threads):
    if sub == "pipeline":
        name = PIPELINES[p["name"]]
        trace = ex.derive_pipeline(name, p["d"], p["k"], p.get("j"))
        return EXIT_OK, [trace_table(trace), _closed_form_table(trace, name, p)]
    if sub == "kcrit":
        value = ex.kcrit(p["d"], KCRIT[p["seed"]])
        t = Table(["d", "seed", "kcrit"])
        t.add(p["d"], p["seed"], f"{value:.12f}")
        return EXIT_OK, [t]
    if sub == "dim":
        seed = SEEDS[p["seed"]]
        formula = ex.hausdorff_bound(p["d"], p["k"], seed)
        trace = ex.dim_trace(p["d"], p["k"], seed)
        derived = ex.dimension_from_bound(trace.final)
        t = Table(["d", "k", "seed", "formula", "from_pipeline", "match"])
        t.add(p["d"], p["k"], p["seed"], formula, derived, "exact" if formula == derived else "mismatch")
        return EXIT_OK, [t]
    if sub == "step":
        b = _bound_from_params(p)
        fn = RULES[p["rule"]]
        if p["rule"] in ("qrestrict", "praise", "weaken"):
            if p["value"] is None:
                raise UsageError(f"--value is required for rule {p['rule']}")
            out = fn(b, p["value"])
        else:
            out = fn(b)
        trace = ex.DerivationTrace(name=p["rule"])
        trace.steps.append(ex.Step(ex.Rule.SEED, b, b))
        trace.steps.append(ex.Step(_RULE_ENUM[p["rule"]], b, out))
        return EXIT_OK, [trace_table(trace)]
    raise UsageError("exponents needs a subcommand: pipeline, kcrit, dim, step")


_RULE_ENUM = {"xray": ex.Rule.XRAY_STEP, "interp": ex.Rule.INTERP_STEP, "l2": ex.Rule.L2_STEP,
              "qrestrict": ex.Rule.Q_RESTRICT, "praise": ex.Rule.P_RAISE, "weaken": ex.Rule.WEAKEN}


def _budget_table(rows) -> tuple:
    t = Table(["statistic", "value", "budget", "pass"])
    ok = True
    for name, value, budget, passed in rows:
        t.add(name, value, budget, bool(passed))
        ok = ok and bool(passed)
    return (EXIT_OK if ok else EXIT_BUDGET), t


def cmd_verify(sub: str, p: dict, fmt: str, threads):
    if sub == "plancherel":
        if p["d"] != 3:
            raise UsageError("verify plancherel runs on 3-dimensional grids (--d 3)")
        rep = lab.plancherel_experiment(p["d"], p["n"], p["functions"], p["directions"], p["seed"],
                                        threads=threads)
        dev = abs(rep.mean / rep.constant - 1)
        code, t = _budget_table([
            ("relative_spread", rep.spread, budgets.PLANCHEREL_SPREAD, rep.spread <= budgets.PLANCHEREL_SPREAD),
            ("mean_vs_constant", dev, budgets.PLANCHEREL_CONSTANT, dev <= budgets.PLANCHEREL_CONSTANT)])
        detail = Table(["function", "ratio"])
        for i, r in enumerate(rep.ratios):
            detail.add(i, r)
        return code, [t, detail]
    if sub == "highpass":
        limit = lab.nyquist(p["n"]) / 2
        if p["d"] != 3:
            raise UsageError("verify highpass runs on 3-dimensional grids (--d 3)")
        if len(p["radii"]) < 3:
            raise UsageError("a slope fit needs at least 3 radii")
        if max(p["radii"]) > limit or min(p["radii"]) <= 0:
            raise UsageError(f"radii must lie in (0, {limit:.6g}] (half the Nyquist frequency at n={p['n']})")
        res = lab.highpass_decay_experiment(p["d"], p["n"], p["radii"], p["functions"], p["directions"],
                                            p["seed"], threads=threads)
        lo, hi = budgets.HIGHPASS_SLOPE
        code, t = _budget_table([
            ("slope", res.slope, f"[{lo}, {hi}]", lo <= res.slope <= hi),
            ("loglog_residual", res.residual, budgets.FIT_RESIDUAL, res.residual < budgets.FIT_RESIDUAL)])
        return code, [t, _sweep_table(res)]
    if sub == "lpcheck":
        if p["n"] * p["delta"] < 2:
            raise UsageError("grid too coarse for this delta")
        reps = lab.lp_maximal_experiment(p["functions"], p["d"], p["k"], p["delta"], p["n"], p["seed"],
                                         p["band_directions"], threads)
        worst = max(r.constant for r in reps)
        rows = [("max_constant", worst, budgets.LP_MAXIMAL_CONSTANT, worst <= budgets.LP_MAXIMAL_CONSTANT)]
        slopes = [r.band_slope for r in reps if r.band_slope is not None]
        if slopes:
            dev = max(abs(s + 0.5) for s in slopes)
            rows.append(("max_band_slope_deviation", dev, budgets.LP_BAND_SLOPE, dev <= budgets.LP_BAND_SLOPE))
        code, t = _budget_table(rows)
        return code, [t]
    if sub == "holder":
        ratios = lab.holder_experiment(p["functions"], p["d"], p["k"], p["r"], p["delta"], p["n"],
                                       rng_seed=p["seed"], threads=threads)
        worst = max(ratios)
        code, t = _budget_table([("max_ratio", worst, budgets.HOLDER_RATIO, worst <= budgets.HOLDER_RATIO)])
        return code, [t]
    if sub == "graproduct":
        if not 2 <= p["k"] < p["d"]:
            raise UsageError("need 2 <= k < d")
        rows = lab.graproduct_experiment(p["d"], p["k"], p["samples"], p["seed"])
        detail = Table(["vector", "moment", "mean_haar", "mean_lifted", "z"])
        for r in rows:
            detail.add(r["vector"], r["moment"], r["mean_a"], r["mean_b"], r["z"])
        worst = max(abs(r["z"]) for r in rows)
        code, t = _budget_table([("max_abs_z", worst, budgets.GRASS_Z, worst <= budgets.GRASS_Z)])
        return code, [t, detail]
    raise UsageError("verify needs a subcommand: plancherel, highpass, lpcheck, holder, graproduct")


def _sweep_table(res: lab.SweepResult) -> Table:
    t = Table([res.parameter, "measured", "slope", "residual"])
    for v, m in res.points:
        t.add(v, m, res.slope, res.residual)
    return t


def cmd_transform(sub: str, p: dict, fmt: str, threads):
    if sub == "xray":
        f = read_grid(p["input"])
        xi = np.array(p["direction"], dtype=float)
        if xi.shape != (f.d,):
            raise UsageError(f"direction needs {f.d} components, got {len(xi)}")
        norm = np.linalg.norm(xi)
        if norm == 0:
            raise UsageError("direction must be nonzero")
        g = xray(f, xi / norm, HemisphereChart(f.d))
        write_grid(p["out"], g)
        t = Table(["file", "d", "shape", "h"])
        t.add(p["out"], g.d, "x".join(map(str, g.shape)), g.h)
        return EXIT_OK, [t]
    if sub == "make":
        if p["kind"] == "ball":
            f = indicator_ball(p["d"], p["n"], p["radius"])
        else:
            f = gaussian_mixture(p["d"], p["n"], [np.zeros(p["d"])], [p["radius"]], [1.0])
        write_grid(p["out"], f)
        t = Table(["file", "d", "shape", "h"])
        t.add(p["out"], f.d, "x".join(map(str, f.shape)), f.h)
        return EXIT_OK, [t]
    raise UsageError("transform needs a subcommand: xray, make")


def cmd_scaling(p: dict, fmt: str, threads):
    deltas = p["deltas"]
    if len(deltas) < 3:
        raise UsageError("a slope fit needs at least 3 deltas")
    n = p["n"] or int(math.ceil(10.0 / min(deltas)))
    family = lab.Family.SMALL_BALL if p["family"] == "ball" else lab.Family.PLATE
    res = lab.necessity_sweep(family, p["d"], p["k"], p["p"], p["q"], deltas, n, p["frames"], p["seed"],
                              threads)
    t = Table(["delta", "ratio", "maximal_norm", "own_frame_value", "slope", "residual"],
              meta={"family": family.value, "d": p["d"], "k": p["k"], "p": format_rational(p["p"]),
                    "q": format_rational(p["q"]), "resolution": res.metadata["resolution"]})
    for (v, m), num, own in zip(res.points, res.metadata["maximal_norms"], res.metadata["own_frame_values"]):
        t.add(v, m, num, own, res.slope, res.residual)
    return EXIT_OK, [t]


def run_config(cfg: RunConfig, threads=None) -> tuple:
    group, sub = cfg.command[0], (cfg.command[1] if len(cfg.command) > 1 else None)
    p = cfg.params
    if group == "exponents":
        return cmd_exponents(sub, p, cfg.output_format, threads)
    if group == "verify":
        return cmd_verify(sub, p, cfg.output_format, threads)
    if group == "transform":
        return cmd_transform(sub, p, cfg.output_format, threads)
    if group == "scaling":
        return cmd_scaling(p, cfg.output_format, threads)
    raise UsageError(f"unknown command {cfg.command!r}")


def render(tables, cfg: RunConfig) -> str:
    if cfg.output_format == "csv":
        return "\n".join(t.to_csv() for t in tables)
    doc = {"config": json.loads(cfg.to_json()),
           "tables": [json.loads(t.to_json()) for t in tables]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    out, err = sys.stdout, sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.replay:
            with open(args.replay) as fh:
                cfg = RunConfig.from_json(fh.read())
        elif args.group is None or (args.group != "scaling" and getattr(args, "sub", None) is None):
            raise UsageError(build_parser().format_usage() + "kplane: error: a command is required")
        else:
            cfg = config_from_args(args)
        threads = getattr(args, "threads", None)
        if getattr(args, "save_config", None):
            with open(args.save_config, "w") as fh:
                fh.write(cfg.to_json())
        code, tables = run_config(cfg, threads)
        out.write(render(tables, cfg))
        return code
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except ex.RuleInapplicable as exc:
        err.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except (FormatError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
