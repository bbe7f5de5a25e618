"""Command-line front end.

    randtensor moments exact --p 3 --d 2 --k 1 --m 2
    randtensor spectrum sample --ensemble normalized --p 1 --d 4 --trials 1 --seed 7 --out e.csv
    randtensor check all

Exit codes: 0 success, 1 a check failed (or a numerical routine failed),
2 usage error, 3 resource guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import bounds, checks, simulation
from .errors import DomainError, NumericError, ResourceGuardError
from .moments import (MomentKind, MomentQuery, class_sum, ensemble_moment, moment_coefficient_table,
                      repeated_moment)
from .reduction import ReductionClass, reduce
from .simulation import EnsembleKind, EnsembleSpec, fmt_real
from .words import DEFAULT_CAP, parse_word

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


@dataclass
class CommandResult:
    exit_code: int
    artifacts: list[str] = field(default_factory=list)
    summary: str = ""


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return fmt_real(v)
    return str(v)


CLASS_NAMES = {
    "cr": ReductionClass.COMPLETELY_REDUCIBLE,
    "completely-reducible": ReductionClass.COMPLETELY_REDUCIBLE,
    "irreducible": ReductionClass.IRREDUCIBLE,
    "mixed": ReductionClass.MIXED,
}
KIND_NAMES = {
    "normalized": MomentKind.NORMALIZED,
    "gaussian": MomentKind.GAUSSIAN,
    "partial-trace": MomentKind.PARTIAL_TRACE,
}
ENSEMBLE_NAMES = {
    "normalized": EnsembleKind.NORMALIZED,
    "gaussian": EnsembleKind.GAUSSIAN,
    "partial-trace": EnsembleKind.PARTIAL_TRACE,
    "repeated": EnsembleKind.REPEATED,
}


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    par = argparse.ArgumentParser(add_help=False)
    par.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    par.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    par.add_argument("--config", default=None, help="JSON file of flag values; explicit flags win")
    par.add_argument("--out", default=None, help="output file")
    return par


def _pdkm(par, m=True):
    par.add_argument("--p", type=int, required=True)
    par.add_argument("--d", type=int, required=True)
    par.add_argument("--k", type=int, default=1)
    if m:
        par.add_argument("--m", type=int, required=True)


def _ensemble(par):
    par.add_argument("--ensemble", choices=sorted(ENSEMBLE_NAMES), default="normalized")
    par.add_argument("--p", type=int, required=True)
    par.add_argument("--d", type=int, default=None)
    par.add_argument("--k", type=int, default=1)
    par.add_argument("--d-a", type=int, default=None)
    par.add_argument("--d-b", type=int, default=None)
    par.add_argument("--trials", type=int, default=1)


def build_parser():
    common = _common()
    top = _Parser(prog="randtensor", description="Exact moments, bounds and spectra of random product-state ensembles.")
    groups = top.add_subparsers(dest="group", required=True, parser_class=_Parser)
    leaves = {}

    def leaf(grp, name, help_):
        par = grp.add_parser(name, help=help_, parents=[common])
        leaves[(grp_name[grp], name)] = par
        return par

    grp_name = {}

    def group(name, help_):
        g = groups.add_parser(name, help=help_).add_subparsers(dest="cmd", required=True, parser_class=_Parser)
        grp_name[g] = name
        return g

    mom = group("moments", "exact moment engine")
    par = leaf(mom, "exact", "E^m for one ensemble")
    _pdkm(par)
    par.add_argument("--kind", choices=sorted(KIND_NAMES), default="normalized")
    par.add_argument("--d-a", type=int, default=None)
    par.add_argument("--d-b", type=int, default=None)
    par.add_argument("--cap", type=int, default=DEFAULT_CAP)
    par = leaf(mom, "table", "coefficients c_l with E^m = sum_l c_l (p)_l")
    par.add_argument("--d", type=int, required=True)
    par.add_argument("--k", type=int, default=1)
    par.add_argument("--max-m", type=int, default=6)
    par = leaf(mom, "paper-check", "compare the engine with the tabulated closed forms")
    par.add_argument("--max-m", type=int, default=6)
    par = leaf(mom, "class", "reduce a word, or sum one reduction class")
    par.add_argument("--word", default=None)
    par.add_argument("--p", type=int, default=None)
    par.add_argument("--d", type=int, default=None)
    par.add_argument("--k", type=int, default=1)
    par.add_argument("--m", type=int, default=None)
    par.add_argument("--class", dest="cls", choices=sorted(CLASS_NAMES), default=None)
    par = leaf(mom, "repeated", "exact moment of the repeated-factor ensemble")
    _pdkm(par)

    bnd = group("bounds", "recursive and closed-form moment bounds")
    par = leaf(bnd, "sd", "k=1 lower/upper recursion")
    _pdkm(par, m=False)
    par.add_argument("--max-m", type=int, default=6)
    par = leaf(bnd, "tensor", "general-k upper recursion")
    _pdkm(par, m=False)
    par.add_argument("--max-m", type=int, default=6)
    par = leaf(bnd, "theorem", "closed-form sandwich around beta_m(x)")
    _pdkm(par)

    gf = group("gf", "generating functions")
    par = leaf(gf, "rainbow", "iterate the rainbow recursion")
    par.add_argument("--x", type=float, required=True)
    par.add_argument("--z", type=float, default=None, help="default: the critical point (1+sqrt x)^2")
    par.add_argument("--iters", type=int, default=200)
    par.add_argument("--every", type=int, default=0, help="print every n-th iterate (0: last only)")

    spec = group("spectrum", "Monte Carlo spectra")
    par = leaf(spec, "sample", "eigenvalue CSV")
    _ensemble(par)
    par = leaf(spec, "stats", "summary statistics JSON")
    _ensemble(par)
    par.add_argument("--max-m", type=int, default=4)
    par = leaf(spec, "density", "histogram of nonzero eigenvalues against the limiting density (CSV)")
    _ensemble(par)
    par.add_argument("--bins", type=int, default=50)

    exp = group("experiment", "finite-size experiments")
    par = leaf(exp, "concentration", "std of lambda_max against d at fixed x")
    par.add_argument("--ensemble", choices=sorted(ENSEMBLE_NAMES), default="normalized")
    par.add_argument("--x", type=float, required=True)
    par.add_argument("--d-list", required=True, help="comma-separated dimensions")
    par.add_argument("--k", type=int, default=1)
    par.add_argument("--trials", type=int, default=40)
    par = leaf(exp, "extremes", "largest and smallest eigenvalue statistics")
    _ensemble(par)

    chk = group("check", "invariant checks")
    par = leaf(chk, "all", "run every deterministic check")
    par.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return top, leaves


def _parse(argv):
    top, leaves = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, rest = pre.parse_known_args(argv)
    if known.config and len(rest) >= 2 and (rest[0], rest[1]) in leaves:
        try:
            with open(known.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _UsageError(f"cannot read config {known.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise _UsageError("config must be a flat JSON object")
        leaf = leaves[(rest[0], rest[1])]
        known_dests = {a.dest for a in leaf._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - known_dests - {"config"})
        if unknown:
            raise _UsageError(f"unknown config keys: {', '.join(unknown)}")
        # config values become defaults, so explicit flags still win
        for action in leaf._actions:
            if action.dest in cfg:
                action.required = False
        leaf.set_defaults(**cfg)
    return top.parse_args(argv)


# ---------------------------------------------------------------------------
# commands


def _moment_query(a) -> MomentQuery:
    kind = KIND_NAMES[a.kind]
    return MomentQuery(a.p, a.d, a.k, a.m, kind, a.d_a, a.d_b)


def cmd_moments(a, out):
    if a.cmd == "exact":
        q = _moment_query(a)
        res = ensemble_moment(q, cap=a.cap)
        out.append(f"E = {fmt(res.total_E)}")
        out.append(f"e = {fmt(res.normalized_e)}")
        for ell in sorted(res.by_block_count):
            out.append(f"block_count {ell} = {fmt(res.by_block_count[ell])}")
        for cls, v in res.by_class.items():
            out.append(f"class {cls.value} = {fmt(v)}")
        return EXIT_OK
    if a.cmd == "table":
        for m in range(1, a.max_m + 1):
            table = moment_coefficient_table(m, a.k, a.d)
            cells = " ".join(f"c{ell}={fmt(table[ell])}" for ell in sorted(table))
            out.append(f"m={m} {cells}")
        return EXIT_OK
    if a.cmd == "paper-check":
        res = checks.check_moment_table(a.max_m)
        out.append(f"paper-check max_m={a.max_m}: {'PASS' if res.passed else 'FAIL'} ({res.detail})")
        for f in res.failures:
            out.append(f"  mismatch {f}")
        return EXIT_OK if res.passed else EXIT_FAIL
    if a.cmd == "class":
        if a.word:
            r = reduce(parse_word(a.word))
            out.append(f"class = {r.cls.value}")
            out.append(f"reduced = {'' if r.reduced is None else r.reduced}")
            out.append(f"removed_unique = {r.removed_unique}")
            return EXIT_OK
        if None in (a.p, a.d, a.m):
            raise DomainError("moments class needs --word, or --p --d --m")
        q = MomentQuery(a.p, a.d, a.k, a.m)
        wanted = [CLASS_NAMES[a.cls]] if a.cls else list(ReductionClass)
        for cls in wanted:
            out.append(f"{cls.value} = {fmt(class_sum(q, cls))}")
        return EXIT_OK
    if a.cmd == "repeated":
        q = MomentQuery(a.p, a.d, a.k, a.m, MomentKind.REPEATED)
        val = repeated_moment(q)
        out.append(f"E~ = {fmt(val)}")
        out.append(f"e~ = {fmt(val / a.d ** a.k)}")
        plain = ensemble_moment(MomentQuery(a.p, a.d, a.k, a.m)).total_E
        out.append(f"E = {fmt(plain)}")
        return EXIT_OK
    raise AssertionError(a.cmd)


def cmd_bounds(a, out):
    if a.cmd == "sd":
        if a.k != 1:
            raise DomainError("bounds sd is the k=1 recursion; use bounds tensor for k > 1")
        series = bounds.sd_bounds_k1(a.p, a.d, a.max_m)
        out.append("m,lower,upper")
        for m, (lo, hi) in enumerate(series.entries):
            out.append(f"{m},{fmt(lo)},{fmt(hi)}")
        return EXIT_OK
    if a.cmd == "tensor":
        series = bounds.sd_upper_tensor(a.p, a.d, a.k, a.max_m)
        out.append("m,upper,upper_float")
        for m, hi in enumerate(series.upper):
            out.append(f"{m},{fmt(hi)},{fmt(float(hi))}")
        return EXIT_OK
    if a.cmd == "theorem":
        tb = bounds.trace_theorem_bounds(a.p, a.d, a.k, a.m)
        out.append(f"beta = {fmt(tb.beta)}")
        out.append(f"lower = {fmt(tb.lower)}")
        out.append(f"upper = {fmt(tb.upper)}")
        return EXIT_OK
    raise AssertionError(a.cmd)


def cmd_gf(a, out):
    z = a.z if a.z is not None else bounds.critical_z(a.x)
    out.append("a,G_s,G_d")
    last = None
    for st in bounds.rainbow_iterates(a.x, z, a.iters):
        if a.every and st.a % a.every == 0:
            out.append(f"{st.a},{fmt(st.g_s)},{fmt(st.g_d)}")
        last = st
    if not a.every or last.a % a.every:
        out.append(f"{last.a},{fmt(last.g_s)},{fmt(last.g_d)}")
    out.append(f"closed_form = {fmt(bounds.rainbow_closed_form(a.x, z))}")
    out.append(f"z0 = {fmt(bounds.critical_z(a.x))}")
    return EXIT_OK


def _spec(a) -> EnsembleSpec:
    kind = ENSEMBLE_NAMES[a.ensemble]
    d = a.d if a.d is not None else a.d_a
    if d is None:
        raise DomainError("--d is required (or --d-a for partial-trace)")
    return EnsembleSpec(kind, a.p, d, a.k, a.seed, a.d_a, a.d_b)


def _write(path, text, artifacts):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    artifacts.append(os.fspath(path))


def cmd_spectrum(a, out, artifacts):
    spec = _spec(a)
    samples = simulation.run_trials(spec, a.trials, a.threads)
    if a.cmd == "sample":
        if a.out:
            simulation.write_eigen_csv(a.out, samples)
            artifacts.append(a.out)
            out.append(f"wrote {len(samples)} trial(s) x {spec.dim} eigenvalues to {a.out}")
        else:
            out.append("trial,index,eigenvalue")
            for s in samples:
                out.extend(f"{s.trial_index},{i},{fmt(float(v))}" for i, v in enumerate(s.eigenvalues))
        return EXIT_OK
    if a.cmd == "stats":
        rec = simulation.stats_record(spec, samples, a.max_m)
        text = json.dumps(rec, indent=2, sort_keys=True) + "\n"
        if a.out:
            _write(a.out, text, artifacts)
        out.append(text.rstrip("\n"))
        return EXIT_OK
    if a.cmd == "density":
        import numpy as np

        vals = np.concatenate([s.nonzero for s in samples])
        lo, hi = simulation.mp_edges(spec.x)
        top = max(hi, float(vals.max())) if vals.size else hi
        bottom = min(lo, float(vals.min())) if vals.size else lo
        hist, edges = np.histogram(vals, bins=a.bins, range=(bottom, top), density=True)
        lines = ["bin_lo,bin_hi,empirical,mp"]
        for h, e0, e1 in zip(hist, edges[:-1], edges[1:]):
            mid = (e0 + e1) / 2
            lines.append(f"{fmt(float(e0))},{fmt(float(e1))},{fmt(float(h))},"
                         f"{fmt(simulation.mp_density_nonzero(spec.x, mid))}")
        text = "\n".join(lines) + "\n"
        if a.out:
            _write(a.out, text, artifacts)
        out.append(text.rstrip("\n"))
        return EXIT_OK
    raise AssertionError(a.cmd)


def cmd_experiment(a, out, artifacts):
    if a.cmd == "concentration":
        try:
            d_list = [int(t) for t in a.d_list.split(",") if t.strip()]
        except ValueError as exc:
            raise DomainError(f"bad --d-list {a.d_list!r}") from exc
        rows = simulation.concentration_experiment(ENSEMBLE_NAMES[a.ensemble], a.x, d_list, a.k,
                                                   a.trials, a.seed, a.threads)
        lines = ["d,p,std_lambda_max"] + [f"{d},{p},{fmt(sd)}" for d, p, sd in rows]
    else:
        spec = _spec(a)
        st = simulation.extreme_stats(simulation.run_trials(spec, a.trials, a.threads))
        lines = ["stat,mean,std",
                 f"lambda_max,{fmt(st.lambda_max_mean)},{fmt(st.lambda_max_std)}",
                 f"lambda_min,{fmt(st.lambda_min_mean)},{fmt(st.lambda_min_std)}",
                 f"lambda_min_over_trials,{fmt(min(st.lambda_min_values))},",
                 f"mp_edges,{fmt(simulation.mp_edges(spec.x)[0])},{fmt(simulation.mp_edges(spec.x)[1])}"]
    text = "\n".join(lines) + "\n"
    if a.out:
        _write(a.out, text, artifacts)
    out.append(text.rstrip("\n"))
    return EXIT_OK


def cmd_check(a, out):
    only = None
    if a.only:
        only = {int(t) for t in a.only.split(",")}
    results = checks.run_all(only)
    width = max(len(checks.REGISTRY[n][0]) for n, _ in results)
    out.append(f"{'#':>3}  {'check':<{width}}  result  detail")
    for num, res in results:
        out.append(f"{num:>3}  {checks.REGISTRY[num][0]:<{width}}  {'PASS' if res.passed else 'FAIL':<6}  {res.detail}")
    failed = sum(not r.passed for _, r in results)
    out.append(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def run(argv) -> CommandResult:
    out: list[str] = []
    artifacts: list[str] = []
    try:
        a = _parse(list(argv))
        if a.group == "moments":
            code = cmd_moments(a, out)
        elif a.group == "bounds":
            code = cmd_bounds(a, out)
        elif a.group == "gf":
            code = cmd_gf(a, out)
        elif a.group == "spectrum":
            code = cmd_spectrum(a, out, artifacts)
        elif a.group == "experiment":
            code = cmd_experiment(a, out, artifacts)
        else:
            code = cmd_check(a, out)
        if a.out and not artifacts and a.group in ("moments", "bounds", "gf", "check"):
            _write(a.out, "\n".join(out) + "\n", artifacts)
    except _UsageError as exc:
        return CommandResult(EXIT_USAGE, artifacts, str(exc))
    except SystemExit as exc:  # --help
        return CommandResult(EXIT_OK if not exc.code else EXIT_USAGE, artifacts, "")
    except DomainError as exc:
        return CommandResult(EXIT_USAGE, artifacts, f"error: {exc}")
    except ResourceGuardError as exc:
        return CommandResult(EXIT_GUARD, artifacts, f"resource guard: {exc}")
    except NumericError as exc:
        return CommandResult(EXIT_FAIL, artifacts, f"numeric failure: {exc}")
    return CommandResult(code, artifacts, "\n".join(out))


def main(argv=None) -> int:
    res = run(sys.argv[1:] if argv is None else argv)
    if res.summary:
        stream = sys.stdout if res.exit_code in (EXIT_OK, EXIT_FAIL) else sys.stderr
        print(res.summary, file=stream)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
