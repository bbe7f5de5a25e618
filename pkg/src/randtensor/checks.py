"""Deterministic invariant checks shared by the test-suite and ``check all``.

Each check returns a :class:`CheckResult`; none of them raise on a failed
comparison, so a single run reports every violation.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .bounds import (critical_z, narayana_gf, rainbow_closed_form, rainbow_iterates,
                     sd_bounds_k1, sd_upper_tensor, trace_theorem_bounds)
from .combinatorics import beta_eval, falling, narayana, rising
from .moments import (MomentKind, MomentQuery, class_sum, ensemble_moment, tabulated_moment,
                      repeated_moment)
from .reduction import ReductionClass, classify, iter_ab_pairs, narayana_decode, narayana_encode
from .simulation import mp_moment
from .words import enumerate_partitions

GRID_P = range(1, 7)
GRID_D = (2, 3, 4)
GRID_K = (1, 2, 3)
GRID_M = range(1, 7)


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    def expect(self, ok: bool, what: str) -> None:
        self.checked += 1
        if not ok:
            self.passed = False
            self.failures.append(what)

    @property
    def detail(self) -> str:
        if self.passed:
            return f"{self.checked} comparisons"
        head = "; ".join(self.failures[:3])
        more = f" (+{len(self.failures) - 3} more)" if len(self.failures) > 3 else ""
        return f"{len(self.failures)}/{self.checked} failed: {head}{more}"


def exp_lower(t: Fraction, terms: int = 40) -> Fraction:
    """Rational lower bound on ``exp(t)`` for ``t >= 0`` (Taylor partial sum)."""
    total, term = Fraction(1), Fraction(1)
    for n in range(1, terms):
        term = term * t / n
        total += term
    return total


def _grid():
    for p in GRID_P:
        for d in GRID_D:
            for k in GRID_K:
                for m in GRID_M:
                    yield p, d, k, m


def check_moment_table(max_m: int = 6) -> CheckResult:
    res = CheckResult("moment table E^1..E^6")
    for p, d, k, m in _grid():
        if m > max_m:
            continue
        got = ensemble_moment(MomentQuery(p, d, k, m)).total_E
        want = tabulated_moment(p, d, k, m)
        res.expect(got == want, f"p={p} d={d} k={k} m={m}: {got} != {want}")
    return res


def check_gaussian_sandwich() -> CheckResult:
    """``exp(-m^2 k/2d) E_hat <= E <= E_hat`` certified in rationals.

    With ``R = prod_{j<m} (1 + j/d)^{-k}`` one has ``R E_hat <= E``, and
    ``exp(m^2 k/2d) >= 1/R`` is certified by a Taylor lower bound.
    """
    res = CheckResult("gaussian sandwich")
    for p, d, k, m in _grid():
        e = ensemble_moment(MomentQuery(p, d, k, m)).total_E
        eh = ensemble_moment(MomentQuery(p, d, k, m, MomentKind.GAUSSIAN)).total_E
        r = Fraction(d ** (m - 1), rising(d, m) // d) ** k if m > 1 else Fraction(1)
        res.expect(e <= eh, f"E > E_hat at p={p} d={d} k={k} m={m}")
        res.expect(r * eh <= e, f"R*E_hat > E at p={p} d={d} k={k} m={m}")
        res.expect(exp_lower(Fraction(m * m * k, 2 * d)) * r >= 1,
                   f"exp certificate failed at d={d} k={k} m={m}")
    return res


def check_theorem_bounds(slack: float = 1e-10) -> CheckResult:
    res = CheckResult("trace theorem bounds")
    for p, d, k, m in _grid():
        e = ensemble_moment(MomentQuery(p, d, k, m)).normalized_e
        tb = trace_theorem_bounds(p, d, k, m)
        if m * m < p:
            res.expect(tb.lower <= e, f"lower bound violated at p={p} d={d} k={k} m={m}")
        res.expect(float(e) <= tb.upper * (1 + slack) + slack,
                   f"upper bound violated at p={p} d={d} k={k} m={m}")
    return res


def check_class_sums(slack: float = 1e-10) -> CheckResult:
    res = CheckResult("reduction class sums")
    for p, d, k, m in _grid():
        q = MomentQuery(p, d, k, m)
        cr = class_sum(q, ReductionClass.COMPLETELY_REDUCIBLE)
        want = d ** k * sum((narayana(m, l) * Fraction(falling(p, l), d ** (k * l)) for l in range(1, m + 1)),
                            Fraction(0))
        res.expect(cr == want, f"CR sum at p={p} d={d} k={k} m={m}: {cr} != {want}")
        irr = class_sum(q, ReductionClass.IRREDUCIBLE)
        if m == 4:
            want4 = Fraction(2 ** k * falling(p, 2), (d * (d + 1)) ** k)
            res.expect(irr == want4, f"irreducible m=4 sum at p={p} d={d} k={k}: {irr} != {want4}")
        if m % 2 == 0 and m * m < p:
            bound = (p / d ** k) ** (m / 2) * math.exp(-m * m / (2 * p))
            res.expect(float(irr) >= bound - slack,
                       f"irreducible lower bound at p={p} d={d} k={k} m={m}: {float(irr):.6g} < {bound:.6g}")
    return res


def check_bijection(max_m: int = 10) -> CheckResult:
    res = CheckResult("Narayana bijection")
    for m in range(1, max_m + 1):
        counts: Counter = Counter()
        for sigma in enumerate_partitions(m, cap=max_m):
            if classify(sigma.word) is ReductionClass.COMPLETELY_REDUCIBLE:
                counts[sigma.ell] += 1
                res.expect(narayana_decode(narayana_encode(sigma), m) == sigma, f"round trip failed for {sigma}")
        for ell in range(1, m + 1):
            res.expect(counts[ell] == narayana(m, ell), f"m={m} l={ell}: {counts[ell]} != N={narayana(m, ell)}")
    # decoding every admissible (a, b) that is valid hits each CR word once
    for m in range(1, min(max_m, 7) + 1):
        for ell in range(1, m + 1):
            seen = set()
            for ab in iter_ab_pairs(m, ell):
                try:
                    seen.add(narayana_decode(ab, m))
                except ValueError:
                    pass
            res.expect(len(seen) == narayana(m, ell), f"decode image size at m={m} l={ell}")
    return res


def check_schwinger_dyson() -> CheckResult:
    res = CheckResult("Schwinger-Dyson bounds")
    for p in range(2, 7):
        for d in GRID_D:
            sd = sd_bounds_k1(p, d, 6)
            tens = sd_upper_tensor(p, d, 2, 6)
            for m in GRID_M:
                e1 = ensemble_moment(MomentQuery(p, d, 1, m)).normalized_e
                res.expect(sd.lower[m] <= e1 <= sd.upper[m], f"k=1 p={p} d={d} m={m}")
                e2 = ensemble_moment(MomentQuery(p, d, 2, m)).normalized_e
                res.expect(e2 <= tens.upper[m], f"tensor k=2 p={p} d={d} m={m}")
    return res


def check_rainbow() -> CheckResult:
    res = CheckResult("rainbow generating function")
    x = 0.25
    z0 = critical_z(x)
    prev = None
    last = None
    for st in rainbow_iterates(x, z0, 10 ** 4):
        if prev is not None:
            res.expect(st.g_s >= prev.g_s and st.g_d >= prev.g_d, f"not monotone at a={st.a}")
        prev = last = st
    # at z0 the physical root is G_s = 1 + sqrt(x) = 1.5
    res.expect(abs(last.g_s - 1.5) <= 5e-3, f"G_s after 1e4 steps is {last.g_s}")
    z = 2 * z0
    target = rainbow_closed_form(x, z)
    hit = any(abs(st.g_s - target) <= 1e-9 for st in rainbow_iterates(x, z, 200))
    res.expect(hit, f"no convergence to {target} within 200 steps at z=2 z0")
    for xx, zz in ((0.25, 3.0), (0.5, 4.0), (1.0, 5.0), (2.0, 8.0), (4.0, 12.0)):
        cf = rainbow_closed_form(xx, zz)
        f = narayana_gf(xx, 1 / zz)
        res.expect(abs(cf - f) <= 1e-12, f"closed form {cf} vs F={f} at x={xx} z={zz}")
    return res


def check_mp_law() -> CheckResult:
    res = CheckResult("Marchenko-Pastur law")
    for x in (0.25, 1.0, 4.0):
        total = mp_moment(x, 0)
        res.expect(abs(total - 1) <= 1e-8, f"integral {total} at x={x}")
        for m in range(1, 7):
            got = mp_moment(x, m)
            want = float(beta_eval(m, Fraction(x)))
            res.expect(abs(got - want) <= 1e-6, f"m={m} x={x}: {got} vs {want}")
    return res


def partial_trace_rhs(p: int, d_a: int, d_b: int, k: int, m: int) -> Fraction:
    """Rational lower bound on the right-hand side of the partial-trace comparison."""
    base = ensemble_moment(MomentQuery(p, d_a // d_b, k, m)).total_E
    return base * exp_lower(Fraction(m * (m + 1) * k * d_b, 2 * d_a)) * Fraction(1, d_b ** (k * (m - 1)))


def check_variants() -> CheckResult:
    res = CheckResult("variant ensembles")
    for d in (2, 3):
        for m in range(1, 5):
            rep = repeated_moment(MomentQuery(4, d, 2, m, MomentKind.REPEATED))
            e = ensemble_moment(MomentQuery(4, d, 2, m)).total_E
            res.expect(rep <= e, f"repeated d={d} m={m}: {rep} > {e}")
    for d_a in (4, 6):
        for k in (1, 2):
            for m in range(1, 5):
                for p in range(1, 5):
                    lhs = ensemble_moment(MomentQuery(p, 2, k, m, MomentKind.PARTIAL_TRACE, d_a, 2)).total_E
                    res.expect(lhs <= partial_trace_rhs(p, d_a, 2, k, m),
                               f"partial trace d_a={d_a} k={k} m={m} p={p}")
    return res


REGISTRY: dict[int, tuple[str, Callable[[], CheckResult]]] = {
    1: ("moment-table", check_moment_table),
    2: ("gaussian-sandwich", check_gaussian_sandwich),
    3: ("theorem-bounds", check_theorem_bounds),
    4: ("class-sums", check_class_sums),
    5: ("bijection", check_bijection),
    6: ("schwinger-dyson", check_schwinger_dyson),
    7: ("rainbow-gf", check_rainbow),
    8: ("mp-law", check_mp_law),
    14: ("variant-ensembles", check_variants),
}


def run_all(only=None) -> list[tuple[int, CheckResult]]:
    out = []
    for num, (_, fn) in REGISTRY.items():
        if only and num not in only:
            continue
        out.append((num, fn()))
    return out
