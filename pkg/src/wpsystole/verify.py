"""
Verification suites behind ``wp verify``.

Each suite fills a :class:`~wpsystole.reporting.SuiteReport`; every failing
check records the inputs needed to replay it. ``all`` runs every suite.
"""
import itertools
import math
import time

import numpy as np
from scipy import stats

from . import hypgeom, moments
from .errors import BudgetExceeded, ContractViolation
from .exact_algebra import PiGradedPoly, Rational
from .reporting import SuiteReport
from .volumes import (VolumeTable, check_string_dilaton, is_stable, sinh_bound_check,
                      volume_ratio)

SUITES = ("volumes", "hypgeom", "moments", "all")


def fit_inverse_g(gs, devs):
    r"""
    Linear regression of ``devs`` on `1/g`. Returns ``(a, b, R^2, R^2_0)``
    for `a/g + b`, where `R^2_0` belongs to the one-parameter fit through the
    origin (centred); subleading `1/g^2` terms at small `g` pull it down.
    """
    x = 1.0 / np.asarray(gs, dtype=float)
    y = np.asarray(devs, dtype=float)
    fit = stats.linregress(x, y)
    a0 = float(np.dot(x, y) / np.dot(x, x))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2_0 = 1.0 - float(np.sum((y - a0 * x) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), r2_0


def _pairs(gmax, complexity):
    return [(g, n) for g in range(gmax + 1) for n in range(complexity + 3)
            if n >= 1 and is_stable(g, n) and 2 * g - 2 + n <= complexity]


def _base_values(report, table):
    R = Rational
    expected = {
        (0, 3): PiGradedPoly(3, 0, {(0, 0, 0): 1}),
        (0, 4): PiGradedPoly(4, 2, dict([((0, 0, 0, 0), 2)] + [
            (tuple(int(i == k) for i in range(4)), R(1, 2)) for k in range(4)])),
    }
    for (g, n), want in expected.items():
        got = table.volume_polynomial(g, n)
        report.record(f"base V_{g},{n}", got == want, {"g": g, "n": n}, value=str(got))
    v12 = table.volume_polynomial(1, 2).substitute_square(1, 0)
    want12 = PiGradedPoly(1, 4, {(2,): R(1, 192), (1,): R(1, 12), (0,): R(1, 4)})
    report.record("base V_1,2(b,0)", v12 == want12, {"g": 1, "n": 2}, value=str(v12))
    v05 = table.volume_polynomial(0, 5)
    for k in (4, 3, 2, 1):
        v05 = v05.substitute_square(k, 0)
    want05 = PiGradedPoly(1, 4, {(2,): R(1, 8), (1,): 3, (0,): 10})
    report.record("base V_0,5(b,0,0,0,0)", v05 == want05, {"g": 0, "n": 5}, value=str(v05))


def _symmetry(table, g, n, rng):
    V = table.volume_polynomial(g, n)
    if n <= 4:
        perms = list(itertools.permutations(range(n)))
    else:
        perms = [tuple(rng.permutation(n)) for _ in range(6)]
    terms = V.terms
    for p in perms:
        for alpha, c in terms.items():
            if terms.get(tuple(alpha[i] for i in p)) != c:
                return False, p
    return True, None


def _convention_comparison(report):
    # which V_{1,1} normalization makes the recursion close consistently
    verdict = {}
    for conv in ("half", "full"):
        T = VolumeTable(budget=4, convention=conv, verify_symmetry=False)
        sym_ok, _ = _symmetry(T, 1, 2, np.random.default_rng(0))
        ident = check_string_dilaton(T, 1, 1).passed and check_string_dilaton(T, 1, 2).passed
        verdict[conv] = bool(sym_ok and ident)
    passing = [c for c, ok in verdict.items() if ok]
    report.record("convention comparison", bool(passing), {"conventions": ["half", "full"]},
                  consistent=passing, detail=verdict)


def volumes_suite(report, gmax=2, budget=14, convention="half", complexity=None):
    complexity = budget if complexity is None else min(complexity, budget)
    table = VolumeTable(budget=budget, convention=convention)
    t0 = time.perf_counter()
    try:
        _base_values(report, table)
    except ContractViolation as exc:
        report.add("base values", "fail", {"convention": convention}, error=str(exc))
        _convention_comparison(report)
        return report
    pairs = _pairs(gmax, complexity)
    for g, n in pairs:
        table.ensure(g, n)
    rng = np.random.default_rng(0)
    for g, n in pairs:
        inputs = {"g": g, "n": n}
        V = table.volume_polynomial(g, n) if n <= 8 else None
        if V is not None:
            ok, perm = _symmetry(table, g, n, rng)
            report.record("symmetry", ok, dict(inputs, permutation=perm))
            terms = V.terms
            graded = all(c > 0 for c in terms.values()) and all(
                V.pi_power(a) == 6 * g - 6 + 2 * n - 2 * sum(a) for a in terms)
            report.record("positivity and grading", graded, inputs)
        else:
            report.add("symmetry", "skip", inputs, reason="enforced at insertion")
        s = sinh_bound_check(table, g, n)
        report.record("sinh bound", s.passed, inputs, certificate=s.certificate,
                      worst_coefficient_ratio=s.worst_coefficient_ratio,
                      points_checked=s.points_checked, violations=s.violations,
                      offending=s.offending)
    for g, n in pairs:
        lower = (g, n - 1)
        if 2 * g - 2 + lower[1] < 1 and lower != (1, 0):
            continue
        r = check_string_dilaton(table, *lower)
        report.record("string and dilaton", r.passed, {"g": g, "n": n - 1},
                      string_residual=len(r.string_residual),
                      dilaton_residual=len(r.dilaton_residual))
    genus_pairs = [(g, n) for g, n in pairs if g >= 1 and n >= 2 and (g - 1, n + 2) in table]
    for g, n in genus_pairs:
        small = table.numeric_value(g - 1, n + 2)
        big = table.numeric_value(g, n)
        report.record("genus inequality", small <= big, {"g": g, "n": n - 2},
                      lhs=float(small), rhs=float(big))
    _ratio_trends(report, table, gmax, complexity)
    _convention_comparison(report)
    report.add("timing", "pass", {"gmax": gmax, "complexity": complexity},
               seconds=round(time.perf_counter() - t0, 3))
    return report


def _ratio_trends(report, table, gmax, complexity):
    for n in (0, 1, 2):
        gs, devs = [], []
        for g in range(2, gmax + 1):
            if 2 * g - 2 + n + 1 > complexity + (n == 0):
                continue
            try:
                r = 4 * math.pi ** 2 * volume_ratio(table, g, "dilaton", n=n)
            except (BudgetExceeded, LookupError):
                continue
            report.record("dilaton ratio range", 0.4 < r < 1.6, {"g": g, "n": n}, ratio=r)
            gs.append(g)
            devs.append(abs(r - 1))
        if len(gs) >= 3:
            a, b, r2, r2_0 = fit_inverse_g(gs, devs)
            report.record("dilaton ratio trend", r2 >= 0.9, {"n": n, "genera": gs}, a=a, b=b,
                          r_squared=r2, r_squared_through_origin=r2_0)
        else:
            report.add("dilaton ratio trend", "skip", {"n": n, "genera": gs},
                       reason="fewer than three genera")
        gs = [g for g in range(1, gmax + 1) if (g, n) in table and (g - 1, n + 2) in table]
        devs = [abs(volume_ratio(table, g, "genus", n=n) - 1) for g in gs]
        if len(gs) >= 3:
            a, b, r2, r2_0 = fit_inverse_g(gs, devs)
            report.record("genus ratio trend", r2 >= 0.9, {"n": n, "genera": gs}, a=a, b=b,
                          r_squared=r2, r_squared_through_origin=r2_0)


def hypgeom_suite(report, points=10 ** 5, seed=0):
    v = hypgeom.figure_eight_length(0, 0, 0)
    report.record("figure-eight at zero", abs(v - hypgeom.F8_MIN) <= 1e-12, {}, value=v)
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    x, y, z, d = (20.0 * (1.0 - rng.random(points)) for _ in range(4))
    inputs = {"points": points, "seed": seed, "box": "(0,20]^3"}

    def offenders(mask, *cols):
        idx = np.nonzero(mask)[0][:5]
        return [tuple(float(c[i]) for c in cols) for i in idx]

    f = hypgeom.figure_eight_length(x, y, z)
    bad = (f < hypgeom.F8_MIN) | (f <= (x + y + z) / 2)
    report.record("figure-eight lower bounds", not bad.any(), inputs, offending=offenders(bad, x, y, z))
    mono = ((hypgeom.figure_eight_length(x + d, y, z) < f) | (hypgeom.figure_eight_length(x, y + d, z) < f)
            | (hypgeom.figure_eight_length(x, y, z + d) < f))
    report.record("figure-eight monotone", not mono.any(), inputs, offending=offenders(mono, x, y, z, d))
    D = hypgeom.mcshane_D(x, y, z)
    R = hypgeom.mcshane_R(x, y, z)
    report.record("D and R positive", bool((D > 0).all() and (R > 0).all()), inputs,
                  offending=offenders((D <= 0) | (R <= 0), x, y, z))
    Dm = ((hypgeom.mcshane_D(x + d, y, z) < D) | (hypgeom.mcshane_D(x, y + d, z) > D)
          | (hypgeom.mcshane_D(x, y, z + d) > D))
    report.record("D monotone", not Dm.any(), inputs, offending=offenders(Dm, x, y, z, d))
    Rm = (hypgeom.mcshane_R(x, y, z + d) > R) | (hypgeom.mcshane_R(x, y + d, z) < R)
    report.record("R monotone", not Rm.any(), inputs, offending=offenders(Rm, x, y, z, d))
    bd = x / D > hypgeom.mcshane_bound_D(x, y + z)
    br = x / R > hypgeom.mcshane_bound_R(x, y, z)
    report.record("D kernel lower bound", not bd.any(), inputs, offending=offenders(bd, x, y, z))
    report.record("R kernel lower bound", not br.any(), inputs, offending=offenders(br, x, y, z))
    table = VolumeTable(budget=3)
    V11 = table.volume_polynomial(1, 1)
    for b in (0.5, 1.0, 2.0, 5.0):
        lhs = b * float(V11.evaluate_numeric([b]))
        rhs, err = hypgeom.torus_mcshane_integral(b)
        rel = abs(lhs - rhs) / lhs
        report.record("torus McShane consistency", rel <= 1e-8, {"b": b},
                      lhs=lhs, rhs=rhs, relative_error=rel, error_estimate=err)
    return report


def moments_suite(report, mc_samples=10 ** 6, seed=1, quick=False):
    Ls = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    reference = None
    for L in Ls:
        r = moments.cond_change_of_vars_check(L)
        if L == 10.0:
            reference = r.scaled_remainder
        report.record("cond change of variables", r.passed, {"L": L},
                      direct=r.direct, iterated=r.iterated, closed=r.closed,
                      relative_difference=r.direct_vs_iterated, scaled_remainder=r.scaled_remainder)
    for L in Ls:
        if L > 10.0:
            s = moments.cond_change_of_vars_check(L).scaled_remainder
            report.record("closed-form remainder scaling", s <= 2 * reference and s >= reference / 2,
                          {"L": L}, scaled_remainder=s, reference_at_10=reference)
    report.record("below 2 arccosh 3 is zero", moments.E_f8_g23(4, 1.0).value == 0.0, {"g": 4, "L": 1.0})
    cases = [(4, 8.0)] if quick else [(4, 8.0), (5, 9.0)]
    for g, L in cases:
        ex = moments.E_f8_g23(g, L, "exact")
        mc = moments.E_f8_g23(g, L, "mc", samples=mc_samples, seed=seed)
        ok = abs(ex.value - mc.value) <= 3 * mc.error_estimate
        report.record("E_f8 exact vs MC", ok, {"g": g, "L": L, "samples": mc_samples, "seed": seed},
                      exact=ex.value, mc=mc.value, mc_sigma=mc.error_estimate)
    a = moments.E_f8_g23(4, 8.0, "mc", samples=10 ** 5, seed=seed, threads=1)
    b = moments.E_f8_g23(4, 8.0, "mc", samples=10 ** 5, seed=seed, threads=4)
    report.record("MC thread independence", a.value == b.value and a.error_estimate == b.error_estimate,
                  {"g": 4, "L": 8.0, "samples": 10 ** 5, "seed": seed}, one=a.value, four=b.value)
    q1 = moments.E_f8_g23(4, 8.0, "exact").value
    q2 = moments.E_f8_g23(4, 8.0, "exact").value
    report.record("quadrature determinism", q1 == q2, {"g": 4, "L": 8.0}, first=q1, second=q2)
    g, L = 6, 12.0
    sm = moments.E_f8_small_terms(3, 6.0, "exact")
    report.record("small terms nonnegative", sm.value >= 0, {"g": 3, "L": 6.0}, value=sm.value)
    ratio = moments.E_f8_g23(g, L, "exact").value / moments.E_f8_main_closed(g, L)
    report.record("exact over leading term", 0.5 < ratio < 1.5, {"g": g, "L": L}, ratio=ratio)
    gs = [10 ** k for k in range(3, 10)]
    devs = []
    for gg in gs:
        LL = math.log(gg) - math.log(math.log(gg)) + 3
        devs.append(abs(moments.E_f8_g23(gg, LL, "sinh_approx").value / moments.E_f8_main_closed(gg, LL) - 1))
    report.record("sinh approximation approaches leading term",
                  all(b2 <= a2 for a2, b2 in zip(devs, devs[1:])), {"genera": gs}, deviations=devs)
    return report


def run_suite(name, config_snapshot=None, gmax=2, budget=14, convention="half",
              complexity=None, seed=1, quick=False):
    if name not in SUITES:
        raise ContractViolation(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    report = SuiteReport(name, config=dict(config_snapshot or {}))
    if name in ("volumes", "all"):
        volumes_suite(report, gmax, budget, convention, complexity)
    if name in ("hypgeom", "all"):
        hypgeom_suite(report)
    if name in ("moments", "all"):
        moments_suite(report, seed=seed, quick=quick)
    return report
