"""
The eleven acceptance criteria at their stated tolerances.

Each test records a one-line verdict that is printed in the terminal summary
under "acceptance criteria". Criteria 7 and 8 fail at desk scale; the reasons
are analysed in the project notes and echoed in the verdict lines.
"""
import contextlib
import io
import math
import time

import numpy as np
import pytest

from wpsystole import hypgeom as hg
from wpsystole import moments as m
from wpsystole.cli import run_command
from wpsystole.exact_algebra import PiGradedPoly, Rational
from wpsystole.verify import fit_inverse_g
from wpsystole.volumes import VolumeTable, check_string_dilaton, sinh_bound_check, volume_ratio

R = Rational


def test_criterion_01_exact_volumes(acceptance):
    t0 = time.perf_counter()
    T = VolumeTable()
    v03 = T.volume_polynomial(0, 3)
    v04 = T.volume_polynomial(0, 4)
    v12 = T.volume_polynomial(1, 2).substitute_square(1, 0)
    v05 = T.volume_polynomial(0, 5)
    for k in (4, 3, 2, 1):
        v05 = v05.substitute_square(k, 0)
    elapsed = time.perf_counter() - t0
    want04 = {(0, 0, 0, 0): 2}
    want04.update({tuple(int(i == k) for i in range(4)): R(1, 2) for k in range(4)})
    checks = [
        v03 == PiGradedPoly(3, 0, {(0, 0, 0): 1}),
        v04 == PiGradedPoly(4, 2, want04),
        v12 == PiGradedPoly(1, 4, {(2,): R(1, 192), (1,): R(1, 12), (0,): R(1, 4)}),
        v05 == PiGradedPoly(1, 4, {(2,): R(1, 8), (1,): 3, (0,): 10}),
    ]
    ok = all(checks) and elapsed < 1.0
    acceptance(1, ok, f"4/4 exact equalities={all(checks)}, {elapsed:.3f}s (< 1s)")
    assert ok


def test_criterion_02_identity_suite(full_table, acceptance):
    t0 = time.perf_counter()
    T = full_table
    failures, checked = [], 0
    for g, n in [(g, n) for g in range(8) for n in range(15)]:
        if 2 * g - 2 + n > 12 or (2 * g - 2 + n < 1 and (g, n) != (1, 0)):
            continue
        checked += 1
        if not check_string_dilaton(T, g, n).passed:
            failures.append((g, n))
    ineq_bad, ineq = [], 0
    for g in range(1, 9):
        for n in range(0, 13):
            if (g - 1, n + 4) in T and (g, n + 2) in T:
                ineq += 1
                if not T.numeric_value(g - 1, n + 4) <= T.numeric_value(g, n + 2):
                    ineq_bad.append((g, n))
    elapsed = time.perf_counter() - t0
    ok = not failures and not ineq_bad and ineq > 0 and elapsed < 600
    acceptance(2, ok, f"string/dilaton exact on {checked} pairs, failures={failures}; "
                      f"genus inequality {ineq - len(ineq_bad)}/{ineq}; {elapsed:.1f}s")
    assert ok


def test_criterion_03_ratio_trends(full_table, acceptance):
    T = full_table
    parts = []
    ok = True
    for n in (0, 1, 2):
        gs = [g for g in range(2, 9) if (g, n) in T and (g, n + 1) in T or (n == 0 and g <= 8 and (g, 1) in T)]
        vals = [4 * math.pi ** 2 * volume_ratio(T, g, "dilaton", n=n) for g in gs]
        a, b, r2, r2_0 = fit_inverse_g(gs, [abs(v - 1) for v in vals])
        in_range = all(0.4 < v < 1.6 for v in vals)
        shrinking = all(abs(y - 1) < abs(x - 1) for x, y in zip(vals, vals[1:]))
        ok &= r2 >= 0.9 and in_range and shrinking
        parts.append(f"n={n}: g={gs[0]}..{gs[-1]} R2={r2:.3f} (origin {r2_0:.3f})")
        gs = [g for g in range(1, 9) if (g, n) in T and (g - 1, n + 2) in T]
        vals = [volume_ratio(T, g, "genus", n=n) for g in gs]
        a, b, r2g, _ = fit_inverse_g(gs, [abs(v - 1) for v in vals])
        shrinking = all(abs(y - 1) < abs(x - 1) for x, y in zip(vals, vals[1:]))
        ok &= r2g >= 0.9 and shrinking
        parts.append(f"genus n={n}: R2={r2g:.3f}")
    acceptance(3, ok, "; ".join(parts))
    assert ok


def test_criterion_04_sinh_bound(full_table, acceptance):
    T = full_table
    grid_points = violations = 0
    certified = grid_checked = 0
    bad = []
    for g, n in T.keys():
        if n == 0:
            continue
        r = sinh_bound_check(T, g, n, grid=np.linspace(0.0, 8.0, 9))
        violations += r.violations
        certified += r.certificate
        grid_checked += r.points_checked > 0
        grid_points += r.points_checked
        if not r.passed:
            bad.append((g, n))
    total = len([k for k in T.keys() if k[1] > 0])
    ok = violations == 0 and not bad
    acceptance(4, ok, f"{total} volumes: coefficient certificate on {certified}, explicit 9-point grid "
                      f"on {grid_checked} ({grid_points} orbit points), violations={violations}")
    assert ok


def test_criterion_05_cond_change_of_variables(acceptance):
    reports = {L: m.cond_change_of_vars_check(L) for L in (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)}
    agree = max(r.direct_vs_iterated for r in reports.values())
    ref = reports[10.0].scaled_remainder
    scaled = {L: r.scaled_remainder for L, r in reports.items() if L > 10}
    within = all(ref / 2 <= s <= 2 * ref for s in scaled.values())
    ok = agree <= 1e-6 and within
    acceptance(5, ok, f"max direct-vs-iterated {agree:.1e}; scaled remainder at 10: {ref:.4f}, "
                      + ", ".join(f"{L:g}: {s:.4f}" for L, s in scaled.items()))
    assert ok


def test_criterion_06_first_moment_vs_mc(acceptance):
    t0 = time.perf_counter()
    T = VolumeTable()
    parts, ok = [], True
    for g, L in [(4, 8.0), (5, 9.0), (6, 10.0), (6, 12.0)]:
        ex = m.E_f8_g23(g, L, "exact", T).value
        mc = m.E_f8_g23(g, L, "mc", T, samples=10 ** 7, seed=1)
        rel = abs(ex - mc.value) / ex
        good = rel <= 0.005 and abs(ex - mc.value) <= 3 * mc.error_estimate
        nx = m.E_nstar(g, L, "exact", T).value
        nm = m.E_nstar(g, L, "mc", T, samples=10 ** 7, seed=1)
        good_n = abs(nx - nm.value) <= max(0.005 * abs(nx), 3 * nm.error_estimate)
        ok &= good and good_n
        parts.append(f"({g},{L:g}) f8 {rel * 100:.2f}% [{abs(ex - mc.value) / mc.error_estimate:.1f} sigma] "
                     f"nstar {nx:g}/{nm.value:g}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    acceptance(6, ok, "; ".join(parts) + f"; {elapsed:.0f}s (nstar regions are empty at these L)")
    assert ok


def _schedule():
    gs = [10 ** k for k in range(3, 10)]
    return gs, [math.log(g) - math.log(math.log(g)) + 3 for g in gs]


def test_criterion_07_asymptotic_trends(acceptance):
    gs, Ls = _schedule()
    nstar = [m.E_nstar(g, L, "sinh_approx").value for g, L in zip(gs, Ls)]
    norm = [n * 2 * math.pi ** 2 * g / (L * math.exp(L)) for n, g, L in zip(nstar, gs, Ls)]
    ok_n = all(0.5 <= v <= 1.5 for v in norm) and all(
        abs(b - 1) <= abs(a - 1) for a, b in zip(norm, norm[1:]))
    with np.errstate(invalid="ignore", divide="ignore"):
        B = [m.E_B(g, L, "sinh_approx").value for g, L in zip(gs, Ls)]
        rb = [b / n ** 2 if n else float("nan") for b, n in zip(B, nstar)]
    ok_b = all(0.5 <= v <= 1.5 for v in rb) and all(
        abs(b - 1) <= abs(a - 1) for a, b in zip(rb, rb[1:]))
    rd = [m.bound_D(g, L).value / m.E_nstar(g, L, "asymptotic").value ** 2 for g, L in zip(gs, Ls)]
    slope = float(np.polyfit(np.log(Ls), np.log(rd), 1)[0])
    ok_d = abs(slope + 8) <= 0.5
    ok = ok_n and ok_b and ok_d
    acceptance(7, ok, f"L in [{Ls[0]:.1f}, {Ls[-1]:.1f}] but D_L needs L > 89.7: "
                      f"nstar ratio {norm[0]:g}..{norm[-1]:g} ({'ok' if ok_n else 'fail'}), "
                      f"B/nstar^2 {'ok' if ok_b else 'undefined (0/0)'}, "
                      f"bound_D/nstar^2 slope {slope:.3f} ({'ok' if ok_d else 'fail'}, asymptotic nstar)")
    assert ok


def test_criterion_08_pipeline_demo(acceptance):
    omega = m.OmegaSchedule("loglog", 1.0)
    gs = [10 ** k for k in range(4, 11)]
    lower, upper = [], []
    for g in gs:
        lo, up, rep = m.window_probability(g, omega, constants={k: 1.0 for k in m.DEFAULT_CONSTANTS})
        lower.append(lo)
        upper.append(up)
    dec = lambda xs: all(b < a for a, b in zip(xs, xs[1:]))
    ok_lo = dec(lower) and lower[-1] < 0.1
    ok_up = dec(upper) and upper[-1] < 0.1
    ok = ok_lo and ok_up
    acceptance(8, ok, "displayed-formula behaviour with all constants 1, not a probability claim: "
                      f"lower tail {lower[0]:.3g} -> {lower[-1]:.3g} ({'ok' if ok_lo else 'fail'}), "
                      f"upper tail {upper[0]:.3g} -> {upper[-1]:.3g} ({'ok' if ok_up else 'fail'})")
    assert ok


def test_criterion_09_hyperbolic_kernels(acceptance):
    f0 = hg.figure_eight_length(0, 0, 0)
    rng = np.random.Generator(np.random.Philox(key=[2024, 9]))
    x, y, z = (20.0 * (1.0 - rng.random(10 ** 5)) for _ in range(3))
    d = 0.5 * (1.0 - rng.random(10 ** 5))
    D, Rk = hg.mcshane_D(x, y, z), hg.mcshane_R(x, y, z)
    bad = {
        "positivity": int(np.sum((D <= 0) | (Rk <= 0))),
        "D increasing in x": int(np.sum(hg.mcshane_D(x + d, y, z) < D)),
        "D decreasing in y,z": int(np.sum((hg.mcshane_D(x, y + d, z) > D) | (hg.mcshane_D(x, y, z + d) > D))),
        "R decreasing in z": int(np.sum(hg.mcshane_R(x, y, z + d) > Rk)),
        "R increasing in y": int(np.sum(hg.mcshane_R(x, y + d, z) < Rk)),
        "x/D bound": int(np.sum(x / D > hg.mcshane_bound_D(x, y + z))),
        "x/R bound": int(np.sum(x / Rk > hg.mcshane_bound_R(x, y, z))),
    }
    ok = abs(f0 - 2 * math.acosh(3)) <= 1e-12 and not any(bad.values())
    acceptance(9, ok, f"|f8(0,0,0) - 2arccosh3| = {abs(f0 - 2 * math.acosh(3)):.1e}; "
                      f"violations on 1e5 points: {sum(bad.values())}")
    assert ok


def test_criterion_10_cross_module(acceptance):
    V11 = VolumeTable().volume_polynomial(1, 1)
    rels = {}
    for b in (0.5, 1.0, 2.0, 5.0):
        lhs = b * float(V11.evaluate_numeric([b]))
        rhs, _ = hg.torus_mcshane_integral(b)
        rels[b] = abs(lhs - rhs) / lhs
    ok = max(rels.values()) <= 1e-8
    acceptance(10, ok, "relative errors " + ", ".join(f"b={b:g}: {r:.1e}" for b, r in rels.items()))
    assert ok


def _capture(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = run_command(argv)
    return code, buf.getvalue().encode()


def test_criterion_11_determinism(acceptance):
    commands = [
        ["volume", "--genus", "2", "--boundaries", "2"],
        ["moment", "f8", "--genus", "5", "--length", "9", "--mode", "exact"],
        ["bound", "c04", "--genus", "6", "--length", "10", "--mode", "quadrature"],
        ["check", "cond", "--length", "15"],
        ["pipeline", "--gsteps", "4"],
        ["moment", "f8", "--genus", "5", "--length", "9", "--format", "json"],
    ]
    same = all(_capture(c) == _capture(c) for c in commands)
    mc = ["moment", "f8", "--genus", "4", "--length", "8", "--mode", "mc", "--samples", "300000",
          "--seed", "17"]
    outs = {t: _capture(mc + ["--threads", str(t)]) for t in (1, 2, 4)}
    mc_same = len(set(outs.values())) == 1 and outs[1][0] == 0
    ok = same and mc_same
    acceptance(11, ok, f"{len(commands)} deterministic commands byte-identical={same}; "
                       f"MC seed 17 identical across 1/2/4 threads={mc_same}")
    assert ok
