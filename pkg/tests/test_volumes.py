import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from wpsystole.errors import BudgetExceeded, ContractViolation, ConventionMismatch, DomainError
from wpsystole.exact_algebra import PiGradedPoly, Rational
from wpsystole.hypgeom import mcshane_D, mcshane_R
from wpsystole.persistence import load_save_table, read_table_entries, write_table
from wpsystole.volumes import (VolumeTable, W_r, check_string_dilaton, kernel_H, kernel_moment_F,
                               sinh_bound_check, sum_product_bound, volume_ratio)

PI = math.pi


def R(a, b=1):
    return Rational(a, b)


def test_small_volumes_exact(table):
    assert table.volume_polynomial(0, 3) == PiGradedPoly(3, 0, {(0, 0, 0): 1})
    v04 = {(0, 0, 0, 0): 2}
    v04.update({tuple(int(i == k) for i in range(4)): R(1, 2) for k in range(4)})
    assert table.volume_polynomial(0, 4) == PiGradedPoly(4, 2, v04)
    v12 = table.volume_polynomial(1, 2).substitute_square(1, 0)
    assert v12 == PiGradedPoly(1, 4, {(2,): R(1, 192), (1,): R(1, 12), (0,): R(1, 4)})
    v05 = table.volume_polynomial(0, 5)
    for k in (4, 3, 2, 1):
        v05 = v05.substitute_square(k, 0)
    assert v05 == PiGradedPoly(1, 4, {(2,): R(1, 8), (1,): 3, (0,): 10})


@pytest.mark.parametrize("g,n,coefficient,pi_power", [
    (1, 1, R(1, 12), 2), (1, 2, R(1, 4), 4), (0, 5, 10, 4), (0, 6, R(244, 3), 6),
    (1, 3, R(14, 9), 6), (2, 1, R(29, 192), 8), (2, 0, R(43, 2160), 6),
    (3, 0, R(176557, 1209600), 12),
])
def test_tabulated_values_at_zero(table, g, n, coefficient, pi_power):
    v = table.value_at_zero(g, n)
    assert v.degree == pi_power
    assert v.coefficient(()) == coefficient


# independent route: numerical integration of the McShane-Mirzakhani recursion
CUT = 150.0


def _r_term(L1, Lj, V):
    return integrate.quad(lambda x: x * mcshane_R(L1, Lj, x) * V(x), 0, CUT,
                          limit=400, epsabs=0, epsrel=1e-12)[0]


def _d_term(L1, V):
    return integrate.dblquad(lambda y, x: x * y * mcshane_D(L1, x, y) * V(x, y), 0, CUT, 0, CUT,
                             epsabs=1e-13, epsrel=1e-11)[0]


def test_recursion_oracle_0_4(table):
    L = [1.3, 0.7, 2.1, 0.4]
    lhs = L[0] * float(table.volume_polynomial(0, 4).evaluate_numeric(L))
    rhs = sum(_r_term(L[0], L[j], lambda x: 1.0) for j in (1, 2, 3))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_recursion_oracle_1_2(table):
    L1, L2 = 1.3, 0.7
    v11 = lambda x: (x * x + 4 * PI * PI) / 48
    lhs = L1 * float(table.volume_polynomial(1, 2).evaluate_numeric([L1, L2]))
    rhs = 0.5 * _d_term(L1, lambda x, y: 1.0) + _r_term(L1, L2, v11)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_recursion_oracle_0_5(table):
    L = [0.9, 0.3, 1.1, 0.6, 1.7]
    V04 = table.volume_polynomial(0, 4)
    lhs = L[0] * float(table.volume_polynomial(0, 5).evaluate_numeric(L))
    # ordered splittings of the other four boundaries into two pairs: 6, halved
    rhs = 0.5 * 6 * _d_term(L[0], lambda x, y: 1.0)
    for j in range(1, 5):
        rest = [L[k] for k in range(1, 5) if k != j]
        rhs += _r_term(L[0], L[j], lambda x: float(V04.evaluate_numeric([x] + rest)))
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_kernel_moments_against_quadrature():
    for k in range(4):
        F = kernel_moment_F(k)
        for t in (0.0, 1.5, 4.0):
            num = integrate.quad(lambda x: x ** (2 * k + 1) * kernel_H(x, t), 0, 200, limit=400)[0]
            assert float(F.evaluate_numeric([t], 80)) == pytest.approx(num, rel=1e-10)


def test_string_dilaton_exact(table):
    for r in range(1, 9):
        for g in range(r // 2 + 2):
            n = r - 2 * g + 2
            if n >= 1 and (2 * g - 2 + n - 1 >= 1 or (g, n - 1) == (1, 0)):
                rep = check_string_dilaton(table, g, n - 1)
                assert rep.passed, (g, n - 1)


def test_string_outside_domain(table):
    with pytest.raises(DomainError):
        check_string_dilaton(table, 0, 2)


def test_string_methods_agree(table):
    for g, n in [(0, 4), (1, 2), (2, 1)]:
        assert check_string_dilaton(table, g, n, "poly").passed
        assert check_string_dilaton(table, g, n, "compressed").passed


def test_symmetry_all_permutations(table):
    for g, n in [(0, 4), (1, 3), (1, 4), (2, 2), (2, 3)]:
        terms = table.volume_polynomial(g, n).terms
        for p in itertools.permutations(range(n)):
            assert all(terms[tuple(a[i] for i in p)] == c for a, c in terms.items())


def test_direct_expansion_matches_compressed(table):
    for g, n in [(1, 3), (0, 6), (2, 2)]:
        assert table.volume_polynomial(g, n, direct=True) == table.volume_polynomial(g, n)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 6), min_size=5, max_size=5), st.permutations(range(5)))
def test_numeric_symmetry_random(table, xs, perm):
    V = table.volume_polynomial(1, 5).numeric_evaluator()
    a = float(V(*xs))
    b = float(V(*[xs[i] for i in perm]))
    assert a == pytest.approx(b, rel=1e-12)


def test_positivity_and_grading(table):
    for g, n in [(0, 7), (1, 5), (2, 3), (3, 1)]:
        V = table.volume_polynomial(g, n)
        for alpha, c in V.terms.items():
            assert c > 0
            assert V.pi_power(alpha) == 6 * g - 6 + 2 * n - 2 * sum(alpha)


def test_genus_inequality(table):
    for g in range(1, 5):
        for n in range(0, 3):
            if 2 * g - 2 + n + 2 <= 10:
                lhs = table.numeric_value(g - 1, n + 4)
                rhs = table.numeric_value(g, n + 2)
                assert lhs <= rhs


def test_budget_and_domain_errors():
    t = VolumeTable(budget=4)
    with pytest.raises(BudgetExceeded):
        t.compressed(2, 3)
    with pytest.raises(DomainError):
        t.compressed(0, 2)
    with pytest.raises(ContractViolation):
        VolumeTable(convention="other")


def test_closed_volume_ceiling():
    # V_3 needs V_{3,1}, one step past a budget of 4
    t = VolumeTable(budget=4)
    assert t.closed_volume(3).coefficient(()) == R(176557, 1209600)
    with pytest.raises(BudgetExceeded):
        VolumeTable(budget=4).compressed(3, 1)
    with pytest.raises(BudgetExceeded):
        VolumeTable(budget=4).closed_volume(4)


def test_full_convention_breaks_symmetry():
    t = VolumeTable(convention="full")
    with pytest.raises(ContractViolation):
        t.compressed(1, 2)
    loose = VolumeTable(convention="full", verify_symmetry=False)
    assert not check_string_dilaton(loose, 1, 1).passed


def test_sinh_bound(table):
    for g, n in [(1, 1), (0, 5), (1, 3), (2, 2), (3, 1)]:
        r = sinh_bound_check(table, g, n)
        assert r.certificate and r.violations == 0 and r.passed
        assert r.points_checked > 0 and r.max_ratio <= 1.0


def test_volume_ratios(table):
    for n in (0, 1, 2):
        for g in (2, 3, 4):
            r = 4 * PI ** 2 * volume_ratio(table, g, "dilaton", n=n)
            assert 0.4 < r < 1.6
    assert volume_ratio(table, 4, "genus", n=0) == pytest.approx(0.913, abs=1e-3)
    assert volume_ratio(table, 2, "g-2,3") == pytest.approx(
        float(table.numeric_value(0, 3)) / float(table.numeric_value(2, 0)))
    with pytest.raises(ContractViolation):
        volume_ratio(table, 3, "bogus")


def test_sum_product_and_W(table):
    total, w, ratio = sum_product_bound(table, 2, (4,))
    assert total == table.value_at_zero(0, 4)
    assert w == table.value_at_zero(2, 0)
    _, _, ratio = sum_product_bound(table, 4, (2, 2))
    assert 0 < ratio < 1
    assert W_r(table, 3) == table.value_at_zero(2, 1)


def test_persistence_round_trip(tmp_path):
    path = tmp_path / "vol.txt"
    t = load_save_table(str(path))
    t.compressed(1, 2)
    t.compressed(2, 0)
    u = load_save_table(str(path))
    assert (1, 2) in u and (2, 0) in u
    assert u.volume_polynomial(1, 2).terms == t.volume_polynomial(1, 2).terms
    with pytest.raises(ConventionMismatch):
        load_save_table(str(path), convention="full")


def test_empty_path_gives_empty_table(tmp_path):
    assert load_save_table("").keys() == []
    assert read_table_entries(str(tmp_path / "missing"), "half") == {}
    (tmp_path / "empty").write_text("")
    assert read_table_entries(str(tmp_path / "empty"), "half") == {}


def test_corrupt_entries_dropped(tmp_path):
    path = tmp_path / "vol.txt"
    t = VolumeTable()
    t.compressed(1, 2)
    write_table(t, str(path))
    lines = path.read_text().splitlines()
    target = next(i for i, line in enumerate(lines) if line.startswith("1 2 "))
    lines[target] = lines[target].replace("1/", "7/", 1)
    path.write_text("\n".join(lines) + "\n")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        u = VolumeTable(path=str(path))
    assert (1, 2) not in u and (1, 1) in u
    assert any("corrupt" in str(w.message) for w in caught)
    # the dropped entry is recomputed, never read back
    assert u.volume_polynomial(1, 2) == t.volume_polynomial(1, 2)
