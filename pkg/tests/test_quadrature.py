import math

import numpy as np
import pytest
from scipy import integrate

from wpsystole.errors import ContractViolation, QuadratureError
from wpsystole.quadrature import MomentReport, QuadratureProblem, integrate_iterated, mc_integrate


def test_iterated_matches_scipy_on_a_simplex():
    f = lambda x, y, z: np.exp(0.3 * x) * np.sinh(y / 2) * np.sqrt(z)
    p = QuadratureProblem(bounds=[lambda: (0.0, 4.0), lambda x: (0.0, 4.0 - x),
                                  lambda x, y: (0.0, 4.0 - x - y)], integrand=f, rel_tol=1e-10)
    ref = integrate.tplquad(lambda z, y, x: f(x, y, z), 0, 4, 0, lambda x: 4 - x, 0,
                            lambda x, y: 4 - x - y, epsabs=0, epsrel=1e-12)[0]
    assert integrate_iterated(p).value == pytest.approx(ref, rel=1e-9)


def test_endpoint_square_root_singularity():
    # arccosh-type fibre endpoints
    p = QuadratureProblem(bounds=[lambda: (1.0, 3.0), lambda x: (0.0, np.arccosh(x))],
                          integrand=lambda x, y: np.ones_like(y), rel_tol=1e-11)
    exact = 3 * math.acosh(3) - math.sqrt(8)
    assert integrate_iterated(p, order=10, min_panels=2).value == pytest.approx(exact, rel=1e-10)


def test_empty_fibres_contribute_nothing():
    p = QuadratureProblem(bounds=[lambda: (0.0, 2.0), lambda x: (1.0, x)],
                          integrand=lambda x, y: np.ones_like(y))
    assert integrate_iterated(p, order=12, min_panels=4).value == pytest.approx(0.5, rel=1e-6)


def test_nonconvergence_raises_with_estimate():
    p = QuadratureProblem(bounds=[lambda: (0.0, 1.0)], integrand=lambda x: np.sin(1 / (x + 1e-6)),
                          rel_tol=1e-12)
    with pytest.raises(QuadratureError) as info:
        integrate_iterated(p, order=4, max_panels=4)
    assert info.value.estimate is not None


def test_contracts():
    with pytest.raises(ContractViolation):
        QuadratureProblem(rel_tol=0.1)
    with pytest.raises(ContractViolation):
        MomentReport(1.0, -1.0, "exact")
    with pytest.raises(ContractViolation):
        mc_integrate(QuadratureProblem(box=[(0, 1)], integrand=lambda x: x, samples=100))


def test_deterministic_across_runs():
    p = QuadratureProblem(bounds=[lambda: (0.0, 5.0), lambda x: (0.0, x)],
                          integrand=lambda x, y: np.cosh(x - y))
    assert integrate_iterated(p).value == integrate_iterated(p).value


def test_mc_thread_independent_and_seeded():
    p = QuadratureProblem(box=[(0, 2), (0, 3)], integrand=lambda x, y: x * y, samples=200_000,
                          rates=[0.5, 0.2], seed=11)
    a = mc_integrate(p, threads=1)
    b = mc_integrate(p, threads=4)
    assert (a.value, a.error_estimate) == (b.value, b.error_estimate)
    assert abs(a.value - 9.0) <= 4 * a.error_estimate
    p2 = QuadratureProblem(box=[(0, 2), (0, 3)], integrand=lambda x, y: x * y, samples=200_000,
                           rates=[0.5, 0.2], seed=12)
    assert mc_integrate(p2).value != a.value


def test_mc_indicator_and_empty_box():
    p = QuadratureProblem(box=[(-1, 1), (-1, 1)], integrand=lambda x, y: np.ones_like(x),
                          indicator=lambda x, y: x * x + y * y <= 1, samples=400_000, seed=3)
    r = mc_integrate(p)
    assert abs(r.value - math.pi) <= 4 * r.error_estimate
    e = mc_integrate(QuadratureProblem(box=[(1, 1)], integrand=lambda x: x, samples=10 ** 4))
    assert e.value == 0.0
