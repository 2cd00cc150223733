r"""
Closed-form hyperbolic geometry: figure-eight lengths, the McShane-Mirzakhani
kernels `\mathcal D` and `\mathcal R`, and the counting bounds built on them.

All functions accept numpy arrays. Exponentials are evaluated in log form so
that arguments well beyond 700 neither overflow nor lose the small quantities
(`\mathcal R` with a long third boundary, for instance) to cancellation.

EXAMPLES::

    >>> from wpsystole.hypgeom import figure_eight_length, mcshane_R
    >>> round(figure_eight_length(0, 0, 0), 12)
    3.525494348078
    >>> float(mcshane_R(2.0, 1.0, 0.0))
    2.0
"""
import math

import numpy as np

from .errors import ContractViolation, DomainError

LOG2 = math.log(2.0)
F8_MIN = 2.0 * math.acosh(3.0)


def _arr(*xs):
    return [np.asarray(x, dtype=float) for x in xs]


def _out(v):
    return v if np.ndim(v) else float(v)


def logcosh(u):
    r"""
    `\log\cosh u` without overflow.
    """
    u = np.abs(np.asarray(u, dtype=float))
    return u + np.log1p(np.exp(-2 * u)) - LOG2


def _log_arccosh_from_log(logc):
    # arccosh(C) for C >= 1 given log C
    with np.errstate(invalid="ignore"):
        inv2 = np.exp(-2 * logc)
        return logc + np.log1p(np.sqrt(np.clip(1 - inv2, 0, None)))


def _nonneg(*xs):
    for x in xs:
        if np.any(x < 0) or np.any(np.isnan(x)):
            raise DomainError("lengths must be nonnegative")


def figure_eight_length(x, y, z):
    r"""
    Length of the figure-eight geodesic winding around the boundaries of
    lengths `x` and `y` of the pants `P(x,y,z)`:
    `\cosh(L/2) = \cosh(z/2) + 2\cosh(x/2)\cosh(y/2)`.
    """
    x, y, z = _arr(x, y, z)
    _nonneg(x, y, z)
    logc = np.logaddexp(logcosh(z / 2), LOG2 + logcosh(x / 2) + logcosh(y / 2))
    return _out(2 * _log_arccosh_from_log(logc))


def f8_slack(L):
    r"""
    `2\,\mathrm{arccosh}(3\cosh(L/2))`, the largest figure-eight length with
    `z \le L` and `x + y \le L`.
    """
    L = np.asarray(L, dtype=float)
    if np.any(L < 0):
        raise DomainError("L must be nonnegative")
    return _out(2 * _log_arccosh_from_log(math.log(3.0) + logcosh(L / 2)))


def f8_slack_inverse(target):
    r"""
    The `L` with ``f8_slack(L) == target``, or ``nan`` when ``target < 2 arccosh 3``.
    """
    t = np.asarray(target, dtype=float)
    with np.errstate(invalid="ignore"):
        # cosh(L/2) = cosh(target/2) / 3
        logc = logcosh(t / 2) - math.log(3.0)
        out = np.where(logc >= -1e-14, 2 * _log_arccosh_from_log(np.maximum(logc, 0)), np.nan)
    return _out(out)


def _log_2sinh_half(x):
    # log(2 sinh(x/2)) for x > 0
    with np.errstate(divide="ignore"):
        return x / 2 + np.log(-np.expm1(-x))


def mcshane_D(x, y, z):
    r"""
    `\mathcal D(x,y,z) = 2\log\frac{e^{x/2} + e^{(y+z)/2}}{e^{-x/2} + e^{(y+z)/2}}`.

    Evaluated as `2\log(1+q)` with `q = 2\sinh(x/2)/(e^{-x/2}+e^{(y+z)/2})`,
    which is manifestly nonnegative.
    """
    x, y, z = _arr(x, y, z)
    _nonneg(x, y, z)
    s = y + z
    with np.errstate(divide="ignore"):
        logq = _log_2sinh_half(x) - np.logaddexp(-x / 2, s / 2)
    return _out(2 * np.logaddexp(0.0, logq))


def mcshane_R(x, y, z):
    r"""
    `\mathcal R(x,y,z) = x - \log\frac{\cosh(y/2)+\cosh((x+z)/2)}{\cosh(y/2)+\cosh((x-z)/2)}`.

    Evaluated as `\log(1+q)` where
    `q\,(\cosh\frac y2 + \cosh\frac{x+z}2) = (e^x-1)\cosh\frac y2 + \tfrac12 e^{-(x+z)/2}(e^{2x}-1)`.
    """
    x, y, z = _arr(x, y, z)
    _nonneg(x, y, z)
    with np.errstate(divide="ignore"):
        log_em1 = x + np.log(-np.expm1(-x))
        log_e2m1 = 2 * x + np.log(-np.expm1(-2 * x))
        t1 = log_em1 + logcosh(y / 2)
        t2 = -(x + z) / 2 - LOG2 + log_e2m1
        logn = np.logaddexp(logcosh(y / 2), logcosh((x + z) / 2))
        logq = np.logaddexp(t1, t2) - logn
    return _out(np.logaddexp(0.0, logq))


def mcshane_bound_R(x, y, z):
    r"""
    `100(1+x)(1+e^{z/2}e^{-(x+y)/2})`, an upper bound for `x/\mathcal R(x,y,z)`.
    """
    x, y, z = _arr(x, y, z)
    return _out(100 * (1 + x) * (1 + np.exp((z - x - y) / 2)))


def mcshane_bound_D(x, s):
    r"""
    `100(1+x)(1+e^{s/2}e^{-x/2})`, an upper bound for `x/\mathcal D(x,y,z)` with `s = y+z`.
    """
    x, s = _arr(x, s)
    return _out(100 * (1 + x) * (1 + np.exp((s - x) / 2)))


def _positive(*xs):
    for x in xs:
        if np.any(np.asarray(x, dtype=float) <= 0):
            raise DomainError("lengths must be positive")


def count_bound_S04(L1, L2, L3, L4, L):
    r"""
    Bound on simple closed geodesics of length at most ``L`` bounding a pair of
    pants with two boundaries of an `S_{0,4}` with boundary lengths `L_1, \dots, L_4`.
    """
    _positive(L1, L2, L3, L4, L)
    return _out(np.minimum.reduce([
        np.asarray(L1 / mcshane_R(L1, L2, L)), np.asarray(L2 / mcshane_R(L2, L1, L)),
        np.asarray(L3 / mcshane_R(L3, L4, L)), np.asarray(L4 / mcshane_R(L4, L3, L))]))


def count_bound_S12_single(L1, L2, L):
    r"""
    Bound on non-separating simple closed geodesics of length at most ``L`` in `S_{1,2}`.
    """
    _positive(L1, L2)
    if np.any(np.asarray(L) < 0):
        raise DomainError("L must be nonnegative")
    return _out(np.minimum(L1 / mcshane_R(L1, L2, L), L2 / mcshane_R(L2, L1, L)))


def count_bound_S12_pairs(L1, L2, L):
    r"""
    Bound on unordered pairs of simple closed geodesics of total length at most
    ``L`` cutting `S_{1,2}` into two pairs of pants.
    """
    _positive(L1, L2, L)
    return _out(np.minimum(L1 / mcshane_D(L1, L, 0.0), L2 / mcshane_D(L2, L, 0.0)))


def count_bound_primitive(g, L):
    r"""
    `(g-1)e^{L+7}`.
    """
    if g < 2:
        raise DomainError("needs g >= 2")
    return (g - 1) * math.exp(L + 7)


def count_bound_filling(k, eps, m, L, boundary_len, c_const=1.0):
    r"""
    `c\,(1+L)^{k-1} e^{L - \frac{1-\epsilon}{2}\ell(\partial Y)}`.

    ``c_const`` stands for the nonconstructive constant `c(k, \epsilon, m)`.
    """
    if not 0 < eps < 0.5:
        raise ContractViolation("eps must lie in (0, 1/2)")
    if m < 1 or k < 1:
        raise ContractViolation("k and m must be at least 1")
    if c_const <= 0:
        raise ContractViolation("constant must be positive")
    return c_const * (1 + L) ** (k - 1) * math.exp(L - (1 - eps) / 2 * boundary_len)


def torus_mcshane_integral(b, rel_tol=1e-12):
    r"""
    `\frac12\int_0^\infty t\,\mathcal D(b,t,t)\,dt`, truncated at `t = b + 200`.

    Returns ``(value, error_estimate)``; the error includes the tail beyond
    the cut, bounded by `4\sinh(b/2)(T+1)e^{-T}` since `\mathcal D(b,t,t) \le 4\sinh(b/2)e^{-t}`.
    """
    from .quadrature import QuadratureProblem, integrate_iterated
    T = b + 200.0
    p = QuadratureProblem(
        bounds=[lambda: (0.0, T)],
        integrand=lambda t: 0.5 * t * mcshane_D(b, t, t),
        rel_tol=rel_tol, name="torus McShane")
    rep = integrate_iterated(p, order=20, min_panels=16)
    tail = 0.5 * 4 * math.sinh(b / 2) * (T + 1) * math.exp(-T)
    return rep.value, rep.error_estimate + tail
