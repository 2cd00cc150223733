r"""
Expectations and bounds for figure-eight and pants-triple counts.

Every public routine returns a :class:`~wpsystole.quadrature.MomentReport`
recording the mode it ran in and the constants it used. The modes are

- ``exact`` -- exact volume polynomials from a :class:`VolumeTable`
- ``sinh_approx`` -- `V_{g,n}(x)/V_{g,n} \approx \prod \sinh(x_i/2)/(x_i/2)` with
  leading-order volume ratios
- ``asymptotic`` -- closed-form leading terms
- ``envelope`` -- displayed closed-form upper envelopes, scaled by the
  configured constants
- ``quadrature`` -- honest quadrature of the explicit integrals behind an
  envelope
- ``mc`` -- Monte Carlo oracle over the indicator form of a region
- ``auto`` -- ``exact`` when the table can supply the volumes, ``sinh_approx``
  otherwise

Regions of the form `D_L = \{x \le L,\ y+z \le L,\ x,y,z \ge 10\log L\}` are
empty for `L` below roughly 89.7 (where `L = 20\log L`), so the restricted counts vanish at moderate
`L`; routines return zero with a note in that case.
"""
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import BudgetExceeded, ContractViolation, DomainError, MissingVolume
from .hypgeom import F8_MIN, f8_slack_inverse, figure_eight_length
from .quadrature import MomentReport, QuadratureProblem, integrate_iterated, mc_integrate
from .volumes import VolumeTable, is_stable

PI2 = math.pi ** 2
EXACT_CEILING = 8
DEFAULT_CONSTANTS = {
    "c_geq3": 1.0, "c12": 1.0, "c04": 1.0, "cD": 1.0, "cB": 1.0,
    "c_small1": 1.0, "c_small2": 1.0, "c_small3": 1.0, "c_filling": 1.0,
}

_default_table = None


def default_table():
    """Shared lazily created volume table."""
    global _default_table
    if _default_table is None:
        _default_table = VolumeTable()
    return _default_table


def _constants(constants):
    out = dict(DEFAULT_CONSTANTS)
    if constants:
        for k, v in constants.items():
            if not v > 0:
                raise ContractViolation(f"constant {k} must be positive")
            out[k] = float(v)
    return out


def _check_mode(mode, allowed):
    if mode not in allowed:
        raise ContractViolation(f"mode must be one of {sorted(allowed)}, got {mode!r}")


def _resolve_mode(mode, g, table, needed):
    # "auto" picks exact when every needed volume is available
    if mode != "auto":
        return mode, []
    if g > EXACT_CEILING:
        return "sinh_approx", [f"g = {g} above exact ceiling {EXACT_CEILING}; sinh_approx used"]
    try:
        for gn in needed:
            table.compressed(*gn)
    except (BudgetExceeded, MissingVolume, DomainError) as exc:
        return "sinh_approx", [f"exact volumes unavailable ({exc}); sinh_approx used"]
    return "exact", []


def _volume(table, g, n):
    try:
        return table.compressed(g, n)
    except (BudgetExceeded, DomainError) as exc:
        raise MissingVolume(str(exc)) from exc


def _closed_numeric(table, g):
    _volume(table, g, 0)
    return table.numeric_value(g, 0, 120)


def _ratio_evaluator(table, g, n, Vg):
    r"""Vectorized `V_{g,n}(x)/V_g` (``Vg`` an mpmath number)."""
    _volume(table, g, n)
    return table.volume_polynomial(g, n).numeric_evaluator(Vg)


def _report(value, err, mode, g, L, constants=None, notes=(), **components):
    return MomentReport(float(value), float(abs(err)), mode, dict(constants or {}), g, L,
                        None, list(notes), components)


# regions

def _cond_bounds(L):
    # (t, y, x) with t the figure-eight length
    def b0():
        return F8_MIN, L

    def b1(t):
        c = (np.cosh(t / 2) - 1) / 2
        return 0.0, 2 * np.arccosh(np.maximum(c, 1.0))

    def b2(t, y):
        c = (np.cosh(t / 2) - 1) / (2 * np.cosh(y / 2))
        return 0.0, 2 * np.arccosh(np.maximum(c, 1.0))
    return [b0, b1, b2]


def _z_of(t, y, x):
    a = np.cosh(t / 2) - 2 * np.cosh(x / 2) * np.cosh(y / 2)
    return 2 * np.arccosh(np.maximum(a, 1.0))


def _z_over_sinh(z):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(z > 1e-6, z / np.sinh(np.where(z > 1e-6, z, 1.0) / 2), 2.0 - z * z / 12)


def _direct_bounds(L):
    # (x, y, z) over {figure_eight_length <= L}, z innermost
    C = math.cosh(L / 2)

    def b0():
        return 0.0, 2 * math.acosh(max((C - 1) / 2, 1.0))

    def b1(x):
        c = (C - 1) / (2 * np.cosh(x / 2))
        return 0.0, 2 * np.arccosh(np.maximum(c, 1.0))

    def b2(x, y):
        c = C - 2 * np.cosh(x / 2) * np.cosh(y / 2)
        return 0.0, 2 * np.arccosh(np.maximum(c, 1.0))
    return [b0, b1, b2]


def _f8_box(L):
    C = math.cosh(L / 2)
    X = 2 * math.acosh(max((C - 1) / 2, 1.0))
    Z = 2 * math.acosh(max(C - 2, 1.0))
    return [(0.0, X), (0.0, X), (0.0, Z)]


def dl_cut(L):
    return 10 * math.log(L)


def dl_is_empty(L):
    c = dl_cut(L)
    return L <= c or L - c <= c or L - 2 * c <= 0


def _dl_bounds(L):
    # (x, z, y) ordering: x in [c, L], z in [c, L - c], y in [c, L - z]
    c = dl_cut(L)
    return [lambda: (c, L), lambda x: (c, L - c), lambda x, z: (c, L - z)]


# figure-eight expectations

def E_f8_main_closed(g, L):
    r"""
    `\frac{1}{8\pi^2 g}(L - 3 - 4\log 2)e^L`.

    >>> abs(E_f8_main_closed(10, 3 + 4 * math.log(2))) < 1e-12
    True
    """
    if g <= 2:
        raise DomainError("needs g > 2")
    if L < F8_MIN:
        raise DomainError("needs L >= 2 arccosh 3")
    return (L - 3 - 4 * math.log(2)) * math.exp(L) / (8 * PI2 * g)


def cond_sinh_integral(L, rel_tol=1e-10):
    r"""
    `\tfrac12\int_{\{L(x,y,z)\le L\}} \sinh\frac x2 \sinh\frac y2 \sinh\frac z2`
    computed in the `(t, y, x)` coordinates where `t` is the figure-eight length.
    """
    if L <= F8_MIN:
        return MomentReport(0.0, 0.0, "quadrature", notes=["empty region"])
    p = QuadratureProblem(
        bounds=_cond_bounds(L),
        integrand=lambda t, y, x: 0.5 * np.sinh(x / 2) * np.sinh(y / 2) * np.sinh(t / 2),
        rel_tol=rel_tol, name="Cond")
    return integrate_iterated(p, order=10, min_panels=2)


def direct_sinh_integral(L, rel_tol=1e-10):
    r"""
    The same integral as :func:`cond_sinh_integral` in the original `(x, y, z)` coordinates.
    """
    if L <= F8_MIN:
        return MomentReport(0.0, 0.0, "quadrature", notes=["empty region"])
    p = QuadratureProblem(
        bounds=_direct_bounds(L),
        integrand=lambda x, y, z: 0.5 * np.sinh(x / 2) * np.sinh(y / 2) * np.sinh(z / 2),
        rel_tol=rel_tol, name="direct f8 region")
    return integrate_iterated(p, order=10, min_panels=2)


@dataclass
class CondCheckReport:
    L: float
    direct: float
    iterated: float
    closed: float
    direct_error: float
    iterated_error: float
    notes: list = field(default_factory=list)

    @property
    def direct_vs_iterated(self):
        if self.iterated == 0:
            return abs(self.direct)
        return abs(self.direct - self.iterated) / abs(self.iterated)

    @property
    def scaled_remainder(self):
        r"""`|iterated - closed| e^{L/2} / (L \cdot closed)`."""
        if self.closed == 0:
            return float("nan")
        return abs(self.iterated - self.closed) * math.exp(self.L / 2) / (self.L * abs(self.closed))

    @property
    def passed(self):
        return self.direct_vs_iterated <= 1e-6


def cond_change_of_vars_check(L, rel_tol=1e-10):
    r"""
    Two independent quadratures of the figure-eight sinh integral and its
    closed form `(L - 3 - 4\log 2)e^L/8`.

    >>> r = cond_change_of_vars_check(10.0)
    >>> r.passed
    True
    """
    if not F8_MIN - 1e-12 <= L <= 60:
        raise DomainError("L must lie in [2 arccosh 3, 60]")
    d = direct_sinh_integral(L, rel_tol)
    i = cond_sinh_integral(L, rel_tol)
    closed = (L - 3 - 4 * math.log(2)) * math.exp(L) / 8
    return CondCheckReport(L, d.value, i.value, closed, d.error_estimate, i.error_estimate)


def E_f8_g23(g, L, mode="auto", table=None, rel_tol=1e-9, samples=10 ** 6, seed=0, threads=1):
    r"""
    Expected number of figure-eight geodesics of length at most `L` filling a
    pair of pants whose complement is connected of type `(g-2, 3)`:

    `\tfrac12 \int 1_{\{L(x,y,z)\le L\}} V_{g-2,3}(x,y,z)/V_g \cdot xyz`.

    ``exact`` integrates over the `(t, y, x)` coordinates with Jacobian
    `\sinh(t/2)/\sinh(z/2)`; ``mc`` samples the indicator form.
    """
    _check_mode(mode, {"auto", "exact", "sinh_approx", "asymptotic", "mc"})
    if g < 2:
        raise DomainError("needs g >= 2")
    table = table or default_table()
    mode, notes = _resolve_mode(mode, g, table, [(g - 2, 3), (g, 0)])
    if L < F8_MIN:
        return _report(0.0, 0.0, mode, g, L, notes=notes + ["L below 2 arccosh 3"])
    if mode == "asymptotic":
        return _report(E_f8_main_closed(g, L), 0.0, mode, g, L, notes=notes)
    if mode == "sinh_approx":
        r = cond_sinh_integral(L, rel_tol)
        return _report(r.value / (PI2 * g), r.error_estimate / (PI2 * g), mode, g, L,
                       {"V_{g-2,3}/V_g": 1 / (8 * PI2 * g)}, notes)
    Vg = _closed_numeric(table, g)
    V = _ratio_evaluator(table, g - 2, 3, Vg)
    if mode == "exact":
        def f(t, y, x):
            z = _z_of(t, y, x)
            return 0.5 * V(x, y, z) * x * y * _z_over_sinh(z) * np.sinh(t / 2)
        p = QuadratureProblem(bounds=_cond_bounds(L), integrand=f, rel_tol=rel_tol, name="E_f8 exact")
        r = integrate_iterated(p, order=10, min_panels=2)
        return _report(r.value, r.error_estimate, mode, g, L, notes=notes)
    p = QuadratureProblem(
        box=_f8_box(L), integrand=lambda x, y, z: 0.5 * V(x, y, z) * x * y * z,
        indicator=lambda x, y, z: figure_eight_length(x, y, z) <= L,
        rates=[0.3, 0.3, 0.3], seed=seed, samples=samples)
    r = mc_integrate(p, threads=threads)
    return _report(r.value, r.error_estimate, "mc", g, L, notes=notes, samples=samples, seed=seed)


def _simplex_bounds(total, dims):
    # x_1 + ... + x_dims <= total, all >= 0
    bounds = [lambda: (0.0, total)]
    for k in range(1, dims):
        bounds.append(lambda *outer: (0.0, total - sum(outer)))
    return bounds


def _genus_splits(total, parts, ordered=True):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _genus_splits(total - first, parts - 1, ordered):
            if ordered or first >= rest[0]:
                yield (first,) + rest


def E_f8_small_terms(g, L, mode="auto", table=None, constants=None, rel_tol=1e-9,
                     samples=10 ** 6, seed=0):
    r"""
    Upper bounds for the figure-eight expectations whose pants complement is
    disconnected or glues two boundaries:

    - family 1: `3\int_{[0,L]^2} V_{g-1,1}(z) xz/V_g`
    - family 2: `3\sum_{g_1+g_2=g-1} \int_{x+y+z\le 2L} V_{g_1,1}(x)V_{g_2,2}(y,z) xyz/V_g`
    - family 3: `3\sum_{g_1\ge g_2\ge g_3} \int_{x+y+z\le 2L} \prod V_{g_i,1} \cdot xyz/V_g`

    The integration-formula constants of these multicurves are taken to be 1,
    so exact values are upper bounds. ``envelope`` returns
    `L^2e^{L/2}/g`, `L^2e^L/g^2`, `L^2e^L/g^3` times ``c_small1..3``.
    """
    _check_mode(mode, {"auto", "exact", "envelope", "mc"})
    consts = _constants(constants)
    table = table or default_table()
    if mode == "auto":
        mode = "exact" if g <= EXACT_CEILING else "envelope"
    if g < 3:
        raise DomainError("needs g >= 3")
    used = {"C_Gamma": 1.0}
    if L < F8_MIN:
        return _report(0.0, 0.0, mode, g, L, used, ["L below 2 arccosh 3"],
                       family1=0.0, family2=0.0, family3=0.0)
    if mode == "envelope":
        f1 = consts["c_small1"] * L * L * math.exp(L / 2) / g
        f2 = consts["c_small2"] * L * L * math.exp(L) / g ** 2
        f3 = consts["c_small3"] * L * L * math.exp(L) / g ** 3
        used = {k: consts[k] for k in ("c_small1", "c_small2", "c_small3")}
        return _report(f1 + f2 + f3, 0.0, mode, g, L, used, family1=f1, family2=f2, family3=f3)
    Vg = _closed_numeric(table, g)
    fams = {}
    # family 1
    V1 = _ratio_evaluator(table, g - 1, 1, Vg)
    fams["family1"] = [(lambda x, z: 3 * V1(z) * x * z, [(0.0, L), (0.0, L)], None)]
    # family 2
    fam2 = []
    for g1, g2 in _genus_splits(g - 1, 2):
        A = _ratio_evaluator(table, g1, 1, 1)
        B = _ratio_evaluator(table, g2, 2, Vg)
        fam2.append((lambda x, y, z, A=A, B=B: 3 * A(x) * B(y, z) * x * y * z, None, 2 * L))
    fams["family2"] = fam2
    fam3 = []
    for g1, g2, g3 in _genus_splits(g, 3, ordered=False):
        A = _ratio_evaluator(table, g1, 1, 1)
        B = _ratio_evaluator(table, g2, 1, 1)
        C = _ratio_evaluator(table, g3, 1, Vg)
        fam3.append((lambda x, y, z, A=A, B=B, C=C: 3 * A(x) * B(y) * C(z) * x * y * z, None, 2 * L))
    fams["family3"] = fam3
    values, errors = {}, {}
    for name, terms in fams.items():
        v = e = 0.0
        for f, box, simplex in terms:
            if mode == "exact":
                if box is not None:
                    bounds = [lambda b=box[0]: b] + [lambda *o, b=b: b for b in box[1:]]
                else:
                    bounds = _simplex_bounds(simplex, 3)
                r = integrate_iterated(QuadratureProblem(bounds=bounds, integrand=f, rel_tol=rel_tol),
                                       order=12)
            else:
                if box is not None:
                    p = QuadratureProblem(box=box, integrand=f, seed=seed, samples=samples)
                else:
                    p = QuadratureProblem(box=[(0.0, simplex)] * 3, integrand=f,
                                          indicator=lambda x, y, z, s=simplex: x + y + z <= s,
                                          seed=seed, samples=samples)
                r = mc_integrate(p)
            v += r.value
            e = math.hypot(e, r.error_estimate)
        values[name], errors[name] = v, e
    total = sum(values.values())
    err = math.sqrt(sum(x * x for x in errors.values()))
    notes = ["upper bounds: integration-formula constants taken as 1"]
    return _report(total, err, mode, g, L, used, notes, **values,
                   **{k + "_err": v for k, v in errors.items()})


def E_f8_total(g, L, table=None, constants=None):
    r"""
    The lower-tail figure-eight expectation: sinh-mode main family plus the
    small-term envelopes. Zero below `2\,\mathrm{arccosh}\,3`.
    """
    main = E_f8_g23(g, L, "sinh_approx", table)
    small = E_f8_small_terms(g, L, "envelope", table, constants)
    return _report(main.value + small.value, main.error_estimate, "sinh_approx+envelope", g, L,
                   small.constants_used, main.notes, main=main.value, small=small.value)


# pants-triple counts on D_L

def dl_sinh_integral(L, rel_tol=1e-10):
    r"""`\int_{D_L} \sinh\frac x2\sinh\frac y2\sinh\frac z2`."""
    if dl_is_empty(L):
        return MomentReport(0.0, 0.0, "quadrature", notes=["D_L is empty"])
    p = QuadratureProblem(bounds=_dl_bounds(L),
                          integrand=lambda x, z, y: np.sinh(x / 2) * np.sinh(y / 2) * np.sinh(z / 2),
                          rel_tol=rel_tol, name="D_L")
    return integrate_iterated(p, order=12)


def E_nstar(g, L, mode="auto", table=None, rel_tol=1e-9, samples=10 ** 6, seed=0):
    r"""
    `\frac1{V_g}\int_{D_L} V_{0,3}V_{g-2,3}(x,y,z)\,xyz`; ``sinh_approx`` uses
    `\frac1{\pi^2 g}\int_{D_L}\sinh\frac x2\sinh\frac y2\sinh\frac z2`,
    ``asymptotic`` returns `Le^L/(2\pi^2 g)`.
    """
    _check_mode(mode, {"auto", "exact", "sinh_approx", "asymptotic", "mc"})
    if L <= 1:
        raise DomainError("needs L > 1")
    if g < 2:
        raise DomainError("needs g >= 2")
    table = table or default_table()
    mode, notes = _resolve_mode(mode, g, table, [(g - 2, 3), (g, 0)])
    if mode == "asymptotic":
        return _report(L * math.exp(L) / (2 * PI2 * g), 0.0, mode, g, L, notes=notes)
    if dl_is_empty(L):
        return _report(0.0, 0.0, mode, g, L, notes=notes + ["D_L is empty (10 log L too large)"])
    if mode == "sinh_approx":
        r = dl_sinh_integral(L, rel_tol)
        return _report(r.value / (PI2 * g), r.error_estimate / (PI2 * g), mode, g, L,
                       {"V_{g-2,3}/V_g": 1 / (8 * PI2 * g)}, notes)
    Vg = _closed_numeric(table, g)
    V = _ratio_evaluator(table, g - 2, 3, Vg)
    if mode == "exact":
        p = QuadratureProblem(bounds=_dl_bounds(L), integrand=lambda x, z, y: V(x, y, z) * x * y * z,
                              rel_tol=rel_tol, name="E_nstar exact")
        r = integrate_iterated(p, order=12)
        return _report(r.value, r.error_estimate, mode, g, L, notes=notes)
    c = dl_cut(L)
    p = QuadratureProblem(box=[(c, L), (c, L - c), (c, L - c)],
                          integrand=lambda x, y, z: V(x, y, z) * x * y * z,
                          indicator=lambda x, y, z: y + z <= L, seed=seed, samples=samples)
    r = mc_integrate(p)
    return _report(r.value, r.error_estimate, "mc", g, L, notes=notes, samples=samples, seed=seed)


def _dl_moment(L, a, b, c, prec=400):
    r"""
    `\int_{D_L} x^{2a+1}y^{2b+1}z^{2c+1}` in high precision (``x`` the free coordinate).
    """
    with mpmath.workprec(prec):
        L = mpmath.mpf(L)
        k = 10 * mpmath.log(L)
        p, q, r = 2 * a + 1, 2 * b + 1, 2 * c + 1
        mx = (L ** (p + 1) - k ** (p + 1)) / (p + 1)
        # int_k^{L-k} z^r ((L - z)^{q+1} - k^{q+1}) / (q + 1) dz
        lo, hi = k, L - k
        s = -k ** (q + 1) * (hi ** (r + 1) - lo ** (r + 1)) / (r + 1)
        for j in range(q + 2):
            coef = mpmath.binomial(q + 1, j) * L ** (q + 1 - j) * (-1) ** j
            s += coef * (hi ** (r + j + 1) - lo ** (r + j + 1)) / (r + j + 1)
        return mx * s / (q + 1)


def E_B(g, L, mode="auto", table=None, rel_tol=1e-9):
    r"""
    `\frac1{V_g}\int_{D_L\times D_L} V_{g-4,6}(x_1,\dots,x_6)\prod x_i`.

    ``exact`` expands `V_{g-4,6}` and uses the exact `D_L` moments, so the
    joint polynomial is kept; ``sinh_approx`` returns
    `\frac{1}{64\pi^4 g^2}\left(8\int_{D_L}\sinh\frac x2\sinh\frac y2\sinh\frac z2\right)^2`;
    ``asymptotic`` returns `L^2e^{2L}/(4\pi^4g^2)`.
    """
    _check_mode(mode, {"auto", "exact", "sinh_approx", "asymptotic"})
    if L <= 1:
        raise DomainError("needs L > 1")
    table = table or default_table()
    if mode in ("exact", "auto") and g < 4:
        raise DomainError("exact mode needs g >= 4")
    mode, notes = _resolve_mode(mode, g, table, [(g - 4, 6), (g, 0)])
    if mode == "asymptotic":
        return _report(L * L * math.exp(2 * L) / (4 * PI2 * PI2 * g * g), 0.0, mode, g, L, notes=notes)
    if dl_is_empty(L):
        return _report(0.0, 0.0, mode, g, L, notes=notes + ["D_L is empty (10 log L too large)"])
    if mode == "sinh_approx":
        J = dl_sinh_integral(L, rel_tol)
        ratio = 1 / (64 * PI2 * PI2 * g * g)
        return _report(ratio * (8 * J.value) ** 2, ratio * 128 * J.value * J.error_estimate,
                       mode, g, L, {"V_{g-4,6}/V_g": ratio}, notes)
    sym = _volume(table, g - 4, 6)
    V = table.volume_polynomial(g - 4, 6)
    cache = {}
    with mpmath.workprec(400):
        total = mpmath.mpf(0)
        for alpha, coeff in V.terms.items():
            m = []
            for tri in (alpha[:3], alpha[3:]):
                if tri not in cache:
                    cache[tri] = _dl_moment(L, *tri)
                m.append(cache[tri])
            total += (mpmath.mpf(coeff.numerator) / coeff.denominator
                      * mpmath.pi ** V.pi_power(alpha) * m[0] * m[1])
        value = total / table.numeric_value(g, 0, 400)
    del sym
    return _report(float(value), 0.0, mode, g, L, notes=notes)


def bound_A(g, L):
    r"""`6\,\mathbb E[N]` with the asymptotic `\mathbb E[N]`."""
    return 6 * E_nstar(g, L, "asymptotic").value


# volume-ratio factors for the C and D bounds

def _sum_products(table, signature_sets):
    total = mpmath.mpf(0)
    for sig in signature_sets:
        term = mpmath.mpf(1)
        for gi, ni in sig:
            term *= table.numeric_value(gi, ni, 120)
        total += term
    return total


def ratio_s12(g, table=None, mode="exact"):
    r"""
    `(V_{g-2,2} + \sum_{g_1+g_2=g-1} V_{g_1,1}V_{g_2,1})/V_g` at zero lengths,
    or the surrogate `1/g^2`.
    """
    if mode == "surrogate":
        return 1 / g ** 2
    table = table or default_table()
    sigs = []
    if is_stable(g - 2, 2):
        sigs.append([(g - 2, 2)])
    sigs += [[(a, 1), (b, 1)] for a, b in _genus_splits(g - 1, 2)]
    try:
        return float(_sum_products(table, sigs) / _closed_numeric(table, g))
    except (BudgetExceeded, DomainError) as exc:
        raise MissingVolume(str(exc)) from exc


def ratio_s04(g, table=None, mode="exact"):
    r"""
    `V^\Sigma/V_g`: the five complement types of an embedded `S_{0,4}`, summed
    over ordered genus tuples, or the surrogate `1/g^2`.
    """
    if mode == "surrogate":
        return 1 / g ** 2
    table = table or default_table()
    sigs = []
    if g >= 3 and is_stable(g - 3, 4):
        sigs.append([(g - 3, 4)])
    sigs += [[(a, 1), (b, 3)] for a in range(1, g - 1) for b in [g - 2 - a] if b >= 0]
    sigs += [[(a, 1), (b, 1), (c, 2)] for a, b, c in _genus_splits(g - 1, 3)]
    sigs += [[(a, 1), (b, 1), (c, 1), (d, 1)] for a, b, c, d in _genus_splits(g, 4)]
    sigs += [[(a, 2), (b, 2)] for a, b in _genus_splits(g - 2, 2)]
    try:
        return float(_sum_products(table, sigs) / _closed_numeric(table, g))
    except (BudgetExceeded, DomainError) as exc:
        raise MissingVolume(str(exc)) from exc


def _ratio_mode(g, table, mode):
    if mode == "exact" or (mode == "auto" and g <= EXACT_CEILING):
        return "exact"
    return "surrogate"


def _box(lo_hi):
    return [lambda b=lo_hi[0]: b] + [lambda *o, b=b: b for b in lo_hi[1:]]


def _quad(bounds, f, rel_tol, name):
    return integrate_iterated(QuadratureProblem(bounds=bounds, integrand=f, rel_tol=rel_tol,
                                                name=name), order=8, max_panels=32)


def _e(u):
    return np.exp(u)


def s12_integrals(L, rel_tol=1e-6):
    r"""
    The three displayed `S_{1,2}` integrals (without volume ratio):
    `[0,L]^3` with `[(1+x)(1+e^{(L-x-y)/2}) + (1+x)(1+e^{(2L-x)/2})](1+z^2)\sinh\frac x2\sinh\frac y2\,z`,
    `[0,L]^4` and the ``cond`` region with `(1+y)(1+e^{(2L-y)/2})\sinh\frac x2\sinh\frac y2\,zw`.
    """
    sh = lambda u: np.sinh(u / 2)
    i1 = _quad(_box([(0.0, L)] * 3),
               lambda x, y, z: ((1 + x) * (1 + _e((L - x - y) / 2)) + (1 + x) * (1 + _e((2 * L - x) / 2)))
               * (1 + z * z) * sh(x) * sh(y) * z, rel_tol, "I121")
    # the z, w factors integrate to (L^2/2)^2 on [0, L]^2
    zw = (L * L / 2) ** 2
    f2 = lambda x, y: (1 + y) * (1 + _e((2 * L - y) / 2)) * sh(x) * sh(y)
    i2 = _quad(_box([(0.0, L)] * 2), f2, rel_tol, "I122")
    c = dl_cut(L)
    if c < L:
        i3 = _quad([lambda: (c, L), lambda x: (0.0, 4 * L - 2 * x)], f2, rel_tol, "I123")
        v3 = i3.value * zw
    else:
        v3 = 0.0
    return {"I121": i1.value, "I122": i2.value * zw, "I123": v3}


def s04_integrals(L, rel_tol=1e-6):
    r"""
    The three displayed `S_{0,4}` integrals over ``cond_1``, ``cond_2``, ``cond_3``
    (without volume ratio), each with integrand
    `(1+u)(1+e^{(L-u-w)/2})\sinh\frac x2\sinh\frac y2\sinh\frac z2\sinh\frac w2\, v`.
    """
    sh = lambda u: np.sinh(u / 2)
    c = dl_cut(L)
    M = 2 * L - c
    v_int = L * L / 2
    out = {}
    if M > 0:
        # cond_1: x, y, z, w, v in [0, L]; x + y <= M; z + w <= M
        pair = [lambda: (0.0, min(L, M)), lambda x: (0.0, np.minimum(L, M - x))]
        xy = _quad(pair, lambda x, y: sh(x) * sh(y), rel_tol, "cond1 xy")
        zw = _quad(pair, lambda z, w: (1 + z) * (1 + _e((L - z - w) / 2)) * sh(z) * sh(w),
                   rel_tol, "cond1 zw")
        out["I0401"] = xy.value * zw.value * v_int
    else:
        out["I0401"] = 0.0
    if c < L:
        # cond_2: x in [c, L]; y, z, v in [0, L]; w >= 0; 2x + y + z + w <= 4L
        b2 = [lambda: (c, L), lambda x: (0.0, np.minimum(L, 4 * L - 2 * x)),
              lambda x, y: (0.0, np.minimum(L, 4 * L - 2 * x - y)),
              lambda x, y, z: (0.0, 4 * L - 2 * x - y - z)]
        i2 = _quad(b2, lambda x, y, z, w: (1 + y) * (1 + _e((L - y - w) / 2)) * sh(x) * sh(y) * sh(z) * sh(w),
                   rel_tol, "cond2")
        out["I0402"] = i2.value * v_int
        # cond_3: x, y in [c, L]; z, w >= 0; 2x + 2y + z + w <= 4L
        b3 = [lambda: (c, L), lambda x: (c, np.minimum(L, 2 * L - x)),
              lambda x, y: (0.0, 4 * L - 2 * x - 2 * y),
              lambda x, y, z: (0.0, 4 * L - 2 * x - 2 * y - z)]
        i3 = _quad(b3, lambda x, y, z, w: (1 + z) * (1 + _e((L - z - w) / 2)) * sh(x) * sh(y) * sh(z) * sh(w),
                   rel_tol, "cond3")
        out["I0403"] = i3.value * v_int
    else:
        out["I0402"] = out["I0403"] = 0.0
    return out


def d_integrals(L, rel_tol=1e-8):
    r"""
    `\int_{cond_4}\sinh\frac x2\sinh\frac y2\sinh\frac z2\sinh\frac w2\,v` and
    `\int_{[0,L]^4}\sinh\frac x2\sinh\frac y2\,zw`.
    """
    sh = lambda u: np.sinh(u / 2)
    M = 2 * L - dl_cut(L)
    if M > 0:
        pair = _quad([lambda: (0.0, M), lambda x: (0.0, M - x)], lambda x, y: sh(x) * sh(y),
                     rel_tol, "cond4 pair")
        d02 = pair.value ** 2 * L * L / 2
    else:
        d02 = 0.0
    one = _quad([lambda: (0.0, L)], sh, rel_tol, "sinh")
    d03 = one.value ** 2 * (L * L / 2) ** 2
    return {"D02": d02, "D03": d03}


def bound_C_geq3(g, L, eps=0.1, constants=None):
    r"""
    `c\left(L^{67}e^{(2+\epsilon)L}/g^3 + L^3e^{8L}/g^{11}\right)`, evaluated in
    the log domain; ``components`` records which summand dominates.
    """
    if not 0 < eps < 0.5:
        raise ContractViolation("eps must lie in (0, 1/2)")
    if L <= 1:
        raise DomainError("needs L > 1")
    consts = _constants(constants)
    a = 67 * math.log(L) + (2 + eps) * L - 3 * math.log(g)
    b = 3 * math.log(L) + 8 * L - 11 * math.log(g)
    log_value = math.log(consts["c_geq3"]) + np.logaddexp(a, b)
    regime = "second" if b >= a else "first"
    value = math.exp(log_value) if log_value < 709 else math.inf
    return _report(value, 0.0, "envelope", g, L, {"c_geq3": consts["c_geq3"], "eps": eps},
                   log_value=float(log_value), log_first=a, log_second=b, regime=regime)


def bound_C12(g, L, mode="envelope", table=None, constants=None, rel_tol=1e-6):
    r"""
    Envelope `c_{12}e^{2L}/g^2`, or the volume ratio times the three displayed
    `S_{1,2}` integrals.
    """
    _check_mode(mode, {"envelope", "quadrature"})
    if L <= 1:
        raise DomainError("needs L > 1")
    consts = _constants(constants)
    used = {"c12": consts["c12"]}
    if mode == "envelope":
        return _report(consts["c12"] * math.exp(2 * L) / g ** 2, 0.0, mode, g, L, used)
    rm = _ratio_mode(g, table, "auto")
    ratio = ratio_s12(g, table, rm)
    ints = s12_integrals(L, rel_tol)
    value = consts["c12"] * ratio * sum(ints.values())
    return _report(value, rel_tol * value, mode, g, L, used, [f"volume ratio: {rm}"],
                   ratio=ratio, **ints)


def bound_C04(g, L, mode="envelope", table=None, constants=None, rel_tol=1e-6):
    r"""
    Envelope `c_{04}Le^{2L}/g^2`, or `V^\Sigma/V_g` times the three displayed
    `S_{0,4}` integrals plus the `S_{1,2}`-type part.
    """
    _check_mode(mode, {"envelope", "quadrature"})
    if L <= 1:
        raise DomainError("needs L > 1")
    consts = _constants(constants)
    used = {"c04": consts["c04"]}
    if mode == "envelope":
        return _report(consts["c04"] * L * math.exp(2 * L) / g ** 2, 0.0, mode, g, L, used)
    rm = _ratio_mode(g, table, "auto")
    ratio = ratio_s04(g, table, rm)
    ints = s04_integrals(L, rel_tol)
    part0 = ratio * sum(ints.values())
    part1 = bound_C12(g, L, "quadrature", table, {"c12": 1.0}, rel_tol).value
    value = consts["c04"] * (part0 + part1)
    return _report(value, rel_tol * value, mode, g, L, used, [f"volume ratio: {rm}"],
                   ratio=ratio, s12_part=part1, **ints)


def bound_D(g, L, mode="envelope", table=None, constants=None, rel_tol=1e-8):
    r"""
    Envelope `c_D e^{2L}/(g^2L^6)`, or
    `\frac{V^\Sigma}{V_g}\int_{cond_4}(\dots) + \frac{V_{g-2,2}+\sum V_{g_1,1}V_{g_2,1}}{V_g}\int_{[0,L]^4}(\dots)`.
    """
    _check_mode(mode, {"envelope", "quadrature"})
    if L <= 1:
        raise DomainError("needs L > 1")
    consts = _constants(constants)
    used = {"cD": consts["cD"]}
    if mode == "envelope":
        return _report(consts["cD"] * math.exp(2 * L) / (g ** 2 * L ** 6), 0.0, mode, g, L, used)
    rm = _ratio_mode(g, table, "auto")
    r04 = ratio_s04(g, table, rm)
    r12 = ratio_s12(g, table, rm)
    ints = d_integrals(L, rel_tol)
    value = consts["cD"] * (r04 * ints["D02"] + r12 * ints["D03"])
    return _report(value, rel_tol * value, mode, g, L, used, [f"volume ratio: {rm}"],
                   ratio04=r04, ratio12=r12, **ints)


# omega schedules and the probability pipeline

class OmegaSchedule:
    r"""
    The window width `\omega(g)`.

    ``form`` is ``"loglog"`` (`a \log\log\log g`), ``"constant"`` (`a`), or
    ``"table"`` (piecewise linear in `\log g` through ``table``).

    >>> OmegaSchedule("constant", 3.0)(10 ** 6)
    3.0
    """

    def __init__(self, form="loglog", a=1.0, table=None):
        if form not in ("loglog", "constant", "table"):
            raise ContractViolation(f"unknown omega form {form!r}")
        if form == "table" and not table:
            raise ContractViolation("table form needs a table")
        self.form, self.a = form, float(a)
        self.table = sorted((float(k), float(v)) for k, v in (table or {}).items())

    def __call__(self, g):
        if self.form == "constant":
            return self.a
        if self.form == "loglog":
            lll = math.log(math.log(math.log(g)))
            return self.a * lll
        xs = [math.log(k) for k, _ in self.table]
        ys = [v for _, v in self.table]
        return float(np.interp(math.log(g), xs, ys))

    def describe(self):
        if self.form == "table":
            return "table:" + ",".join(f"{k:g}={v:g}" for k, v in self.table)
        return f"{self.form}:{self.a:g}"

    def validity(self, gs):
        r"""
        Check on ``gs`` that `\omega` increases and `\omega/\log\log g` decreases.
        Returns a list of warnings (empty when the schedule looks admissible).
        """
        gs = sorted(gs)
        w = [self(g) for g in gs]
        r = [self(g) / math.log(math.log(g)) for g in gs]
        warnings = []
        if len(gs) > 1 and not all(b > a for a, b in zip(w, w[1:])):
            warnings.append("omega(g) is not increasing on the range")
        if len(gs) > 1 and not all(b < a for a, b in zip(r, r[1:])):
            warnings.append("omega(g)/log log g is not decreasing on the range")
        if any(x <= 0 for x in w):
            warnings.append("omega(g) is not positive on the range")
        return warnings


def coupled_length(g, omega):
    return math.log(g) - math.log(math.log(g)) + omega


def second_moment_terms(g, L, eps=0.1, constants=None):
    r"""
    The four ratio terms bounding `\mathrm{Var}(N)/\mathbb E[N]^2` at length `L`:
    ``B`` `= c_B\log L/L`, ``A`` `= 6/\mathbb E[N]`,
    ``C`` `= (C_{\ge3}+C_{12}+C_{04})/\mathbb E[N]^2`, ``D`` `= D/\mathbb E[N]^2`,
    all envelopes with the asymptotic `\mathbb E[N]`.
    """
    consts = _constants(constants)
    EN = E_nstar(g, L, "asymptotic").value
    c3 = bound_C_geq3(g, L, eps, consts)
    log_en2 = 2 * math.log(EN)
    c_term = (math.exp(min(c3.components["log_value"] - log_en2, 700))
              + (bound_C12(g, L, "envelope", None, consts).value
                 + bound_C04(g, L, "envelope", None, consts).value) / EN ** 2)
    terms = {
        "B": consts["cB"] * math.log(L) / L,
        "A": bound_A(g, L) / EN ** 2,
        "C": c_term,
        "D": bound_D(g, L, "envelope", None, consts).value / EN ** 2,
    }
    return terms, c3.components["regime"]


def second_moment_fraction(g, omega, constants=None, eps=0.1, gs_range=None):
    r"""
    Sum of the four second-moment ratio terms at `L_g = \log g - \log\log g + \omega(g)`.
    """
    if not isinstance(omega, OmegaSchedule):
        omega = OmegaSchedule("constant", omega)
    w = omega(g)
    L = coupled_length(g, w)
    if L <= 1:
        raise DomainError("L_g must exceed 1")
    consts = _constants(constants)
    terms, regime = second_moment_terms(g, L, eps, consts)
    notes = omega.validity(gs_range) if gs_range else []
    notes.append("displayed envelopes with configured constants; not a probability claim")
    r = _report(sum(terms.values()), 0.0, "envelope", g, L, consts, notes,
                c_geq3_regime=regime, **terms)
    r.omega = w
    return r


def window_probability(g, omega, constants=None, eps=0.1, table=None):
    r"""
    ``(lower_tail_bound, upper_tail_bound)`` for the window
    `|\ell - (\log g - \log\log g)| < \omega(g)`.

    The lower tail is the figure-eight expectation at
    `L^- = \log g - \log\log g - \omega` (zero when `L^- < 2\,\mathrm{arccosh}\,3`).
    The upper tail is the second-moment fraction at the length `L'` with
    ``f8_slack(L') = L^+``.
    """
    if not isinstance(omega, OmegaSchedule):
        omega = OmegaSchedule("constant", omega)
    w = omega(g)
    base = math.log(g) - math.log(math.log(g))
    lo, hi = base - w, base + w
    notes = []
    if lo < F8_MIN:
        lower = 0.0
        notes.append("L- below 2 arccosh 3: empty region")
    else:
        lower = E_f8_total(g, lo, table, constants).value
    Lp = f8_slack_inverse(hi)
    if not Lp > 1:
        raise DomainError("L+ too small for the second-moment bound")
    terms, regime = second_moment_terms(g, Lp, eps, constants)
    upper = sum(terms.values())
    r = _report(upper, 0.0, "envelope", g, hi, _constants(constants),
                notes + ["displayed envelopes with configured constants; not a probability claim"],
                lower_tail=lower, upper_tail=upper, L_minus=lo, L_plus=hi, L_prime=Lp, **terms)
    r.omega = w
    return lower, upper, r
