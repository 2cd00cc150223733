r"""
Weil-Petersson volume polynomials `V_{g,n}(L_1, \dots, L_n)`.

Volumes are computed exactly by Mirzakhani's recursion, which privileges the
first boundary length. Integrals against the kernel

.. MATH::

    H(x, y) = \frac{1}{1 + e^{(x+y)/2}} + \frac{1}{1 + e^{(x-y)/2}}

are reduced to the even polynomials `F_{2k+1}(t) = \int_0^\infty x^{2k+1} H(x, t) dx`
returned by :func:`kernel_moment_F`.

Internally a volume is stored in compressed form: one rational per orbit of
multi-indices under permutations, keyed by the multi-index sorted in
decreasing order. Every stored coefficient is computed by the recursion, and
when ``verify_symmetry`` is on, it is recomputed with each other distinct
exponent in the privileged slot and compared, so that symmetry is checked
rather than assumed.

EXAMPLES::

    >>> from wpsystole.volumes import VolumeTable
    >>> T = VolumeTable()
    >>> print(T.volume_polynomial(0, 4))
    1/2*x1^2 + 1/2*x2^2 + 1/2*x3^2 + 1/2*x4^2 + 2*pi^2
    >>> print(T.closed_volume(2))
    43/2160*pi^6
"""
import functools
import itertools
import threading
import warnings
from collections import Counter
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import expit

from .errors import BudgetExceeded, ContractViolation, DomainError, MissingVolume
from .exact_algebra import PiGradedPoly, Rational, factorial, binomial, zeta_even_rational

CONVENTIONS = ("half", "full")
DEFAULT_BUDGET = 14


@dataclass(frozen=True)
class SurfaceTopology:
    r"""
    Genus and number of boundary components of a stable surface.
    """
    g: int
    n: int

    def __post_init__(self):
        if self.g < 0 or self.n < 0:
            raise DomainError(f"negative genus or boundary count in {(self.g, self.n)}")
        if 2 * self.g - 2 + self.n < 1:
            raise DomainError(f"(g, n) = {(self.g, self.n)} is not stable")

    @property
    def complexity(self):
        return 2 * self.g - 2 + self.n

    @property
    def dimension(self):
        return 3 * self.g - 3 + self.n


def is_stable(g, n):
    return g >= 0 and n >= 0 and 2 * g - 2 + n >= 1


def kernel_H(x, y):
    r"""
    The kernel `H(x,y)`; vectorized and stable for large arguments.

    EXAMPLES::

        >>> from wpsystole.volumes import kernel_H
        >>> float(kernel_H(0.0, 0.0))
        1.0
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0):
        raise DomainError("kernel_H needs x >= 0")
    out = expit(-(x + y) / 2) + expit(-(x - y) / 2)
    return out if out.shape else float(out)


@functools.lru_cache(maxsize=None)
def kernel_moment_rationals(k):
    r"""
    Rational parts of the coefficients of `F_{2k+1}`: entry ``m`` multiplies
    `\pi^{2(k+1-m)} t^{2m}`.
    """
    if k < 0:
        raise ContractViolation("kernel moment index must be nonnegative")
    out = []
    for m in range(k + 2):
        i = k + 1 - m
        out.append(factorial(2 * k + 1) * zeta_even_rational(i) * (2 ** (2 * i + 1) - 4)
                   / factorial(2 * m))
    return tuple(out)


def kernel_moment_F(k):
    r"""
    `F_{2k+1}(t)` as a one-variable :class:`PiGradedPoly` of degree `2k+2`.

    EXAMPLES::

        >>> from wpsystole.volumes import kernel_moment_F
        >>> print(kernel_moment_F(0))
        1/2*x1^2 + 2/3*pi^2
        >>> print(kernel_moment_F(1).substitute_square(0, 0))
        28/15*pi^4
    """
    return PiGradedPoly(1, 2 * k + 2, {(m,): c for m, c in enumerate(kernel_moment_rationals(k))})


@functools.lru_cache(maxsize=None)
def _beta_weight(a, b):
    # int int x^(2a+1) y^(2b+1) H(x+y, t) = w(a, b) F_{2a+2b+3}(t)
    return Rational(factorial(2 * a + 1) * factorial(2 * b + 1), factorial(2 * a + 2 * b + 3))


def _f(k, m):
    if m > k + 1 or m < 0:
        return 0
    return kernel_moment_rationals(k)[m]


def partitions(total, parts, largest=None):
    r"""
    Partitions of ``total`` into at most ``parts`` parts, padded with zeros,
    in decreasing order.
    """
    if largest is None:
        largest = total
    if parts == 0:
        if total == 0:
            yield ()
        return
    if total == 0:
        yield (0,) * parts
        return
    for first in range(min(total, largest), 0, -1):
        if first * parts < total:
            break
        for rest in partitions(total - first, parts - 1, first):
            yield (first,) + rest


def orbit_representatives(n, max_degree):
    for k in range(max_degree + 1):
        yield from partitions(k, n)


def _key(exps):
    return tuple(sorted(exps, reverse=True))


def _sub_multisets(beta):
    # yields (S, rest, multiplicity) with S, rest as sorted tuples
    counts = sorted(Counter(beta).items(), reverse=True)
    values = [v for v, _ in counts]
    mults = [m for _, m in counts]
    for choice in itertools.product(*[range(m + 1) for m in mults]):
        S, rest, mult = [], [], 1
        for v, m, s in zip(values, mults, choice):
            S += [v] * s
            rest += [v] * (m - s)
            mult *= binomial(m, s)
        yield tuple(S), tuple(rest), mult


def _expand_orbit(rep):
    # distinct permutations of a multiset, without enumerating all n! orders
    counts = Counter(rep)
    values = sorted(counts)
    out = []

    def build(prefix, left):
        if left == 0:
            out.append(tuple(prefix))
            return
        for v in values:
            if counts[v]:
                counts[v] -= 1
                prefix.append(v)
                build(prefix, left - 1)
                prefix.pop()
                counts[v] += 1

    build([], len(rep))
    return out


def _orbit_size(rep):
    size = factorial(len(rep))
    for m in Counter(rep).values():
        size //= factorial(m)
    return int(size)


class VolumeTable:
    r"""
    Memoized exact volumes `V_{g,n}`.

    INPUT:

    - ``budget`` -- largest admissible `2g-2+n`

    - ``convention`` -- ``"half"`` (default) uses `V_{1,1}(b) = (b^2+4\pi^2)/48`;
      ``"full"`` doubles it

    - ``path`` -- optional file; the table is saved after each new entry

    - ``verify_symmetry`` -- recompute each coefficient with every distinct
      exponent in the privileged slot

    EXAMPLES::

        >>> from wpsystole.volumes import VolumeTable
        >>> T = VolumeTable()
        >>> print(T.volume_polynomial(1, 1))
        1/48*x1^2 + 1/12*pi^2
        >>> print(T.volume_polynomial(1, 2).substitute_square(1, 0))
        1/192*x1^4 + 1/12*pi^2*x1^2 + 1/4*pi^4
    """

    def __init__(self, budget=DEFAULT_BUDGET, convention="half", path=None, verify_symmetry=True):
        if convention not in CONVENTIONS:
            raise ContractViolation(f"unknown convention {convention!r}")
        if int(budget) < 1:
            raise ContractViolation("budget must be positive")
        self.budget = int(budget)
        self.convention = convention
        self.path = path
        self.verify_symmetry = verify_symmetry
        self._sym = {}
        self._expanded = {}
        self._lock = threading.RLock()
        if path is not None:
            from .persistence import read_table_entries
            for (g, n), entry in read_table_entries(path, convention).items():
                if 2 * g - 2 + n <= self.budget + (n == 1):
                    try:
                        self._validate(g, n, entry)
                    except ContractViolation as exc:
                        warnings.warn(f"{path}: entry {(g, n)} dropped ({exc})")
                        continue
                    self._sym[(g, n)] = entry

    # access

    def __contains__(self, gn):
        return tuple(gn) in self._sym

    def keys(self):
        return sorted(self._sym)

    def compressed(self, g, n):
        r"""
        Orbit representative -> rational coefficient, computing if necessary.
        """
        self.ensure(g, n)
        return self._sym[(g, n)]

    def lookup(self, g, n):
        r"""
        Compressed entry without computing; raises :class:`MissingVolume`.
        """
        try:
            return self._sym[(g, n)]
        except KeyError:
            raise MissingVolume(f"V_{{{g},{n}}} is not in the table") from None

    def coefficient(self, g, n, alpha):
        return self.compressed(g, n).get(_key(alpha), Rational(0))

    def degree(self, g, n):
        return 6 * g - 6 + 2 * n

    def value_at_zero(self, g, n):
        r"""
        `V_{g,n}(0, \dots, 0)` as a constant :class:`PiGradedPoly` (``n = 0`` gives `V_g`).
        """
        c = self.compressed(g, n).get((0,) * n, Rational(0))
        return PiGradedPoly(0, self.degree(g, n), {(): c})

    def numeric_value(self, g, n, precision=53):
        return self.value_at_zero(g, n).evaluate_numeric([], precision)

    def volume_polynomial(self, g, n, direct=False):
        r"""
        The full polynomial `V_{g,n}` as a :class:`PiGradedPoly`.

        With ``direct=True`` every coefficient (not only orbit representatives)
        is obtained from the recursion with its own first exponent privileged.
        """
        if n == 0:
            return self.value_at_zero(g, 0)
        sym = self.compressed(g, n)
        if direct:
            terms = {}
            for rep in sym:
                for alpha in _expand_orbit(rep):
                    terms[alpha] = self._recursive_coefficient(g, n, alpha[0], alpha[1:], {})
            return PiGradedPoly(n, self.degree(g, n), terms)
        with self._lock:
            if (g, n) not in self._expanded:
                terms = {}
                for rep, c in sym.items():
                    for alpha in _expand_orbit(rep):
                        terms[alpha] = c
                self._expanded[(g, n)] = PiGradedPoly(n, self.degree(g, n), terms)
            return self._expanded[(g, n)]

    def closed_volume(self, g):
        r"""
        `V_g` as a constant of degree `6g-6`, extracted from `V_{g,1}` by the dilaton identity.

        The derivative of `V_{g,1}` at `2\pi i` is evaluated exactly with
        Gaussian rationals; its real part would make `V_g` non-real and is
        asserted to vanish.
        """
        if g < 2:
            raise DomainError("closed volumes need g >= 2")
        self.ensure(g, 0)
        return self.value_at_zero(g, 0)

    # computation

    def _check_budget(self, g, n):
        if 2 * g - 2 + n > self.budget:
            raise BudgetExceeded(
                f"V_{{{g},{n}}} needs 2g-2+n = {2 * g - 2 + n} > budget {self.budget}")

    def ensure(self, g, n, _closed_request=False):
        if (g, n) in self._sym:
            return
        if n == 0:
            if g < 2:
                raise DomainError(f"(g, n) = {(g, n)} is not stable")
            self._check_budget(g, 0)
        elif not (n == 1 and _closed_request):
            SurfaceTopology(g, n)
            self._check_budget(g, n)
        with self._lock:
            if (g, n) in self._sym:
                return
            for gg, nn in self._prerequisites(g, n):
                # V_g may pull V_{g,1} one step past the budget
                self.ensure(gg, nn, _closed_request=(n == 0))
            if n == 0:
                entry = self._closed_from_dilaton(g)
            else:
                entry = self._compute(g, n)
            self._insert(g, n, entry)

    def _prerequisites(self, g, n):
        if n == 0:
            return [(g, 1)]
        if (g, n) in ((0, 3), (1, 1)):
            return []
        pre = []
        if g >= 1 and is_stable(g - 1, n + 1):
            pre.append((g - 1, n + 1))
        for g1 in range(g + 1):
            for k in range(n):
                if is_stable(g1, k + 1) and is_stable(g - g1, n - k):
                    pre.append((g1, k + 1))
        if n >= 2 and is_stable(g, n - 1):
            pre.append((g, n - 1))
        return sorted(set(pre), key=lambda t: (2 * t[0] - 2 + t[1], t))

    def _base_case(self, g, n):
        if (g, n) == (0, 3):
            return {(0, 0, 0): Rational(1)}
        scale = 1 if self.convention == "half" else 2
        return {(1,): Rational(scale, 48), (0,): Rational(scale, 12)}

    def _compute(self, g, n):
        if (g, n) in ((0, 3), (1, 1)):
            return self._base_case(g, n)
        caches = {}
        entry = {}
        for rep in orbit_representatives(n, 3 * g - 3 + n):
            value = self._recursive_coefficient(g, n, rep[0], rep[1:], caches)
            if self.verify_symmetry:
                for v in sorted(set(rep[1:]) - {rep[0]}):
                    rest = list(rep)
                    rest.remove(v)
                    other = self._recursive_coefficient(g, n, v, tuple(rest), caches)
                    if other != value:
                        raise ContractViolation(
                            f"V_{{{g},{n}}} fails symmetry at {rep}: {value} != {other}")
            entry[rep] = value
        return entry

    def _c(self, g, n, exps):
        return self._sym[(g, n)].get(_key(exps), 0)

    def _con_vector(self, g, n, beta, caches):
        key = ("con", beta)
        if key not in caches:
            vec = []
            if g >= 1 and is_stable(g - 1, n + 1):
                top = 3 * (g - 1) - 3 + n + 1 - sum(beta)
                for s in range(top + 1):
                    total = Rational(0)
                    for a in range(s + 1):
                        c = self._c(g - 1, n + 1, (a, s - a) + beta)
                        if c:
                            total += _beta_weight(a, s - a) * c
                    vec.append(total)
            caches[key] = vec
        return caches[key]

    def _dcon_vector(self, g, n, beta, caches):
        key = ("dcon", beta)
        if key not in caches:
            vec = {}
            for S, rest, mult in _sub_multisets(beta):
                n1, n2 = len(S) + 1, len(rest) + 1
                for g1 in range(g + 1):
                    g2 = g - g1
                    if not (is_stable(g1, n1) and is_stable(g2, n2)):
                        continue
                    top1 = 3 * g1 - 3 + n1 - sum(S)
                    top2 = 3 * g2 - 3 + n2 - sum(rest)
                    c1 = [self._c(g1, n1, (a,) + S) for a in range(top1 + 1)]
                    c2 = [self._c(g2, n2, (b,) + rest) for b in range(top2 + 1)]
                    for a, x in enumerate(c1):
                        if not x:
                            continue
                        for b, y in enumerate(c2):
                            if y:
                                vec[a + b] = vec.get(a + b, Rational(0)) + mult * _beta_weight(a, b) * x * y
            size = max(vec) + 1 if vec else 0
            caches[key] = [vec.get(s, Rational(0)) for s in range(size)]
        return caches[key]

    def _recursive_coefficient(self, g, n, a1, beta, caches):
        r"""
        Coefficient of `L_1^{2 a_1} \hat L^{2\beta}` in `V_{g,n}` from the recursion.
        """
        if (g, n) in ((0, 3), (1, 1)):
            return self._base_case(g, n).get(_key((a1,) + tuple(beta)), Rational(0))
        beta = tuple(sorted(beta, reverse=True))
        rhs = Rational(0)
        half = Rational(1, 2)
        con = self._con_vector(g, n, beta, caches)
        dcon = self._dcon_vector(g, n, beta, caches)
        for s in range(max(len(con), len(dcon))):
            f = _f(s + 1, a1)
            if not f:
                continue
            p = (con[s] if s < len(con) else 0) + (dcon[s] if s < len(dcon) else 0)
            rhs += half * f * p
        if is_stable(g, n - 1):
            for v, mult in Counter(beta).items():
                rest = list(beta)
                rest.remove(v)
                rest = tuple(rest)
                top = 3 * g - 3 + n - 1 - sum(rest)
                for a in range(top + 1):
                    f = _f(a, a1 + v)
                    if not f:
                        continue
                    c = self._c(g, n - 1, (a,) + rest)
                    if c:
                        rhs += mult * c * f * binomial(2 * a1 + 2 * v, 2 * a1)
        return rhs / (2 * a1 + 1)

    def _closed_from_dilaton(self, g):
        p = self.volume_polynomial(g, 1).derivative(0)
        real, imag = p.substitute_pi_multiple(0, 0, 2)
        if not real.is_zero():
            raise ContractViolation(f"dilaton evaluation for V_{g} has a nonzero imaginary residue")
        c = imag.items()[0][1] if not imag.is_zero() else Rational(0)
        # V_g = (i * imag * pi^(6g-5)) / (2 pi i (2g-2))
        return {(): c / (2 * (2 * g - 2))}

    def _validate(self, g, n, entry):
        expected = set(orbit_representatives(n, 3 * g - 3 + n)) if n else {()}
        if set(entry) != expected:
            raise ContractViolation(f"V_{{{g},{n}}} has missing or extra monomials")
        for rep, c in entry.items():
            if len(rep) != n or list(rep) != sorted(rep, reverse=True):
                raise ContractViolation(f"V_{{{g},{n}}}: bad orbit key {rep}")
            if not c > 0:
                raise ContractViolation(f"V_{{{g},{n}}}: nonpositive coefficient at {rep}")
            if 6 * g - 6 + 2 * n - 2 * sum(rep) < 0:
                raise ContractViolation(f"V_{{{g},{n}}}: grading violated at {rep}")

    def _insert(self, g, n, entry):
        self._validate(g, n, entry)
        self._sym[(g, n)] = entry
        if self.path is not None:
            from .persistence import write_table
            write_table(self, self.path)

    def insert_loaded(self, g, n, entry):
        r"""
        Insert an entry read from disk after re-running the insertion checks.
        """
        self._validate(g, n, entry)
        self._sym[(g, n)] = entry

    def compute_all(self, max_complexity):
        r"""
        Compute every stable `V_{g,n}` with `2g-2+n` at most ``max_complexity``,
        together with the closed volumes `V_g` with `2g-2` in range (their
        `V_{g,1}` may exceed the budget by one).
        """
        for r in range(1, max_complexity + 1):
            for g in range(r // 2 + 2):
                n = r - 2 * g + 2
                if n >= 1 and is_stable(g, n):
                    self.ensure(g, n)
        for g in range(2, max_complexity // 2 + 2):
            if 2 * g - 2 <= min(max_complexity, self.budget):
                self.ensure(g, 0)
        return self.keys()


# identities and checks

@dataclass
class IdentityReport:
    g: int
    n: int
    string_residual: dict
    dilaton_residual: dict
    dilaton_applicable: bool
    method: str

    @property
    def passed(self):
        return not self.string_residual and not self.dilaton_residual


def _length_integral(poly, j):
    # sum over the variable j of int_0^{L_j} L_j * poly dL_j, termwise
    terms = {}
    for alpha, c in poly.terms.items():
        key = alpha[:j] + (alpha[j] + 1,) + alpha[j + 1:]
        terms[key] = c / (2 * alpha[j] + 2)
    return PiGradedPoly(poly.nvars, poly.degree + 2, terms)


def check_string_dilaton(table, g, n, method="auto"):
    r"""
    Exact residuals of the string and dilaton equations relating `V_{g,n+1}` and `V_{g,n}`.

    String: `V_{g,n+1}(L, 2\pi i) = \sum_k \int_0^{L_k} L_k V_{g,n}(L) dL_k`
    (the right side is empty for `n = 0`). Dilaton:
    `\partial_{L_{n+1}} V_{g,n+1}(L, 2\pi i) = 2\pi i (2g-2+n) V_{g,n}(L)`.
    The dilaton part needs `(g, n)` stable, or `n = 0` and `g \ge 2`; for
    `n = 0` it is the definition of `V_g` and holds by construction.

    ``method`` is ``"poly"`` (expanded polynomial arithmetic),
    ``"compressed"`` (orbit representatives), or ``"auto"``.

    EXAMPLES::

        >>> from wpsystole.volumes import VolumeTable, check_string_dilaton
        >>> check_string_dilaton(VolumeTable(), 1, 1).passed
        True
    """
    if 2 * g - 2 + n < 1 and (g, n) != (1, 0):
        raise DomainError("the string equation needs 2g - 2 + n >= 1 or (g, n) = (1, 0)")
    big = table.compressed(g, n + 1)
    lower_exists = is_stable(g, n) or (n == 0 and g >= 2)
    if method == "auto":
        method = "poly" if len(big) and _orbit_count(n + 1, 3 * g - 2 + n) <= 5000 else "compressed"
    if method == "poly":
        return _check_poly(table, g, n, lower_exists)
    if method == "compressed":
        return _check_compressed(table, g, n, lower_exists)
    raise ContractViolation(f"unknown method {method!r}")


def _orbit_count(n, d):
    from math import comb
    return comb(d + n, n)


def _check_poly(table, g, n, lower_exists):
    V = table.volume_polynomial(g, n + 1)
    string = V.substitute_square(n)
    if lower_exists and n > 0:
        W = table.volume_polynomial(g, n)
        rhs = PiGradedPoly.zero(n)
        for k in range(n):
            rhs = rhs + _length_integral(W, k)
        string = string - rhs
    dilaton = {}
    if lower_exists:
        real, imag = V.derivative(n).substitute_pi_multiple(n, 0, 2)
        W = table.volume_polynomial(g, n) if n else table.value_at_zero(g, 0)
        target = W.to_pipoly().scale(2 * (2 * g - 2 + n), 1)
        dilaton = dict(real.terms)
        for e, c in (imag - target).terms.items():
            dilaton[("im",) + e] = c
    return IdentityReport(g, n, string.terms, dilaton, lower_exists, "poly")


def _check_compressed(table, g, n, lower_exists):
    big = table.compressed(g, n + 1)
    small = table.compressed(g, n) if lower_exists else {}
    top = 3 * g - 3 + n + 1
    string, dilaton = {}, {}
    for rep in orbit_representatives(n, top):
        s = Rational(0)
        d = Rational(0)
        for k in range(top - sum(rep) + 1):
            c = big.get(_key(rep + (k,)), 0)
            if c:
                s += c * Rational(-4) ** k
                d += 2 * k * c * Rational(-4) ** k
        if lower_exists and n > 0:
            for v, mult in Counter(rep).items():
                if v >= 1:
                    lowered = list(rep)
                    lowered[lowered.index(v)] = v - 1
                    s -= mult * small.get(_key(lowered), 0) / (2 * v)
        if lower_exists:
            d += 4 * (2 * g - 2 + n) * small.get(rep, 0)
        if s:
            string[rep] = s
        if lower_exists and d:
            dilaton[rep] = d
    return IdentityReport(g, n, string, dilaton, lower_exists, "compressed")


def volume_ratio(table, g, kind, mode="exact", n=0):
    r"""
    Volume ratios appearing in the asymptotic theory.

    ``kind`` is one of

    - ``"g-2,3"`` -- `V_{g-2,3}/V_g`, leading term `1/(8\pi^2 g)`
    - ``"g-4,6"`` -- `V_{g-4,6}/V_g`, leading term `1/(64\pi^4 g^2)`
    - ``"dilaton"`` -- `(2g-2+n) V_{g,n}/V_{g,n+1}`, leading term `1/(4\pi^2)`
    - ``"genus"`` -- `V_{g,n}/V_{g-1,n+2}`, leading term `1`

    Volumes are evaluated with all boundary lengths zero.

    EXAMPLES::

        >>> from wpsystole.volumes import VolumeTable, volume_ratio
        >>> import math
        >>> abs(volume_ratio(None, 100, "g-2,3", "asymptotic") - 1 / (800 * math.pi ** 2)) < 1e-18
        True
    """
    pi = mpmath.pi
    if mode == "asymptotic":
        leading = {"g-2,3": 1 / (8 * pi ** 2 * g), "g-4,6": 1 / (64 * pi ** 4 * g ** 2),
                   "dilaton": 1 / (4 * pi ** 2), "genus": mpmath.mpf(1)}
        if kind not in leading:
            raise ContractViolation(f"unknown ratio kind {kind!r}")
        return float(leading[kind])
    if mode != "exact":
        raise ContractViolation(f"unknown mode {mode!r}")
    if kind == "g-2,3":
        num, den = (g - 2, 3), (g, 0)
        factor = 1
    elif kind == "g-4,6":
        num, den = (g - 4, 6), (g, 0)
        factor = 1
    elif kind == "dilaton":
        num, den = (g, n), (g, n + 1)
        factor = 2 * g - 2 + n
    elif kind == "genus":
        num, den = (g, n), (g - 1, n + 2)
        factor = 1
    else:
        raise ContractViolation(f"unknown ratio kind {kind!r}")
    a = _lookup_or_compute(table, *num).get((0,) * num[1], 0)
    b = _lookup_or_compute(table, *den).get((0,) * den[1], 0)
    power = table.degree(*num) - table.degree(*den)
    with mpmath.workprec(100):
        value = factor * (mpmath.mpf(a.numerator) / a.denominator) / (mpmath.mpf(b.numerator) / b.denominator) * pi ** power
    return float(value)


def _lookup_or_compute(table, g, n):
    if table is None:
        raise MissingVolume("exact mode needs a volume table")
    try:
        return table.compressed(g, n)
    except (BudgetExceeded, DomainError) as exc:
        raise MissingVolume(str(exc)) from exc


@dataclass
class SinhBoundReport:
    g: int
    n: int
    certificate: bool
    worst_coefficient_ratio: float
    points_checked: int
    violations: int
    max_ratio: float
    offending: list = field(default_factory=list)

    @property
    def passed(self):
        return self.violations == 0 and (self.certificate or self.points_checked > 0)


def sinh_bound_check(table, g, n, grid=None, max_work=5 * 10 ** 7):
    r"""
    Check `V_{g,n}(x)/V_{g,n} \le \prod \sinh(x_i/2)/(x_i/2)`.

    Two routes are reported. The coefficient certificate compares each
    coefficient of `V_{g,n}(x)/V_{g,n}` with the corresponding Taylor
    coefficient `\prod 1/(4^{\alpha_i}(2\alpha_i+1)!)` of the right side;
    when all are dominated the inequality holds at every point. The grid
    route evaluates both sides at every point of ``grid`` in each coordinate
    (default `0, 1, \dots, 8`), using one point per permutation orbit, and
    is skipped when the expanded polynomial makes it too expensive.

    EXAMPLES::

        >>> from wpsystole.volumes import VolumeTable, sinh_bound_check
        >>> r = sinh_bound_check(VolumeTable(), 1, 1, grid=[0.0])
        >>> r.passed, r.max_ratio
        (True, 1.0)
    """
    sym = table.compressed(g, n)
    c0 = sym[(0,) * n]
    worst = 0.0
    certificate = True
    with mpmath.workprec(200):
        pi2 = mpmath.pi ** 2
        for rep, c in sym.items():
            bound = Rational(1)
            for a in rep:
                bound *= Rational(4) ** a * factorial(2 * a + 1)
            lhs = mpmath.mpf((c * bound / c0).numerator) / (c * bound / c0).denominator
            ratio = lhs / pi2 ** sum(rep)
            worst = max(worst, float(ratio))
            if ratio > 1 + mpmath.mpf(2) ** -150:
                certificate = False
    if grid is None:
        grid = np.linspace(0.0, 8.0, 9)
    grid = np.asarray(grid, dtype=float)
    points = list(itertools.combinations_with_replacement(range(len(grid)), n))
    expanded_terms = sum(_orbit_size(rep) for rep in sym)
    checked = violations = 0
    max_ratio = 0.0
    offending = []
    if len(points) * max(expanded_terms, 1) <= max_work:
        V = table.volume_polynomial(g, n)
        f = V.numeric_evaluator()
        base = float(V.evaluate_numeric([0.0] * n))
        idx = np.array(points, dtype=int).reshape(len(points), n)
        xs = grid[idx] if n else np.zeros((1, 0))
        values = f(*[xs[:, j] for j in range(n)]) / base if n else np.array([1.0])
        half = xs / 2
        with np.errstate(invalid="ignore", divide="ignore"):
            factors = np.where(half > 0, np.sinh(half) / np.where(half > 0, half, 1), 1.0)
        rhs = np.prod(factors, axis=1)
        ratio = values / rhs
        checked = len(points)
        max_ratio = float(np.max(ratio))
        bad = np.nonzero(ratio > 1 + 1e-12)[0]
        violations = int(len(bad))
        offending = [tuple(xs[i]) for i in bad[:10]]
    return SinhBoundReport(g, n, certificate, worst, checked, violations, max_ratio, offending)


def W_r(table, r):
    r"""
    The comparison volume `W_r`: `V_{r/2+1,0}` for even `r`, `V_{(r+1)/2,1}` for odd `r`.
    """
    if r < 1:
        raise ContractViolation("W_r needs r >= 1")
    if r % 2 == 0:
        return table.value_at_zero(r // 2 + 1, 0)
    return table.value_at_zero((r + 1) // 2, 1)


def sum_product_bound(table, r, signature):
    r"""
    Exact `\sum V_{g_1,n_1} \cdots V_{g_q,n_q}` over genera with
    `2g_i-2+n_i \ge 1` and `\sum (2g_i-2+n_i) = r`, together with `W_r` and
    the numeric ratio.

    All terms share the `\pi` power `3r - \sum n_i`, so the sum is returned as
    a single constant :class:`PiGradedPoly`.

    EXAMPLES::

        >>> from wpsystole.volumes import VolumeTable, sum_product_bound
        >>> T = VolumeTable()
        >>> total, w, ratio = sum_product_bound(T, 2, (4,))
        >>> print(total)
        2*pi^2
    """
    signature = tuple(int(k) for k in signature)
    q = len(signature)
    twice = r + 2 * q - sum(signature)
    total = PiGradedPoly(0, 3 * r - sum(signature), {})
    if twice >= 0 and twice % 2 == 0:
        G = twice // 2
        for genera in _compositions(G, q):
            if not all(is_stable(gi, ni) for gi, ni in zip(genera, signature)):
                continue
            term = PiGradedPoly.constant(1)
            for gi, ni in zip(genera, signature):
                term = term * table.value_at_zero(gi, ni)
            total = total + term
    w = W_r(table, r)
    with mpmath.workprec(100):
        ratio = float(total.evaluate_numeric([], 100) / w.evaluate_numeric([], 100))
    return total, w, ratio


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
