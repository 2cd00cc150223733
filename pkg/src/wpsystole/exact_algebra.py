r"""
Exact rational arithmetic with an implicit grading by powers of `\pi`.

A :class:`PiGradedPoly` of total degree ``D`` in ``n`` variables stores one
rational number per multi-index ``alpha``; the monomial it stands for is::

    c_alpha * pi^(D - 2|alpha|) * x_1^(2 alpha_1) ... x_n^(2 alpha_n)

so `\pi` counts as degree one and every monomial has the same total degree.
Odd powers of the variables, which only appear after differentiating, are
handled by :class:`PiPoly`.

EXAMPLES::

    >>> from wpsystole.exact_algebra import PiGradedPoly
    >>> p = PiGradedPoly(1, 2, {(1,): "1/48", (0,): "1/12"})
    >>> print(p)
    1/48*x1^2 + 1/12*pi^2
    >>> print(p.substitute_square(0))
    0
"""
import functools

import gmpy2
import mpmath
import numpy as np

from .errors import ContractViolation

Rational = gmpy2.mpq
_SCALARS = (int, type(gmpy2.mpz(0)), type(gmpy2.mpq(0)))


def rational(value):
    r"""
    Coerce ``value`` into a :data:`Rational`.

    Floats are refused so that no rounded number slips into exact data.
    """
    if isinstance(value, float):
        raise TypeError("refusing to convert a float into an exact rational")
    if isinstance(value, str):
        value = value.strip()
    return Rational(value)


@functools.lru_cache(maxsize=None)
def bernoulli(m):
    r"""
    Return the Bernoulli number `B_m` (with `B_1 = -1/2`).

    EXAMPLES::

        >>> from wpsystole.exact_algebra import bernoulli
        >>> [str(bernoulli(m)) for m in range(7)]
        ['1', '-1/2', '1/6', '0', '-1/30', '0', '1/42']
    """
    if m < 0:
        raise ContractViolation("Bernoulli index must be nonnegative")
    if m == 0:
        return Rational(1)
    if m > 1 and m % 2:
        return Rational(0)
    total = Rational(0)
    for k in range(m):
        total += gmpy2.comb(m + 1, k) * bernoulli(k)
    return -total / (m + 1)


@functools.lru_cache(maxsize=None)
def zeta_even_rational(i):
    r"""
    Rational part of `\zeta(2i)`, i.e. `\zeta(2i) / \pi^{2i}`, with `\zeta(0) = -1/2`.
    """
    if i < 0:
        raise ContractViolation("zeta_even needs i >= 0")
    sign = 1 if i % 2 else -1
    return sign * bernoulli(2 * i) * Rational(2) ** (2 * i) / (2 * gmpy2.fac(2 * i))


def zeta_even(i):
    r"""
    Return `\zeta(2i)` as a constant :class:`PiGradedPoly` of degree `2i`.

    EXAMPLES::

        >>> from wpsystole.exact_algebra import zeta_even
        >>> print(zeta_even(0))
        -1/2
        >>> print(zeta_even(2))
        1/90*pi^4
    """
    return PiGradedPoly(0, 2 * i, {(): zeta_even_rational(i)})


def _check_index(alpha, nvars):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != nvars:
        raise ContractViolation(f"multi-index {alpha} does not have {nvars} entries")
    if any(a < 0 for a in alpha):
        raise ContractViolation(f"negative exponent in {alpha}")
    return alpha


def _gaussian_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gaussian_pow(z, e):
    out = (Rational(1), Rational(0))
    for _ in range(e):
        out = _gaussian_mul(out, z)
    return out


def _format_terms(items, degree, pi_of, squared):
    if not items:
        return "0"
    pieces = []
    for alpha, c in items:
        factors = []
        k = pi_of(alpha)
        if k:
            factors.append("pi" if k == 1 else f"pi^{k}")
        for j, a in enumerate(alpha):
            e = 2 * a if squared else a
            if e:
                factors.append(f"x{j + 1}" if e == 1 else f"x{j + 1}^{e}")
        if not factors:
            pieces.append(str(c))
        elif c == 1:
            pieces.append("*".join(factors))
        elif c == -1:
            pieces.append("-" + "*".join(factors))
        else:
            pieces.append(f"{c}*" + "*".join(factors))
    return " + ".join(pieces).replace("+ -", "- ")


class PiGradedPoly:
    r"""
    Homogeneous polynomial in `x_1^2, \dots, x_n^2` and `\pi`.

    INPUT:

    - ``nvars`` -- number of variables

    - ``degree`` -- total degree ``D`` (with `\pi` of degree one); must be even

    - ``terms`` -- mapping from multi-indices to rationals

    EXAMPLES::

        >>> from wpsystole.exact_algebra import PiGradedPoly
        >>> p = PiGradedPoly(1, 2, {(1,): "1/48", (0,): "1/12"})
        >>> print(p * p)
        1/2304*x1^4 + 1/288*pi^2*x1^2 + 1/144*pi^4
    """

    __slots__ = ("nvars", "degree", "_terms")

    def __init__(self, nvars, degree, terms=None):
        nvars = int(nvars)
        degree = int(degree)
        if nvars < 0:
            raise ContractViolation("nvars must be nonnegative")
        if degree % 2:
            raise ContractViolation(f"total degree {degree} is odd")
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = _check_index(alpha, nvars)
            c = rational(c)
            if not c:
                continue
            if degree - 2 * sum(alpha) < 0:
                raise ContractViolation(
                    f"monomial {alpha} exceeds total degree {degree}")
            clean[alpha] = clean.get(alpha, Rational(0)) + c
            if not clean[alpha]:
                del clean[alpha]
        self.nvars = nvars
        self.degree = degree
        self._terms = clean

    @classmethod
    def zero(cls, nvars, degree=0):
        return cls(nvars, degree, {})

    @classmethod
    def constant(cls, value, nvars=0, pi_power=0):
        r"""
        The constant ``value * pi^pi_power`` in ``nvars`` variables.
        """
        return cls(nvars, pi_power, {(0,) * nvars: value})

    @property
    def total_degree(self):
        return self.degree

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def coefficient(self, alpha):
        return self._terms.get(tuple(alpha), Rational(0))

    def is_zero(self):
        return not self._terms

    def pi_power(self, alpha):
        return self.degree - 2 * sum(alpha)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        return f"PiGradedPoly(nvars={self.nvars}, degree={self.degree}, terms={len(self._terms)})"

    def __str__(self):
        return _format_terms(self.items()[::-1], self.degree, self.pi_power, True)

    def __eq__(self, other):
        if isinstance(other, _SCALARS):
            other = PiGradedPoly.constant(other, self.nvars)
            if self.is_zero() or other.is_zero():
                return self._terms == other._terms
            return self.degree == 0 and self._terms == other._terms
        if not isinstance(other, PiGradedPoly):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self):
        if self.is_zero():
            return hash((self.nvars, 0))
        return hash((self.nvars, self.degree, frozenset(self._terms.items())))

    # ring operations

    def __add__(self, other):
        if not isinstance(other, PiGradedPoly):
            return NotImplemented
        if self.nvars != other.nvars:
            raise ContractViolation("adding polynomials in different numbers of variables")
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ContractViolation(
                f"adding polynomials of degree {self.degree} and {other.degree}")
        terms = dict(self._terms)
        for alpha, c in other._terms.items():
            terms[alpha] = terms.get(alpha, Rational(0)) + c
        return PiGradedPoly(self.nvars, self.degree, terms)

    def __neg__(self):
        return PiGradedPoly(self.nvars, self.degree, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PiGradedPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PiGradedPoly):
            if self.nvars != other.nvars:
                raise ContractViolation("multiplying polynomials in different numbers of variables")
            terms = {}
            for a, c in self._terms.items():
                for b, d in other._terms.items():
                    key = tuple(x + y for x, y in zip(a, b))
                    terms[key] = terms.get(key, Rational(0)) + c * d
            return PiGradedPoly(self.nvars, self.degree + other.degree, terms)
        try:
            r = rational(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.scale(r)

    __rmul__ = __mul__

    def scale(self, r, k=0):
        r"""
        Multiply by ``r * pi^(2k)``.
        """
        r = rational(r)
        return PiGradedPoly(self.nvars, self.degree + 2 * k,
                            {a: r * c for a, c in self._terms.items()})

    # evaluation

    def evaluate_numeric(self, point, precision=53):
        r"""
        Evaluate at a real point with ``precision`` bits of working precision.

        EXAMPLES::

            >>> from wpsystole.exact_algebra import PiGradedPoly
            >>> p = PiGradedPoly(1, 2, {(1,): "1/48", (0,): "1/12"})
            >>> float(p.evaluate_numeric([0]))
            0.8224670334241132
        """
        point = list(point)
        if len(point) != self.nvars:
            raise ContractViolation(f"expected {self.nvars} coordinates, got {len(point)}")
        if int(precision) < 2:
            raise ContractViolation("precision must be at least 2 bits")
        with mpmath.workprec(int(precision) + 16):
            pi = mpmath.pi
            xs = [mpmath.mpf(x) ** 2 for x in point]
            total = mpmath.mpf(0)
            for alpha, c in self.items():
                term = mpmath.mpf(c.numerator) / c.denominator * pi ** self.pi_power(alpha)
                for x, a in zip(xs, alpha):
                    if a:
                        term *= x ** a
                total += term
        with mpmath.workprec(int(precision)):
            return +total

    def float_coefficients(self, factor=1):
        r"""
        Coefficients with the `\pi` powers multiplied in, as floats.

        ``factor`` is an exact rational or a real by which every coefficient is
        divided afterwards; it lets callers form ratios such as ``V/V_g`` whose
        numerator and denominator overflow separately.
        """
        with mpmath.workprec(120):
            if isinstance(factor, _SCALARS):
                factor = rational(factor)
                f = mpmath.mpf(factor.numerator) / factor.denominator
            else:
                f = mpmath.mpf(factor)
            return {alpha: float(mpmath.mpf(c.numerator) / c.denominator
                                 * mpmath.pi ** self.pi_power(alpha) / f)
                    for alpha, c in self._terms.items()}

    def numeric_evaluator(self, divisor=1):
        r"""
        Return a vectorized float evaluator ``f(x_1, ..., x_n)`` of ``self / divisor``.

        Nested Horner evaluation in the squared variables.
        """
        coeffs = self.float_coefficients(divisor)
        return _horner_evaluator(coeffs, self.nvars)

    # substitutions and derivatives

    def substitute_square(self, j, value=-4):
        r"""
        Substitute `x_j^2 \mapsto value \cdot \pi^2` (default `-4\pi^2`, i.e. `x_j = 2\pi i`).

        The result has one variable fewer and the same total degree.
        """
        if not 0 <= j < self.nvars:
            raise ContractViolation(f"variable index {j} out of range")
        value = rational(value)
        terms = {}
        for alpha, c in self._terms.items():
            key = alpha[:j] + alpha[j + 1:]
            terms[key] = terms.get(key, Rational(0)) + c * value ** alpha[j]
        return PiGradedPoly(self.nvars - 1, self.degree, terms)

    def derivative(self, j):
        r"""
        Formal derivative with respect to `x_j` (not `x_j^2`), as a :class:`PiPoly`.

        EXAMPLES::

            >>> from wpsystole.exact_algebra import PiGradedPoly
            >>> print(PiGradedPoly(1, 2, {(1,): "1/48"}).derivative(0))
            1/24*x1
        """
        return self.to_pipoly().derivative(j)

    def to_pipoly(self):
        return PiPoly(self.nvars, self.degree,
                      {tuple(2 * a for a in alpha): c for alpha, c in self._terms.items()})

    # serialization

    def dumps(self, genus=None):
        r"""
        Serialize to the line format ``g n D`` followed by ``alpha_1 ... alpha_n num den``.
        """
        g = "-" if genus is None else str(int(genus))
        lines = [f"{g} {self.nvars} {self.degree}"]
        for alpha, c in self.items():
            lines.append(" ".join([str(a) for a in alpha] + [str(c.numerator), str(c.denominator)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        r"""
        Inverse of :meth:`dumps`; returns ``(genus, poly)`` where genus may be ``None``.

        EXAMPLES::

            >>> from wpsystole.exact_algebra import PiGradedPoly
            >>> p = PiGradedPoly(2, 2, {(1, 0): "1/2", (0, 0): 2})
            >>> PiGradedPoly.loads(p.dumps(genus=0)) == (0, p)
            True
        """
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ContractViolation("empty polynomial text")
        header = lines[0].split()
        if len(header) != 3:
            raise ContractViolation(f"malformed header {lines[0]!r}")
        genus = None if header[0] == "-" else int(header[0])
        nvars, degree = int(header[1]), int(header[2])
        terms = {}
        for line in lines[1:]:
            fields = line.split()
            if len(fields) != nvars + 2:
                raise ContractViolation(f"malformed term line {line!r}")
            alpha = tuple(int(a) for a in fields[:nvars])
            den = int(fields[-1])
            if den <= 0:
                raise ContractViolation(f"nonpositive denominator in {line!r}")
            if alpha in terms:
                raise ContractViolation(f"repeated multi-index {alpha}")
            terms[alpha] = Rational(int(fields[-2]), den)
        return genus, cls(nvars, degree, terms)


class PiPoly:
    r"""
    Polynomial in `x_1, \dots, x_n` (arbitrary powers) with implicit `\pi` grading.

    The monomial of exponent ``e`` carries `\pi^{D - |e|}`. This is the
    internal form produced by :meth:`PiGradedPoly.derivative`.
    """

    __slots__ = ("nvars", "degree", "_terms")

    def __init__(self, nvars, degree, terms=None):
        self.nvars = int(nvars)
        self.degree = int(degree)
        clean = {}
        for e, c in (terms or {}).items():
            e = _check_index(e, self.nvars)
            c = rational(c)
            if not c:
                continue
            if self.degree - sum(e) < 0:
                raise ContractViolation(f"monomial {e} exceeds total degree {self.degree}")
            clean[e] = clean.get(e, Rational(0)) + c
            if not clean[e]:
                del clean[e]
        self._terms = clean

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self):
        return not self._terms

    def pi_power(self, e):
        return self.degree - sum(e)

    def __repr__(self):
        return f"PiPoly(nvars={self.nvars}, degree={self.degree}, terms={len(self._terms)})"

    def __str__(self):
        return _format_terms(self.items()[::-1], self.degree, self.pi_power, False)

    def __eq__(self, other):
        if isinstance(other, PiGradedPoly):
            other = other.to_pipoly()
        if not isinstance(other, PiPoly):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, self.degree if self._terms else 0, frozenset(self._terms.items())))

    def __add__(self, other):
        if isinstance(other, PiGradedPoly):
            other = other.to_pipoly()
        if not isinstance(other, PiPoly):
            return NotImplemented
        if self.nvars != other.nvars:
            raise ContractViolation("adding polynomials in different numbers of variables")
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ContractViolation(
                f"adding polynomials of degree {self.degree} and {other.degree}")
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, Rational(0)) + c
        return PiPoly(self.nvars, self.degree, terms)

    def __neg__(self):
        return PiPoly(self.nvars, self.degree, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, r, pi_power=0):
        r"""
        Multiply by ``r * pi^pi_power`` (any nonnegative integer power).
        """
        r = rational(r)
        return PiPoly(self.nvars, self.degree + int(pi_power),
                      {e: r * c for e, c in self._terms.items()})

    def derivative(self, j):
        if not 0 <= j < self.nvars:
            raise ContractViolation(f"variable index {j} out of range")
        terms = {}
        for e, c in self._terms.items():
            if e[j]:
                key = e[:j] + (e[j] - 1,) + e[j + 1:]
                terms[key] = c * e[j]
        return PiPoly(self.nvars, self.degree - 1, terms)

    def substitute_pi_multiple(self, j, re, im=0):
        r"""
        Substitute `x_j \mapsto (re + i\,im)\pi` exactly.

        Returns the pair ``(real_part, imaginary_part)`` of :class:`PiPoly`
        in the remaining variables, both of the same total degree.
        """
        if not 0 <= j < self.nvars:
            raise ContractViolation(f"variable index {j} out of range")
        z = (rational(re), rational(im))
        real, imag = {}, {}
        for e, c in self._terms.items():
            key = e[:j] + e[j + 1:]
            w = _gaussian_pow(z, e[j])
            real[key] = real.get(key, Rational(0)) + c * w[0]
            imag[key] = imag.get(key, Rational(0)) + c * w[1]
        return (PiPoly(self.nvars - 1, self.degree, real),
                PiPoly(self.nvars - 1, self.degree, imag))

    def evaluate_numeric(self, point, precision=53):
        point = list(point)
        if len(point) != self.nvars:
            raise ContractViolation(f"expected {self.nvars} coordinates, got {len(point)}")
        with mpmath.workprec(int(precision) + 16):
            total = mpmath.mpf(0)
            for e, c in self.items():
                term = mpmath.mpf(c.numerator) / c.denominator * mpmath.pi ** self.pi_power(e)
                for x, a in zip(point, e):
                    if a:
                        term *= mpmath.mpf(x) ** a
                total += term
        with mpmath.workprec(int(precision)):
            return +total


def _horner_evaluator(coeffs, nvars):
    r"""
    Build ``f(*xs)`` evaluating ``sum c_alpha prod x_j^(2 alpha_j)`` with numpy.

    The first variable is the outermost Horner level.
    """
    if nvars == 0:
        value = coeffs.get((), 0.0)

        def constant(*xs):
            return value
        return constant

    def build(items, level):
        # items: list of (alpha, c) sharing alpha[:level]
        if level == nvars:
            return sum(c for _, c in items)
        groups = {}
        for alpha, c in items:
            groups.setdefault(alpha[level], []).append((alpha, c))
        top = max(groups)
        return [(k, build(groups[k], level + 1)) for k in range(top + 1) if k in groups] or []

    tree = build(sorted(coeffs.items()), 0) if coeffs else []

    def evaluate(node, level, squares):
        if level == nvars:
            return node
        if not node:
            return 0.0
        x2 = squares[level]
        result = 0.0
        previous = None
        for k, child in reversed(node):
            value = evaluate(child, level + 1, squares)
            if previous is None:
                result = value
            else:
                result = result * x2 ** (previous - k) + value
            previous = k
        if previous:
            result = result * x2 ** previous
        return result

    def f(*xs):
        if len(xs) != nvars:
            raise ContractViolation(f"expected {nvars} coordinate arrays")
        squares = [np.asarray(x, dtype=float) ** 2 for x in xs]
        out = evaluate(tree, 0, squares)
        shape = np.broadcast(*squares).shape
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy() if shape else float(out)

    return f


def binomial(n, k):
    return gmpy2.comb(n, k)


def factorial(n):
    return gmpy2.fac(n)


def as_float(r):
    r"""
    Nearest float to a rational.
    """
    return float(rational(r))


__all__ = ["Rational", "rational", "bernoulli", "zeta_even", "zeta_even_rational",
           "PiGradedPoly", "PiPoly", "binomial", "factorial", "as_float"]
