"""
Deterministic iterated Gauss-Legendre quadrature and reproducible Monte Carlo.

Regions are described by iterated bounds: ``bounds[0]()`` returns the range of
the outermost variable and ``bounds[k](x0, ..., x_{k-1})`` the range of the
k-th variable given the outer ones (as numpy arrays). Empty fibres are
allowed; a range with ``hi < lo`` contributes nothing.

Each coordinate is mapped through the cubic smoothstep ``u -> u^2 (3 - 2u)``
before Gauss-Legendre is applied. Iterated regions bounded by ``arccosh``
expressions produce half-integer power behaviour at the fibre endpoints and
the substitution turns those into polynomial behaviour.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ContractViolation, QuadratureError

CHUNK = 1 << 21


@dataclass
class QuadratureProblem:
    bounds: Sequence[Callable] = ()
    integrand: Callable = None
    rel_tol: float = 1e-8
    name: str = ""
    box: Optional[Sequence[tuple]] = None
    indicator: Optional[Callable] = None
    rates: Optional[Sequence[float]] = None
    seed: int = 0
    samples: int = 10 ** 6

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-2:
            raise ContractViolation("rel_tol must lie in (0, 1e-2]")


@dataclass
class MomentReport:
    value: float
    error_estimate: float
    mode: str
    constants_used: dict = field(default_factory=dict)
    g: Optional[int] = None
    L: Optional[float] = None
    omega: Optional[float] = None
    notes: list = field(default_factory=list)
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ContractViolation("error estimate must be nonnegative")

    def as_dict(self):
        return {"g": self.g, "L": self.L, "omega": self.omega, "mode": self.mode,
                "value": self.value, "err": self.error_estimate,
                "constants": dict(self.constants_used), "notes": list(self.notes),
                "components": dict(self.components)}


def _rule(order, panels):
    # smoothstep-mapped composite Gauss-Legendre on [0, 1]
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    u = ((b - a) * (t + 1) / 2 + a).ravel()
    wu = ((b - a) / 2 * w).ravel()
    return u * u * (3 - 2 * u), wu * 6 * u * (1 - u)


def _expand(bounds, f, coords, weights, s, sw, total):
    level = len(coords)
    if level == len(bounds):
        vals = np.asarray(f(*coords), dtype=float)
        return total + float(np.dot(weights, np.broadcast_to(vals, weights.shape)))
    m = weights.size
    per = s.size
    step = max(1, CHUNK // (per * max(1, len(bounds) - level)))
    for start in range(0, m, step):
        sl = slice(start, start + step)
        outer = [c[sl] for c in coords]
        lo, hi = bounds[level](*outer)
        lo = np.broadcast_to(np.asarray(lo, dtype=float), weights[sl].shape)
        hi = np.broadcast_to(np.asarray(hi, dtype=float), weights[sl].shape)
        width = np.maximum(hi - lo, 0.0)
        keep = width > 0
        if not keep.any():
            continue
        lo, width, w0 = lo[keep], width[keep], weights[sl][keep]
        outer = [c[keep] for c in outer]
        x = (lo[:, None] + width[:, None] * s[None, :]).ravel()
        w = (w0[:, None] * width[:, None] * sw[None, :]).ravel()
        inner = [np.repeat(c, per) for c in outer] + [x]
        total = _expand(bounds, f, inner, w, s, sw, total)
    return total


def iterated_rule(p, order, panels):
    s, sw = _rule(order, panels)
    return _expand(list(p.bounds), p.integrand, [], np.ones(1), s, sw, 0.0)


def integrate_iterated(p, order=12, min_panels=1, max_panels=64, abs_tol=0.0):
    """
    Iterated composite Gauss-Legendre with panel doubling.

    The estimate is accepted once two successive refinements agree to
    ``p.rel_tol`` relative (or ``abs_tol`` absolute); otherwise a
    QuadratureError carrying the last estimate is raised.

    >>> import numpy as np
    >>> p = QuadratureProblem(bounds=[lambda: (0.0, 3.0)], integrand=lambda x: np.sinh(x / 2))
    >>> r = integrate_iterated(p)
    >>> bool(abs(r.value - (2 * np.cosh(1.5) - 2)) < 1e-12)
    True
    """
    panels = min_panels
    old = iterated_rule(p, order, panels)
    while True:
        panels *= 2
        new = iterated_rule(p, order, panels)
        err = abs(new - old)
        if err <= p.rel_tol * abs(new) or err <= abs_tol:
            return MomentReport(new, err, "quadrature",
                                components={"panels": panels, "order": order})
        if panels >= max_panels:
            raise QuadratureError(f"{p.name or 'quadrature'} did not converge", new, err)
        old = new


def _truncated_exponential(u, lo, hi, rate):
    # inverse CDF and density of exp(rate * x) restricted to [lo, hi]
    if rate == 0:
        return lo + (hi - lo) * u, np.full_like(u, 1.0 / (hi - lo))
    span = rate * (hi - lo)
    x = lo + np.log1p(u * np.expm1(span)) / rate
    dens = rate * np.exp(rate * (x - lo)) / np.expm1(span)
    return x, dens


def _block(p, box, rates, key, index, size):
    rng = np.random.Generator(np.random.Philox(key=[key, index]))
    u = rng.random((len(box), size))
    coords, dens = [], np.ones(size)
    for k, (lo, hi) in enumerate(box):
        x, d = _truncated_exponential(u[k], lo, hi, rates[k])
        coords.append(x)
        dens = dens * d
    vals = np.asarray(p.integrand(*coords), dtype=float)
    if p.indicator is not None:
        vals = np.where(p.indicator(*coords), vals, 0.0)
    vals = np.broadcast_to(vals, dens.shape) / dens
    return float(vals.sum()), float(np.dot(vals, vals))


def mc_integrate(p, block=1 << 16, threads=1):
    """
    Monte Carlo estimate over ``p.box`` restricted by ``p.indicator``.

    Sample blocks are generated by Philox keyed on ``(seed, block index)``
    and their partial sums are combined in block order, so the result does
    not depend on ``threads``. ``p.rates`` selects importance sampling from
    densities proportional to ``exp(rate * x)`` on each axis.

    >>> p = QuadratureProblem(box=[(0, 2), (0, 3)], integrand=lambda x, y: 1.0 + 0 * x, samples=10 ** 4)
    >>> round(mc_integrate(p).value, 12)
    6.0
    """
    if p.samples < 10 ** 4:
        raise ContractViolation("needs at least 10^4 samples")
    box = [(float(a), float(b)) for a, b in p.box]
    if any(b <= a for a, b in box):
        return MomentReport(0.0, 0.0, "mc", notes=["empty box"])
    rates = list(p.rates) if p.rates is not None else [0.0] * len(box)
    key = int(p.seed) & ((1 << 64) - 1)
    sizes = [block] * (p.samples // block)
    if p.samples % block:
        sizes.append(p.samples % block)
    jobs = [(i, n) for i, n in enumerate(sizes)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda j: _block(p, box, rates, key, *j), jobs))
    else:
        parts = [_block(p, box, rates, key, *j) for j in jobs]
    n = p.samples
    s1 = sum(a for a, _ in parts)
    s2 = sum(b for _, b in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    return MomentReport(mean, (var / n) ** 0.5, "mc",
                        components={"samples": n, "seed": p.seed})
