"""Direct numerical evaluation: adaptive quadrature of the convolution
integrals, numerical Mellin transforms, and Mellin-Barnes contour
inversion.  This backend is the independent oracle for the series and
sampling backends.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .exceptions import NoConvergence, OutOfStrip, SlowDecay
from .mellin import GammaExpr, log_eval_complex
from .pathway import PRODUCT, ConvolutionSpec, in_support, support_upper
from .result import EvalResult


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 2000
    singularity_exponent_hint: float | None = None

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be >= 10")


DEFAULT_CFG = QuadConfig()


class _Counter:
    __slots__ = ("n",)

    def __init__(self):
        self.n = 0


def _breakpoints(anchors, lo: float, hi: float):
    """Dyadic neighbourhoods of each anchor, clipped to (lo, hi).

    The anchors mark where the integrand's factors concentrate their
    mass; without them the initial quadrature rule can step straight
    over a peak that is narrow relative to the interval.
    """
    pts = set()
    for a in anchors:
        if not (a > 0 and math.isfinite(a)):
            continue
        for k in (-3, -1, 0, 1, 3):
            x = a * 2.0 ** k
            if lo < x < hi:
                pts.add(x)
    return sorted(pts)


def _quad(f, lo: float, hi: float, cfg: QuadConfig, counter: _Counter,
          anchors=()):
    """Adaptive quadrature on (lo, hi); semi-infinite upper limits are
    mapped onto (0, 1) by v = lo + t/(1-t)."""

    def g(x):
        counter.n += 1
        return f(x)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if math.isinf(hi):
            def mapped(t):
                w = 1.0 - t
                return g(lo + t / w) / (w * w)
            # anchors transform monotonically: t = (v-lo)/(1+v-lo)
            pts = [(a - lo) / (1.0 + a - lo)
                   for a in _breakpoints(anchors, lo, math.inf) if a > lo]
            val, err = integrate.quad(mapped, 0.0, 1.0, points=pts or None,
                                      epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                      limit=cfg.max_subdivisions)
        else:
            pts = _breakpoints(anchors, lo, hi)
            val, err = integrate.quad(g, lo, hi, points=pts or None,
                                      epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                      limit=cfg.max_subdivisions)
    if not math.isfinite(val):
        raise NoConvergence(f"quadrature over ({lo}, {hi}) did not converge")
    return val, err


def product_density_quad(spec: ConvolutionSpec, u: float,
                         cfg: QuadConfig = DEFAULT_CFG) -> EvalResult:
    """Density of u = x1*x2 by quadrature of the convolution integral.

    Both orderings of the integrand are evaluated; the result is their
    mean and the error the larger of the quadrature errors and half the
    disagreement.
    """
    if spec.kind != PRODUCT:
        raise ValueError("product_density_quad needs a Product spec")
    if not in_support(spec, u):
        raise ValueError(f"u = {u} outside the support of the product")
    f1, f2 = spec.f1, spec.f2
    counter = _Counter()

    def one_ordering(fa, fb):
        # integral of fa(u/v) fb(v) / v over the common window
        ha, hb = fa.support_upper(), fb.support_upper()
        lo = 0.0 if math.isinf(ha) else u / ha
        hi = hb
        anchors = (fb.scale_hint(), u / fa.scale_hint())
        return _quad(lambda v: fa.pdf(u / v) * fb.pdf(v) / v, lo, hi,
                     cfg, counter, anchors)

    va, ea = one_ordering(f1, f2)
    vb, eb = one_ordering(f2, f1)
    value = 0.5 * (va + vb)
    err = max(ea, eb, 0.5 * abs(va - vb))
    return EvalResult(value, err, "quad", {"fevals": counter.n})


def ratio_density_quad(spec: ConvolutionSpec, u: float,
                       cfg: QuadConfig = DEFAULT_CFG) -> EvalResult:
    """Density of u = x2/x1 via the two change-of-variable forms
    int v/u^2 f1(v/u) f2(v) dv and int v f1(v) f2(uv) dv."""
    if spec.kind == PRODUCT:
        raise ValueError("ratio_density_quad needs a Ratio spec")
    if not u > 0:
        raise ValueError("ratio support is u > 0")
    f1, f2 = spec.f1, spec.f2
    h1, h2 = f1.support_upper(), f2.support_upper()
    counter = _Counter()

    # v = x2: v < h2 and v/u < h1
    hi_a = min(h2, u * h1)
    va, ea = _quad(lambda v: (v / u ** 2) * f1.pdf(v / u) * f2.pdf(v),
                   0.0, hi_a, cfg, counter,
                   anchors=(f2.scale_hint(), u * f1.scale_hint()))
    # v = x1: v < h1 and u*v < h2
    hi_b = min(h1, h2 / u) if math.isfinite(h2) else h1
    vb, eb = _quad(lambda v: v * f1.pdf(v) * f2.pdf(u * v),
                   0.0, hi_b, cfg, counter,
                   anchors=(f1.scale_hint(), f2.scale_hint() / u))
    value = 0.5 * (va + vb)
    err = max(ea, eb, 0.5 * abs(va - vb))
    return EvalResult(value, err, "quad", {"fevals": counter.n})


def convolution_density_quad(spec: ConvolutionSpec, u: float,
                             cfg: QuadConfig = DEFAULT_CFG) -> EvalResult:
    if spec.kind == PRODUCT:
        return product_density_quad(spec, u, cfg)
    return ratio_density_quad(spec, u, cfg)


def mellin_numeric(pdf, s: float, cfg: QuadConfig = DEFAULT_CFG,
                   support=(0.0, math.inf)) -> EvalResult:
    """Numerical Mellin transform int x^(s-1) pdf(x) dx."""
    counter = _Counter()
    val, err = _quad(lambda x: x ** (s - 1.0) * pdf(x),
                     support[0], support[1], cfg, counter)
    return EvalResult(val, err, "quad", {"fevals": counter.n})


# -- Mellin-Barnes inversion ----------------------------------------------------

_OCTAVE0 = 20.0
_MAX_OCTAVES = 14
# below this exponential decay rate of |integrand| along the vertical
# line, switch to tilted rays (pure type-1 beta kernels decay only
# algebraically on the vertical line)
_MIN_VERTICAL_RATE = 0.3


def inverse_mellin_contour(expr: GammaExpr, u: float, c: float | None = None,
                           truncation: float | None = None,
                           cfg: QuadConfig = DEFAULT_CFG) -> EvalResult:
    """Density value g(u) = (1/2 pi i) int expr(s) u^(-s) ds.

    The vertical line at abscissa c is integrated in doubling octaves
    [0,T], [T,2T], ... until the last octave contributes less than the
    tolerance.  When the integrand decays only algebraically along the
    vertical line (gamma mass of numerator and denominator cancel), the
    contour is bent onto rays at angle 3pi/4 (or pi/4), where the
    u-power supplies exponential decay; both paths enclose the same
    poles, so the value is unchanged.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    if c is None:
        c = expr.strip.midpoint()
    if not expr.strip.contains(c):
        raise OutOfStrip(f"abscissa {c} outside strip "
                         f"({expr.strip.lower}, {expr.strip.upper})")
    log_u = math.log(u)
    rate = (math.pi / 2.0) * (
        sum(abs(b) for _, b in expr.num_factors)
        - sum(abs(d) for _, d in expr.den_factors))
    counter = _Counter()

    if rate >= _MIN_VERTICAL_RATE:
        def integrand(t):
            counter.n += 1
            s = complex(c, t)
            return math.exp(0.0) * np.real(
                np.exp(log_eval_complex(expr, s) - s * log_u)) / math.pi
        total, err = _sum_octaves(integrand, truncation, cfg)
    else:
        left_mass, right_mass = expr.slope_mass()
        w = expr.scale * u
        go_left = (left_mass > right_mass) or \
            (abs(left_mass - right_mass) <= 1e-12 and w <= 1.0)
        phi = 0.75 * math.pi if go_left else 0.25 * math.pi
        phase = complex(math.cos(phi), math.sin(phi))

        def integrand(r):
            counter.n += 1
            s = c + r * phase
            val = np.exp(log_eval_complex(expr, s) - s * log_u)
            return float(np.imag(phase * val)) / math.pi
        total, err = _sum_octaves(integrand, truncation, cfg)

    return EvalResult(total, err, "contour", {"fevals": counter.n})


def _sum_octaves(integrand, truncation, cfg: QuadConfig):
    """[0,T] + [T,2T] + ... with per-octave adaptive quadrature."""
    t0 = float(truncation) if truncation else _OCTAVE0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        total, err = integrate.quad(integrand, 0.0, t0,
                                    epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                    limit=cfg.max_subdivisions)
        lo = t0
        for _ in range(_MAX_OCTAVES):
            hi = 2.0 * lo
            piece, perr = integrate.quad(integrand, lo, hi,
                                         epsabs=cfg.abs_tol,
                                         epsrel=cfg.rel_tol, limit=400)
            total += piece
            err = max(err, perr)
            tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
            if abs(piece) < 0.25 * tol:
                return total, max(err, abs(piece))
            lo = hi
    raise SlowDecay("contour tail did not fall below tolerance "
                    f"by T = {lo}")
