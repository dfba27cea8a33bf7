"""Scalar special-function kernels: log-gamma, signed gamma, Pochhammer
symbols and a generalized hypergeometric series evaluator.

Everything here is a pure function; series are accumulated in
log-magnitude-plus-sign form so that large gamma prefactors cancel
before they overflow.
"""

import math
from dataclasses import dataclass

from .exceptions import BadDenominator, DivergentSeries, NoConvergence, PoleError
from .result import EvalResult

# refusal band for p = q+1 series near |z| = 1 (matches the branch
# boundary band used by the density backends)
_EDGE_BAND = 1e-3

_INT_TOL = 1e-12


def _near_nonpositive_int(x: float, tol: float = _INT_TOL) -> bool:
    """True when x is within tol of 0, -1, -2, ..."""
    if x > 0.5:
        return False
    return abs(x - round(x)) <= tol


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def gamma_signed(x: float) -> tuple[int, float]:
    """(sign, ln|Gamma(x)|) for any x that is not a non-positive integer.

    Negative arguments go through the reflection formula
    Gamma(x)Gamma(1-x) = pi / sin(pi x).
    """
    if x >= 0.5:
        return 1, math.lgamma(x)
    n = math.floor(x)
    r = x - n  # fractional part in [0, 1)
    if r == 0.0 and x <= 0.0:
        raise PoleError(f"gamma pole at x = {x}")
    # |sin(pi x)| = sin(pi r); sign of sin(pi x) alternates with floor(x)
    sin_mag = math.sin(math.pi * r)
    sign = 1 if n % 2 == 0 else -1
    log_abs = math.log(math.pi) - math.log(sin_mag) - math.lgamma(1.0 - x)
    return sign, log_abs


def gamma_value(x: float) -> float:
    """Gamma(x) as a plain float (may overflow for large x)."""
    s, la = gamma_signed(x)
    return s * math.exp(la)


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a(a+1)...(a+n-1), with (a)_0 = 1.

    Exact (including the zero) when the product terminates.
    """
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    out = 1.0
    for k in range(n):
        out *= a + k
    return out


@dataclass(frozen=True)
class HypSeriesSpec:
    """Parameters of a generalized hypergeometric series pFq.

    numerator_params are the upper ("a") parameters, denominator_params
    the lower ("b") parameters, argument the point z.
    """

    numerator_params: tuple
    denominator_params: tuple
    argument: float

    @property
    def p(self) -> int:
        return len(self.numerator_params)

    @property
    def q(self) -> int:
        return len(self.denominator_params)


def _termination_index(num_params) -> int | None:
    """Smallest n with some (a)_{n+1} = 0, or None if non-terminating."""
    best = None
    for a in num_params:
        if _near_nonpositive_int(a):
            n = int(round(-a))
            if best is None or n < best:
                best = n
    return best


def hyp_series(spec: HypSeriesSpec, tol: float = 1e-12,
               max_terms: int = 10000) -> EvalResult:
    """Sum a pFq series with a sustained relative-tail stopping rule.

    Stops once |term| <= tol*|partial sum| holds for 3 consecutive
    terms (and the terms are no longer growing); the reported error is
    the magnitude of the last included term.
    """
    num = tuple(float(a) for a in spec.numerator_params)
    den = tuple(float(b) for b in spec.denominator_params)
    z = float(spec.argument)

    n_stop = _termination_index(num)

    for b in den:
        if _near_nonpositive_int(b):
            # a terminating numerator that cuts the series before the
            # denominator pole would save us, but the series is still
            # conventionally undefined; refuse uniformly
            raise BadDenominator(f"lower parameter {b} is a non-positive integer")

    if z == 0.0:
        return EvalResult(1.0, 0.0, "series", {"terms": 1})

    p, q = len(num), len(den)
    if n_stop is None:
        if p == q + 1 and abs(z) >= 1.0 - _EDGE_BAND:
            raise DivergentSeries(
                f"{p}F{q} at |z| = {abs(z):.6g} is outside the convergence disk")
        if p > q + 1:
            raise DivergentSeries(f"{p}F{q} diverges for z != 0")

    # term_n tracked as sign * exp(log_mag); sum accumulated in floats
    log_mag = 0.0
    sign = 1
    total = 1.0
    peak = 1.0
    last_abs = 1.0
    small_run = 0
    n = 0
    while n < max_terms:
        if n_stop is not None and n >= n_stop:
            return EvalResult(total, peak * 1e-16 * math.sqrt(n + 1.0),
                              "series", {"terms": n + 1})
        ratio_log = math.log(abs(z)) - math.log(n + 1.0)
        ratio_sign = 1 if z > 0 else -1
        dead = False
        for a in num:
            f = a + n
            if f == 0.0:
                dead = True
                break
            ratio_log += math.log(abs(f))
            if f < 0:
                ratio_sign = -ratio_sign
        if dead:
            return EvalResult(total, peak * 1e-16 * math.sqrt(n + 1.0),
                              "series", {"terms": n + 1})
        for b in den:
            f = b + n
            ratio_log -= math.log(abs(f))
            if f < 0:
                ratio_sign = -ratio_sign
        log_mag += ratio_log
        sign *= ratio_sign
        if log_mag > 700.0:
            # the partial sums leave double range before the terms turn
            # around; any cancellation is unrecoverable in this precision
            raise NoConvergence(
                f"series terms overflow double precision at n={n} (z={z})")
        term = sign * math.exp(log_mag)
        total += term
        t_abs = abs(term)
        peak = max(peak, abs(total), t_abs)
        if t_abs <= tol * max(abs(total), 1e-300) and t_abs <= last_abs:
            small_run += 1
            if small_run >= 3:
                # geometric tail bound from the last step ratio, plus a
                # rounding floor that grows with the summation length
                r = math.exp(ratio_log)
                tail_factor = r / (1.0 - r) if r < 0.999 else 1000.0
                err = t_abs * (1.0 + tail_factor) \
                    + peak * 1e-16 * math.sqrt(n + 1.0)
                return EvalResult(total, err, "series", {"terms": n + 2})
        else:
            small_run = 0
        last_abs = t_abs
        n += 1

    raise NoConvergence(
        f"hypergeometric series did not converge in {max_terms} terms "
        f"(p={p}, q={q}, z={z})")


def hyp(num, den, z, tol: float = 1e-12, max_terms: int = 10000) -> EvalResult:
    """Convenience wrapper around hyp_series."""
    return hyp_series(HypSeriesSpec(tuple(num), tuple(den), z), tol, max_terms)


def hyp1f1_stable(a: float, b: float, z: float, tol: float = 1e-12) -> EvalResult:
    """1F1(a; b; z), using the Kummer reflection for z < 0.

    1F1(a;b;z) = e^z 1F1(b-a;b;-z) turns an alternating series into a
    (mostly) positive one, avoiding cancellation at large |z|.
    """
    if z >= 0.0:
        return hyp((a,), (b,), z, tol)
    inner = hyp((b - a,), (b,), -z, tol)
    fac = math.exp(z)
    return EvalResult(fac * inner.value, fac * inner.error + abs(inner.value) * fac * 1e-16,
                      "series", dict(inner.counters))


def hyp2f1_stable(a: float, b: float, c: float, z: float,
                  tol: float = 1e-12) -> EvalResult:
    """2F1(a, b; c; z), applying a Pfaff map for z < 0.

    2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)) moves a negative
    argument to (0, 1), which both converges faster and sums with
    fewer sign changes.
    """
    if z >= 0.0:
        return hyp((a, b), (c,), z, tol)
    w = z / (z - 1.0)
    inner = hyp((a, c - b), (c,), w, tol)
    fac = (1.0 - z) ** (-a)
    return EvalResult(fac * inner.value, abs(fac) * inner.error
                      + abs(fac * inner.value) * 1e-16,
                      "series", dict(inner.counters))
