"""Symbolic algebra of Mellin transforms as gamma-factor expressions.

A transform is stored in the normal form

    C * z^(-s) * prod_i Gamma(a_i + b_i s) / prod_j Gamma(c_j + d_j s)

together with its open strip of analyticity.  Product and ratio
convolution, pole bookkeeping and the map to Mellin-Barnes (H/G
function) parameter form all operate on this normal form.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma as _cx_loggamma

from .exceptions import EmptyStrip, OutOfStrip, UnsupportedExpression
from .special import gamma_signed

_INF = math.inf


@dataclass(frozen=True)
class Strip:
    """Open interval {s : lower < s < upper} where a transform converges."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise EmptyStrip(f"empty strip ({self.lower}, {self.upper})")

    def contains(self, s: float) -> bool:
        return self.lower < s < self.upper

    def intersect(self, other: "Strip") -> "Strip":
        lo = max(self.lower, other.lower)
        hi = min(self.upper, other.upper)
        if not lo < hi:
            raise EmptyStrip(f"strips ({self.lower},{self.upper}) and "
                             f"({other.lower},{other.upper}) do not intersect")
        return Strip(lo, hi)

    def midpoint(self) -> float:
        """Default contour abscissa: midpoint, or 1 inside an unbounded end."""
        if math.isfinite(self.lower) and math.isfinite(self.upper):
            return 0.5 * (self.lower + self.upper)
        if math.isfinite(self.lower):
            return self.lower + 1.0
        if math.isfinite(self.upper):
            return self.upper - 1.0
        return 0.0


@dataclass(frozen=True)
class GammaExpr:
    """Mellin transform in gamma-product normal form."""

    constant: float
    scale: float
    num_factors: tuple        # of (offset, slope), slope != 0
    den_factors: tuple
    strip: Strip

    def __post_init__(self):
        if not self.constant > 0:
            raise ValueError("constant must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        for off, slope in tuple(self.num_factors) + tuple(self.den_factors):
            if slope == 0:
                raise ValueError("zero slope in gamma factor")

    # -- structural measures -------------------------------------------------

    def slope_mass(self) -> tuple[float, float]:
        """(left, right) gamma mass: sum of |slope| of positive-slope
        factors minus positive-slope denominators, and same for negative."""
        left = sum(b for _, b in self.num_factors if b > 0)
        left -= sum(d for _, d in self.den_factors if d > 0)
        right = sum(-b for _, b in self.num_factors if b < 0)
        right -= sum(-d for _, d in self.den_factors if d < 0)
        return left, right

    def is_balanced(self, tol: float = 1e-12) -> bool:
        left, right = self.slope_mass()
        return abs(left - right) <= tol


def eval_gamma_expr(expr: GammaExpr, s: float) -> float:
    """Numeric value of the expression at real s inside the strip."""
    if not expr.strip.contains(s):
        raise OutOfStrip(f"s = {s} outside strip "
                         f"({expr.strip.lower}, {expr.strip.upper})")
    log = math.log(expr.constant) - s * math.log(expr.scale)
    sign = 1
    for a, b in expr.num_factors:
        sg, la = gamma_signed(a + b * s)
        log += la
        sign *= sg
    for c, d in expr.den_factors:
        sg, la = gamma_signed(c + d * s)
        log -= la
        sign *= sg
    return sign * math.exp(log)


def log_eval_complex(expr: GammaExpr, s: complex) -> complex:
    """log of the expression at complex s (principal branches), used by
    the contour backend.  Accepts numpy arrays of s."""
    s = np.asarray(s, dtype=complex)
    out = math.log(expr.constant) - s * math.log(expr.scale)
    for a, b in expr.num_factors:
        out = out + _cx_loggamma(a + b * s)
    for c, d in expr.den_factors:
        out = out - _cx_loggamma(c + d * s)
    return out


def product_convolve(m1: GammaExpr, m2: GammaExpr) -> GammaExpr:
    """Transform of the product density: pointwise product of transforms."""
    return GammaExpr(
        constant=m1.constant * m2.constant,
        scale=m1.scale * m2.scale,
        num_factors=tuple(m1.num_factors) + tuple(m2.num_factors),
        den_factors=tuple(m1.den_factors) + tuple(m2.den_factors),
        strip=m1.strip.intersect(m2.strip),
    )


def reflect(expr: GammaExpr) -> GammaExpr:
    """Substitute s -> 2 - s.

    Gamma(a + b s) becomes Gamma((a + 2b) - b s); the power z^(-s)
    becomes z^(-2) * (1/z)^(-s); the strip maps to (2-upper, 2-lower).
    """
    return GammaExpr(
        constant=expr.constant * expr.scale ** (-2),
        scale=1.0 / expr.scale,
        num_factors=tuple((a + 2 * b, -b) for a, b in expr.num_factors),
        den_factors=tuple((c + 2 * d, -d) for c, d in expr.den_factors),
        strip=Strip(2.0 - expr.strip.upper, 2.0 - expr.strip.lower),
    )


def ratio_convolve(m_num: GammaExpr, m_den: GammaExpr) -> GammaExpr:
    """Transform of the ratio density u = x_num / x_den.

    E[u^(s-1)] = M_num(s) * M_den(2-s), so the denominator transform is
    reflected and then multiplied in.
    """
    return product_convolve(m_num, reflect(m_den))


# -- poles --------------------------------------------------------------------


@dataclass(frozen=True)
class PoleSequence:
    """Arithmetic pole sequence s_nu = start + nu*step of one gamma factor."""

    factor: tuple            # (offset, slope) that generated the poles
    side: str                # "left" (slope > 0) or "right" (slope < 0)
    start: float
    step: float

    def __getitem__(self, nu: int) -> float:
        return self.start + nu * self.step

    def first(self, k: int) -> list[float]:
        return [self[nu] for nu in range(k)]


@dataclass(frozen=True)
class PoleReport:
    left: tuple
    right: tuple
    collisions: tuple = field(default=())

    @property
    def has_collision(self) -> bool:
        return len(self.collisions) > 0


def poles(expr: GammaExpr, collision_tol: float = 1e-9,
          collision_depth: int = 50) -> PoleReport:
    """Pole sequences of the numerator factors, plus a collision report.

    Left sequences come from positive slopes (s = -(offset+nu)/slope),
    right sequences from negative slopes.  Denominator factors have no
    poles.  Any pair of same-side sequences with coinciding elements
    (within collision_tol, up to collision_depth) is flagged.
    """
    left, right = [], []
    for a, b in expr.num_factors:
        seq = PoleSequence(factor=(a, b), side="left" if b > 0 else "right",
                           start=-a / b, step=-1.0 / b)
        (left if b > 0 else right).append(seq)
    collisions = []
    for group in (left, right):
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                hit = _sequences_collide(group[i], group[j],
                                         collision_tol, collision_depth)
                if hit is not None:
                    collisions.append((group[i], group[j], hit))
    return PoleReport(tuple(left), tuple(right), tuple(collisions))


def _sequences_collide(p: PoleSequence, q: PoleSequence, tol: float,
                       depth: int):
    """First coinciding pair of indices, or None."""
    for nu in range(depth):
        x = p[nu]
        # q index closest to x
        mu = round((x - q.start) / q.step)
        if 0 <= mu < depth and abs(x - q[int(mu)]) <= tol:
            return (nu, int(mu))
    return None


def min_pole_gap(expr: GammaExpr, depth: int = 50) -> float:
    """Smallest distance between elements of distinct same-side pole
    sequences; inf when each side has at most one sequence."""
    report = poles(expr, collision_tol=math.inf, collision_depth=depth)
    best = math.inf
    for group in (report.left, report.right):
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                a = np.array(group[i].first(depth))
                b = np.array(group[j].first(depth))
                best = min(best, float(np.min(np.abs(a[:, None] - b[None, :]))))
    return best


# -- H-function parameter form -------------------------------------------------


@dataclass(frozen=True)
class HFunctionParams:
    """Mellin-Barnes parameter block.

    Kernel convention:

        prod_{j<=m} Gamma(b_j + B_j s) * prod_{j<=n} Gamma(1 - a_j - A_j s)
        / [ prod_{j>n} Gamma(a_j + A_j s) * prod_{j>m} Gamma(1 - b_j - B_j s) ]
        * z^(-s)

    with the contour separating the left pole family (from the b's)
    from the right one (from the first n a's).  All A_j = B_j = 1
    reduces this to a G-function parameterization.
    """

    m: int
    n: int
    p: int
    q: int
    upper: tuple             # p pairs (a_j, A_j); first n from numerator
    lower: tuple             # q pairs (b_j, B_j); first m from numerator
    prefactor: float
    argument_scale: float

    def is_g_function(self, tol: float = 1e-12) -> bool:
        return all(abs(A - 1.0) <= tol for _, A in self.upper) and \
            all(abs(B - 1.0) <= tol for _, B in self.lower)


def to_h_function(expr: GammaExpr) -> HFunctionParams:
    """Map the gamma expression onto H-function parameters.

    Numerator factors with positive slope become the first m lower
    pairs (b_j, B_j) = (offset, slope); numerator factors with negative
    slope become the first n upper pairs (a_j, A_j) = (1-offset, -slope).
    Denominator factors fill the remaining positions: positive slopes
    append to the upper list as (offset, slope), negative slopes append
    to the lower list as (1-offset, -slope).
    """
    lower_num = [(a, b) for a, b in expr.num_factors if b > 0]
    upper_num = [(1.0 - a, -b) for a, b in expr.num_factors if b < 0]
    upper_den = [(c, d) for c, d in expr.den_factors if d > 0]
    lower_den = [(1.0 - c, -d) for c, d in expr.den_factors if d < 0]
    m, n = len(lower_num), len(upper_num)
    upper = tuple(upper_num + upper_den)
    lower = tuple(lower_num + lower_den)
    return HFunctionParams(m=m, n=n, p=len(upper), q=len(lower),
                           upper=upper, lower=lower,
                           prefactor=expr.constant,
                           argument_scale=expr.scale)


def from_h_function(params: HFunctionParams, strip: Strip) -> GammaExpr:
    """Rebuild the gamma expression from an H parameter block."""
    num, den = [], []
    for j, (b, B) in enumerate(params.lower):
        if j < params.m:
            num.append((b, B))
        else:
            den.append((1.0 - b, -B))
    for j, (a, A) in enumerate(params.upper):
        if j < params.n:
            num.append((1.0 - a, -A))
        else:
            den.append((a, A))
    return GammaExpr(constant=params.prefactor, scale=params.argument_scale,
                     num_factors=tuple(num), den_factors=tuple(den),
                     strip=strip)


# -- pretty printing -----------------------------------------------------------


def _fmt_num(x: float) -> str:
    if abs(x - round(x)) < 1e-12:
        return str(int(round(x)))
    return f"{x:.6g}"


def _fmt_factor(offset: float, slope: float) -> str:
    if slope == 1.0:
        inner = f"{_fmt_num(offset)}+s" if offset != 0 else "s"
    elif slope == -1.0:
        inner = f"{_fmt_num(offset)}-s"
    else:
        sl = _fmt_num(abs(slope))
        op = "+" if slope > 0 else "-"
        inner = f"{_fmt_num(offset)}{op}{sl}s" if offset != 0 else \
            (f"{sl}s" if slope > 0 else f"-{sl}s")
    return f"Γ({inner})"


def format_expr(expr: GammaExpr) -> str:
    """Human-readable rendering, e.g. '0.5 * Γ(s)Γ(2-s) * (3u)^{-s}'."""
    num = "".join(_fmt_factor(a, b) for a, b in expr.num_factors) or "1"
    parts = []
    if abs(expr.constant - 1.0) > 1e-12:
        parts.append(_fmt_num(expr.constant))
    parts.append(num)
    if expr.den_factors:
        den = "".join(_fmt_factor(c, d) for c, d in expr.den_factors)
        parts[-1] = parts[-1] + "/" + den
    if abs(expr.scale - 1.0) > 1e-12:
        parts.append(f"({_fmt_num(expr.scale)}u)^{{-s}}")
    else:
        parts.append("u^{-s}")
    return " * ".join(parts)


def format_h_function(params: HFunctionParams) -> str:
    kind = "G" if params.is_g_function() else "H"
    if kind == "G":
        up = ",".join(_fmt_num(a) for a, _ in params.upper) or "-"
        lo = ",".join(_fmt_num(b) for b, _ in params.lower) or "-"
    else:
        up = ",".join(f"({_fmt_num(a)},{_fmt_num(A)})" for a, A in params.upper) or "-"
        lo = ",".join(f"({_fmt_num(b)},{_fmt_num(B)})" for b, B in params.lower) or "-"
    arg = f"{_fmt_num(params.argument_scale)}u" if params.argument_scale != 1.0 else "u"
    return (f"{kind}^{{{params.m},{params.n}}}_{{{params.p},{params.q}}}"
            f"[{arg} | {up} ; {lo}]")
