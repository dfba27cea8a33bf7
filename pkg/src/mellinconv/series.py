"""Density evaluation by residue calculus.

Two routes live here:

* ``eval_by_residues`` sums residues of any gamma expression over its
  left or right pole family, which is the generic series route;
* ``eval_case`` dispatches to one of fourteen catalogued closed forms
  (products P2_1..P2_7, ratios P3_1..P3_7), each a short combination of
  gamma factors and hypergeometric series.

Each catalog entry states which pair of pathway families it covers;
parameters are converted internally from the model convention
(density ~ x^(alpha-1)) to the exponent convention (x^alpha) the
closed forms are written in.
"""

import math
from dataclasses import dataclass

from .exceptions import (BoundaryRegion, DivergentSeries, NoConvergence,
                         PatternMismatch, PoleCollision, SimplePoleViolation)
from .mellin import GammaExpr, poles
from .pathway import PRODUCT, RATIO, ConvolutionSpec, convolve, in_support
from .result import EvalResult
from .special import gamma_signed, hyp, hyp1f1_stable, hyp2f1_stable

# effective arguments within this band of 1 are refused for balanced
# (two-branch) expressions and routed to the quadrature backend
BOUNDARY_BAND = 1e-3

_COLLISION_TOL = 1e-9
_LOG_HUGE = 700.0

# when the honest error estimate of a series value exceeds this budget
# (cancellation between branch terms near a boundary, or between pole
# families), the point is routed to the quadrature/contour backend
_QUALITY_ABS = 5e-8
_QUALITY_REL = 2e-7


def _too_lossy(value: float, err: float) -> bool:
    return err > max(_QUALITY_ABS, _QUALITY_REL * abs(value))


# ---------------------------------------------------------------------------
# generic residue summation
# ---------------------------------------------------------------------------


def _pick_side(expr: GammaExpr, w: float) -> str:
    left_mass, right_mass = expr.slope_mass()
    if abs(left_mass - right_mass) <= 1e-12:
        return "left" if w < 1.0 else "right"
    return "left" if left_mass > right_mass else "right"


def _family_sum(expr: GammaExpr, fam, others, log_w: float, tol: float,
                max_terms: int):
    """Sum of residues of one pole family.

    The residue of Gamma(a + b s) at s = -(a+nu)/b carries weight
    (-1)^nu / (nu! |b|); the remaining factors are evaluated at the
    pole.  Terms are assembled in log space.
    """
    a_i, b_i = fam
    total = 0.0
    peak = 0.0
    small_run = 0
    last_abs = math.inf
    nu = 0
    zero_run = 0
    while nu < max_terms:
        s0 = -(a_i + nu) / b_i
        log_mag = math.log(expr.constant) - math.lgamma(nu + 1) \
            - math.log(abs(b_i)) - s0 * log_w
        sign = 1 if nu % 2 == 0 else -1
        dead = False
        for a, b in others:
            x = a + b * s0
            if abs(x - round(x)) <= 1e-12 and x < 0.5:
                raise PoleCollision(
                    f"factor Gamma({a}+{b}s) is singular at the pole s={s0}")
            sg, la = gamma_signed(x)
            log_mag += la
            sign *= sg
        for c, d in expr.den_factors:
            x = c + d * s0
            if abs(x - round(x)) <= 1e-12 and x < 0.5:
                dead = True  # 1/Gamma vanishes: the term is exactly zero
                break
            sg, la = gamma_signed(x)
            log_mag -= la
            sign *= sg
        if dead:
            zero_run += 1
            if zero_run >= 3:
                # denominator zeros recur with period 1 in nu: terminated
                return total, peak * 1e-16, nu + 1
            nu += 1
            continue
        zero_run = 0
        if log_mag > _LOG_HUGE:
            raise NoConvergence(
                f"residue terms overflow at nu={nu}; series diverges here")
        term = sign * math.exp(log_mag)
        total += term
        t_abs = abs(term)
        peak = max(peak, abs(total), t_abs)
        if t_abs <= tol * max(abs(total), 1e-300) and t_abs <= last_abs:
            small_run += 1
            if small_run >= 3:
                r = t_abs / last_abs if last_abs > 0 else 0.0
                tail = r / (1.0 - r) if r < 0.999 else 1000.0
                err = t_abs * (1.0 + tail) + peak * 1e-16 * math.sqrt(nu + 1.0)
                return total, err, nu + 1
        else:
            small_run = 0
        last_abs = t_abs
        nu += 1
    raise NoConvergence(f"residue series did not converge in {max_terms} terms")


def eval_by_residues(expr: GammaExpr, u: float, side: str = "auto",
                     tol: float = 1e-15, max_terms: int = 10000,
                     fallback: bool = True) -> EvalResult:
    """Density value at u as a sum of residues of expr * u^(-s).

    side="auto" picks the convergent pole family: the side with the
    larger gamma mass, or by effective argument (scale*u vs 1) when the
    two sides balance.  Pole collisions, balanced points too close to
    the branch boundary, and points where cancellation between pole
    families eats the accuracy are routed to the contour backend when
    fallback is enabled (collisions and boundary points raise
    otherwise).
    """
    if not u > 0:
        raise ValueError("u must be positive")
    w = expr.scale * u

    report = poles(expr, collision_tol=_COLLISION_TOL)
    if report.has_collision:
        if fallback:
            return _contour_fallback(expr, u, "pole collision")
        p, q, _ = report.collisions[0]
        raise PoleCollision(f"pole sequences of Gamma({p.factor[0]}+{p.factor[1]}s) "
                            f"and Gamma({q.factor[0]}+{q.factor[1]}s) coincide")
    if expr.is_balanced() and abs(w - 1.0) <= BOUNDARY_BAND:
        if fallback:
            return _contour_fallback(expr, u, "branch boundary")
        raise BoundaryRegion(f"effective argument {w} within {BOUNDARY_BAND} of 1")

    chosen = _pick_side(expr, w) if side == "auto" else side
    if chosen not in ("left", "right"):
        raise ValueError("side must be 'auto', 'left' or 'right'")
    families = [f.factor for f in (report.left if chosen == "left"
                                   else report.right)]
    if not families:
        raise NoConvergence(f"no {chosen} pole family to sum over")

    log_w = math.log(w)
    all_num = list(expr.num_factors)
    total = 0.0
    err = 0.0
    terms = 0
    mags = 0.0
    try:
        for fam in families:
            others = [f for f in all_num if f != fam]
            part, perr, n = _family_sum(expr, fam, others, log_w, tol, max_terms)
            total += part
            err += perr
            mags += abs(part)
            terms += n
    except (NoConvergence, PoleCollision):
        if fallback:
            return _contour_fallback(expr, u, "series failure")
        raise
    err += mags * 1e-15  # cancellation floor between families
    if fallback and _too_lossy(total, err):
        return _contour_fallback(expr, u, "precision loss")
    return EvalResult(total, err, "series",
                      {"terms": terms, "side": chosen})


def _contour_fallback(expr: GammaExpr, u: float, reason: str) -> EvalResult:
    from .quadrature import inverse_mellin_contour
    res = inverse_mellin_contour(expr, u)
    res.backend = "contour:fallback"
    res.counters["fallback_reason"] = reason
    return res


# ---------------------------------------------------------------------------
# the case catalog
# ---------------------------------------------------------------------------


CASE_IDS = ("P2_1", "P2_2", "P2_3", "P2_4", "P2_5", "P2_6", "P2_7",
            "P3_1", "P3_2", "P3_3", "P3_4", "P3_5", "P3_6", "P3_7")


def _is_std(m, family) -> bool:
    """Standard-form member: delta = 1, and unit scale for beta families."""
    if m.family != family or m.delta != 1.0:
        return False
    if family in ("Type1Beta", "Type2Beta"):
        return m.a == 1.0
    return True


def _shift(m) -> float:
    """Model alpha (power x^(alpha-1)) -> exponent convention (x^alpha)."""
    return m.alpha - 1.0


def _match(case: str, spec: ConvolutionSpec):
    """Extract the case's named parameters, or None on pattern mismatch."""
    f1, f2 = spec.f1, spec.f2
    k = spec.kind
    if case == "P2_1":
        if k == PRODUCT and _is_std(f1, "Type2Beta") and _is_std(f2, "GenGamma"):
            return dict(alpha=_shift(f1), beta=f1.beta, rho=_shift(f2), a=f2.a)
    elif case == "P2_2":
        if k == PRODUCT and _is_std(f1, "Type2Beta") and _is_std(f2, "Type2Beta"):
            return dict(alpha1=_shift(f1), beta1=f1.beta,
                        alpha2=_shift(f2), beta2=f2.beta)
    elif case == "P2_3":
        if k == PRODUCT and _is_std(f1, "Type1Beta") and _is_std(f2, "Type1Beta"):
            return dict(alpha1=_shift(f1), beta1=f1.beta,
                        alpha2=_shift(f2), beta2=f2.beta)
    elif case == "P2_4":
        if k == PRODUCT and _is_std(f1, "Type1Beta") and _is_std(f2, "GenGamma"):
            return dict(alpha=_shift(f1), beta=f1.beta, gamma=_shift(f2), a=f2.a)
    elif case == "P2_5":
        if k == PRODUCT and _is_std(f1, "Type1Beta") and _is_std(f2, "Type2Beta"):
            return dict(alpha=_shift(f1), beta=f1.beta,
                        gamma=_shift(f2), delta=f2.beta)
    elif case == "P2_6":
        if k == PRODUCT and _is_std(f1, "GenGamma") and _is_std(f2, "GenGamma"):
            return dict(alpha1=_shift(f1), a1=f1.a, alpha2=_shift(f2), a2=f2.a)
    elif case == "P2_7":
        if (k == PRODUCT and f1.family == "Type2Beta"
                and f2.family == "Type2Beta" and f1.delta == f2.delta):
            return dict(alpha1=_shift(f1), beta1=f1.beta, a1=f1.a,
                        alpha2=_shift(f2), beta2=f2.beta, a2=f2.a,
                        delta=f1.delta)
    elif case == "P3_1":
        if k == RATIO and _is_std(f1, "GenGamma") and _is_std(f2, "GenGamma"):
            return dict(alpha1=_shift(f1), a1=f1.a, alpha2=_shift(f2), a2=f2.a)
    elif case == "P3_2":
        if k == RATIO and _is_std(f1, "GenGamma") and _is_std(f2, "Type2Beta"):
            return dict(alpha1=_shift(f1), a1=f1.a,
                        alpha2=_shift(f2), beta2=f2.beta)
    elif case == "P3_3":
        if k == RATIO and _is_std(f1, "Type2Beta") and _is_std(f2, "GenGamma"):
            return dict(gamma=_shift(f1), delta=f1.beta,
                        alpha=_shift(f2), a=f2.a)
    elif case == "P3_4":
        if k == RATIO and _is_std(f1, "GenGamma") and _is_std(f2, "Type1Beta"):
            return dict(gamma=_shift(f1), a=f1.a, alpha=_shift(f2), beta=f2.beta)
    elif case == "P3_5":
        if k == RATIO and _is_std(f1, "Type1Beta") and _is_std(f2, "GenGamma"):
            return dict(alpha=_shift(f1), beta=f1.beta,
                        gamma=_shift(f2), a=f2.a)
    elif case == "P3_6":
        if k == RATIO and _is_std(f1, "Type1Beta") and _is_std(f2, "Type1Beta"):
            return dict(alpha1=_shift(f1), beta1=f1.beta,
                        alpha2=_shift(f2), beta2=f2.beta)
    elif case == "P3_7":
        if (k == RATIO and f1.family == "Type2Beta" and f2.family == "GenGamma"
                and f1.delta == f2.delta):
            return dict(alpha=_shift(f1), beta=f1.beta, a=f1.a,
                        gamma=_shift(f2), b=f2.a, delta=f1.delta)
    else:
        raise ValueError(f"unknown case {case!r}")
    return None


def match_case(spec: ConvolutionSpec):
    """CaseId whose pattern the spec satisfies, or None.

    Standard-form cases are preferred over the generalized ones when
    both apply (a unit-scale delta=1 pair matches P2_2 before P2_7).
    """
    for case in CASE_IDS:
        if _match(case, spec) is not None:
            return case
    return None


# -- helpers for assembling closed forms -------------------------------------


def _gpow(gammas, powers):
    """(sign, log) of a product of Gamma(x) factors and base**expo powers."""
    sign, log = 1, 0.0
    for x in gammas:
        sg, la = gamma_signed(x)
        sign *= sg
        log += la
    for base, expo in powers:
        log += expo * math.log(base)
    return sign, log


def _piece(gammas, powers, hyp_result, inv_gammas=()):
    """value and error of prod Gamma * prod powers / prod Gamma * pFq."""
    sign, log = _gpow(gammas, powers)
    for x in inv_gammas:
        sg, la = gamma_signed(x)
        sign *= sg
        log -= la
    if log > 700.0:
        raise NoConvergence("closed-form prefactor overflows double precision")
    mag = math.exp(log)
    return sign * mag * hyp_result.value, mag * hyp_result.error


# Each kernel function returns (K, err) with the density = expr.constant * K.
# w = expr.scale * u is the effective argument.


def _k_p2_1(p, u, w, tol):
    al, be, rho = p["alpha"], p["beta"], p["rho"]
    v1, e1 = _piece([rho - al, be + 1 + al], [(w, al)],
                    hyp1f1_stable(be + 1 + al, 1 + al - rho, w, tol))
    v2, e2 = _piece([al - rho, be + 1 + rho], [(w, rho)],
                    hyp1f1_stable(be + 1 + rho, 1 + rho - al, w, tol))
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p2_2(p, u, w, tol):
    a1, b1, a2, b2 = p["alpha1"], p["beta1"], p["alpha2"], p["beta2"]
    if w < 1.0:
        v1, e1 = _piece([a2 - a1, b1 + 1 + a1, b2 + 1 + a1], [(u, a1)],
                        hyp2f1_stable(b1 + 1 + a1, b2 + 1 + a1,
                                      1 + a1 - a2, u, tol))
        v2, e2 = _piece([a1 - a2, b1 + 1 + a2, b2 + 1 + a2], [(u, a2)],
                        hyp2f1_stable(b1 + 1 + a2, b2 + 1 + a2,
                                      1 + a2 - a1, u, tol))
    else:
        v1, e1 = _piece([b2 - b1, a1 + b1 + 1, a2 + b1 + 1], [(u, -b1 - 1)],
                        hyp2f1_stable(a1 + b1 + 1, a2 + b1 + 1,
                                      1 + b1 - b2, 1 / u, tol))
        v2, e2 = _piece([b1 - b2, a1 + b2 + 1, a2 + b2 + 1], [(u, -b2 - 1)],
                        hyp2f1_stable(a1 + b2 + 1, a2 + b2 + 1,
                                      1 + b2 - b1, 1 / u, tol))
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p2_3(p, u, w, tol):
    a1, b1, a2, b2 = p["alpha1"], p["beta1"], p["alpha2"], p["beta2"]
    v1, e1 = _piece([a2 - a1], [(u, a1)],
                    hyp2f1_stable(1 - b1, 1 + a1 - a2 - b2, 1 + a1 - a2, u, tol),
                    inv_gammas=[b1, a2 + b2 - a1])
    v2, e2 = _piece([a1 - a2], [(u, a2)],
                    hyp2f1_stable(1 - b2, 1 + a2 - a1 - b1, 1 + a2 - a1, u, tol),
                    inv_gammas=[b2, a1 + b1 - a2])
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p2_4(p, u, w, tol):
    al, be, ga = p["alpha"], p["beta"], p["gamma"]
    v1, e1 = _piece([ga - al], [(w, al)],
                    hyp1f1_stable(1 - be, 1 + al - ga, -w, tol),
                    inv_gammas=[be])
    v2, e2 = _piece([al - ga], [(w, ga)],
                    hyp1f1_stable(1 + ga - al - be, 1 + ga - al, -w, tol),
                    inv_gammas=[al + be - ga])
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p2_5(p, u, w, tol):
    al, be, ga, de = p["alpha"], p["beta"], p["gamma"], p["delta"]
    if u < 1.0:
        v1, e1 = _piece([ga - al, 1 + de + al], [(u, al)],
                        hyp2f1_stable(1 + de + al, 1 - be, 1 + al - ga, -u, tol),
                        inv_gammas=[be])
        v2, e2 = _piece([al - ga, 1 + de + ga], [(u, ga)],
                        hyp2f1_stable(1 + de + ga, 1 + ga - al - be,
                                      1 + ga - al, -u, tol),
                        inv_gammas=[al + be - ga])
        return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15
    v, e = _piece([al + 1 + de, ga + 1 + de], [(u, -1 - de)],
                  hyp2f1_stable(al + 1 + de, ga + 1 + de,
                                al + be + 1 + de, -1 / u, tol),
                  inv_gammas=[al + be + 1 + de])
    return v, e + abs(v) * 1e-15


def _k_p2_6(p, u, w, tol):
    a1, a2 = p["alpha1"], p["alpha2"]
    v1, e1 = _piece([a2 - a1], [(w, a1)], hyp((), (1 + a1 - a2,), w, tol))
    v2, e2 = _piece([a1 - a2], [(w, a2)], hyp((), (1 + a2 - a1,), w, tol))
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p2_7(p, u, w, tol):
    a1, b1, a2, b2, de = (p["alpha1"], p["beta1"], p["alpha2"],
                          p["beta2"], p["delta"])
    wd = w ** de
    if wd < 1.0:
        v1, e1 = _piece([(a2 - a1) / de, b1 + (a1 + 1) / de, b2 + (a1 + 1) / de],
                        [(w, a1), (de, 1)],
                        hyp2f1_stable(b1 + (a1 + 1) / de, b2 + (a1 + 1) / de,
                                      1 + (a1 - a2) / de, wd, tol))
        v2, e2 = _piece([(a1 - a2) / de, b1 + (a2 + 1) / de, b2 + (a2 + 1) / de],
                        [(w, a2), (de, 1)],
                        hyp2f1_stable(b1 + (a2 + 1) / de, b2 + (a2 + 1) / de,
                                      1 + (a2 - a1) / de, wd, tol))
    else:
        v1, e1 = _piece([b2 - b1, b1 + (a1 + 1) / de, b1 + (a2 + 1) / de],
                        [(w, -(b1 * de + 1)), (de, 1)],
                        hyp2f1_stable(b1 + (a1 + 1) / de, b1 + (a2 + 1) / de,
                                      1 + b1 - b2, 1 / wd, tol))
        v2, e2 = _piece([b1 - b2, b2 + (a1 + 1) / de, b2 + (a2 + 1) / de],
                        [(w, -(b2 * de + 1)), (de, 1)],
                        hyp2f1_stable(b2 + (a1 + 1) / de, b2 + (a2 + 1) / de,
                                      1 + b2 - b1, 1 / wd, tol))
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p3_1(p, u, w, tol):
    a1, a2 = p["alpha1"], p["alpha2"]
    n = 2 + a1 + a2
    if w < 1.0:
        v, e = _piece([n], [(w, a2)], hyp((n,), (), -w, tol))
    else:
        v, e = _piece([n], [(w, -2 - a1)], hyp((n,), (), -1 / w, tol))
    return v, e + abs(v) * 1e-15


def _k_p3_2(p, u, w, tol):
    a1, a2, b2 = p["alpha1"], p["alpha2"], p["beta2"]
    x = 1.0 / w
    v1, e1 = _piece([a2 + b2 + 1, 1 + a1 - b2], [(w, -1 - b2)],
                    hyp1f1_stable(1 + a2 + b2, b2 - a1, x, tol))
    v2, e2 = _piece([2 + a1 + a2, b2 - a1 - 1], [(w, -2 - a1)],
                    hyp1f1_stable(2 + a1 + a2, 2 + a1 - b2, x, tol))
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p3_3(p, u, w, tol):
    al, ga, de = p["alpha"], p["gamma"], p["delta"]
    v1, e1 = _piece([de - 1 - al, 2 + ga + al], [(w, al)],
                    hyp1f1_stable(2 + ga + al, 2 + al - de, w, tol))
    v2, e2 = _piece([1 + al - de, 1 + ga + de], [(w, de - 1)],
                    hyp1f1_stable(1 + ga + de, de - al, w, tol))
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


def _k_p3_4(p, u, w, tol):
    al, be, ga = p["alpha"], p["beta"], p["gamma"]
    v, e = _piece([2 + al + ga], [(w, -ga - 2)],
                  hyp1f1_stable(2 + al + ga, 2 + al + ga + be, -1 / w, tol),
                  inv_gammas=[2 + al + ga + be])
    return v, e + abs(v) * 1e-15


def _k_p3_5(p, u, w, tol):
    al, be, ga = p["alpha"], p["beta"], p["gamma"]
    v, e = _piece([2 + al + ga], [(w, ga)],
                  hyp1f1_stable(2 + al + ga, 2 + al + ga + be, -w, tol),
                  inv_gammas=[2 + al + ga + be])
    return v, e + abs(v) * 1e-15


def _k_p3_6(p, u, w, tol):
    a1, b1, a2, b2 = p["alpha1"], p["beta1"], p["alpha2"], p["beta2"]
    n = 2 + a1 + a2
    if u < 1.0:
        v, e = _piece([n], [(u, a2)],
                      hyp2f1_stable(1 - b2, n, n + b1, u, tol),
                      inv_gammas=[b2, n + b1])
    else:
        v, e = _piece([n], [(u, -2 - a1)],
                      hyp2f1_stable(1 - b1, n, n + b2, 1 / u, tol),
                      inv_gammas=[b1, n + b2])
    return v, e + abs(v) * 1e-15


def _k_p3_7(p, u, w, tol):
    al, be, ga, de = p["alpha"], p["beta"], p["gamma"], p["delta"]
    wd = w ** de
    v1, e1 = _piece([be - (ga + 1) / de, (2 + al + ga) / de],
                    [(w, ga), (de, 1)],
                    hyp1f1_stable((2 + al + ga) / de,
                                  1 + (ga + 1) / de - be, wd, tol))
    # the companion series mirrors the pole gap of the first one, so its
    # lower parameter is 1 + beta - (gamma+1)/delta
    v2, e2 = _piece([(ga + 1) / de - be, (al + 1) / de + be],
                    [(w, be * de - 1), (de, 1)],
                    hyp1f1_stable((al + 1) / de + be,
                                  1 + be - (ga + 1) / de, wd, tol))
    return v1 + v2, e1 + e2 + (abs(v1) + abs(v2)) * 1e-15


@dataclass(frozen=True)
class _CaseDef:
    kernel: callable
    balanced: bool           # two convergence branches split at w = 1


_CASES = {
    "P2_1": _CaseDef(_k_p2_1, False),
    "P2_2": _CaseDef(_k_p2_2, True),
    "P2_3": _CaseDef(_k_p2_3, False),   # support ends at u = 1
    "P2_4": _CaseDef(_k_p2_4, False),
    "P2_5": _CaseDef(_k_p2_5, True),
    "P2_6": _CaseDef(_k_p2_6, False),
    "P2_7": _CaseDef(_k_p2_7, True),
    "P3_1": _CaseDef(_k_p3_1, True),
    "P3_2": _CaseDef(_k_p3_2, False),
    "P3_3": _CaseDef(_k_p3_3, False),
    "P3_4": _CaseDef(_k_p3_4, False),
    "P3_5": _CaseDef(_k_p3_5, False),
    "P3_6": _CaseDef(_k_p3_6, True),
    "P3_7": _CaseDef(_k_p3_7, False),
}


def effective_argument(case: str, spec: ConvolutionSpec, u: float) -> float:
    """The combination the case's branch test uses (scale * u)."""
    return convolve(spec).scale * u


def eval_case(case: str, spec: ConvolutionSpec, u: float,
              tol: float = 1e-15, fallback: bool = True) -> EvalResult:
    """Density value from the catalogued closed form of one case.

    Includes all constant prefactors, so the result is the density
    g1(u) (products) or g2(u) (ratios) itself.  Pole collisions,
    branch-boundary points and points where the hypergeometric terms
    cancel too deeply are routed to the quadrature backend when
    fallback is enabled.
    """
    if case not in _CASES:
        raise ValueError(f"unknown case {case!r}")
    params = _match(case, spec)
    if params is None:
        raise PatternMismatch(f"spec does not match the {case} pattern")
    if not u > 0:
        raise ValueError("u must be positive")
    if not in_support(spec, u):
        raise ValueError(f"u = {u} outside the support of this convolution")

    expr = convolve(spec)
    cdef = _CASES[case]
    w = expr.scale * u

    report = poles(expr, collision_tol=_COLLISION_TOL)
    if report.has_collision:
        if fallback:
            return _quad_fallback(spec, u, "simple-pole violation")
        raise SimplePoleViolation(f"{case}: pole sequences coincide; the "
                                  "series form needs distinct simple poles")
    if cdef.balanced and abs(w - 1.0) <= BOUNDARY_BAND:
        if fallback:
            return _quad_fallback(spec, u, "branch boundary")
        raise BoundaryRegion(
            f"{case}: effective argument {w} within {BOUNDARY_BAND} of 1")

    try:
        k, k_err = cdef.kernel(params, u, w, tol)
    except (DivergentSeries, NoConvergence, OverflowError) as exc:
        if fallback:
            return _quad_fallback(spec, u, f"series failure: {exc}")
        raise
    value = expr.constant * k
    err = expr.constant * k_err + abs(value) * 1e-15
    if fallback and _too_lossy(value, err):
        return _quad_fallback(spec, u, "precision loss")
    return EvalResult(value, err, "series", {"case": case})


def _quad_fallback(spec: ConvolutionSpec, u: float, reason: str) -> EvalResult:
    from .quadrature import convolution_density_quad
    res = convolution_density_quad(spec, u)
    res.backend = "quad:fallback"
    res.counters["fallback_reason"] = reason
    return res
