"""Cross-backend verification harness.

Drives the series, quadrature, contour and Monte Carlo backends over
random valid parameter draws of every catalog case, checks their
pairwise agreement and the normalization of the densities, and
regenerates the CASE_NOTES table that records how each catalogued
closed form fared against the residue oracle.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .mc import mc_verify
from .mellin import min_pole_gap
from .pathway import (PRODUCT, RATIO, ConvolutionSpec, convolve, gen_gamma,
                      support_upper, type1_beta, type2_beta)
from .quadrature import QuadConfig, convolution_density_quad, \
    inverse_mellin_contour
from .series import _CASES, CASE_IDS, eval_by_residues, eval_case
from .special import gamma_signed, hyp

# pairwise agreement contract for the deterministic backends
CLOSURE_ABS = 1e-7
CLOSURE_REL = 1e-6

# Minimum simple-pole gap enforced on test draws.  The validity floor
# is 0.05, but gaps in [0.05, 0.15) push the two-branch connection
# formulas toward the logarithmic (confluent) regime: the paired terms
# carry Gamma(+-gap) ~ 1/gap and cancel, which in double precision
# costs more than the closure budget once the branch-edge amplification
# multiplies in.  Test draws therefore keep a wider margin.
_GAP = 0.15


def closure_tol(value: float) -> float:
    return max(CLOSURE_ABS, CLOSURE_REL * abs(value))


# ---------------------------------------------------------------------------
# parameter draws
# ---------------------------------------------------------------------------


def draw_spec(case: str, rng: np.random.Generator) -> ConvolutionSpec:
    """Random valid parameters for one case, pole gap >= 0.05.

    Ranges are desk-scale: shapes stay moderate so that the two-branch
    connection formulas keep their intrinsic cancellation below the
    closure tolerance on the test grids.
    """
    for _ in range(200):
        spec = _draw_once(case, rng)
        if min_pole_gap(convolve(spec)) >= _GAP:
            return spec
    raise RuntimeError(f"could not draw a well-separated {case} parameter set")


def _draw_once(case: str, rng) -> ConvolutionSpec:
    def am():
        return rng.uniform(0.45, 2.2)

    def be():
        return rng.uniform(0.35, 1.6)

    def sc():
        return rng.uniform(0.6, 1.8)

    if case == "P2_1":
        return ConvolutionSpec(PRODUCT, type2_beta(am(), be()), gen_gamma(am(), sc()))
    if case == "P2_2":
        return ConvolutionSpec(PRODUCT, type2_beta(am(), be()), type2_beta(am(), be()))
    if case == "P2_3":
        return ConvolutionSpec(PRODUCT, type1_beta(am(), be()), type1_beta(am(), be()))
    if case == "P2_4":
        return ConvolutionSpec(PRODUCT, type1_beta(am(), be()), gen_gamma(am(), sc()))
    if case == "P2_5":
        return ConvolutionSpec(PRODUCT, type1_beta(am(), be()), type2_beta(am(), be()))
    if case == "P2_6":
        return ConvolutionSpec(PRODUCT, gen_gamma(am(), sc()), gen_gamma(am(), sc()))
    if case == "P2_7":
        d = rng.uniform(0.85, 1.6)
        return ConvolutionSpec(PRODUCT,
                               type2_beta(rng.uniform(0.45, 1.8), rng.uniform(0.35, 1.5), sc(), d),
                               type2_beta(rng.uniform(0.45, 1.8), rng.uniform(0.35, 1.5), sc(), d))
    if case == "P3_1":
        return ConvolutionSpec(RATIO, gen_gamma(am(), sc()), gen_gamma(am(), sc()))
    if case == "P3_2":
        return ConvolutionSpec(RATIO, gen_gamma(am(), sc()), type2_beta(am(), be()))
    if case == "P3_3":
        return ConvolutionSpec(RATIO, type2_beta(am(), be()), gen_gamma(am(), sc()))
    if case == "P3_4":
        return ConvolutionSpec(RATIO, gen_gamma(am(), sc()), type1_beta(am(), be()))
    if case == "P3_5":
        return ConvolutionSpec(RATIO, type1_beta(am(), be()), gen_gamma(am(), sc()))
    if case == "P3_6":
        return ConvolutionSpec(RATIO, type1_beta(am(), be()), type1_beta(am(), be()))
    if case == "P3_7":
        d = rng.uniform(0.7, 1.6)
        return ConvolutionSpec(RATIO,
                               type2_beta(am(), be(), sc(), d),
                               gen_gamma(am(), sc(), d))
    raise ValueError(f"unknown case {case!r}")


# ---------------------------------------------------------------------------
# evaluation grids
# ---------------------------------------------------------------------------

# per-case range of the series argument; "kind" tells how the grid
# variable maps to u: w = scale*u, wd = (scale*u)^delta, x = 1/(scale*u)
_GRID_RULES = {
    "P2_1": ("w", 0.15, 5.0),
    "P2_2": ("w", None, None),      # balanced: branch grids
    "P2_3": ("u", 0.05, 0.90),
    "P2_4": ("w", 0.15, 6.0),
    "P2_5": ("w", None, None),
    "P2_6": ("w", 0.15, 6.0),
    "P2_7": ("wd", None, None),
    "P3_1": ("w", None, None),
    "P3_2": ("x", 0.15, 5.0),
    "P3_3": ("w", 0.15, 5.0),
    "P3_4": ("x", 0.15, 6.0),
    "P3_5": ("w", 0.15, 6.0),
    "P3_6": ("w", None, None),
    "P3_7": ("wd", 0.15, 5.0),
}

# the two-branch connection formulas cancel like (1 - arg)^(-S) near
# the boundary; these edges keep that amplification well below the
# closure tolerance for the draw ranges above
_LEFT_BRANCH = (0.08, 0.75)
_RIGHT_BRANCH = (4.0 / 3.0, 12.0)


def case_grid(case: str, spec: ConvolutionSpec, points_per_branch: int = 9):
    """u-grid covering each convergence branch of the case.

    Balanced cases get one grid per branch of the effective argument,
    clear of the boundary band; single-expression cases get one grid
    over a moderate range of the series argument.
    """
    kind, lo, hi = _GRID_RULES[case]
    z = convolve(spec).scale
    delta = spec.f1.delta

    def to_u(args):
        if kind == "u":
            return list(args)
        if kind == "w":
            return [a / z for a in args]
        if kind == "x":
            return [1.0 / (a * z) for a in args]
        return [a ** (1.0 / delta) / z for a in args]  # wd

    if _CASES[case].balanced:
        left = np.geomspace(*_LEFT_BRANCH, points_per_branch)
        right = np.geomspace(*_RIGHT_BRANCH, points_per_branch)
        return to_u(left) + to_u(right)
    args = np.geomspace(lo, hi, points_per_branch)
    return to_u(args)


# ---------------------------------------------------------------------------
# closure and normalization checks
# ---------------------------------------------------------------------------


@dataclass
class CaseReport:
    case: str
    n_draws: int
    n_points: int = 0
    max_pair_dev: float = 0.0
    max_pair_ratio: float = 0.0   # deviation / tolerance, worst point
    worst: dict = field(default_factory=dict)
    passed: bool = True
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"case": self.case, "n_draws": self.n_draws,
                "n_points": self.n_points, "max_pair_dev": self.max_pair_dev,
                "max_pair_ratio": self.max_pair_ratio, "worst": self.worst,
                "passed": self.passed, "failures": self.failures}


def closure_for_case(case: str, n_draws: int = 10, seed: int = 20240,
                     points_per_branch: int = 9,
                     series_factor: float = 1.0) -> CaseReport:
    """Series vs quadrature vs contour agreement over random draws.

    series_factor multiplies the series value (used to calibrate that
    the harness actually detects an injected perturbation).
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, _case_key(case)]))
    report = CaseReport(case=case, n_draws=n_draws)
    cfg = QuadConfig(abs_tol=1e-11, rel_tol=1e-10, max_subdivisions=2000)
    for _ in range(n_draws):
        spec = draw_spec(case, rng)
        expr = convolve(spec)
        for u in case_grid(case, spec, points_per_branch):
            s = eval_case(case, spec, u)
            if s.backend != "series":
                raise AssertionError(
                    f"{case}: series fell back at u={u}: {s.counters}")
            sv = s.value * series_factor
            q = convolution_density_quad(spec, u, cfg)
            c = inverse_mellin_contour(expr, u, cfg=cfg)
            vals = {"series": sv, "quad": q.value, "contour": c.value}
            report.n_points += 1
            scale = max(abs(v) for v in vals.values())
            tol = closure_tol(scale)
            for x, y in (("series", "quad"), ("series", "contour"),
                         ("quad", "contour")):
                dev = abs(vals[x] - vals[y])
                if dev > report.max_pair_dev:
                    report.max_pair_dev = dev
                    report.worst = {"u": u, "pair": f"{x}/{y}", **vals}
                report.max_pair_ratio = max(report.max_pair_ratio, dev / tol)
                if dev > tol:
                    report.passed = False
                    report.failures.append(
                        {"u": u, "pair": f"{x}/{y}", "dev": dev, "tol": tol,
                         **vals, "spec": spec.to_json_dict()})
    return report


def _case_key(case: str) -> int:
    return CASE_IDS.index(case) + 1


def normalization_for_case(case: str, spec: ConvolutionSpec,
                           tol: float = 1e-6) -> float:
    """Integral of the routed series density over the support.

    Splits the integration at the branch point of balanced cases;
    boundary-band points are routed to quadrature inside eval_case.
    """
    expr = convolve(spec)
    upper = support_upper(spec)

    def dens(u):
        return eval_case(case, spec, u).value

    pieces = []
    if math.isinf(upper):
        w_branch = 1.0 / expr.scale
        cuts = [0.0, min(w_branch, 1.0), max(w_branch, 1.0), max(4.0, 8 * w_branch)]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi > lo:
                pieces.append((lo, hi))
        pieces.append((cuts[-1], math.inf))
    else:
        pieces.append((0.0, upper))

    total = 0.0
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in pieces:
            if math.isinf(hi):
                val, _ = integrate.quad(
                    lambda t: dens(lo + t / (1 - t)) / (1 - t) ** 2, 0.0, 1.0,
                    epsabs=1e-9, epsrel=1e-8, limit=400)
            else:
                val, _ = integrate.quad(dens, lo, hi,
                                        epsabs=1e-9, epsrel=1e-8, limit=400)
            total += val
    return total


def mc_for_case(case: str, spec: ConvolutionSpec, seed: int = 7,
                n: int = 10 ** 6, n_points: int = 5, perturb: float = 1.0):
    """Monte Carlo z-check of the series backend at n_points grid points."""
    grid = case_grid(case, spec, points_per_branch=9)
    pick = np.linspace(1, len(grid) - 2, n_points).round().astype(int)
    pts = sorted({grid[i] for i in pick})

    def backend(u):
        if u <= 0 or (support_upper(spec) <= u):
            return 0.0
        return perturb * eval_case(case, spec, u).value

    return mc_verify(spec, backend, seed, n, pts)


# ---------------------------------------------------------------------------
# catalog notes: as-stated closed forms vs the residue oracle
# ---------------------------------------------------------------------------

# Cases whose closed form, exactly as conventionally stated, disagrees
# with the residue-derived oracle carry a variant implementation here;
# all other cases compare the implemented form itself (expected to sit
# at rounding level).


def _variant_p3_1(spec, u):
    # constant with Gamma(alpha1+1) repeated in both denominators
    a1m, a2m = spec.f1, spec.f2
    al1, al2 = a1m.alpha - 1, a2m.alpha - 1
    a1, a2 = a1m.a, a2m.a
    n = al1 + al2 + 2
    c = (a1 ** (al1 + 1) * a2 ** (al2 + 1)) / (math.gamma(al1 + 1) ** 2)
    return c * math.gamma(n) * u ** al2 * (a1 + a2 * u) ** (-n)


def _variant_p2_6(spec, u):
    # second term scale printed as (a1*a1*u)^alpha2
    f1, f2 = spec.f1, spec.f2
    al1, al2 = f1.alpha - 1, f2.alpha - 1
    a1, a2 = f1.a, f2.a
    w = a1 * a2 * u
    c = a1 * a2 / (math.gamma(al1 + 1) * math.gamma(al2 + 1))
    s1, l1 = gamma_signed(al2 - al1)
    t1 = s1 * math.exp(l1) * w ** al1 * hyp((), (1 + al1 - al2,), w).value
    s2, l2 = gamma_signed(al1 - al2)
    t2 = s2 * math.exp(l2) * (a1 * a1 * u) ** al2 \
        * hyp((), (1 + al2 - al1,), w).value
    return c * (t1 + t2)


def _variant_p2_7(spec, u):
    # first 2F1 argument printed as a1*a1*u^delta
    f1, f2 = spec.f1, spec.f2
    al1, be1, a1 = f1.alpha - 1, f1.beta, f1.a
    al2, be2, a2 = f2.alpha - 1, f2.beta, f2.a
    de = f1.delta
    z = (a1 * a2) ** (1.0 / de)
    w = z * u
    wd = a1 * a2 * u ** de
    wd_bad = a1 * a1 * u ** de
    if wd >= 1.0:
        return None  # the printed defect sits in the lower branch
    c = (a1 * a2) ** (1 / de) / (
        math.gamma((al1 + 1) / de) * math.gamma((al2 + 1) / de)
        * math.gamma(be1) * math.gamma(be2))

    def term(ai, aj, arg):
        s, l = gamma_signed((aj - ai) / de)
        val = s * math.exp(
            l + math.lgamma(be1 + (ai + 1) / de) + math.lgamma(be2 + (ai + 1) / de))
        f = hyp((be1 + (ai + 1) / de, be2 + (ai + 1) / de),
                (1 + (ai - aj) / de,), arg).value
        return de * val * w ** ai * f

    return c * (term(al1, al2, wd_bad) + term(al2, al1, wd))


def _variant_p3_7(spec, u):
    # second 1F1 lower parameter printed as 1 + beta - (alpha+1)/delta
    f1, f2 = spec.f1, spec.f2
    al, be, a = f1.alpha - 1, f1.beta, f1.a
    ga, b = f2.alpha - 1, f2.a
    de = f1.delta
    z = (b / a) ** (1.0 / de)
    w = z * u
    wd = (b / a) * u ** de
    c1 = z / (math.gamma((al + 1) / de) * math.gamma(be)
              * math.gamma((ga + 1) / de))
    s1, l1 = gamma_signed(be - (ga + 1) / de)
    t1 = s1 * math.exp(l1 + math.lgamma((2 + al + ga) / de)) * w ** ga \
        * hyp(((2 + al + ga) / de,), (1 + (ga + 1) / de - be,), wd).value
    s2, l2 = gamma_signed((ga + 1) / de - be)
    t2 = s2 * math.exp(l2 + math.lgamma((al + 1) / de + be)) \
        * w ** (be * de - 1) \
        * hyp(((al + 1) / de + be,), (1 + be - (al + 1) / de,), wd).value
    return c1 * de * (t1 + t2)


_VARIANTS = {
    "P3_1": (_variant_p3_1,
             "constant: the normalizer divides by Gamma(alpha_j+1) for "
             "j = 1, 2, not by Gamma(alpha_1+1) twice"),
    "P2_6": (_variant_p2_6,
             "second term scale: (a1*a2*u)^alpha2 replaces the printed "
             "(a1*a1*u)^alpha2"),
    "P2_7": (_variant_p2_7,
             "lower-branch 2F1 argument: a1*a2*u^delta replaces the "
             "printed a1*a1*u^delta; overall constant is the product of "
             "the two transform constants, not the delta^2 form"),
    "P3_7": (_variant_p3_7,
             "second 1F1 lower parameter: 1+beta-(gamma+1)/delta (the "
             "mirror of the pole gap), not 1+beta-(alpha+1)/delta"),
}

_NOTES_SEED = 31415


def case_notes_rows():
    """One row per case: (case, status, max deviation, note).

    The as-stated closed form of each case is evaluated at a fixed
    deterministic parameter draw and compared against the generic
    residue oracle; deviations beyond oracle accuracy mark the form as
    corrected.
    """
    rows = []
    for case in CASE_IDS:
        rng = np.random.default_rng(
            np.random.SeedSequence([_NOTES_SEED, _case_key(case)]))
        spec = draw_spec(case, rng)
        expr = convolve(spec)
        grid = case_grid(case, spec, points_per_branch=5)
        variant, note = _VARIANTS.get(case, (None, ""))
        max_dev = 0.0
        for u in grid:
            oracle = eval_by_residues(expr, u)
            if variant is not None:
                stated = variant(spec, u)
                if stated is None:
                    continue
            else:
                stated = eval_case(case, spec, u).value
            rel = abs(stated - oracle.value) / max(1e-300, abs(oracle.value))
            max_dev = max(max_dev, rel)
        status = "corrected" if case in _VARIANTS else "confirmed"
        rows.append((case, status, max_dev, note))
    return rows


def render_case_notes() -> str:
    rows = case_notes_rows()
    lines = [
        "# Case catalog verification notes",
        "",
        "Every closed form in the series backend is gated by the generic",
        "residue oracle (and, independently, by convolution quadrature).",
        "The table records, at a fixed deterministic parameter draw, the",
        "maximum relative deviation of the *as-stated* form of each case",
        "from the residue oracle.  Entries marked `corrected` implement a",
        "repaired form; their deviation column shows how far the as-stated",
        "expression is from the true density.",
        "",
        "| case | status | max relative deviation (as-stated vs oracle) | correction |",
        "|------|--------|---------------------------------------------|------------|",
    ]
    for case, status, dev, note in rows:
        lines.append(f"| {case} | {status} | {dev:.3e} | {note or '-'} |")
    lines.append("")
    lines.append("Regenerate with `mellinconv verify --case all` or "
                 "`python -m mellinconv.verify`.")
    lines.append("")
    return "\n".join(lines)


def write_case_notes(path: str) -> str:
    text = render_case_notes()
    with open(path, "w", encoding="utf8") as fh:
        fh.write(text)
    return text


if __name__ == "__main__":
    import os
    out = os.path.join(os.path.dirname(os.path.dirname(
        os.path.dirname(os.path.abspath(__file__)))), "CASE_NOTES.md")
    write_case_notes(out)
    print(f"wrote {out}")
