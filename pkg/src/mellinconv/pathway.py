"""The three pathway density families and their Mellin transforms.

Families (density carries x^(alpha-1), scale a, power delta):

  Type1Beta : c1 * x^(alpha-1) (1 - a x^delta)^(beta-1)   on 1 - a x^delta > 0
  Type2Beta : c2 * x^(alpha-1) (1 + a x^delta)^-(alpha/delta+beta)  on x >= 0
  GenGamma  : c3 * x^(alpha-1) exp(-a x^delta)            on x >= 0

with the normalizing constants that make each integrate to one.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .mellin import GammaExpr, Strip, product_convolve, ratio_convolve

FAMILIES = ("Type1Beta", "Type2Beta", "GenGamma")

PRODUCT = "Product"
RATIO = "Ratio"


@dataclass(frozen=True)
class PathwayModel:
    family: str
    alpha: float
    a: float = 1.0
    delta: float = 1.0
    beta: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not (self.a > 0 and self.delta > 0 and self.alpha > 0):
            raise ValueError("need a > 0, delta > 0, alpha > 0")
        if self.family == "GenGamma":
            if self.beta is not None:
                raise ValueError("GenGamma takes no beta")
        else:
            if self.beta is None or not self.beta > 0:
                raise ValueError(f"{self.family} needs beta > 0")

    # -- support ---------------------------------------------------------

    def support_upper(self) -> float:
        """Upper end of the support (lower end is always 0)."""
        if self.family == "Type1Beta":
            return (1.0 / self.a) ** (1.0 / self.delta)
        return math.inf

    def scale_hint(self) -> float:
        """Order-of-magnitude location of the density's mass, used by
        the quadrature backend to seed breakpoints."""
        if self.family == "Type1Beta":
            return 0.5 * self.support_upper()
        return (max(self.alpha, 1.0) / (self.delta * self.a)) ** (1.0 / self.delta)

    # -- density ---------------------------------------------------------

    def log_norm(self) -> float:
        """log of the normalizing constant."""
        al, be, a, d = self.alpha, self.beta, self.a, self.delta
        if self.family == "GenGamma":
            return math.log(d) + (al / d) * math.log(a) - math.lgamma(al / d)
        return (math.log(d) + (al / d) * math.log(a)
                + math.lgamma(al / d + be) - math.lgamma(al / d)
                - math.lgamma(be))

    def pdf(self, x):
        """Density value; exactly 0 outside the support."""
        x = np.asarray(x, dtype=float)
        al, be, a, d = self.alpha, self.beta, self.a, self.delta
        c = math.exp(self.log_norm())
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.family == "Type1Beta":
                core = 1.0 - a * x ** d
                ok = (x > 0) & (core > 0)
                val = np.where(ok, c * x ** (al - 1.0)
                               * np.where(ok, core, 1.0) ** (be - 1.0), 0.0)
            elif self.family == "Type2Beta":
                ok = x > 0
                val = np.where(ok, c * x ** (al - 1.0)
                               * (1.0 + a * x ** d) ** -(al / d + be), 0.0)
            else:
                ok = x > 0
                val = np.where(ok, c * x ** (al - 1.0) * np.exp(-a * x ** d), 0.0)
        return val if val.ndim else float(val)

    # -- Mellin transform --------------------------------------------------

    def strip(self) -> Strip:
        al, be, d = self.alpha, self.beta, self.delta
        if self.family == "Type2Beta":
            return Strip(1.0 - al, be * d + 1.0)
        return Strip(1.0 - al, math.inf)

    def mellin_transform(self) -> GammaExpr:
        """Closed-form transform E[x^(s-1)] as a GammaExpr.

        All three families share scale z = a^(1/delta) and the factor
        Gamma((alpha-1)/delta + s/delta); the beta families add a second
        gamma (numerator for type-2, denominator for type-1).
        """
        al, be, a, d = self.alpha, self.beta, self.a, self.delta
        z = a ** (1.0 / d)
        base = ((al - 1.0) / d, 1.0 / d)
        if self.family == "GenGamma":
            c = z / math.gamma(al / d) if al / d < 170 else \
                z * math.exp(-math.lgamma(al / d))
            return GammaExpr(c, z, (base,), (), self.strip())
        if self.family == "Type2Beta":
            c = z * math.exp(-math.lgamma(al / d) - math.lgamma(be))
            second = (be + 1.0 / d, -1.0 / d)
            return GammaExpr(c, z, (base, second), (), self.strip())
        # Type1Beta
        c = z * math.exp(math.lgamma(al / d + be) - math.lgamma(al / d))
        den = ((al - 1.0) / d + be, 1.0 / d)
        return GammaExpr(c, z, (base,), (den,), self.strip())

    # -- sampling ----------------------------------------------------------

    def sample(self, seed, n: int) -> np.ndarray:
        """n i.i.d. draws, deterministic given seed.

        Draws the standard base variate (gamma, beta, or gamma ratio),
        then applies x -> (x/a)^(1/delta).
        """
        rng = seed if isinstance(seed, np.random.Generator) \
            else np.random.default_rng(np.random.SeedSequence(seed))
        al, be, a, d = self.alpha, self.beta, self.a, self.delta
        if self.family == "GenGamma":
            base = rng.gamma(al / d, size=n)
        elif self.family == "Type1Beta":
            base = rng.beta(al / d, be, size=n)
        else:
            # type-2 beta as a ratio of two gammas
            g1 = rng.gamma(al / d, size=n)
            g2 = rng.gamma(be, size=n)
            base = g1 / g2
        return (base / a) ** (1.0 / d)

    # -- JSON --------------------------------------------------------------

    def to_json_dict(self) -> dict:
        out = {"family": self.family, "alpha": self.alpha,
               "a": self.a, "delta": self.delta}
        if self.beta is not None:
            out["beta"] = self.beta
        return out

    @staticmethod
    def from_json_dict(d: dict) -> "PathwayModel":
        return PathwayModel(family=d["family"], alpha=float(d["alpha"]),
                            a=float(d.get("a", 1.0)),
                            delta=float(d.get("delta", 1.0)),
                            beta=float(d["beta"]) if "beta" in d else None)


def type1_beta(alpha, beta, a=1.0, delta=1.0) -> PathwayModel:
    return PathwayModel("Type1Beta", alpha, a, delta, beta)


def type2_beta(alpha, beta, a=1.0, delta=1.0) -> PathwayModel:
    return PathwayModel("Type2Beta", alpha, a, delta, beta)


def gen_gamma(alpha, a=1.0, delta=1.0) -> PathwayModel:
    return PathwayModel("GenGamma", alpha, a, delta=delta)


# -- convolution specs ----------------------------------------------------------


@dataclass(frozen=True)
class ConvolutionSpec:
    """A product u = x1*x2 or ratio u = x2/x1 of two independent pathway
    variables; f1 is always attached to x1 (the ratio denominator)."""

    kind: str
    f1: PathwayModel
    f2: PathwayModel

    def __post_init__(self):
        if self.kind not in (PRODUCT, RATIO):
            raise ValueError(f"kind must be {PRODUCT!r} or {RATIO!r}")

    def to_json_dict(self) -> dict:
        return {"kind": self.kind.lower(),
                "f1": self.f1.to_json_dict(), "f2": self.f2.to_json_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json_dict(d: dict) -> "ConvolutionSpec":
        kind = {"product": PRODUCT, "ratio": RATIO}.get(str(d["kind"]).lower())
        if kind is None:
            raise ValueError(f"unknown kind {d['kind']!r}")
        return ConvolutionSpec(kind,
                               PathwayModel.from_json_dict(d["f1"]),
                               PathwayModel.from_json_dict(d["f2"]))

    @staticmethod
    def from_json(text: str) -> "ConvolutionSpec":
        return ConvolutionSpec.from_json_dict(json.loads(text))


def convolve(spec: ConvolutionSpec) -> GammaExpr:
    """Mellin transform of the product or ratio density."""
    if spec.kind == PRODUCT:
        return product_convolve(spec.f1.mellin_transform(),
                                spec.f2.mellin_transform())
    return ratio_convolve(spec.f2.mellin_transform(),
                          spec.f1.mellin_transform())


def support_upper(spec: ConvolutionSpec) -> float:
    """Upper end of the support of u (lower end is 0)."""
    h1 = spec.f1.support_upper()
    h2 = spec.f2.support_upper()
    if spec.kind == PRODUCT:
        return h1 * h2
    return math.inf  # ratio: x1 can be arbitrarily small


def in_support(spec: ConvolutionSpec, u: float) -> bool:
    return 0.0 < u < support_upper(spec)
