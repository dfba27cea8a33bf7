"""mellinconv: densities of products and ratios of pathway-family
random variables via Mellin convolution.

Four mutually cross-validating evaluation routes are provided: residue
series (closed forms), convolution quadrature, Mellin-Barnes contour
inversion, and Monte Carlo sampling.
"""

from .exceptions import (BadDenominator, BoundaryRegion, DivergentSeries,
                         EmptyStrip, HighVariance, MellinConvError,
                         NoConvergence, OutOfStrip, PatternMismatch,
                         PoleCollision, PoleError, SimplePoleViolation,
                         SlowDecay, UnsupportedExpression)
from .mellin import (GammaExpr, HFunctionParams, Strip, eval_gamma_expr,
                     format_expr, format_h_function, from_h_function,
                     min_pole_gap, poles, product_convolve, ratio_convolve,
                     reflect, to_h_function)
from .pathway import (PRODUCT, RATIO, ConvolutionSpec, PathwayModel, convolve,
                      gen_gamma, in_support, support_upper, type1_beta,
                      type2_beta)
from .quadrature import (QuadConfig, convolution_density_quad,
                         inverse_mellin_contour, mellin_numeric,
                         product_density_quad, ratio_density_quad)
from .result import EvalResult
from .series import (CASE_IDS, effective_argument, eval_by_residues, eval_case,
                     match_case)
from .special import (HypSeriesSpec, gamma_signed, gamma_value, hyp,
                      hyp_series, log_gamma, pochhammer)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
