"""Real matrix-variate gamma distributions on SPD matrices, symmetric
products, and Monte Carlo evaluation of the product-density integral.

The density of the matrix-gamma model with shape alpha and SPD scale B is

    f(X) = |B|^alpha / Gamma_p(alpha) * |X|^(alpha-(p+1)/2) * exp(-tr(B X))

on the cone X > 0, where Gamma_p is the matrix-variate gamma function.
The density of the symmetric product U = X2^(1/2) X1 X2^(1/2) of two
independent such matrices is an integral over the SPD cone, estimated
here by importance sampling; everything is kept at desk scale
(p in {1, 2, 3}).
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import HighVariance
from .result import EvalResult

_EIG_FLOOR = 1e-12


def multivariate_gamma(alpha: float, p: int) -> float:
    """Gamma_p(alpha) = pi^(p(p-1)/4) * prod_k Gamma(alpha - k/2)."""
    return math.exp(log_multivariate_gamma(alpha, p))


def log_multivariate_gamma(alpha: float, p: int) -> float:
    if p < 1:
        raise ValueError("dimension must be >= 1")
    if not alpha > 0.5 * (p - 1):
        raise ValueError(f"need alpha > (p-1)/2 = {(p - 1) / 2}")
    out = 0.25 * p * (p - 1) * math.log(math.pi)
    for k in range(p):
        out += math.lgamma(alpha - 0.5 * k)
    return out


def is_spd(x: np.ndarray, sym_tol: float = 1e-12) -> bool:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(x))))
    if float(np.max(np.abs(x - x.T))) > sym_tol * scale:
        return False
    return bool(np.linalg.eigvalsh(x).min() > _EIG_FLOOR)


def spd_sqrt(x: np.ndarray) -> np.ndarray:
    """Symmetric positive definite square root via the spectral map."""
    w, q = np.linalg.eigh(np.asarray(x, dtype=float))
    if w.min() <= _EIG_FLOOR:
        raise ValueError("matrix is not positive definite")
    return (q * np.sqrt(w)) @ q.T


def symmetric_product(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """U = X2^(1/2) X1 X2^(1/2), the SPD analogue of x1*x2."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape:
        raise ValueError("dimension mismatch")
    r = spd_sqrt(x2)
    u = r @ x1 @ r
    return 0.5 * (u + u.T)


@dataclass(frozen=True)
class MatrixGammaModel:
    alpha: float
    b: np.ndarray            # SPD scale matrix

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "b", b)
        if not is_spd(b, sym_tol=1e-9):
            raise ValueError("scale matrix must be symmetric positive definite")
        p = b.shape[0]
        if not self.alpha > 0.5 * (p - 1):
            raise ValueError(f"need alpha > (p-1)/2 = {(p - 1) / 2}")

    @property
    def p(self) -> int:
        return self.b.shape[0]

    def log_norm(self) -> float:
        sign, logdet = np.linalg.slogdet(self.b)
        return self.alpha * logdet - log_multivariate_gamma(self.alpha, self.p)

    def pdf(self, x: np.ndarray) -> float:
        """Density at one SPD matrix; 0 when x is not positive definite."""
        x = np.asarray(x, dtype=float)
        if x.shape != self.b.shape:
            raise ValueError("dimension mismatch")
        w = np.linalg.eigvalsh(0.5 * (x + x.T))
        if w.min() <= 0.0:
            return 0.0
        p = self.p
        log_pdf = self.log_norm() \
            + (self.alpha - 0.5 * (p + 1)) * float(np.sum(np.log(w))) \
            - float(np.trace(self.b @ x))
        return math.exp(log_pdf)

    def sample(self, seed, n: int) -> np.ndarray:
        """n draws, shape (n, p, p), via the Bartlett construction.

        L is lower triangular with L_kk^2 ~ Gamma(alpha - (k-1)/2, 1)
        and N(0, 1/2) strictly-lower entries; L L' is matrix-gamma with
        identity scale, and congruence by the Cholesky factor of B^-1
        installs the scale.
        """
        rng = seed if isinstance(seed, np.random.Generator) \
            else np.random.default_rng(np.random.SeedSequence(seed))
        p = self.p
        tril = np.zeros((n, p, p))
        idx = np.tril_indices(p, k=-1)
        if idx[0].size:
            tril[:, idx[0], idx[1]] = rng.normal(
                0.0, math.sqrt(0.5), size=(n, idx[0].size))
        for k in range(p):
            shape = self.alpha - 0.5 * k
            tril[:, k, k] = np.sqrt(rng.gamma(shape, size=n))
        a = np.linalg.cholesky(np.linalg.inv(self.b))
        la = a[None, :, :] @ tril
        return la @ np.transpose(la, (0, 2, 1))


def matrix_gamma_pdf(model: MatrixGammaModel, x: np.ndarray) -> float:
    return model.pdf(x)


def sample_matrix_gamma(model: MatrixGammaModel, seed, n: int) -> np.ndarray:
    return model.sample(seed, n)


def _trace_quad(b1: np.ndarray, u: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """tr(B1 V^(-1/2) U V^(-1/2)) for a stack of SPD matrices V."""
    w, q = np.linalg.eigh(vs)
    inv_sqrt = (q * (1.0 / np.sqrt(w))[:, None, :]) @ np.transpose(q, (0, 2, 1))
    m = inv_sqrt @ u[None, :, :] @ inv_sqrt
    return np.einsum("ij,nji->n", b1, m)


def symmetric_product_density_mc(models, u: np.ndarray, seed: int, n: int,
                                 max_rel_se: float = 0.05) -> EvalResult:
    """Density of U = X2^(1/2) X1 X2^(1/2) by importance sampling.

    Two equivalent integral representations exist (integrating out
    either factor); both are estimated from independent substreams and
    the cross-check disagreement feeds the error estimate.  Raises
    HighVariance when the combined relative standard error exceeds
    max_rel_se.
    """
    m1, m2 = models
    if m1.p != m2.p:
        raise ValueError("dimension mismatch between the two models")
    u = np.asarray(u, dtype=float)
    if not is_spd(u, sym_tol=1e-9):
        raise ValueError("U must be symmetric positive definite")
    p = m1.p
    if p not in (1, 2, 3):
        raise ValueError("desk scale only: p in {1, 2, 3}")

    est_a, se_a = _one_rep(m1, m2, u, seed, n, "rep44")
    est_b, se_b = _one_rep(m2, m1, u, seed, n, "rep45")
    value = 0.5 * (est_a + est_b)
    se = 0.5 * math.hypot(se_a, se_b)
    err = max(se, 0.5 * abs(est_a - est_b))
    if se > max_rel_se * abs(value):
        raise HighVariance(f"relative standard error {se / abs(value):.3g} "
                           f"exceeds {max_rel_se}")
    return EvalResult(value, err, "mc",
                      {"n": n, "rep_a": est_a, "rep_b": est_b,
                       "se_a": se_a, "se_b": se_b})


def _one_rep(m1: MatrixGammaModel, m2: MatrixGammaModel, u: np.ndarray,
             seed: int, n: int, label: str):
    """g(U) = c |U|^(alpha1-(p+1)/2) * int |V|^(alpha2-alpha1-(p+1)/2)
    exp(-tr(B1 V^-1/2 U V^-1/2) - tr(B2 V)) dV, by importance sampling
    with a matrix-gamma proposal sharing the exp(-tr(B2 V)) factor."""
    p = m1.p
    alpha_q = max(m2.alpha - m1.alpha, 0.0) + 0.5 * (p + 1)
    proposal = MatrixGammaModel(alpha_q, m2.b)
    key = int.from_bytes(label.encode("utf8"), "little")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), key]))
    vs = proposal.sample(rng, n)

    sign, logdet_u = np.linalg.slogdet(u)
    _, logdets = np.linalg.slogdet(vs)
    expo = m2.alpha - m1.alpha - alpha_q
    log_w = expo * logdets - _trace_quad(m1.b, u, vs)
    # constants: c * |U|^(alpha1-(p+1)/2) * Gamma_p(alpha_q) / |B2|^alpha_q
    _, logdet_b2 = np.linalg.slogdet(m2.b)
    _, logdet_b1 = np.linalg.slogdet(m1.b)
    log_c = (m1.alpha * logdet_b1 + m2.alpha * logdet_b2
             - log_multivariate_gamma(m1.alpha, p)
             - log_multivariate_gamma(m2.alpha, p))
    log_const = (log_c + (m1.alpha - 0.5 * (p + 1)) * logdet_u
                 + log_multivariate_gamma(alpha_q, p) - alpha_q * logdet_b2)
    weights = np.exp(log_w + log_const)
    est = float(np.mean(weights))
    se = float(np.std(weights, ddof=1) / math.sqrt(n))
    return est, se
