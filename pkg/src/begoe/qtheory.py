"""Closed-form q-Hermite theory for embedded ensembles.

All energies here are standardized (zero centroid, unit variance).  The
q-normal weight interpolates between the semicircle (q = 0) and the unit
Gaussian (q -> 1).  The bivariate q-normal conditional density supplies the
smooth local density of states, from which smooth NPC(E) and l_H(E) curves
follow by one-dimensional quadrature over the basis-state energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import optimize
from scipy.special import roots_legendre, xlogy

__all__ = [
    "GAUSSIAN_Q",
    "QTheoryParams",
    "DensityCurve",
    "q_number",
    "q_factorial",
    "q_hermite",
    "support_edge",
    "weight_v",
    "q_formula",
    "q_formula_exact",
    "gaussian_density",
    "fk_conditional",
    "rho_biv",
    "smooth_marginal",
    "smooth_npc",
    "smooth_lh",
    "theory_entropy",
    "fit_q",
]

# At or above this q the closed-form Gaussian limits are used.
GAUSSIAN_Q = 1.0 - 1e-6

_PROD_TOL = 1e-14
_PROD_CAP = 20000
_NORM_POINTS = 4001


@dataclass(frozen=True)
class QTheoryParams:
    """Parameters of every analytic curve: q, correlation coefficient zeta, d_m."""

    q: float
    zeta: float
    d_m: int = 1

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError(f"zeta must lie in [0, 1], got {self.zeta}")
        if self.d_m < 1:
            raise ValueError(f"d_m must be positive, got {self.d_m}")


@dataclass(frozen=True)
class DensityCurve:
    """Probability density sampled on standardized energies.

    When ``bin_edges`` is given the values are histogram heights and the
    integral is exact bin arithmetic; otherwise the trapezoid rule is used.
    """

    abscissa: np.ndarray
    values: np.ndarray
    bin_edges: np.ndarray | None = field(default=None, compare=False)

    def integral(self) -> float:
        if self.bin_edges is not None:
            return float(np.sum(self.values * np.diff(self.bin_edges)))
        return float(np.trapezoid(self.values, self.abscissa))


def q_number(n: int, q: float) -> float:
    """The q-number [n]_q = (1 - q^n) / (1 - q), equal to n at q = 1."""
    if q == 1.0:
        return float(n)
    return (1.0 - q**n) / (1.0 - q)


def q_factorial(n: int, q: float) -> float:
    out = 1.0
    for j in range(1, n + 1):
        out *= q_number(j, q)
    return out


def q_hermite(n: int, x, q: float):
    """q-Hermite polynomial H_n(x|q) from the three-term recursion.

    ``x H_n = H_{n+1} + [n]_q H_{n-1}`` with H_0 = 1, H_{-1} = 0.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.ones_like(x)
    for j in range(n):
        h_prev, h = h, x * h - q_number(j, q) * h_prev
    return h if h.ndim else float(h)


def support_edge(q: float) -> float:
    """Edge x0 = 2/sqrt(1-q) of the q-normal support (inf in the Gaussian limit)."""
    if q >= GAUSSIAN_Q:
        return math.inf
    return 2.0 / math.sqrt(1.0 - q)


def _n_factors(*ratios: float) -> int:
    r = max(ratios)
    if r <= 0.0:
        return 1
    return int(min(_PROD_CAP, max(1, math.ceil(math.log(_PROD_TOL) / math.log(r)))))


def _log_edge_product(u: np.ndarray, q: float) -> np.ndarray:
    """sum_{kappa>=1} log(1 - 4u q^k / (1 + q^k)^2) for u = x^2/x0^2 in [0, 1].

    Factors beyond the cap are folded in by the integral of their
    first-order expansion.
    """
    u = np.asarray(u, dtype=float)
    if q == 0.0:
        return np.zeros_like(u)
    K = _n_factors(q)
    out = np.zeros_like(u)
    kappa = np.arange(1, K + 1)
    qk = q ** kappa
    c = 4.0 * qk / (1.0 + qk) ** 2
    flat = u.reshape(-1)
    res = out.reshape(-1)
    chunk = max(1, 2_000_000 // K)
    for s in range(0, flat.size, chunk):
        res[s : s + chunk] = np.sum(np.log1p(-np.outer(flat[s : s + chunk], c)), axis=1)
    qK = q ** (K + 0.5)
    if qK > _PROD_TOL:
        # integral_{K+1/2}^inf 4 q^s / (1+q^s)^2 ds
        res -= flat * 4.0 * qK / ((1.0 + qK) * math.log(1.0 / q))
    return res.reshape(u.shape)


def gaussian_density(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _unnormalized_weight(x: np.ndarray, q: float) -> np.ndarray:
    x0 = support_edge(q)
    u = np.clip((x / x0) ** 2, 0.0, 1.0)
    out = np.sqrt(1.0 - u) * np.exp(_log_edge_product(u, q))
    return np.where(np.abs(x) < x0, out, 0.0)


@lru_cache(maxsize=512)
def _weight_normalization(q: float) -> float:
    # Trapezoid rule in the angle x = x0 cos(theta); the integrand is then
    # smooth and periodic, so the rule converges geometrically.
    x0 = support_edge(q)
    theta = np.linspace(0.0, math.pi, _NORM_POINTS)
    integrand = _unnormalized_weight(x0 * np.cos(theta), q) * x0 * np.sin(theta)
    return 1.0 / float(np.trapezoid(integrand, theta))


def weight_v(x, q: float):
    """Normalized q-normal weight v(x|q) on [-x0, x0], zero outside.

    q = 0 gives the semicircle sqrt(4 - x^2)/(2 pi); q >= ``GAUSSIAN_Q`` gives
    the unit Gaussian.
    """
    if q < 0.0 or q > 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    xa = np.asarray(x, dtype=float)
    if q >= GAUSSIAN_Q:
        out = gaussian_density(xa)
    else:
        out = _weight_normalization(float(q)) * _unnormalized_weight(xa, q)
    return out if out.ndim else float(out)


def _binom(n: int, r: int) -> int:
    if n < 0 or r < 0 or r > n:
        return 0
    return math.comb(n, r)


def _lambda_nu(N: int, m: int, nu: int, r: int) -> int:
    return _binom(m - nu, r) * _binom(N + m + nu - 1, r)


def q_formula_exact(N: int, m: int, k: int) -> Fraction:
    """q(N, m, k) of the bosonic k-body ensemble as an exact rational.

    The sum over nu stops at min(k, m-k), beyond which one of the binomials
    in X(N, m, k, nu) vanishes.  The boson propagation factor Lambda_B is
    taken to be the same Lambda used for the k-body part.
    """
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    if N < 1:
        raise ValueError("N must be >= 1")
    lam0 = _lambda_nu(N, m, 0, k)
    total = Fraction(0)
    for nu in range(min(k, m - k) + 1):
        d_g = _binom(N + nu - 1, nu) ** 2 - _binom(N + nu - 2, nu - 1) ** 2
        X = _lambda_nu(N, m, nu, m - k) * _lambda_nu(N, m, nu, k)
        total += Fraction(X * d_g, lam0 * lam0)
    return total / _binom(N + m - 1, m)


def q_formula(N: int, m: int, k: int) -> float:
    return float(q_formula_exact(N, m, k))


def _fk_gaussian(E, Ek, zeta):
    var = 1.0 - zeta * zeta
    return np.exp(-0.5 * (E - zeta * Ek) ** 2 / var) / np.sqrt(2.0 * np.pi * var)


def fk_conditional(E, E_k, params: QTheoryParams):
    """Conditional density of E given E_k under the bivariate q-normal.

    This is the smooth LDOS F_k(E|q) of a basis state with standardized
    energy ``E_k``.  Requires zeta < 1 (zeta = 1 is a delta function).
    """
    q, zeta = params.q, params.zeta
    if zeta >= 1.0:
        raise ValueError("zeta = 1 gives a degenerate (delta) conditional density")
    E, E_k = np.broadcast_arrays(np.asarray(E, dtype=float), np.asarray(E_k, dtype=float))
    if q >= GAUSSIAN_Q:
        out = _fk_gaussian(E, E_k, zeta)
        return out if out.ndim else float(out)

    z2 = zeta * zeta
    x0 = support_edge(q)
    inside = np.abs(E) < x0
    Ef = np.where(inside, E, 0.0).reshape(-1)
    Ekf = E_k.reshape(-1)
    a = 1.0 - q
    K = _n_factors(q, z2)
    kk = np.arange(K)
    qk = q ** kk  # q**0 == 1 also for q == 0
    q2k = qk * qk
    const = np.sum(np.log1p(-z2 * qk)) + np.sum(np.log1p(-q * qk))
    logf = np.empty_like(Ef)
    chunk = max(1, 2_000_000 // K)
    for s in range(0, Ef.size, chunk):
        e = Ef[s : s + chunk, None]
        ek = Ekf[s : s + chunk, None]
        num = (1.0 + qk) ** 2 - a * e * e * qk
        den = (1.0 - z2 * q2k) ** 2 - a * zeta * qk * (1.0 + z2 * q2k) * e * ek + a * z2 * (e * e + ek * ek) * q2k
        logf[s : s + chunk] = np.sum(np.log(num) - np.log(den), axis=1)
    pref = math.sqrt(a) / (2.0 * math.pi * np.sqrt(np.maximum(4.0 - a * Ef * Ef, 1e-300)))
    out = np.where(inside.reshape(-1), pref * np.exp(logf + const), 0.0).reshape(E.shape)
    return out if out.ndim else float(out)


def rho_biv(E, E_k, params: QTheoryParams):
    """Bivariate density F_k(E|q) times the standard normal density of E_k."""
    return fk_conditional(E, E_k, params) * gaussian_density(E_k)


def _ek_nodes(n: int, lo: float = -6.0, hi: float = 6.0):
    x, w = roots_legendre(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _adaptive(kernel, E_grid, rtol=1e-6, n0=256, n_max=4096):
    """Evaluate ``kernel(E, nodes, weights)`` with node doubling until stable."""
    n = n0
    prev = kernel(E_grid, *_ek_nodes(n))
    while n < n_max:
        n *= 2
        cur = kernel(E_grid, *_ek_nodes(n))
        scale = np.maximum(np.abs(cur), 1e-300)
        if np.all(np.abs(cur - prev) <= rtol * scale):
            return cur
        prev = cur
    return prev


def _fk_table(E, nodes, params):
    return fk_conditional(E[:, None], nodes[None, :], params)


def smooth_marginal(E_grid, params: QTheoryParams) -> np.ndarray:
    """rho(E) = integral over E_k of rho_biv(E, E_k)."""
    E = np.atleast_1d(np.asarray(E_grid, dtype=float))

    def kernel(E, nodes, w):
        return _fk_table(E, nodes, params) @ (w * gaussian_density(nodes))

    return _adaptive(kernel, E)


def smooth_npc(E_grid, params: QTheoryParams) -> np.ndarray:
    """Smooth NPC(E) = (d_m/3) rho(E)^2 / integral(rho_biv^2 / rho_G) dE_k.

    Returns NaN outside the support of rho(E).
    """
    E = np.atleast_1d(np.asarray(E_grid, dtype=float))

    def kernel(E, nodes, w):
        F = _fk_table(E, nodes, params)
        g = w * gaussian_density(nodes)
        rho = F @ g
        J = (F * F) @ g
        with np.errstate(invalid="ignore", divide="ignore"):
            return params.d_m / 3.0 * rho * rho / J

    return _adaptive(kernel, E)


def smooth_lh(E_grid, params: QTheoryParams) -> np.ndarray:
    """Smooth localization length l_H(E) = exp(I(E)).

    ``I(E) = -integral (rho_biv/rho(E)) ln[rho_biv / (rho(E) rho_G(E_k))] dE_k``
    is minus a relative entropy, so l_H <= 1 with equality at zeta = 0.
    """
    E = np.atleast_1d(np.asarray(E_grid, dtype=float))

    def kernel(E, nodes, w):
        F = _fk_table(E, nodes, params)
        g = w * gaussian_density(nodes)
        rho = F @ g
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = F / rho[:, None]
            I = -(xlogy(ratio, ratio) @ g)
        return np.exp(I)

    return _adaptive(kernel, E)


def theory_entropy(F_of_t, params: QTheoryParams, alpha: float) -> np.ndarray:
    """Short-time entropy estimate from the survival probability.

    ``S = -F ln F - (1-F) ln((1-F)/n)`` with ``n = alpha (d_m/3) sqrt(1 - zeta^4)``.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    F = np.clip(np.asarray(F_of_t, dtype=float), 0.0, 1.0)
    n = alpha * params.d_m / 3.0 * math.sqrt(1.0 - params.zeta**4)
    return -xlogy(F, F) - xlogy(1.0 - F, 1.0 - F) + (1.0 - F) * math.log(n)


def fit_q(density: DensityCurve, norm_tol: float = 1e-2, xatol: float = 1e-4) -> float:
    """Least-squares q for a standardized density.

    Minimizes the integrated squared deviation between ``density`` and
    ``weight_v(., q)`` over q in [0, 1] by bounded scalar minimization.
    """
    total = density.integral()
    if abs(total - 1.0) > norm_tol:
        raise ValueError(f"density is not normalized (integral {total:.6g})")
    x = np.asarray(density.abscissa, dtype=float)
    y = np.asarray(density.values, dtype=float)

    def cost(q):
        return float(np.trapezoid((y - weight_v(x, q)) ** 2, x))

    res = optimize.minimize_scalar(cost, bounds=(0.0, 1.0), method="bounded", options={"xatol": xatol})
    # the bounded search never evaluates the end points themselves
    best = min((res.x, 0.0, 1.0), key=cost)
    return float(best)
