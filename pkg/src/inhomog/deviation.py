"""Rate functions, exact exceedance probabilities and CLT normalisation."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .carpet import assouad_dim, box_dim
from .errors import (
    DegenerateSigma,
    LambdaOutOfRange,
    StateSpaceTooLarge,
    WindowEmpty,
)
from .measure import BernoulliMeasure, alpha_mean, cumulant_derivatives, fibre_moments
from .observables import a0_window, base_term, check_epsilon, delta_window

TIE_GUARD = 1e-12
ROOT_TOL = 1e-12
MAX_VALUES = 4
MAX_WINDOW = 1000
MAX_CELLS = 20_000_000


class _Infinity:
    """Extended-real +infinity. Supports ordering, deliberately not arithmetic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __float__(self):
        return math.inf

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("inhomog.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _Infinity()


def is_infinite(x) -> bool:
    return x is INF


# -- threshold rescaling -----------------------------------------------------


def _carpet(mu_or_carpet):
    return getattr(mu_or_carpet, "carpet", mu_or_carpet)


def lambda_prime(mu, lam: float) -> float:
    """Map a dimension threshold to a running-average threshold for log C_i."""
    c = _carpet(mu)
    return (lam - base_term(c)) * math.log(c.n)


def lambda_from_prime(mu, lp: float) -> float:
    c = _carpet(mu)
    return base_term(c) + lp / math.log(c.n)


# -- rate function -----------------------------------------------------------


@dataclass(frozen=True)
class RateFunction:
    measure: BernoulliMeasure
    c: float
    log_cmax: float
    argmax_mass: float

    def __call__(self, lp: float):
        return rate_I(self, lp)


def rate_function(mu: BernoulliMeasure) -> RateFunction:
    mean, _ = fibre_moments(mu)
    cmax = mu.carpet.c_max
    mass = math.fsum(
        p for i, p in mu.projected.items() if mu.carpet.column_counts[i] == cmax
    )
    return RateFunction(mu, mean, math.log(cmax), mass)


def tilt_parameter(rf: RateFunction, lp: float) -> float:
    """Solve d/dtheta cumulant(theta) = lp on theta >= 0 for c < lp < log C_max.

    Newton steps inside a shrinking bracket, falling back to bisection when a
    step leaves the bracket.
    """
    if not rf.c < lp < rf.log_cmax:
        raise LambdaOutOfRange(f"need {rf.c} < lambda' < {rf.log_cmax}, got {lp}")
    mu = rf.measure
    lo, hi = 0.0, 1.0
    while cumulant_derivatives(mu, hi)[0] <= lp:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise ArithmeticError(f"no bracket for lambda'={lp!r}")
    theta = 0.5 * (lo + hi)
    for _ in range(500):
        d1, d2 = cumulant_derivatives(mu, theta)
        g = d1 - lp
        if abs(g) < ROOT_TOL:
            break
        if g > 0:
            hi = theta
        else:
            lo = theta
        step = theta - g / d2 if d2 > 0 else math.nan
        theta = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(1.0, hi):
            break
    return theta


def rate_I(rf: RateFunction, lp: float):
    """Legendre transform of the cumulant at ``lp``; 0 below the mean, INF at or above log C_max."""
    if lp <= rf.c:
        return 0.0
    if lp >= rf.log_cmax:
        return INF
    theta = tilt_parameter(rf, lp)
    logc, p = rf.measure.column_distribution()
    shifted = math.log(float(np.sum(p * np.exp(theta * (logc - rf.log_cmax)))))
    return max(0.0, theta * (lp - rf.log_cmax) - shifted)


def ldp_lambda_range(mu: BernoulliMeasure) -> tuple[float, float]:
    """Half-open range [max(alpha, dim_B), dim_A) on which the LDP limit is stated."""
    c = mu.carpet
    return max(alpha_mean(mu), box_dim(c)), assouad_dim(c)


def _check_lambda(rf: RateFunction, lam: float) -> None:
    lo, hi = ldp_lambda_range(rf.measure)
    if not lo <= lam < hi:
        raise LambdaOutOfRange(f"need {lo:.6g} <= lambda < {hi:.6g}, got {lam!r}")


def ldp_rate_symbolic(rf: RateFunction, lam: float, eps: float) -> float:
    """Decay exponent per unit k: eps * I(lambda')."""
    _check_lambda(rf, lam)
    check_epsilon(rf.measure.carpet, eps)
    return eps * rate_I(rf, lambda_prime(rf.measure, lam))


def ldp_rate_geometric(rf: RateFunction, lam: float, eps: float, n: int | None = None) -> float:
    """Decay exponent per unit -log R: eps * I(lambda') / log n."""
    n = rf.measure.carpet.n if n is None else n
    return ldp_rate_symbolic(rf, lam, eps) / math.log(n)


# -- exact exceedance probabilities ------------------------------------------------


def _exceeds(total, L, lp):
    return total - L * lp > TIE_GUARD * np.maximum(1.0, np.abs(L * lp))


def ldp_window(mu: BernoulliMeasure, k: int, eps: float) -> tuple[int, int]:
    """Running-average lengths ceil(eps k) .. ceil((gamma-1) k) after the shift by k."""
    lo, hi = a0_window(mu.carpet, k, eps)
    return lo - k, hi - k


def window_exceedance(
    mu: BernoulliMeasure,
    L_lo: int,
    L_hi: int,
    lp: float,
    max_values: int = MAX_VALUES,
    max_window: int = MAX_WINDOW,
    max_cells: int = MAX_CELLS,
) -> float:
    """P(S_L > lp for some L in L_lo..L_hi), S_L the mean of the first L log C_{i_l}.

    Absorbing dynamic programme over occurrence counts of each distinct
    log C value; ties count as not exceeding.
    """
    if not 1 <= L_lo <= L_hi:
        raise WindowEmpty(f"empty window {L_lo}..{L_hi}")
    values, masses = mu.value_distribution()
    t = values.size
    if t > max_values or L_hi > max_window:
        raise StateSpaceTooLarge(f"{t} distinct values, window end {L_hi}")
    if t == 1:
        return 1.0 if bool(_exceeds(values[0] * L_lo, L_lo, lp)) else 0.0
    dims = t - 1
    if (L_hi + 1) ** dims > max_cells:
        raise StateSpaceTooLarge(f"{(L_hi + 1) ** dims} cells exceed {max_cells}")
    last, q_last = values[-1], masses[-1]
    # offset[n_0, .., n_{t-2}] = sum_j n_j (v_j - v_last)
    grids = np.meshgrid(*[np.arange(L_hi + 1)] * dims, indexing="ij")
    offset = sum(g * (values[j] - last) for j, g in enumerate(grids))
    P = np.zeros((L_hi + 1,) * dims)
    P[(0,) * dims] = 1.0
    absorbed = 0.0
    for L in range(1, L_hi + 1):
        view = tuple(slice(0, L + 1) for _ in range(dims))
        new = q_last * P[view]
        for j in range(dims):
            src = tuple(slice(0, L) if a == j else slice(0, L + 1) for a in range(dims))
            dst = tuple(slice(1, L + 1) if a == j else slice(0, L + 1) for a in range(dims))
            new[dst] += masses[j] * P[src]
        P[view] = new
        if L >= L_lo:
            hit = _exceeds(L * last + offset[view], L, lp)
            absorbed += float(P[view][hit].sum())
            P[view][hit] = 0.0
    return min(1.0, absorbed)


def exceedance_exact(mu: BernoulliMeasure, k: int, eps: float, lp: float, **caps) -> float:
    """Exact mu(A0_eps(d, k) > lambda) for lambda above the box dimension, via the DP."""
    lo, hi = ldp_window(mu, k, eps)
    return window_exceedance(mu, lo, hi, lp, **caps)


def single_tail_exact(mu: BernoulliMeasure, L: int, lp: float) -> float:
    """P(S_L > lp) for one fixed L."""
    return window_exceedance(mu, L, L, lp)


def exceedance_bruteforce(mu: BernoulliMeasure, L_lo: int, L_hi: int, lp: float) -> float:
    """Oracle: sum the probabilities of every column word of length L_hi that exceeds."""
    if not 1 <= L_lo <= L_hi:
        raise WindowEmpty(f"empty window {L_lo}..{L_hi}")
    logc, p = mu.column_distribution()
    k = logc.size
    words = np.array(list(itertools.product(range(k), repeat=L_hi)), dtype=np.int64)
    prob = np.prod(p[words], axis=1)
    sums = np.cumsum(logc[words], axis=1)
    L = np.arange(1, L_hi + 1)
    hit = _exceeds(sums, L, lp)[:, L_lo - 1 :].any(axis=1)
    return math.fsum(prob[hit])


def sandwich_bounds(rf: RateFunction, k: int, eps: float, lp: float) -> tuple[float, float]:
    """Constant-free envelopes exp(-ceil(eps k) I) and that over (1 - exp(-I))."""
    if not rf.c < lp < rf.log_cmax:
        raise LambdaOutOfRange(f"need {rf.c} < lambda' < {rf.log_cmax}, got {lp}")
    rate = rate_I(rf, lp)
    if rate <= 0:
        raise LambdaOutOfRange(f"rate vanishes at lambda'={lp}")
    first, _ = ldp_window(rf.measure, k, eps)
    lower = math.exp(-first * rate)
    return lower, lower / -math.expm1(-rate)


# -- central limit theorem -------------------------------------------------------


def clt_window_length(mu: BernoulliMeasure, k: int, delta: float) -> int:
    s, t = delta_window(mu.carpet, k, delta)
    return t - s + 1


def clt_normalizer(mu: BernoulliMeasure, k: int, delta: float, tau: float) -> float:
    """tau sqrt(sigma) / (log n sqrt(ceil(delta k) - k + 1))."""
    _, sigma = fibre_moments(mu)
    if sigma <= 0:
        raise DegenerateSigma("uniform fibres: log C_i has zero variance")
    w = clt_window_length(mu, k, delta)
    return tau * math.sqrt(sigma) / (math.log(mu.carpet.n) * math.sqrt(w))


def normal_cdf(tau: float) -> float:
    return 0.5 * math.erfc(-tau / math.sqrt(2.0))
