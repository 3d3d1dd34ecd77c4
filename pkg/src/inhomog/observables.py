"""Local Assouad observables evaluated along codes."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .carpet import Carpet, assouad_dim, box_dim, gamma
from .errors import BadDelta, BadEpsilon, BadRange, BadScale, BadScales, CodeTooShort
from .symbolic import (
    Code,
    check_code,
    codes_of_point,
    log_covering_count_power,
    log_scale,
    scale_indices,
    window_log_mean,
)

# Window start relative to k: the single-scale observable averages over
# positions k..ceil(delta k), the supremum observable over k+1..L.
FROM_K = 0
AFTER_K = 1


def base_term(c: Carpet) -> float:
    return math.log(c.n_columns) / math.log(c.m)


def ceil_rational(x) -> int:
    """Ceiling of a decimal-valued float without binary round-off (1.2 * 5 -> 6)."""
    return math.ceil(Fraction(x).limit_denominator(10**12))


def check_epsilon(c: Carpet, eps: float) -> None:
    if not 0 < eps < gamma(c) - 1:
        raise BadEpsilon(f"need 0 < eps < {gamma(c) - 1:.6g}, got {eps!r}")


# -- A(d, R, r) ----------------------------------------------------------------


def branch_one(c: Carpet, log_avg_R: float, log_R: float, log_r: float) -> float:
    """Fine-scale branch: r below the critical scale R**gamma."""
    lm, ln = math.log(c.m), math.log(c.n)
    head = (math.log(c.n_digits) - log_avg_R) / lm + log_avg_R / ln
    return (head * log_R - box_dim(c) * log_r) / (log_R - log_r)


def branch_two(c: Carpet, log_avg_rR: float) -> float:
    """Coarse-scale branch: R**gamma <= r < R."""
    return base_term(c) + log_avg_rR / math.log(c.n)


def profile_point(d: Code, c: Carpet, R, r) -> tuple[float, int]:
    """``(A(d, R, r), branch)``; the branch is decided by comparing l2(r) with l1(R)."""
    big, small = scale_indices(c, R), scale_indices(c, r)
    if not small.r < big.r:
        raise BadScales(f"need 0 < r < R < 1, got r={small.r}, R={big.r}")
    if small.l2 >= big.l1:
        if big.l1 <= big.l2:
            raise BadRange(f"empty column window at R={big.r}: l1(R) = l2(R) = {big.l1}")
        check_code(d, c, big.l1)
        avg = window_log_mean(d, c, big.l2 + 1, big.l1)
        return branch_one(c, avg, log_scale(big.r), log_scale(small.r)), 1
    if small.l2 <= big.l2:
        raise BadRange(f"empty column window: l2(r) = l2(R) = {big.l2}")
    check_code(d, c, small.l2)
    return branch_two(c, window_log_mean(d, c, big.l2 + 1, small.l2)), 2


def A_profile(d: Code, c: Carpet, R, r) -> float:
    return profile_point(d, c, R, r)[0]


def profile_shape(d: Code, c: Carpet, R) -> int:
    """Sign of C_d(R) - |D|/|pi D|, decided in exact integer arithmetic.

    +1: the fine-scale branch decreases to the box dimension, -1: it
    increases to it, 0: it is constant.
    """
    idx = scale_indices(c, R)
    if idx.l1 <= idx.l2:
        raise BadRange(f"empty column window at R={idx.r}")
    check_code(d, c, idx.l1)
    length = idx.l1 - idx.l2
    prod = 1
    for l in range(idx.l2 + 1, idx.l1 + 1):
        prod *= c.column_counts[d.word[l - 1][0]]
    lhs = prod * c.n_columns**length
    rhs = c.n_digits**length
    return (lhs > rhs) - (lhs < rhs)


# -- supremum observable -------------------------------------------------------


def a0_window(c: Carpet, k: int, eps: float) -> tuple[int, int]:
    """Range of L in the supremum: ceil((1+eps) k) .. ceil(gamma k)."""
    check_epsilon(c, eps)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return ceil_rational((1 + Fraction(eps).limit_denominator(10**12)) * k), c.ceil_gamma(k)


def a0_eps_columns(cols: np.ndarray, c: Carpet, k: int, eps: float) -> np.ndarray:
    """Vectorised A0_eps over rows of column indices (row t = code t, position 1 first)."""
    lo, hi = a0_window(c, k, eps)
    cols = np.atleast_2d(cols)
    if cols.shape[1] < hi:
        raise CodeTooShort(f"codes have {cols.shape[1]} letters, need {hi}")
    logc = c.log_counts()[cols[:, k:hi]]
    sums = np.cumsum(logc, axis=1)
    lengths = np.arange(1, hi - k + 1)
    avgs = (sums / lengths)[:, lo - k - 1 :]
    best = avgs.max(axis=1)
    return np.maximum(box_dim(c), base_term(c) + best / math.log(c.n))


def A0_eps(d: Code, c: Carpet, k: int, eps: float) -> float:
    lo, hi = a0_window(c, k, eps)
    check_code(d, c, hi)
    return float(a0_eps_columns(d.columns[None, :hi], c, k, eps)[0])


# -- single-scale observable -----------------------------------------------------


def delta_window(c: Carpet, k: int, delta: float, offset: int = FROM_K) -> tuple[int, int]:
    if not 0 < delta - 1 < gamma(c) - 1:
        raise BadDelta(f"need 1 < delta < {gamma(c):.6g}, got {delta!r}")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    hi = ceil_rational(Fraction(delta).limit_denominator(10**12) * k)
    return k + offset, hi


def A_delta(d: Code, c: Carpet, k: int, delta: float, offset: int = FROM_K) -> float:
    """Base dimension plus the window average of log C_{i_l} over k..ceil(delta k)."""
    s, t = delta_window(c, k, delta, offset)
    check_code(d, c, t)
    return base_term(c) + window_log_mean(d, c, s, t) / math.log(c.n)


# -- covering-count observable -----------------------------------------------------


def A_local_covering(d: Code, c: Carpet, R, eps: float, j_max: int | None = None) -> float:
    """Supremum of log N_r / log(R/r) over r = n**-j, j >= (1+eps) k, for R = n**-k.

    Counts come from the exact covering formula; ``j_max`` defaults to the
    deepest scale the code supports.
    """
    idx = scale_indices(c, R)
    k = idx.l2
    if idx.r != Fraction(1, c.n**k):
        raise BadScale(f"R must be an exact power n^-k, got {idx.r}")
    lo, _ = a0_window(c, k, eps)
    if j_max is None:
        j_max = lo
        while c.ceil_gamma(j_max + 1) <= len(d):
            j_max += 1
    if c.ceil_gamma(j_max) > len(d):
        raise CodeTooShort(f"scale n^-{j_max} needs {c.ceil_gamma(j_max)} letters")
    check_code(d, c)
    ln = math.log(c.n)
    return max(
        log_covering_count_power(d, c, k, j) / ((j - k) * ln) for j in range(lo, j_max + 1)
    )


def A_point(c: Carpet, x, k: int, eps: float, observable: str = "closed_form") -> float:
    """Point observable: the maximum over the (at most four) codes of ``x``."""
    if observable == "closed_form":
        length = c.ceil_gamma(k)
        return max(A0_eps(d, c, k, eps) for d in codes_of_point(c, x, length))
    if observable == "covering":
        j_max = 2 * c.ceil_gamma(k)
        length = c.ceil_gamma(j_max)
        return max(
            A_local_covering(d, c, Fraction(1, c.n**k), eps, j_max)
            for d in codes_of_point(c, x, length)
        )
    raise ValueError(f"unknown observable {observable!r}")


def observable_bounds(c: Carpet) -> tuple[float, float]:
    return box_dim(c), assouad_dim(c)
