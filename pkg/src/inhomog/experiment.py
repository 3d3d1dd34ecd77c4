"""Sampling, Monte Carlo estimators, LDP fits, CLT checks and CSV emission."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .carpet import Carpet, assouad_dim, box_dim, gamma
from .deviation import (
    INF,
    RateFunction,
    clt_normalizer,
    exceedance_exact,
    lambda_prime,
    ldp_lambda_range,
    ldp_rate_geometric,
    ldp_rate_symbolic,
    normal_cdf,
    rate_I,
)
from .errors import DegenerateSigma, LambdaOutOfRange
from .measure import BernoulliMeasure, alpha_mean, fibre_moments
from .observables import (
    a0_eps_columns,
    a0_window,
    base_term,
    branch_one,
    branch_two,
    delta_window,
    profile_point,
)
from .symbolic import Code, log_scale

BLOCK = 1024
MASK64 = (1 << 64) - 1


@dataclass
class RunConfig:
    seed: int = 0
    trials: int = 10_000
    k_list: list[int] = field(default_factory=lambda: [100, 200, 300])
    eps: float = 0.2
    delta: float = 1.2
    lambda_list: list[float] = field(default_factory=list)
    output_path: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if list(self.k_list) != sorted(self.k_list):
            raise ValueError("k_list must be ascending")


# -- sampling ------------------------------------------------------------------


def generator(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream); independent of call order."""
    return np.random.Generator(np.random.Philox(key=(int(stream) << 64) | (int(seed) & MASK64)))


def _digit_cdf(mu: BernoulliMeasure) -> np.ndarray:
    cdf = np.cumsum(mu.weights)
    cdf[-1] = 1.0
    return cdf


def sample_digit_indices(mu: BernoulliMeasure, trials: int, length: int, seed: int, stream: int = 0):
    """``(trials, length)`` i.i.d. digit indices drawn from one stream."""
    u = generator(seed, stream).random((trials, length))
    idx = np.searchsorted(_digit_cdf(mu), u, side="right")
    return np.minimum(idx, mu.carpet.n_digits - 1)


def sample_code(mu: BernoulliMeasure, length: int, seed: int, stream: int = 0) -> Code:
    if length < 1:
        raise ValueError("length must be at least 1")
    idx = sample_digit_indices(mu, 1, length, seed, stream)[0]
    return Code.from_indices(mu.carpet, idx)


def _blocks(trials: int):
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range(math.ceil(trials / BLOCK))]


def _map_blocks(fn, trials: int, threads: int):
    """Apply ``fn(stream, size)`` per block of trials, returning results in block order."""
    blocks = _blocks(trials)
    if threads <= 1:
        return [fn(b, size) for b, size in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda bs: fn(*bs), blocks))


def sample_columns(mu: BernoulliMeasure, trials: int, length: int, seed: int, threads: int = 1):
    """Column components of ``trials`` codes of the given length, block-streamed."""
    cols = mu.carpet.digit_columns

    def block(stream, size):
        return cols[sample_digit_indices(mu, size, length, seed, stream)]

    return np.concatenate(_map_blocks(block, trials, threads))


# -- Monte Carlo ------------------------------------------------------------------


def a0_exceedance_exact(mu: BernoulliMeasure, k: int, eps: float, lam: float) -> float:
    """mu(A0_eps > lam): 1 below the box dimension, otherwise the running-average DP."""
    c = mu.carpet
    if lam < box_dim(c):
        return 1.0
    if lam >= assouad_dim(c):
        return 0.0
    return exceedance_exact(mu, k, eps, lambda_prime(mu, lam))


def estimate_exceedance_mc(
    mu: BernoulliMeasure, k: int, eps: float, lam: float, trials: int, seed: int, threads: int = 1
) -> tuple[float, float]:
    """Frequency of A0_eps(d, k) > lam over sampled codes, with its binomial standard error."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    c = mu.carpet
    _, length = a0_window(c, k, eps)
    cols = c.digit_columns

    def block(stream, size):
        idx = sample_digit_indices(mu, size, length, seed, stream)
        return int(np.count_nonzero(a0_eps_columns(cols[idx], c, k, eps) > lam))

    hits = sum(_map_blocks(block, trials, threads))
    p_hat = hits / trials
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / trials)


# -- large deviations fit -------------------------------------------------------


@dataclass
class LdpFit:
    slope: float
    intercept: float
    predicted: float
    k: list[int]
    probability: list[float]

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.predicted) / self.predicted


def ldp_fit(rf: RateFunction, eps: float, lam: float, k_list) -> LdpFit:
    """Least-squares line through (k, -log P_k) using exact exceedance probabilities."""
    predicted = ldp_rate_symbolic(rf, lam, eps)
    mu = rf.measure
    ks = [int(k) for k in k_list]
    probs = [a0_exceedance_exact(mu, k, eps, lam) for k in ks]
    if any(p <= 0.0 for p in probs):
        raise ArithmeticError("exceedance probability underflowed to zero")
    y = [-math.log(p) for p in probs]
    slope, intercept = np.polyfit(np.array(ks, dtype=float), np.array(y), 1)
    return LdpFit(float(slope), float(intercept), predicted, ks, probs)


# -- central limit theorem --------------------------------------------------------


@dataclass
class CltResult:
    ks_stat: float
    table: list[tuple[float, float, float]]
    window: int
    trials: int
    ks_mid: float

    def table_error(self) -> float:
        return max(abs(emp - phi) for _, emp, phi in self.table)


def sample_a_delta(
    mu: BernoulliMeasure, k: int, delta: float, trials: int, seed: int, threads: int = 1
) -> np.ndarray:
    """A_delta for ``trials`` sampled codes.

    Only positions k..ceil(delta k) are drawn: earlier letters are independent
    of the window and never enter the observable.
    """
    c = mu.carpet
    s, t = delta_window(c, k, delta)
    w = t - s + 1
    logc = c.log_counts()[c.digit_columns]

    def block(stream, size):
        idx = sample_digit_indices(mu, size, w, seed, stream)
        return logc[idx].sum(axis=1) / w

    means = np.concatenate(_map_blocks(block, trials, threads))
    return base_term(c) + means / math.log(c.n)


def _mid_ks(z: np.ndarray) -> float:
    """Distance from Phi to the mid-distribution (F(x-) + F(x)) / 2 at the sample atoms."""
    # summation order perturbs equal lattice points in the last bits
    values, counts = np.unique(np.round(z, 9), return_counts=True)
    upper = np.cumsum(counts) / z.size
    lower = upper - counts / z.size
    return float(np.max(np.abs(0.5 * (upper + lower) - stats.norm.cdf(values))))


def clt_test(
    mu: BernoulliMeasure,
    k: int,
    delta: float,
    trials: int,
    seed: int,
    taus=(-2.0, -1.0, 0.0, 1.0, 2.0),
    threads: int = 1,
) -> CltResult:
    """Kolmogorov-Smirnov distance of the normalised window mean to N(0, 1).

    ``table`` rows are ``(tau, mu(A_delta > alpha - alpha_k(tau)), Phi(tau))``.
    """
    mean, sigma = fibre_moments(mu)
    if sigma <= 0:
        raise DegenerateSigma("uniform fibres: log C_i has zero variance")
    c = mu.carpet
    s, t = delta_window(c, k, delta)
    w = t - s + 1
    a = sample_a_delta(mu, k, delta, trials, seed, threads)
    window_mean = (a - base_term(c)) * math.log(c.n)
    z = math.sqrt(w) * (mean - window_mean) / math.sqrt(sigma)
    ks = float(stats.kstest(z, "norm").statistic)
    alpha = alpha_mean(mu)
    table = []
    for tau in taus:
        emp = float(np.count_nonzero(a > alpha - clt_normalizer(mu, k, delta, tau))) / trials
        table.append((float(tau), emp, normal_cdf(tau)))
    return CltResult(ks, table, w, trials, _mid_ks(z))


# -- CSV emission -------------------------------------------------------------------


def _writer(path):
    path = Path(path)
    try:
        handle = path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return handle, csv.writer(handle, lineterminator="\n")


def _fmt(x) -> str:
    if x is INF:
        return "inf"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_rows(path, header, rows) -> None:
    handle, out = _writer(path)
    with handle:
        out.writerow(header)
        for row in rows:
            out.writerow([_fmt(v) for v in row])


def profile_rows(d: Code, c: Carpet, R, r_grid):
    rows = []
    for r in r_grid:
        value, branch = profile_point(d, c, R, r)
        rows.append((float(r), value, branch))
    return rows


def emit_profile(d: Code, c: Carpet, R, r_grid, path) -> list:
    rows = profile_rows(d, c, R, r_grid)
    write_rows(path, ["r", "A", "branch"], rows)
    return rows


def rate_curve_rows(rf: RateFunction, lambda_grid, eps: float):
    """Rows (lambda, I, eps I, eps I / log n); rates are 0 below the LDP range and inf above."""
    mu = rf.measure
    lo, hi = ldp_lambda_range(mu)
    rows = []
    for lam in lambda_grid:
        if lam >= hi:
            # decided on lambda itself: lambda' can land an ulp below log C_max
            rows.append((float(lam), INF, INF, INF))
            continue
        value = rate_I(rf, lambda_prime(mu, lam))
        if lam < lo:
            sym = geo = 0.0
        else:
            sym = ldp_rate_symbolic(rf, lam, eps)
            geo = ldp_rate_geometric(rf, lam, eps)
        rows.append((float(lam), value, sym, geo))
    return rows


def emit_rate_curve(rf: RateFunction, lambda_grid, eps: float, path) -> list:
    rows = rate_curve_rows(rf, lambda_grid, eps)
    write_rows(path, ["lambda", "I", "rate_symbolic", "rate_geometric"], rows)
    return rows


def profile_from_average(c: Carpet, R: float, r: float, column_average: float) -> tuple[float, int]:
    """A(d, R, r) for a code whose geometric column average is constant across windows.

    Uses the real critical scale R**gamma to select the branch.
    """
    log_R, log_r = math.log(R), math.log(r)
    log_avg = math.log(column_average)
    if log_r < gamma(c) * log_R:
        return branch_one(c, log_avg, log_R, log_r), 1
    return branch_two(c, log_avg), 2


def figure2_rows(c: Carpet, R: float = 0.3, points: int = 200, r_min: float = 1e-12):
    """Profiles for averages above, at and below |D|/|pi D| on a log-spaced r grid."""
    mean = c.n_digits / c.n_columns
    averages = {"decreasing": c.c_max, "constant": mean, "increasing": min(
        c.column_counts[i] for i in c.columns
    )}
    grid = np.geomspace(r_min, R, points + 1)[:-1]
    rows = []
    for shape, avg in averages.items():
        for r in grid:
            value, branch = profile_from_average(c, R, float(r), avg)
            rows.append((shape, float(r), value, branch))
    return rows


def emit_figure2(c: Carpet, path, R: float = 0.3, points: int = 200) -> list:
    rows = figure2_rows(c, R, points)
    handle, out = _writer(path)
    with handle:
        out.writerow(["shape", "r", "A", "branch"])
        for shape, r, value, branch in rows:
            out.writerow([shape, _fmt(r), _fmt(value), branch])
    return rows


def lambda_grid(mu: BernoulliMeasure, points: int = 100, inside: bool = True) -> np.ndarray:
    """Evenly spaced thresholds across the LDP range (left end included, right excluded)."""
    lo, hi = ldp_lambda_range(mu)
    if not lo < hi:
        raise LambdaOutOfRange("empty LDP range (uniform fibres?)")
    return np.linspace(lo, hi, points + 1)[:-1] if inside else np.linspace(lo, hi, points)
