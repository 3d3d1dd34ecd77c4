"""Bedford-McMullen carpets on an m x n grid and their closed-form dimensions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDigits, BadGrid, TooDeep

RENDER_CAP = 10**6


@dataclass(frozen=True)
class Carpet:
    """A (x m, x n)-invariant carpet given by the chosen cells of an m x n grid.

    ``digits`` is stored sorted in lexicographic (column, row) order; the
    position of a digit in that tuple is its integer index everywhere else in
    the package.
    """

    m: int
    n: int
    digits: tuple[tuple[int, int], ...]
    column_counts: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        m, n = self.m, self.n
        if not (isinstance(m, int) and isinstance(n, int)) or m < 2 or n <= m:
            raise BadGrid(f"need integers 2 <= m < n, got m={m!r}, n={n!r}")
        raw = [tuple(int(v) for v in d) for d in self.digits]
        if any(len(d) != 2 for d in raw):
            raise BadDigits("every digit must be an (i, j) pair")
        if len(raw) < 2:
            raise BadDigits(f"need at least 2 digits, got {len(raw)}")
        if len(set(raw)) != len(raw):
            raise BadDigits("duplicate digits")
        for i, j in raw:
            if not (0 <= i < m and 0 <= j < n):
                raise BadDigits(f"digit {(i, j)} outside the {m}x{n} grid")
        digits = tuple(sorted(raw))
        counts = [0] * m
        for i, _ in digits:
            counts[i] += 1
        object.__setattr__(self, "digits", digits)
        object.__setattr__(self, "column_counts", tuple(counts))

    # -- structure -------------------------------------------------------

    @property
    def columns(self) -> tuple[int, ...]:
        """Occupied columns (the projection of the digit set), ascending."""
        return tuple(i for i, c in enumerate(self.column_counts) if c > 0)

    @property
    def n_digits(self) -> int:
        return len(self.digits)

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    @property
    def c_max(self) -> int:
        return max(self.column_counts)

    def digit_index(self, d) -> int:
        return self._index[tuple(d)]

    @property
    def _index(self):
        # cached lazily on the instance dict; frozen dataclass forbids setattr
        try:
            return self.__dict__["_index_cache"]
        except KeyError:
            idx = {d: k for k, d in enumerate(self.digits)}
            self.__dict__["_index_cache"] = idx
            return idx

    @property
    def digit_columns(self) -> np.ndarray:
        return np.array([i for i, _ in self.digits], dtype=np.int64)

    @property
    def digit_rows(self) -> np.ndarray:
        return np.array([j for _, j in self.digits], dtype=np.int64)

    def log_counts(self) -> np.ndarray:
        """log C_i for every grid column (``-inf`` never appears: empty columns get 0)."""
        return np.array([math.log(c) if c > 0 else 0.0 for c in self.column_counts])

    def ceil_gamma(self, k: int) -> int:
        """Exact ceil(k log n / log m): the least l with m**l >= n**k."""
        target = self.n**k
        l = max(k, int(k * math.log(self.n) / math.log(self.m)) - 1)
        while self.m**l < target:
            l += 1
        while l > 0 and self.m ** (l - 1) >= target:
            l -= 1
        return l


def new_carpet(m: int, n: int, digits) -> Carpet:
    return Carpet(m, n, tuple(tuple(d) for d in digits))


def carpet_from_counts(m: int, n: int, counts) -> Carpet:
    """Carpet whose column i holds the bottom ``counts[i]`` cells.

    Every dimension and observable depends only on the column counts, so the
    bottom-aligned placement is a canonical representative.
    """
    if len(counts) > m:
        raise BadDigits(f"{len(counts)} column counts for m={m}")
    digits = [(i, j) for i, c in enumerate(counts) for j in range(c)]
    if any(c > n for c in counts):
        raise BadDigits(f"column count exceeds n={n}")
    return new_carpet(m, n, digits)


# -- dimensions ------------------------------------------------------------


def _base_term(c: Carpet) -> float:
    return math.log(c.n_columns) / math.log(c.m)


def assouad_dim(c: Carpet) -> float:
    return _base_term(c) + math.log(c.c_max) / math.log(c.n)


def box_dim(c: Carpet) -> float:
    return _base_term(c) + math.log(c.n_digits / c.n_columns) / math.log(c.n)


def hausdorff_dim(c: Carpet) -> float:
    """McMullen's formula log_m sum_i C_i^(log m / log n) over occupied columns."""
    exponent = math.log(c.m) / math.log(c.n)
    total = sum(c.column_counts[i] ** exponent for i in c.columns)
    return math.log(total) / math.log(c.m)


def is_uniform_fibres(c: Carpet) -> bool:
    return len({c.column_counts[i] for i in c.columns}) == 1


def gamma(c: Carpet) -> float:
    return math.log(c.n) / math.log(c.m)


# -- geometry ----------------------------------------------------------------


def render_lattice(c: Carpet, k: int, cap: int = RENDER_CAP):
    """Integer lower-left corners of the depth-k rectangles.

    Returns ``(X, Y)`` with rectangle ``t`` equal to
    ``[X[t]/m**k, (X[t]+1)/m**k] x [Y[t]/n**k, (Y[t]+1)/n**k]``.
    """
    if k < 0:
        raise ValueError("depth must be non-negative")
    if c.n_digits**k > cap:
        raise TooDeep(f"|D|^k = {c.n_digits}^{k} exceeds cap {cap}")
    X = np.zeros(1, dtype=np.int64)
    Y = np.zeros(1, dtype=np.int64)
    di, dj = c.digit_columns, c.digit_rows
    for _ in range(k):
        X = (X[:, None] * c.m + di[None, :]).ravel()
        Y = (Y[:, None] * c.n + dj[None, :]).ravel()
    return X, Y


def render_depth(c: Carpet, k: int, cap: int = RENDER_CAP) -> np.ndarray:
    """Depth-k approximation as an ``(|D|**k, 4)`` array of (x, y, width, height).

    Depth 0 is the unit square.
    """
    X, Y = render_lattice(c, k, cap)
    w = float(c.m) ** -k
    h = float(c.n) ** -k
    out = np.empty((X.size, 4))
    out[:, 0] = X * w
    out[:, 1] = Y * h
    out[:, 2] = w
    out[:, 3] = h
    return out
