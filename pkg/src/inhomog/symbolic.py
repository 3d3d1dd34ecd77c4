"""Codes, scale indices, approximate squares and covering counts."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .carpet import Carpet
from .errors import BadRange, BadScale, BadScales, CodeTooShort, NotInSet, TooDeep

SNAP_TOL = 1e-12
MESH_DEPTH_CAP = 14
ENUMERATION_CAP = 2_000_000


@dataclass(frozen=True, order=True)
class Code:
    """Finite prefix of an infinite word over the digit set, indexed from 1."""

    word: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "word", tuple((int(i), int(j)) for i, j in self.word))

    def __len__(self):
        return len(self.word)

    def __getitem__(self, l):
        """Letter at 1-based position ``l``."""
        if not 1 <= l <= len(self.word):
            raise IndexError(l)
        return self.word[l - 1]

    @property
    def columns(self) -> np.ndarray:
        return np.fromiter((i for i, _ in self.word), dtype=np.int64, count=len(self.word))

    @property
    def rows(self) -> np.ndarray:
        return np.fromiter((j for _, j in self.word), dtype=np.int64, count=len(self.word))

    @classmethod
    def constant(cls, digit, length: int) -> "Code":
        return cls((tuple(digit),) * length)

    @classmethod
    def from_indices(cls, c: Carpet, indices) -> "Code":
        return cls(tuple(c.digits[int(t)] for t in indices))


@dataclass(frozen=True)
class ScaleIndices:
    l1: int
    l2: int
    r: Fraction


@dataclass(frozen=True)
class ApproxSquare:
    """Words agreeing with ``code`` in the first l1 columns and first l2 rows."""

    code: Code
    l1: int
    l2: int

    def contains(self, word) -> bool:
        w = word.word if isinstance(word, Code) else tuple(word)
        if len(w) < self.l1:
            raise CodeTooShort(f"need {self.l1} letters, got {len(w)}")
        return all(w[l][0] == self.code.word[l][0] for l in range(self.l1)) and all(
            w[l][1] == self.code.word[l][1] for l in range(self.l2)
        )


def check_code(d: Code, c: Carpet, length: int = 0) -> None:
    if len(d) < length:
        raise CodeTooShort(f"code has {len(d)} letters, operation needs {length}")
    allowed = set(c.digits)
    for l, letter in enumerate(d.word, start=1):
        if letter not in allowed:
            raise ValueError(f"letter {letter} at position {l} is not a digit of the carpet")


# -- scales ----------------------------------------------------------------

_POWER = re.compile(r"^\s*([0-9]+|m|n)\s*\^\s*\(?\s*-\s*([0-9]+)\s*\)?\s*$")


def parse_scale(text: str, c: Carpet | None = None) -> Fraction:
    """Parse ``'0.1'``, ``'n^-12'``, ``'m^-3'`` or ``'3^-5'`` into an exact scale."""
    match = _POWER.match(text)
    if match:
        base, exp = match.groups()
        if base in ("m", "n"):
            if c is None:
                raise BadScale(f"{text!r} needs a carpet to resolve {base}")
            base = c.m if base == "m" else c.n
        return Fraction(1, int(base) ** int(exp))
    try:
        value = Fraction(text.strip())
    except ValueError as exc:
        raise BadScale(f"cannot parse scale {text!r}") from exc
    return value


def exact_scale(r, c: Carpet) -> Fraction:
    """Exact rational for ``r``.

    Floats within relative 1e-12 of an integer power of m or n snap to that
    power, so ``3**-5`` lands on the boundary it was meant to hit.
    """
    if isinstance(r, Fraction):
        value = r
    elif isinstance(r, int):
        value = Fraction(r)
    else:
        r = float(r)
        if not math.isfinite(r):
            raise BadScale(f"scale {r!r} is not finite")
        value = Fraction(r)
        if 0 < r < 1:
            for base in (c.m, c.n):
                k = round(-math.log(r) / math.log(base))
                if k >= 1 and abs(r * float(base) ** k - 1.0) <= SNAP_TOL:
                    return Fraction(1, base**k)
    if not 0 < value < 1:
        raise BadScale(f"scale must lie in (0, 1), got {r!r}")
    return value


def log_scale(r: Fraction) -> float:
    return math.log(r.numerator) - math.log(r.denominator)


def _level(base: int, r: Fraction) -> int:
    """The unique l >= 1 with base**-l <= r < base**(-l+1)."""
    l = max(1, math.ceil(-log_scale(r) / math.log(base)))
    while Fraction(1, base**l) > r:
        l += 1
    while l > 1 and Fraction(1, base ** (l - 1)) <= r:
        l -= 1
    return l


def scale_indices(c: Carpet, r) -> ScaleIndices:
    r = exact_scale(r, c)
    return ScaleIndices(_level(c.m, r), _level(c.n, r), r)


# -- empirical column statistics -------------------------------------------


def proportion(d: Code, i: int, s: int, t: int) -> float:
    """Fraction of positions s..t (inclusive, 1-based) whose column is ``i``."""
    if not 1 <= s <= t or t > len(d):
        raise BadRange(f"need 1 <= s <= t <= {len(d)}, got s={s}, t={t}")
    hits = sum(1 for l in range(s - 1, t) if d.word[l][0] == i)
    return hits / (t - s + 1)


def window_log_mean(d: Code, c: Carpet, s: int, t: int) -> float:
    """Mean of log C_{i_l} over positions s..t."""
    if not 1 <= s <= t:
        raise BadRange(f"empty window {s}..{t}")
    if t > len(d):
        raise CodeTooShort(f"window ends at {t}, code has {len(d)} letters")
    logc = c.log_counts()
    return math.fsum(logc[d.columns[s - 1 : t]]) / (t - s + 1)


def geo_mean_R(d: Code, c: Carpet, R) -> float:
    """Geometric average of C_{i_l} over l = l2(R)+1 .. l1(R)."""
    idx = scale_indices(c, R)
    return math.exp(window_log_mean(d, c, idx.l2 + 1, idx.l1))


def geo_mean_rR(d: Code, c: Carpet, r, R) -> float:
    """Geometric average of C_{i_l} over l = l2(R)+1 .. l2(r)."""
    big, small = scale_indices(c, R), scale_indices(c, r)
    if small.l2 < big.l2 + 1:
        raise BadRange(f"l2(r)={small.l2} must exceed l2(R)={big.l2}")
    return math.exp(window_log_mean(d, c, big.l2 + 1, small.l2))


def approx_square(d: Code, c: Carpet, R) -> ApproxSquare:
    idx = scale_indices(c, R)
    check_code(d, c, idx.l1)
    return ApproxSquare(d, idx.l1, idx.l2)


# -- covering counts ---------------------------------------------------------


def _covering_plan(d: Code, c: Carpet, R, r):
    """Column-count window and exponents of |D| and |pi D| for the active regime."""
    big, small = scale_indices(c, R), scale_indices(c, r)
    if not small.r < big.r:
        raise BadScales(f"need 0 < r < R < 1, got r={small.r}, R={big.r}")
    check_code(d, c, small.l1)
    if small.l2 >= big.l1:
        window = (big.l2 + 1, big.l1)
        exponents = (small.l2 - big.l1, small.l1 - small.l2)
        regime = 1
    else:
        window = (big.l2 + 1, small.l2)
        exponents = (0, small.l1 - big.l1)
        regime = 2
    return regime, window, exponents


def covering_regime(d: Code, c: Carpet, R, r) -> int:
    return _covering_plan(d, c, R, r)[0]


def covering_count_formula(d: Code, c: Carpet, R, r) -> int:
    """Exact number of radius-r approximate squares needed inside Q(d, R)."""
    _, (s, t), (e_all, e_cols) = _covering_plan(d, c, R, r)
    prod = 1
    for l in range(s, t + 1):
        prod *= c.column_counts[d.word[l - 1][0]]
    return prod * c.n_digits**e_all * c.n_columns**e_cols


def regime_counts(d: Code, c: Carpet, R, r) -> tuple[int, int]:
    """Both regime products evaluated at the same scales, regardless of which applies."""
    big, small = scale_indices(c, R), scale_indices(c, r)
    check_code(d, c, max(small.l1, big.l1))
    cc = c.column_counts

    def prod(s, t):
        out = 1
        for l in range(s, t + 1):
            out *= cc[d.word[l - 1][0]]
        return out

    one = prod(big.l2 + 1, big.l1) * c.n_digits ** (small.l2 - big.l1) * c.n_columns ** (
        small.l1 - small.l2
    )
    two = prod(big.l2 + 1, small.l2) * c.n_columns ** (small.l1 - big.l1)
    return one, two


def log_covering_count_power(d: Code, c: Carpet, k: int, j: int) -> float:
    """log of the formula count for R = n**-k, r = n**-j, without big integers."""
    if not 1 <= k < j:
        raise BadScales(f"need 1 <= k < j, got k={k}, j={j}")
    l1R, l2R = c.ceil_gamma(k), k
    l1r, l2r = c.ceil_gamma(j), j
    if len(d) < l1r:
        raise CodeTooShort(f"code has {len(d)} letters, operation needs {l1r}")
    logc = c.log_counts()
    cols = d.columns
    if l2r >= l1R:
        s, t = l2R + 1, l1R
        extra = (l2r - l1R) * math.log(c.n_digits) + (l1r - l2r) * math.log(c.n_columns)
    else:
        s, t = l2R + 1, l2r
        extra = (l1r - l1R) * math.log(c.n_columns)
    return math.fsum(logc[cols[s - 1 : t]]) + extra


def covering_count_enumerate(
    d: Code, c: Carpet, R, r, cap: int = ENUMERATION_CAP
) -> int:
    """Count distinct radius-r approximate squares met by words of Q(d, R).

    Brute force: walks every position up to l1(r), extends each recorded
    (column word, row word) prefix by every admissible letter and deduplicates.
    """
    big, small = scale_indices(c, R), scale_indices(c, r)
    if not small.r < big.r:
        raise BadScales(f"need 0 < r < R < 1, got r={small.r}, R={big.r}")
    check_code(d, c, small.l1)
    radix = (c.m + 1) * (c.n + 1)
    prefixes = {0}
    for l in range(1, small.l1 + 1):
        i0, j0 = d.word[l - 1]
        symbols = set()
        for i, j in c.digits:
            if l <= big.l1 and i != i0:
                continue
            if l <= big.l2 and j != j0:
                continue
            col = i + 1 if l <= small.l1 else 0
            row = j + 1 if l <= small.l2 else 0
            symbols.add(col * (c.n + 1) + row)
        prefixes = {p * radix + s for p in prefixes for s in symbols}
        if len(prefixes) > cap:
            raise TooDeep(f"more than {cap} distinct prefixes at position {l}")
    return len(prefixes)


def _approx_square_lattice(d: Code, c: Carpet, big: ScaleIndices, depth: int, cap: int):
    """Integer corners of the depth-``depth`` rectangles inside Q(d, R)."""
    total = 1
    for l in range(big.l2 + 1, big.l1 + 1):
        total *= c.column_counts[d.word[l - 1][0]]
    total *= c.n_digits ** (depth - big.l1)
    if total > cap:
        raise TooDeep(f"{total} rectangles exceed the enumeration cap {cap}")
    di, dj = c.digit_columns, c.digit_rows
    X = np.zeros(1, dtype=np.int64)
    Y = np.zeros(1, dtype=np.int64)
    for l in range(1, depth + 1):
        i0, j0 = d.word[l - 1]
        mask = np.ones(c.n_digits, dtype=bool)
        if l <= big.l1:
            mask &= di == i0
        if l <= big.l2:
            mask &= dj == j0
        X = (X[:, None] * c.m + di[mask][None, :]).ravel()
        Y = (Y[:, None] * c.n + dj[mask][None, :]).ravel()
    return X, Y


def _mesh_ranges(lo_num, denom, r: Fraction, closed: bool):
    """Mesh cell index range met by [lo/denom, (lo+1)/denom] for each distinct lo."""
    p, q = r.numerator, r.denominator
    out = {}
    for lo in np.unique(lo_num).tolist():
        a = lo * q
        b = (lo + 1) * q
        scale = denom * p
        if closed:
            first = -((-a) // scale) - 1  # ceil(x0/r) - 1
            last = b // scale  # floor(x1/r)
        else:
            first = a // scale  # floor(x0/r)
            last = -((-b) // scale) - 1  # ceil(x1/r) - 1
        out[lo] = (first, last)
    return out


def covering_count_bruteforce(
    d: Code,
    c: Carpet,
    R,
    r,
    depth_cap: int = MESH_DEPTH_CAP,
    cap: int = ENUMERATION_CAP,
    closed: bool = True,
) -> int:
    """Number of r-mesh squares meeting the depth-l1(r) rectangles of Q(d, R).

    The mesh has side r and is anchored at the origin. With ``closed`` the
    squares and rectangles are closed sets, so edge contact counts; otherwise
    mesh cells are half-open ``[a r, (a+1) r)`` and rectangles are taken
    without their top and right edges.
    """
    big, small = scale_indices(c, R), scale_indices(c, r)
    if not small.r < big.r:
        raise BadScales(f"need 0 < r < R < 1, got r={small.r}, R={big.r}")
    if small.l1 > depth_cap:
        raise TooDeep(f"l1(r)={small.l1} exceeds depth cap {depth_cap}")
    check_code(d, c, small.l1)
    depth = small.l1
    X, Y = _approx_square_lattice(d, c, big, depth, cap)
    xr = _mesh_ranges(X, c.m**depth, small.r, closed)
    yr = _mesh_ranges(Y, c.n**depth, small.r, closed)
    ux, inv_x = np.unique(X, return_inverse=True)
    uy, inv_y = np.unique(Y, return_inverse=True)
    ax = np.array([xr[v] for v in ux.tolist()], dtype=np.int64).reshape(-1, 2)
    ay = np.array([yr[v] for v in uy.tolist()], dtype=np.int64).reshape(-1, 2)
    pairs = np.unique(np.stack([inv_x.ravel(), inv_y.ravel()], axis=1), axis=0)
    lo_x, hi_x = ax[pairs[:, 0], 0], ax[pairs[:, 0], 1]
    lo_y, hi_y = ay[pairs[:, 1], 0], ay[pairs[:, 1], 1]
    # a rectangle no wider or taller than r meets at most 3 cells per axis
    span = max(int((hi_x - lo_x).max()), int((hi_y - lo_y).max())) + 1
    keys = []
    stride = int(hi_y.max()) - int(lo_y.min()) + 3
    for dx in range(span):
        for dy in range(span):
            ok = (lo_x + dx <= hi_x) & (lo_y + dy <= hi_y)
            keys.append((lo_x[ok] + dx + 1) * stride + (lo_y[ok] + dy - lo_y.min() + 1))
    return int(np.unique(np.concatenate(keys)).size)


# -- points ------------------------------------------------------------------


def codes_of_point(c: Carpet, x, length: int) -> list[Code]:
    """Every length-``length`` code whose cylinder contains ``x``, ascending."""
    px, py = (Fraction(v) for v in x)
    if not (0 <= px <= 1 and 0 <= py <= 1):
        raise NotInSet(f"point {x} is outside the unit square")
    live = [((), px, py)]
    for depth in range(length):
        nxt = []
        for prefix, u, v in live:
            for i, j in c.digits:
                u2 = u * c.m - i
                v2 = v * c.n - j
                if 0 <= u2 <= 1 and 0 <= v2 <= 1:
                    nxt.append((prefix + ((i, j),), u2, v2))
        if not nxt:
            raise NotInSet(f"point {x} leaves the depth-{depth + 1} approximation")
        live = nxt
    codes = sorted(Code(prefix) for prefix, _, _ in live)
    if len(codes) > 4:
        raise AssertionError(f"{len(codes)} codes for one point; at most 4 are possible")
    return codes


def code_of_point(c: Carpet, x, length: int) -> Code:
    """Lexicographically minimal code of ``x`` (digits ordered by column, then row)."""
    return codes_of_point(c, x, length)[0]
