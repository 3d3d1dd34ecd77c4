"""Command-line entry point: ``inhomog <subcommand> --config carpet.toml``.

Exit codes: 0 success, 1 internal error, 2 bad config or usage, 3 violated
precondition (for example a threshold outside the valid range).
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

from . import experiment as ex
from .carpet import assouad_dim, box_dim, gamma, hausdorff_dim, is_uniform_fibres, render_depth
from .config import CarpetConfig, load_config
from .deviation import INF, lambda_prime, ldp_lambda_range, rate_I, rate_function
from .errors import ConfigError, InhomogError, TooDeep
from .measure import alpha_mean
from .symbolic import (
    Code,
    covering_count_bruteforce,
    covering_count_enumerate,
    covering_count_formula,
    covering_regime,
    log_scale,
    parse_scale,
    scale_indices,
)

EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3


class UsageError(ConfigError):
    pass


# -- argument helpers ------------------------------------------------------------


def parse_int_list(text: str) -> list[int]:
    """``'100,200'`` or ``'100:1000:100'`` (inclusive stop)."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def resolve_code(text: str, cfg: CarpetConfig, length: int) -> Code:
    """Build a length-``length`` code from ``random:<seed>``, ``const:<i,j>`` or a digit list.

    A digit list is written ``i,j;i,j;...`` and repeated periodically up to
    the required length.
    """
    c = cfg.carpet
    text = text.strip()
    if text.startswith("random:"):
        try:
            seed = int(text[len("random:") :])
        except ValueError:
            raise UsageError(f"bad seed in code {text!r}") from None
        return ex.sample_code(cfg.measure, length, seed)
    if text.startswith("const:"):
        letters = _digit_list(text[len("const:") :])
        if len(letters) != 1:
            raise UsageError(f"const code needs exactly one digit, got {text!r}")
        word = letters * length
    else:
        letters = _digit_list(text)
        word = [letters[t % len(letters)] for t in range(length)]
    for d in letters:
        if d not in c.digits:
            raise UsageError(f"{d} is not a digit of the configured carpet")
    return Code(tuple(word))


def _digit_list(text: str) -> list[tuple[int, int]]:
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.replace("(", "").replace(")", "").split(",")
        try:
            i, j = (int(p) for p in parts)
        except ValueError:
            raise UsageError(f"cannot parse digit {chunk!r}; expected 'i,j'") from None
        out.append((i, j))
    if not out:
        raise UsageError(f"empty digit list {text!r}")
    return out


def _scale(text: str, cfg: CarpetConfig) -> Fraction:
    return parse_scale(text, cfg.carpet)


def _num(x) -> str:
    return "inf" if x is INF else f"{x:.10g}"


# -- subcommands -------------------------------------------------------------------


def cmd_dims(cfg: CarpetConfig, args) -> None:
    c, mu = cfg.carpet, cfg.measure
    rf = rate_function(mu)
    values = [
        ("assouad", assouad_dim(c)),
        ("box", box_dim(c)),
        ("hausdorff", hausdorff_dim(c)),
        ("gamma", gamma(c)),
        ("alpha", alpha_mean(mu)),
        ("uniform_fibres", int(is_uniform_fibres(c))),
        ("argmax_mass", rf.argmax_mass),
    ]
    if args.out:
        ex.write_rows(args.out, ["quantity", "value"], [(k, v) for k, v in values])
    print(" ".join(f"{k}={_num(v) if isinstance(v, float) else v}" for k, v in values))


def cmd_rate(cfg: CarpetConfig, args) -> None:
    mu = cfg.measure
    rf = rate_function(mu)
    grid = parse_float_list(args.lambdas) if args.lambdas else ex.lambda_grid(mu, args.points)
    rows = ex.rate_curve_rows(rf, grid, args.eps)
    if args.out:
        ex.write_rows(args.out, ["lambda", "I", "rate_symbolic", "rate_geometric"], rows)
    lo, hi = ldp_lambda_range(mu)
    left = rate_I(rf, lambda_prime(mu, lo))
    print(
        f"lambda_range=[{lo:.6f}, {hi:.6f}) I_left={_num(left)} "
        f"I_right_limit={-math.log(rf.argmax_mass):.6f} rows={len(rows)}"
    )


def cmd_profile(cfg: CarpetConfig, args) -> None:
    c = cfg.carpet
    if args.figure2:
        R = float(args.R) if args.R else 0.3
        rows = ex.figure2_rows(c, R, args.points)
        if args.out:
            ex.emit_figure2(c, args.out, R, args.points)
        print(f"figure2 R={R} rows={len(rows)} shapes=decreasing,constant,increasing")
        return
    R = _scale(args.R or "0.3", cfg)
    big = scale_indices(c, R)
    if args.r:
        r_grid = [_scale(t, cfg) for t in args.r.split(",")]
    else:
        r_grid = [Fraction(1, c.n**j) for j in range(big.l2 + 1, 3 * big.l1 + 1)]
    depth = max(scale_indices(c, r).l1 for r in r_grid)
    d = resolve_code(args.code, cfg, max(depth, big.l1))
    rows = ex.profile_rows(d, c, R, r_grid)
    if args.out:
        ex.write_rows(args.out, ["r", "A", "branch"], rows)
    values = [v for _, v, _ in rows]
    print(f"R={float(R):.6g} points={len(rows)} A_min={min(values):.6f} A_max={max(values):.6f}")


def cmd_ldp(cfg: CarpetConfig, args) -> None:
    mu = cfg.measure
    rf = rate_function(mu)
    ks = parse_int_list(args.k)
    if args.trials is None:
        fit = ex.ldp_fit(rf, args.eps, args.lam, ks)
        rows = [(k, p, -math.log(p) / k) for k, p in zip(fit.k, fit.probability)]
        if args.out:
            ex.write_rows(args.out, ["k", "probability", "rate_estimate"], rows)
        print(
            f"mode=exact slope={fit.slope:.6f} predicted={fit.predicted:.6f} "
            f"relative_error={fit.relative_error:.4f}"
        )
        return
    rows = []
    for k in ks:
        p_hat, _ = ex.estimate_exceedance_mc(mu, k, args.eps, args.lam, args.trials, args.seed, args.threads)
        rate = -math.log(p_hat) / k if p_hat > 0 else INF
        rows.append((k, p_hat, rate))
    if args.out:
        ex.write_rows(args.out, ["k", "probability", "rate_estimate"], rows)
    ldp_lo, ldp_hi = ldp_lambda_range(mu)
    if args.lam >= ldp_hi:
        predicted = INF
    elif args.lam >= ldp_lo:
        predicted = args.eps * rate_I(rf, lambda_prime(mu, args.lam))
    else:
        predicted = 0.0
    print(
        f"mode=monte_carlo trials={args.trials} "
        + " ".join(f"p[{k}]={p:.4g}" for k, p, _ in rows)
        + f" predicted={_num(predicted)}"
    )


def cmd_clt(cfg: CarpetConfig, args) -> None:
    res = ex.clt_test(cfg.measure, args.k, args.delta, args.trials, args.seed, threads=args.threads)
    if args.out:
        ex.write_rows(args.out, ["tau", "empirical", "phi"], res.table)
    print(
        f"ks={res.ks_stat:.5f} ks_mid={res.ks_mid:.5f} table_error={res.table_error():.5f} "
        f"window={res.window} trials={res.trials}"
    )


def cmd_cover_check(cfg: CarpetConfig, args) -> None:
    c = cfg.carpet
    R, r = _scale(args.R, cfg), _scale(args.r, cfg)
    small = scale_indices(c, r)
    d = resolve_code(args.code, cfg, small.l1)
    formula = covering_count_formula(d, c, R, r)
    regime = covering_regime(d, c, R, r)
    try:
        enum = covering_count_enumerate(d, c, R, r)
    except TooDeep:
        enum = None
    try:
        mesh = covering_count_bruteforce(d, c, R, r)
    except TooDeep:
        mesh = None
    span = log_scale(R) - log_scale(r)
    ratio = None if mesh is None else abs(math.log(mesh) - math.log(formula)) / span
    row = (formula, enum, mesh, ratio, span, regime)
    if args.out:
        ex.write_rows(
            args.out,
            ["formula", "enumeration", "mesh", "log_ratio", "log_R_over_r", "regime"],
            [tuple("" if v is None else v for v in row)],
        )
    fmt = lambda v: "n/a" if v is None else (f"{v:.6f}" if isinstance(v, float) else str(v))
    print(
        f"formula={formula} enumeration={fmt(enum)} mesh={fmt(mesh)} "
        f"log_ratio={fmt(ratio)} log_R_over_r={span:.6f} regime={regime}"
    )


def cmd_render(cfg: CarpetConfig, args) -> None:
    rects = render_depth(cfg.carpet, args.depth)
    if args.out:
        ex.write_rows(args.out, ["x", "y", "width", "height"], rects.tolist())
    print(f"depth={args.depth} rectangles={rects.shape[0]}")


COMMANDS = {
    "dims": cmd_dims,
    "rate": cmd_rate,
    "profile": cmd_profile,
    "ldp": cmd_ldp,
    "clt": cmd_clt,
    "cover-check": cmd_cover_check,
    "render": cmd_render,
}


# -- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_flags(parser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="carpet TOML file")
    parser.add_argument("--out", default=default, help="CSV output path")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inhomog", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("dims", parents=[common], help="dimensions and measure statistics")

    p = sub.add_parser("rate", parents=[common], help="rate-function curve")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--lambdas", help="comma-separated thresholds instead of the default grid")

    p = sub.add_parser("profile", parents=[common], help="A(d, R, r) along a grid of r")
    p.add_argument("--code", default="random:0")
    p.add_argument("--R", help="outer scale, e.g. 0.3 or n^-2")
    p.add_argument("--r", help="comma-separated inner scales (default n^-j down to 3 l1(R))")
    p.add_argument("--figure2", action="store_true", help="constant-average shape profiles")
    p.add_argument("--points", type=int, default=200)

    p = sub.add_parser("ldp", parents=[common], help="exceedance tail table and slope")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--k", default="100:1000:100")
    p.add_argument("--trials", type=int, help="Monte Carlo trials; omit for exact mode")

    p = sub.add_parser("clt", parents=[common], help="normal approximation of A_delta")
    p.add_argument("--delta", type=float, default=1.2)
    p.add_argument("--k", type=int, default=2000)
    p.add_argument("--trials", type=int, default=100_000)

    p = sub.add_parser("cover-check", parents=[common], help="covering count cross-check")
    p.add_argument("--code", default="random:0")
    p.add_argument("--R", required=True)
    p.add_argument("--r", required=True)

    p = sub.add_parser("render", parents=[common], help="depth-k rectangles")
    p.add_argument("--depth", type=int, required=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.config:
            raise UsageError("--config is required")
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InhomogError, ValueError) as exc:
        print(f"precondition violated ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001 - top-level guard
        print(f"internal error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
