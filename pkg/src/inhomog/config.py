"""Carpet + measure configuration files.

The format is TOML restricted to these keys::

    m = 3
    n = 4
    digits = [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [2, 0], [2, 1]]

    [measure]
    kind = "column_uniform"   # max_entropy | mcmullen | column_uniform | explicit
    # weights = [[0, 0, 0.2], [0, 1, 0.1], ...]   only with kind = "explicit"
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .carpet import Carpet, new_carpet
from .errors import BadDigits, BadGrid, BadWeights, ConfigError
from .measure import BernoulliMeasure, bernoulli, column_uniform, max_entropy, mcmullen

KINDS = {
    "max_entropy": max_entropy,
    "mcmullen": mcmullen,
    "column_uniform": column_uniform,
}
TOP_KEYS = {"m", "n", "digits", "measure"}
MEASURE_KEYS = {"kind", "weights"}


@dataclass(frozen=True)
class CarpetConfig:
    carpet: Carpet
    measure: BernoulliMeasure
    kind: str


def _int(value, field):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", field)
    return value


def parse_config(text: str) -> CarpetConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc)) from exc
    for key in doc:
        if key not in TOP_KEYS:
            raise ConfigError("unknown key", key)
    for key in ("m", "n", "digits"):
        if key not in doc:
            raise ConfigError("missing required key", key)
    m = _int(doc["m"], "m")
    n = _int(doc["n"], "n")
    raw = doc["digits"]
    if not isinstance(raw, list):
        raise ConfigError("expected a list of [i, j] pairs", "digits")
    digits = []
    for t, pair in enumerate(raw):
        field = f"digits[{t}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError("expected an [i, j] pair", field)
        digits.append((_int(pair[0], field + "[0]"), _int(pair[1], field + "[1]")))
    try:
        carpet = new_carpet(m, n, digits)
    except BadGrid as exc:
        raise ConfigError(str(exc), "m") from exc
    except BadDigits as exc:
        raise ConfigError(str(exc), "digits") from exc

    section = doc.get("measure", {"kind": "max_entropy"})
    if not isinstance(section, dict):
        raise ConfigError("expected a table", "measure")
    for key in section:
        if key not in MEASURE_KEYS:
            raise ConfigError("unknown key", f"measure.{key}")
    kind = section.get("kind", "max_entropy")
    if kind == "explicit":
        if "weights" not in section:
            raise ConfigError("explicit measure needs weights", "measure.weights")
        table = {}
        for t, row in enumerate(section["weights"]):
            field = f"measure.weights[{t}]"
            if not isinstance(row, list) or len(row) != 3:
                raise ConfigError("expected an [i, j, weight] triple", field)
            i, j = _int(row[0], field + "[0]"), _int(row[1], field + "[1]")
            if not isinstance(row[2], (int, float)) or isinstance(row[2], bool):
                raise ConfigError(f"expected a number, got {row[2]!r}", field + "[2]")
            if (i, j) in table:
                raise ConfigError(f"duplicate weight for {(i, j)}", field)
            table[(i, j)] = float(row[2])
        try:
            measure = bernoulli(carpet, table)
        except BadWeights as exc:
            raise ConfigError(str(exc), "measure.weights") from exc
    elif kind in KINDS:
        if "weights" in section:
            raise ConfigError(f"weights are only allowed with kind = 'explicit'", "measure.weights")
        measure = KINDS[kind](carpet)
    else:
        raise ConfigError(f"unknown measure kind {kind!r}", "measure.kind")
    return CarpetConfig(carpet, measure, kind)


def load_config(path) -> CarpetConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)
