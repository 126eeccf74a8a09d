"""Run configuration documents (YAML) for the command-line interface.

Filters are ``{offset: k, taps: [...]}``; functions are
``{type: bspline, order: m}``, ``{type: haar}``,
``{type: indicator, a: .., b: .., height: ..}`` or
``{type: pieces, breaks: [...], coeffs: [[...], ...]}`` with local
monomial coefficients per piece.
"""
import math
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ConfigError
from .signals import CompactPiecewisePoly, bspline, haar_wavelet, indicator

CONVENTIONS = ("paper", "unit")
COMMANDS = (
    "verify-uep",
    "verify-oep",
    "dual-oep",
    "dual-pair",
    "fiber",
    "bounds",
    "reconstruct",
    "quasi-affine-compare",
)


@dataclass
class RunConfig:
    command: str
    convention: str
    raw: dict
    grid: int = 1024
    K: int = 64
    trunc: int = 8
    J: int = 8
    tol: float = None
    strict: bool = False

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def truncation(self):
        return {"grid": self.grid, "K": self.K, "trunc": self.trunc, "J": self.J}


def load_document(path):
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError("<file>", f"no such file: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a mapping at the top level")
    return doc


def number(value, path, kind=float):
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if isinstance(value, str):
        value = _expr(value, path)
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}") from None
    if kind is int and out != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if not math.isfinite(out):
        raise ConfigError(path, "must be finite")
    return out


_NAMES = {"sqrt": math.sqrt, "pi": math.pi}


def _expr(text, path):
    # taps like "sqrt(2)/4"; only arithmetic on the two names above
    allowed = set("0123456789.+-*/() e")
    stripped = text.replace("sqrt", "").replace("pi", "")
    if not set(stripped) <= allowed:
        raise ConfigError(path, f"cannot read {text!r} as a number")
    try:
        return float(eval(text, {"__builtins__": {}}, _NAMES))
    except Exception:
        raise ConfigError(path, f"cannot read {text!r} as a number") from None


def positive(value, path, kind=float):
    out = number(value, path, kind)
    if out <= 0:
        raise ConfigError(path, f"must be positive, got {value!r}")
    return out


def require(doc, key, path):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return doc[key]


def parse_filter(spec, path):
    """``{offset, taps}`` or a bare tap list -> ``{"taps": [...], "offset": k}``."""
    if isinstance(spec, list):
        spec = {"taps": spec}
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected {offset, taps}")
    taps = require(spec, "taps", path)
    if not isinstance(taps, list) or not taps:
        raise ConfigError(f"{path}.taps", "expected a nonempty list")
    vals = [number(t, f"{path}.taps[{i}]") for i, t in enumerate(taps)]
    offset = number(spec.get("offset", 0), f"{path}.offset", int)
    return {"taps": vals, "offset": offset}


def parse_function(spec, path):
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected a function descriptor {type: ...}")
    kind = require(spec, "type", path)
    if kind == "bspline":
        return bspline(positive(require(spec, "order", path), f"{path}.order", int))
    if kind == "haar":
        return haar_wavelet()
    if kind == "indicator":
        a = number(require(spec, "a", path), f"{path}.a")
        b = number(require(spec, "b", path), f"{path}.b")
        if not a < b:
            raise ConfigError(path, "indicator needs a < b")
        return indicator(a, b, number(spec.get("height", 1.0), f"{path}.height"))
    if kind == "pieces":
        breaks = require(spec, "breaks", path)
        coeffs = require(spec, "coeffs", path)
        try:
            return CompactPiecewisePoly(
                [number(b, f"{path}.breaks") for b in breaks],
                np.array([[number(c, f"{path}.coeffs") for c in row] for row in coeffs]),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.type", f"unknown function type {kind!r}")


def parse_functions(spec, path):
    if not isinstance(spec, list):
        raise ConfigError(path, "expected a list of function descriptors")
    return [parse_function(s, f"{path}[{i}]") for i, s in enumerate(spec)]


def build_run(command, doc, overrides):
    """Merge the document with command-line overrides and validate."""
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    conv = overrides.get("convention") or doc.get("convention")
    if conv is None:
        raise ConfigError("convention", "missing required field (paper or unit)")
    if conv not in CONVENTIONS:
        raise ConfigError("convention", f"must be one of {CONVENTIONS}, got {conv!r}")
    run = RunConfig(command=command, convention=conv, raw=doc)
    for key, kind in (("grid", int), ("K", int), ("trunc", int), ("J", int)):
        val = overrides.get(key)
        if val is None:
            val = doc.get(key, getattr(run, key))
        setattr(run, key, positive(val, key, kind))
    tol = overrides.get("tol")
    if tol is None:
        tol = doc.get("tol")
    run.tol = None if tol is None else positive(tol, "tol")
    run.strict = bool(overrides.get("strict") or doc.get("strict", False))
    return run
