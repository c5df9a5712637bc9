"""Scenario files: parsing, validation and serialisation.

A scenario is a JSON or YAML mapping::

    {
      "field": {"E": [0, 0, 0], "B": [0, 0, 1], "charge": 1},
      "alpha": 0.5,
      "initial": {"pi0": [[0, 0], [1, 0], [0, 0], [0, 0]]},
      "tau_max": 5,
      "samples": 201,
      "outputs": {"trajectory": true, "eigen": true,
                  "semigroup": [[1, 1]], "asymptotic": {"m": 3, "taus": [30]},
                  "oracle": {"h": 0.001}}
    }

Complex numbers are ``[re, im]`` pairs (a bare number means zero imaginary
part).  ``initial`` holds ``x0 .. x{n-1}`` and ``pi0 .. pi{n-1}``; missing
``x`` entries default to zero.  An optional ``lambda`` entry (4×4, entries
real or ``[re, im]``) replaces the field-derived Λ.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dynamics import FractionalOrder, InitialState, derivative_count
from .errors import ParseError, ValidationError
from .field import FieldConfig, lambda_matrix

__all__ = ["Outputs", "ScenarioConfig", "parse_config", "load_config", "write_config", "atomic_write"]

_TOP_KEYS = {"field", "alpha", "initial", "tau_max", "samples", "outputs", "lambda"}
_FIELD_KEYS = {"E", "B", "charge"}
_OUTPUT_KEYS = {"trajectory", "eigen", "semigroup", "asymptotic", "oracle"}
_INITIAL_KEY = re.compile(r"^(x|pi)(\d+)$")
_WORDS = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five"}


@dataclass(frozen=True)
class Outputs:
    trajectory: bool = True
    eigen: bool = True
    semigroup: tuple = ()
    asymptotic_m: int | None = None
    asymptotic_taus: tuple = ()
    oracle_h: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    field: FieldConfig
    alpha: float
    x_derivs: tuple
    pi_derivs: tuple
    tau_max: float
    samples: int = 201
    outputs: Outputs = field(default_factory=Outputs)
    lam_override: tuple | None = None

    @property
    def order(self) -> FractionalOrder:
        return FractionalOrder(self.alpha)

    @property
    def initial(self) -> InitialState:
        return InitialState(np.array(self.x_derivs, dtype=complex), np.array(self.pi_derivs, dtype=complex))

    @property
    def lam(self) -> np.ndarray:
        if self.lam_override is not None:
            return np.array(self.lam_override, dtype=complex)
        return lambda_matrix(self.field)

    @property
    def taus(self) -> np.ndarray:
        return np.linspace(0.0, self.tau_max, self.samples)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads exponent floats without a dot (``1e-05``), as JSON writes them."""


_Loader.yaml_implicit_resolvers = {k: list(v) for k, v in yaml.SafeLoader.yaml_implicit_resolvers.items()}
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _complex(v, where, problems):
    if _is_number(v):
        return complex(float(v), 0.0)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(_is_number(c) for c in v):
        return complex(float(v[0]), float(v[1]))
    problems.append(f"{where}: expected a number or an [re, im] pair, got {v!r}")
    return None


def _vector(v, length, where, problems, convert):
    if not isinstance(v, (list, tuple)) or len(v) != length:
        problems.append(f"{where}: expected a list of {length} entries")
        return None
    out = [convert(c, f"{where}[{i}]", problems) for i, c in enumerate(v)]
    return None if any(c is None for c in out) else tuple(out)


def _real(v, where, problems):
    if _is_number(v) and math.isfinite(float(v)):
        return float(v)
    problems.append(f"{where}: expected a finite number, got {v!r}")
    return None


def _field(raw, problems):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        problems.append("field: expected a mapping with E, B, charge")
        return None
    for key in sorted(set(raw) - _FIELD_KEYS):
        problems.append(f"field.{key}: unknown key")
    e = _vector(raw.get("E", [0, 0, 0]), 3, "field.E", problems, _real)
    b = _vector(raw.get("B", [0, 0, 0]), 3, "field.B", problems, _real)
    q = _real(raw.get("charge", 1.0), "field.charge", problems)
    if e is None or b is None or q is None:
        return None
    return FieldConfig(e, b, q)


def _initial(raw, n, problems):
    if not isinstance(raw, dict):
        problems.append("initial: expected a mapping of x0.., pi0.. vectors")
        return None, None
    xs, ps = {}, {}
    for key, val in raw.items():
        m = _INITIAL_KEY.match(str(key))
        if not m:
            problems.append(f"initial.{key}: unknown key (expected x<k> or pi<k>)")
            continue
        vec = _vector(val, 4, f"initial.{key}", problems, _complex)
        (xs if m.group(1) == "x" else ps)[int(m.group(2))] = vec
    if n is None:
        return None, None
    if sorted(ps) != list(range(n)):
        word = _WORDS.get(n, str(n))
        problems.append(
            f"n={n} requires {word} initial derivative vector{'s' if n > 1 else ''} pi0..pi{n - 1}, got {len(ps)}"
        )
    extra_x = sorted(k for k in xs if k >= n)
    if extra_x:
        problems.append(f"initial: x{extra_x[0]} given but n={n}")
    zero = (0j,) * 4
    x_derivs = tuple(xs.get(k) or zero for k in range(n))
    pi_derivs = tuple(ps.get(k) or zero for k in range(n))
    return x_derivs, pi_derivs


def _outputs(raw, problems):
    if raw is None:
        return Outputs()
    if not isinstance(raw, dict):
        problems.append("outputs: expected a mapping")
        return None
    for key in sorted(set(raw) - _OUTPUT_KEYS):
        problems.append(f"outputs.{key}: unknown key")
    kw = {}
    for flag in ("trajectory", "eigen"):
        if flag in raw:
            if not isinstance(raw[flag], bool):
                problems.append(f"outputs.{flag}: expected true/false")
            else:
                kw[flag] = raw[flag]
    pairs = raw.get("semigroup", [])
    if not isinstance(pairs, list):
        problems.append("outputs.semigroup: expected a list of [tau, s] pairs")
    else:
        got = []
        for i, pr in enumerate(pairs):
            v = _vector(pr, 2, f"outputs.semigroup[{i}]", problems, _real)
            if v is not None:
                if v[0] < 0 or v[1] < 0:
                    problems.append(f"outputs.semigroup[{i}]: times must be non-negative")
                got.append(v)
        kw["semigroup"] = tuple(got)
    asym = raw.get("asymptotic")
    if asym is not None:
        if not isinstance(asym, dict):
            problems.append("outputs.asymptotic: expected {m, taus}")
        else:
            m = asym.get("m", 3)
            if not isinstance(m, int) or isinstance(m, bool) or m < 1:
                problems.append("outputs.asymptotic.m: expected a positive integer")
            else:
                kw["asymptotic_m"] = m
            taus = asym.get("taus", [])
            if not isinstance(taus, list) or not taus:
                problems.append("outputs.asymptotic.taus: expected a non-empty list")
            else:
                vals = [_real(t, f"outputs.asymptotic.taus[{i}]", problems) for i, t in enumerate(taus)]
                if all(v is not None for v in vals):
                    if any(v <= 0 for v in vals):
                        problems.append("outputs.asymptotic.taus: values must be positive")
                    kw["asymptotic_taus"] = tuple(vals)
    oracle = raw.get("oracle")
    if oracle is not None:
        h = oracle.get("h") if isinstance(oracle, dict) else None
        h = _real(h, "outputs.oracle.h", problems)
        if h is not None:
            if h <= 0:
                problems.append("outputs.oracle.h: step must be positive")
            kw["oracle_h"] = h
    return Outputs(**kw)


def _lambda(raw, problems):
    if raw is None:
        return None
    if not isinstance(raw, list) or len(raw) != 4:
        problems.append("lambda: expected a 4×4 matrix")
        return None
    rows = [_vector(r, 4, f"lambda[{i}]", problems, _complex) for i, r in enumerate(raw)]
    return None if any(r is None for r in rows) else tuple(rows)


def build_config(data) -> ScenarioConfig:
    """Validate an already-decoded mapping; raises ValidationError with every problem."""
    if not isinstance(data, dict):
        raise ValidationError("top level: expected a mapping")
    problems: list[str] = []
    for key in sorted(set(data) - _TOP_KEYS):
        problems.append(f"{key}: unknown key")
    fld = _field(data.get("field"), problems)

    alpha = data.get("alpha", 1.0)
    n = None
    if not _is_number(alpha) or not math.isfinite(float(alpha)):
        problems.append(f"alpha: expected a number, got {alpha!r}")
    elif alpha <= 0:
        problems.append("alpha must be positive")
    else:
        alpha = float(alpha)
        n = derivative_count(alpha)

    if "initial" not in data:
        problems.append("initial: missing (needs pi0 ..)")
        x_derivs = pi_derivs = None
    else:
        x_derivs, pi_derivs = _initial(data["initial"], n, problems)

    tau_max = data.get("tau_max")
    if tau_max is None:
        problems.append("tau_max: missing")
    elif _real(tau_max, "tau_max", problems) is not None and tau_max <= 0:
        problems.append("tau_max must be positive")

    samples = data.get("samples", 201)
    if not isinstance(samples, int) or isinstance(samples, bool):
        problems.append(f"samples: expected an integer, got {samples!r}")
    elif samples < 2:
        problems.append("samples must be at least 2")

    outputs = _outputs(data.get("outputs"), problems)
    lam = _lambda(data.get("lambda"), problems)
    if problems:
        raise ValidationError(problems)
    return ScenarioConfig(
        field=fld,
        alpha=alpha,
        x_derivs=x_derivs,
        pi_derivs=pi_derivs,
        tau_max=float(tau_max),
        samples=samples,
        outputs=outputs,
        lam_override=lam,
    )


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror or exc})") from exc
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        what = getattr(exc, "problem", None) or str(exc)
        raise ParseError(f"{where}: {what}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    return build_config(data)


load_config = parse_config


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def _pair(c: complex):
    return [c.real, c.imag]


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out = {
        "field": {"E": list(cfg.field.e_field), "B": list(cfg.field.b_field), "charge": cfg.field.charge},
        "alpha": cfg.alpha,
        "initial": {},
        "tau_max": cfg.tau_max,
        "samples": cfg.samples,
    }
    for k, vec in enumerate(cfg.x_derivs):
        out["initial"][f"x{k}"] = [_pair(c) for c in vec]
    for k, vec in enumerate(cfg.pi_derivs):
        out["initial"][f"pi{k}"] = [_pair(c) for c in vec]
    o = cfg.outputs
    outputs = {"trajectory": o.trajectory, "eigen": o.eigen, "semigroup": [list(p) for p in o.semigroup]}
    if o.asymptotic_m is not None:
        outputs["asymptotic"] = {"m": o.asymptotic_m, "taus": list(o.asymptotic_taus)}
    if o.oracle_h is not None:
        outputs["oracle"] = {"h": o.oracle_h}
    out["outputs"] = outputs
    if cfg.lam_override is not None:
        out["lambda"] = [[_pair(c) for c in row] for row in cfg.lam_override]
    return out


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_config(cfg: ScenarioConfig, path) -> None:
    atomic_write(path, json.dumps(config_to_dict(cfg), indent=2) + "\n")
