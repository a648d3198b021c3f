"""JSON configuration for the verification suites.

Indices in tensor and two-form entries are 1-based, as written by hand.
Tensor entries ``[i, j, k, v]`` each generate a signed antisymmetric orbit;
a two-form entry ``[i, j, v]`` sets ``omega_ij = v = -omega_ji``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema

from magtrans.core import AntisymTensor3, TwoForm

_scalar = {
    "anyOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"},
    ]
}

_vector = {"type": "array", "items": _scalar, "minItems": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "magtrans suite configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["n"],
    "properties": {
        "n": {"type": "integer", "minimum": 1, "maximum": 8},
        "tensor": {
            "oneOf": [
                {"enum": ["epsilon", "zero"]},
                {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [
                            {"type": "integer", "minimum": 1},
                            {"type": "integer", "minimum": 1},
                            {"type": "integer", "minimum": 1},
                            _scalar,
                        ],
                        "minItems": 4,
                        "maxItems": 4,
                    },
                },
            ]
        },
        "two_form": {
            "oneOf": [
                {"enum": ["zero"]},
                {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [
                            {"type": "integer", "minimum": 1},
                            {"type": "integer", "minimum": 1},
                            _scalar,
                        ],
                        "minItems": 3,
                        "maxItems": 3,
                    },
                },
            ]
        },
        "backend": {"enum": ["rational", "float"]},
        "seed": {"type": "integer", "minimum": 1},
        "samples": {"type": "integer", "minimum": 1},
        "tolerance": {"type": "number", "minimum": 0},
        "window": {
            "type": "array",
            "items": {"type": "integer"},
            "minItems": 2,
            "maxItems": 2,
        },
        "margin": {"type": "integer", "minimum": 0},
        "max_level": {"type": ["integer", "null"], "minimum": 0},
        "cutoffs": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 2},
        "luscher_window": {"type": "integer", "minimum": 1},
        "trig_degree": {"type": "integer", "minimum": 1},
        "mc_samples": {"type": "integer", "minimum": 1000},
        "fock_points": {"type": "integer", "minimum": 1},
        "ansatz_degree": {"type": "integer", "minimum": 1, "maximum": 4},
        "perturb": {"type": "boolean"},
        "decay": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "loop": {"enum": ["triangle", "open", "zero"]},
                "x": _vector,
                "y": _vector,
                "velocity": {"type": "number"},
                "distances": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "points": {"type": "integer", "minimum": 8},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "report": {"type": "string"},
                "decay_table": {"type": "string"},
            },
        },
    },
}

DEFAULT_CUTOFFS = [64, 128, 256, 512, 1024, 2048, 4096]


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass
class DecaySettings:
    loop: str = "triangle"
    x: tuple = (0.3, 0.1)
    y: tuple = (-0.2, 0.4)
    velocity: float = 0.5
    distances: tuple = (32, 1024)
    points: int = 24


@dataclass
class SuiteConfig:
    n: int
    tensor: AntisymTensor3
    two_form: TwoForm
    backend: str = "rational"
    seed: int = 1
    samples: int = 500
    tolerance: float = 1e-9
    window: tuple = (-8, 8)
    margin: int = 4
    max_level: int | None = 1
    cutoffs: list = field(default_factory=lambda: list(DEFAULT_CUTOFFS))
    luscher_window: int = 12
    trig_degree: int = 4
    mc_samples: int = 200_000
    fock_points: int = 10
    ansatz_degree: int = 3
    perturb: bool = False
    decay: DecaySettings = field(default_factory=DecaySettings)
    outputs: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _scalar_value(v, backend: str, where: str):
    if isinstance(v, bool):
        raise ConfigError(f"{where}: booleans are not numbers")
    if isinstance(v, float):
        if backend == "rational":
            raise ConfigError(
                f"{where}: float value {v!r} with the rational backend; give an integer or a 'p/q' string"
            )
        return v
    value = Fraction(v.replace(" ", "")) if isinstance(v, str) else Fraction(v)
    return float(value) if backend == "float" else value


def _check_index(i: int, n: int, where: str):
    if not 1 <= i <= n:
        raise ConfigError(f"{where}: index {i} out of range 1..{n}")


def parse_config(data: dict) -> SuiteConfig:
    """Validate a decoded JSON object and fill defaults."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(f"{_path(e.absolute_path)}: {e.message}")
    n = data["n"]
    backend = data.get("backend", "rational")

    tsrc = data.get("tensor", "epsilon" if n >= 3 else "zero")
    if tsrc == "epsilon":
        if n < 3:
            raise ConfigError(f"tensor: 'epsilon' needs n >= 3, got n={n}")
        tensor = AntisymTensor3.epsilon(n, 1.0 if backend == "float" else 1)
    elif tsrc == "zero":
        tensor = AntisymTensor3.zero(n)
    else:
        entries = []
        for idx, (i, j, k, v) in enumerate(tsrc):
            where = f"tensor[{idx}]"
            for t in (i, j, k):
                _check_index(t, n, where)
            entries.append((i - 1, j - 1, k - 1, _scalar_value(v, backend, where)))
        tensor = AntisymTensor3.from_entries(n, entries)

    wsrc = data.get("two_form", [[1, 2, 1]] if n >= 2 else "zero")
    if wsrc == "zero":
        two_form = TwoForm(n)
    else:
        entries = []
        for idx, (i, j, v) in enumerate(wsrc):
            where = f"two_form[{idx}]"
            _check_index(i, n, where)
            _check_index(j, n, where)
            entries.append((i - 1, j - 1, _scalar_value(v, backend, where)))
        two_form = TwoForm(n, entries)

    window = tuple(data.get("window", (-8, 8)))
    margin = data.get("margin", 4)
    if not window[0] < 0 <= window[1]:
        raise ConfigError(f"window: need low < 0 <= high, got {list(window)}")
    if not window[0] + margin < 0 <= window[1] - margin:
        raise ConfigError(f"margin: {margin} does not fit inside window {list(window)}")

    cutoffs = data.get("cutoffs", list(DEFAULT_CUTOFFS))
    if sorted(set(cutoffs)) != cutoffs:
        raise ConfigError("cutoffs: must be strictly increasing")

    d = data.get("decay", {})
    decay = DecaySettings(
        loop=d.get("loop", "triangle"),
        x=tuple(float(Fraction(v) if isinstance(v, str) else v) for v in d.get("x", DecaySettings.x)),
        y=tuple(float(Fraction(v) if isinstance(v, str) else v) for v in d.get("y", DecaySettings.y)),
        velocity=float(d.get("velocity", 0.5)),
        distances=tuple(d.get("distances", (32, 1024))),
        points=d.get("points", 24),
    )
    if len(decay.x) != len(decay.y):
        raise ConfigError("decay.y: length differs from decay.x")
    if decay.distances[0] >= decay.distances[1]:
        raise ConfigError("decay.distances: need min < max")

    return SuiteConfig(
        n=n,
        tensor=tensor,
        two_form=two_form,
        backend=backend,
        seed=data.get("seed", 1),
        samples=data.get("samples", 500),
        tolerance=float(data.get("tolerance", 1e-9)),
        window=window,
        margin=margin,
        max_level=data.get("max_level", 1),
        cutoffs=cutoffs,
        luscher_window=data.get("luscher_window", 12),
        trig_degree=data.get("trig_degree", 4),
        mc_samples=data.get("mc_samples", 200_000),
        fock_points=data.get("fock_points", 10),
        ansatz_degree=data.get("ansatz_degree", 3),
        perturb=data.get("perturb", False),
        decay=decay,
        outputs=dict(data.get("outputs", {})),
        raw=data,
    )


def validate_config(path) -> SuiteConfig:
    """Read and validate a JSON config file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<file>: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(data)


def schema_json() -> str:
    return json.dumps(SCHEMA, indent=2) + "\n"
