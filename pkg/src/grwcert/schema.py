"""Versioned JSON chart descriptions: validation that names field paths."""

from __future__ import annotations

import json
from pathlib import Path

from .chart import ChartInput

SPEC_SCHEMA_VERSION = 1

_IDENT = __import__("re").compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class SpecFileError(ValueError):
    """Schema violation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _require(data: dict, key: str, kind, where: str = ""):
    path = f"{where}.{key}" if where else key
    if key not in data:
        raise SpecFileError(path, "missing required field")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise SpecFileError(
            path, f"expected {getattr(kind, '__name__', kind)}, "
                  f"got {type(value).__name__}")
    return value


def load_chart_input(source) -> ChartInput:
    """Parse and validate a spec file (path, JSON text, or dict)."""
    if isinstance(source, (str, Path)) and Path(str(source)).exists():
        try:
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise SpecFileError("(file)", f"not valid JSON: {err}") from None
    elif isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as err:
            raise SpecFileError("(input)", f"not valid JSON: {err}") from None
    else:
        data = source
    if not isinstance(data, dict):
        raise SpecFileError("(root)", "spec must be a JSON object")

    version = data.get("schema", SPEC_SCHEMA_VERSION)
    if version != SPEC_SCHEMA_VERSION:
        raise SpecFileError("schema",
                            f"unsupported version {version!r}, "
                            f"expected {SPEC_SCHEMA_VERSION}")
    name = _require(data, "name", str)
    dimension = _require(data, "dimension", int)
    if isinstance(dimension, bool) or dimension < 2:
        raise SpecFileError("dimension", "must be an integer >= 2")
    signature = _require(data, "signature", str)
    if signature not in ("lorentzian", "riemannian"):
        raise SpecFileError("signature",
                            "must be 'lorentzian' or 'riemannian'")
    coordinates = _require(data, "coordinates", list)
    if len(coordinates) != dimension:
        raise SpecFileError("coordinates",
                            f"expected {dimension} names, got {len(coordinates)}")
    for k, cname in enumerate(coordinates):
        if not isinstance(cname, str) or not _IDENT.match(cname):
            raise SpecFileError(f"coordinates[{k}]",
                                f"{cname!r} is not a valid identifier")
    if len(set(coordinates)) != dimension:
        raise SpecFileError("coordinates", "names must be unique")

    parameters = data.get("parameters", {})
    if not isinstance(parameters, dict):
        raise SpecFileError("parameters", "expected an object")
    for pname, value in parameters.items():
        if not _IDENT.match(str(pname)):
            raise SpecFileError(f"parameters.{pname}", "not a valid identifier")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SpecFileError(f"parameters.{pname}", "expected a number")

    metric = _require(data, "metric", dict)
    if not metric:
        raise SpecFileError("metric", "at least one component is required")
    for key, text in metric.items():
        parts = str(key).split(",")
        if len(parts) != 2:
            raise SpecFileError(f"metric.{key}", "keys must look like 'i,j'")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise SpecFileError(f"metric.{key}",
                                "indices must be integers") from None
        if not (1 <= i <= dimension and 1 <= j <= dimension):
            raise SpecFileError(f"metric.{key}",
                                f"index out of range 1..{dimension}")
        if i > j:
            raise SpecFileError(f"metric.{key}",
                                f"lower-triangle key; use '{j},{i}'")
        if not isinstance(text, str):
            raise SpecFileError(f"metric.{key}", "expected an expression string")

    domain = _require(data, "domain", dict)
    ranges = _require(domain, "ranges", dict, "domain")
    for cname in coordinates:
        if cname not in ranges:
            raise SpecFileError(f"domain.ranges.{cname}", "missing range")
        pair = ranges[cname]
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)
                or not pair[0] < pair[1]):
            raise SpecFileError(f"domain.ranges.{cname}",
                                "expected [lo, hi] with lo < hi")
    exclusions = domain.get("exclusions", [])
    if not isinstance(exclusions, list):
        raise SpecFileError("domain.exclusions", "expected a list")
    cooked_exclusions = []
    for k, entry in enumerate(exclusions):
        if not isinstance(entry, dict) or "expr" not in entry:
            raise SpecFileError(f"domain.exclusions[{k}]",
                                "expected {'expr': ..., 'margin': ...}")
        margin = entry.get("margin", 0.0)
        if not isinstance(margin, (int, float)) or isinstance(margin, bool):
            raise SpecFileError(f"domain.exclusions[{k}].margin",
                                "expected a number")
        cooked_exclusions.append((str(entry["expr"]), float(margin)))

    velocity = data.get("velocity_field")
    if velocity is not None:
        if not isinstance(velocity, list) or len(velocity) != dimension:
            raise SpecFileError("velocity_field",
                                f"expected {dimension} expression strings")
        for k, text in enumerate(velocity):
            if not isinstance(text, str):
                raise SpecFileError(f"velocity_field[{k}]",
                                    "expected an expression string")

    basepoint = data.get("basepoint")
    if basepoint is not None:
        if (not isinstance(basepoint, list) or len(basepoint) != dimension
                or not all(isinstance(v, (int, float)) for v in basepoint)):
            raise SpecFileError("basepoint",
                                f"expected {dimension} numbers")

    return ChartInput(
        name=name, dimension=dimension, signature=signature,
        coordinates=coordinates, metric=metric,
        ranges={k: tuple(v) for k, v in ranges.items()},
        parameters=parameters, exclusions=cooked_exclusions,
        velocity_field=velocity, basepoint=basepoint)


def chart_input_to_dict(spec: ChartInput) -> dict:
    """Serializable form of a chart description (schema version included)."""
    return {
        "schema": SPEC_SCHEMA_VERSION,
        "name": spec.name,
        "dimension": spec.dimension,
        "signature": spec.signature,
        "coordinates": list(spec.coordinates),
        "parameters": dict(spec.parameters),
        "metric": {str(k): str(v) for k, v in spec.metric.items()},
        "domain": {
            "ranges": {k: list(v) for k, v in spec.ranges.items()},
            "exclusions": [{"expr": e, "margin": m}
                           for e, m in spec.exclusions],
        },
        **({"velocity_field": list(spec.velocity_field)}
           if spec.velocity_field else {}),
        **({"basepoint": list(spec.basepoint)} if spec.basepoint else {}),
    }
