"""JSON problem, solution and report files.

Quaternions are always 4-arrays ``[w, x, y, z]``. `dumps` writes the
canonical form: two-space indentation, one quaternion per line, floats in
shortest round-trip notation, fixed key order and a trailing newline. Parsing
a canonical file and dumping it again reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DegenerateInputError, ProblemFormatError
from .pick import DEFAULT_GRID, InterpolationProblem, SchurSolution, ThetaFunction
from .series import DEFAULT_TRUNCATION, PowerSeries

DEFAULT_OPTIONS = {
    "truncation": DEFAULT_TRUNCATION,
    "tol": 1e-10,
    "radius_grid": list(DEFAULT_GRID),
    "seed": 0,
}


def _is_number_list(x) -> bool:
    return isinstance(x, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)


def _scalar(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("non-finite numbers have no JSON form")
        return repr(v)
    return json.dumps(v, ensure_ascii=False)


def _encode(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        obj = list(obj)
        if not obj:
            return "[]"
        if _is_number_list(obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 1) for v in obj) + "\n" + pad + "]"
    return _scalar(obj)


def to_jsonable(obj):
    """Convert numpy scalars and arrays to plain Python for `dumps`."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    return _encode(to_jsonable(obj), 0) + "\n"


# --- problem files ---------------------------------------------------------


def _quat_list(d: dict, key: str) -> np.ndarray:
    if key not in d:
        raise ProblemFormatError(f"missing field {key!r}")
    try:
        arr = np.asarray(d[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"field {key!r} is not numeric") from exc
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ProblemFormatError(f"field {key!r} must be a list of 4-arrays")
    if not np.all(np.isfinite(arr)):
        raise ProblemFormatError(f"field {key!r} has non-finite entries")
    return arr


@dataclass
class ProblemFile:
    nodes: np.ndarray
    values: np.ndarray
    kappas: np.ndarray
    parameter: dict = field(default_factory=lambda: {"type": "constant", "value": [1.0, 0.0, 0.0, 0.0]})
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Any) -> "ProblemFile":
        if not isinstance(d, dict):
            raise ProblemFormatError("problem file must hold a JSON object")
        nodes = _quat_list(d, "nodes")
        values = _quat_list(d, "values")
        if "kappas" not in d:
            raise ProblemFormatError("missing field 'kappas'")
        try:
            kappas = np.asarray(d["kappas"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ProblemFormatError("field 'kappas' is not numeric") from exc
        if kappas.ndim != 1 or not np.all(np.isfinite(kappas)):
            raise ProblemFormatError("field 'kappas' must be a list of finite reals")
        if not (len(nodes) == len(values) == len(kappas)) or len(nodes) == 0:
            raise ProblemFormatError("nodes, values and kappas must be nonempty and of equal length")
        parameter = d.get("parameter", {"type": "constant", "value": [1.0, 0.0, 0.0, 0.0]})
        if not isinstance(parameter, dict) or parameter.get("type") not in ("constant", "series"):
            raise ProblemFormatError("parameter must be {type: constant|series, ...}")
        if parameter["type"] == "constant":
            _quat_list({"value": [parameter.get("value")]}, "value")
        else:
            _quat_list(parameter, "coeffs")
        options = d.get("options", {})
        if not isinstance(options, dict):
            raise ProblemFormatError("options must be an object")
        unknown = set(options) - set(DEFAULT_OPTIONS)
        if unknown:
            raise ProblemFormatError(f"unknown options: {sorted(unknown)}")
        try:
            if "truncation" in options and int(options["truncation"]) != options["truncation"]:
                raise ValueError
            if "radius_grid" in options:
                grid = [float(r) for r in options["radius_grid"]]
                if not grid or not all(0.0 < r < 1.0 for r in grid):
                    raise ValueError
        except (TypeError, ValueError) as exc:
            raise ProblemFormatError("malformed options") from exc
        return cls(nodes, values, kappas, parameter, dict(options))

    def to_dict(self) -> dict:
        out = {
            "nodes": self.nodes.tolist(),
            "values": self.values.tolist(),
            "kappas": self.kappas.tolist(),
            "parameter": self.parameter,
        }
        if self.options:
            out["options"] = self.options
        return out

    def resolved_options(self, **overrides) -> dict:
        opts = dict(DEFAULT_OPTIONS)
        opts.update(self.options)
        opts.update({k: v for k, v in overrides.items() if v is not None})
        return opts

    def parameter_value(self):
        if self.parameter["type"] == "constant":
            return np.asarray(self.parameter["value"], dtype=float)
        return PowerSeries(np.asarray(self.parameter["coeffs"], dtype=float))

    def problem(self) -> InterpolationProblem:
        """Validated problem; bad geometry raises `ProblemFormatError` or `SphereCollisionError`."""
        try:
            return InterpolationProblem(self.nodes, self.values, self.kappas, self.parameter_value())
        except DegenerateInputError as exc:
            raise ProblemFormatError(str(exc)) from exc


def parse_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON: {exc}") from exc


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFormatError(f"cannot read {path}: {exc}") from exc


def load_problem(path) -> ProblemFile:
    return ProblemFile.from_dict(parse_json(read_text(path)))


def problem_to_file(prob: InterpolationProblem, options: dict | None = None) -> ProblemFile:
    e = prob.parameter
    if isinstance(e, PowerSeries):
        parameter = {"type": "series", "coeffs": e.coeffs.tolist()}
    else:
        parameter = {"type": "constant", "value": np.asarray(e).tolist()}
    return ProblemFile(prob.nodes, prob.values, prob.kappas, parameter, dict(options or {}))


# --- solution files --------------------------------------------------------


def solution_to_dict(sol: SchurSolution) -> dict:
    closed = None
    if sol.constant is not None:
        closed = {"kind": "constant", "value": sol.constant.tolist()}
    elif sol.theta is not None and sol.has_closed_form:
        closed = {"kind": "lft", "theta": sol.theta.to_dict(), "parameter": np.asarray(sol.parameter).tolist()}
    out = {
        "coeffs": sol.series.coeffs.tolist(),
        "provenance": sol.provenance,
        "rank": sol.rank,
        "closed_form": closed,
    }
    if sol.minor is not None:
        out["minor"] = list(sol.minor)
    return out


def solution_from_dict(d: Any) -> SchurSolution:
    """Accepts a bare solution object or a full report with a ``solution`` section."""
    if isinstance(d, dict) and "solution" in d and isinstance(d["solution"], dict):
        d = d["solution"]
    if not isinstance(d, dict):
        raise ProblemFormatError("solution file must hold a JSON object")
    coeffs = _quat_list(d, "coeffs")
    sol = SchurSolution(series=PowerSeries(coeffs), provenance=str(d.get("provenance", "external")), rank=d.get("rank"))
    closed = d.get("closed_form")
    if closed:
        try:
            if closed["kind"] == "constant":
                sol.constant = np.asarray(closed["value"], dtype=float)
            elif closed["kind"] == "lft":
                sol.theta = ThetaFunction.from_dict(closed["theta"])
                sol.parameter = np.asarray(closed["parameter"], dtype=float)
            else:
                raise ProblemFormatError(f"unknown closed form {closed['kind']!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemFormatError("malformed closed_form section") from exc
    return sol


def load_solution(path) -> SchurSolution:
    return solution_from_dict(parse_json(read_text(path)))
