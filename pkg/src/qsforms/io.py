"""JSON/CSV serialization.

Complex numbers are two-element ``[re, im]`` arrays; matrices are row-major
flat lists of such pairs.  Floats are written with 17 significant digits.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ContractError


class SchemaError(ContractError):
    """Malformed input document; ``field`` names the offending entry."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(x)
    return format(x, ".17g")


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=np.complex128)
    return [[float(z.real), float(z.imag)] for z in M.ravel()]


def vector_to_json(v) -> list:
    return matrix_to_json(np.asarray(v).reshape(-1, 1))


def matrix_from_json(data, rows: int, cols: int, field: str) -> np.ndarray:
    """Parse a flat row-major list of pairs (nested rows are accepted too)."""
    if not isinstance(data, list):
        raise SchemaError(field, "expected a list of [re, im] pairs")
    flat = data
    if data and isinstance(data[0], list) and data[0] and isinstance(data[0][0], list):
        flat = [z for row in data for z in row]
    if len(flat) != rows * cols:
        raise SchemaError(field, f"expected {rows}x{cols}={rows * cols} entries, got {len(flat)}")
    out = np.empty(rows * cols, dtype=np.complex128)
    for k, z in enumerate(flat):
        if isinstance(z, (int, float)) and not isinstance(z, bool):
            out[k] = float(z)
            continue
        if not (isinstance(z, list) and len(z) == 2 and all(isinstance(c, (int, float)) for c in z)):
            raise SchemaError(f"{field}[{k}]", "complex entries must be [re, im]")
        out[k] = complex(z[0], z[1])
    if not np.all(np.isfinite(out)):
        raise SchemaError(field, "non-finite entry")
    return out.reshape(rows, cols)


def _get(obj: dict, key: str, kind, field: str | None = None):
    field = field or key
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(field, "missing")
    val = obj[key]
    if kind is int and (not isinstance(val, int) or isinstance(val, bool) or val < 0):
        raise SchemaError(field, "expected a non-negative integer")
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise SchemaError(field, "expected a number")
        val = float(val)
    return val


def form_from_json(obj: dict, prefix: str = ""):
    from .forms import FormInH

    m = _get(obj, "m", int, prefix + "m")
    d = _get(obj, "d", int, prefix + "d")
    F = matrix_from_json(_get(obj, "F", list, prefix + "F"), m, m, prefix + "F")
    J = matrix_from_json(_get(obj, "J", list, prefix + "J"), d, m, prefix + "J")
    return FormInH(F, J)


def problem_from_json(obj: dict):
    """Parse a form-sequence problem document (base form plus members)."""
    from .convergence import FormSequenceProblem
    from .forms import Sector

    base = form_from_json(obj)
    theta = _get(obj, "theta", float)
    gamma = _get(obj, "gamma", float)
    try:
        sector = Sector(theta, gamma)
    except ContractError as exc:
        raise SchemaError("theta", str(exc)) from None
    members = []
    for i, mem in enumerate(_get(obj, "members", list)):
        f = f"members[{i}]"
        Fn_raw = _get(mem, "Fn", list, f + ".Fn")
        mn = _infer_square(Fn_raw, f + ".Fn")
        Fn = matrix_from_json(Fn_raw, mn, mn, f + ".Fn")
        iota = matrix_from_json(_get(mem, "iota", list, f + ".iota"), base.m, mn, f + ".iota")
        members.append((Fn, iota))
    core = None
    if obj.get("core") is not None:
        raw = obj["core"]
        if not isinstance(raw, list) or not base.m or len(raw) % base.m:
            raise SchemaError("core", "expected m*k entries (m x k, row-major)")
        core = matrix_from_json(raw, base.m, len(raw) // base.m, "core")
    try:
        return FormSequenceProblem(base, sector, members, core)
    except ContractError as exc:
        raise SchemaError("members", str(exc)) from None


def problem_to_json(problem) -> dict:
    doc = problem.base.to_json()
    doc["theta"] = problem.sector.theta
    doc["gamma"] = problem.sector.gamma
    doc["members"] = [{"Fn": matrix_to_json(Fn), "iota": matrix_to_json(iota)} for Fn, iota in problem.members]
    if problem.core_basis is not None:
        doc["core"] = matrix_to_json(problem.core_basis)
    return doc


def _infer_square(data, field) -> int:
    if not isinstance(data, list):
        raise SchemaError(field, "expected a list")
    n = math.isqrt(len(data))
    if n * n != len(data):
        raise SchemaError(field, f"{len(data)} entries is not a square matrix")
    return n


def dumps(obj, indent: int | None = 2) -> str:
    """``json.dumps`` with floats written as 17 significant digits."""
    return _encode(_plain(obj), indent, 0)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _encode(obj, indent, level) -> str:
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    if isinstance(obj, float):
        return fmt_float(obj)
    return json.dumps(obj)


def write_csv(rows: list[dict], header: list[str], path: str | Path | None = None) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(row[h]) if isinstance(row[h], float) else row[h] for h in header])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(str(path), f"invalid JSON ({exc})") from None
