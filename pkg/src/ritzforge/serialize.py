"""File formats: prescription/report JSON and dense Matrix Market.

All floats are written with 17 significant digits and JSON keys are sorted,
so identical inputs give byte-identical files.
"""

import json
import math
import os
import tempfile

import numpy as np

from ._validation import as_complex_matrix
from .exceptions import ArgumentError, MatrixMarketError, ParseError
from .prescription import INF, Prescription, ResidualSchedule, RitzPrescription

__all__ = [
    "atomic_write",
    "dumps",
    "emit_prescription",
    "format_float",
    "parse_prescription",
    "prescription_to_dict",
    "read_matrix_market",
    "ritz_to_json",
    "write_matrix_market",
]

MM_HEADER = "%%MatrixMarket matrix array complex general"


def format_float(x):
    """``%.17g`` with a trailing ``.0`` on integral values (``2`` -> ``2.0``)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = "%.17g" % x
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if obj is INF:
        return '"inf"'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return json.dumps(format_float(obj))
        return format_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, set, frozenset, np.ndarray)):
        seq = sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
        if not seq:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent=2):
    """Deterministic JSON text; complex -> ``{"re", "im"}``, INF -> ``"inf"``."""
    return _encode(obj, indent, 0) + "\n"


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and ``os.replace``."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def ritz_to_json(values):
    return ["inf" if v is INF else {"re": v.real, "im": v.imag} for v in values]


def prescription_to_dict(p):
    out = {
        "residual_norms": list(p.schedule.norms),
        "harmonic_ritz": [ritz_to_json(step) for step in p.ritz.steps],
    }
    if p.first_row_signs is not None:
        out["first_row_signs"] = [{"re": z.real, "im": z.imag} for z in p.first_row_signs]
    if p.rho_signs is not None:
        out["rho_signs"] = [{"re": z.real, "im": z.imag} for z in p.rho_signs]
    return out


def emit_prescription(p):
    return dumps(prescription_to_dict(p))


def _number(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"expected a number, got {type(x).__name__}", path)
    if not math.isfinite(x):
        raise ParseError("number must be finite", path)
    return float(x)


def _complex(obj, path):
    if not isinstance(obj, dict):
        raise ParseError('expected an object {"re": x, "im": y}', path)
    extra = set(obj) - {"re", "im"}
    if extra or "re" not in obj or "im" not in obj:
        raise ParseError('complex numbers need exactly the keys "re" and "im"', path)
    return complex(_number(obj["re"], path + ".re"), _number(obj["im"], path + ".im"))


def _list(obj, path):
    if not isinstance(obj, list):
        raise ParseError(f"expected an array, got {type(obj).__name__}", path)
    return obj


def _signs(obj, length, path):
    vals = [_complex(z, f"{path}[{i}]") for i, z in enumerate(_list(obj, path))]
    if len(vals) != length:
        raise ParseError(f"expected {length} entries, got {len(vals)}", path)
    for i, z in enumerate(vals):
        if abs(abs(z) - 1.0) > 1e-12:
            raise ParseError("sign must be unimodular", f"{path}[{i}]")
    return vals


def parse_prescription(text):
    """Parse prescription JSON (bytes or str) into a :class:`Prescription`.

    Only the structure is checked here; admissibility is left to
    :func:`~ritzforge.prescription.validate`.

    Raises
    ------
    ParseError
        With a ``$.field[index]`` style path to the offending element.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    allowed = {"residual_norms", "harmonic_ritz", "first_row_signs", "rho_signs"}
    extra = sorted(set(doc) - allowed)
    if extra:
        raise ParseError(f"unknown key {extra[0]!r}")
    for key in ("residual_norms", "harmonic_ritz"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    norms = [_number(x, f"$.residual_norms[{i}]") for i, x in enumerate(_list(doc["residual_norms"], "$.residual_norms"))]
    n = len(norms)
    if n == 0:
        raise ParseError("must not be empty", "$.residual_norms")
    steps_raw = _list(doc["harmonic_ritz"], "$.harmonic_ritz")
    if len(steps_raw) != n:
        raise ParseError(f"expected {n} steps to match residual_norms, got {len(steps_raw)}", "$.harmonic_ritz")
    steps = []
    for k, raw in enumerate(steps_raw, start=1):
        path = f"$.harmonic_ritz[{k - 1}]"
        raw = _list(raw, path)
        if len(raw) != k:
            raise ParseError(f"step {k} needs {k} values, got {len(raw)}", path)
        step = []
        for j, v in enumerate(raw):
            if v == "inf":
                step.append(INF)
            elif isinstance(v, str):
                raise ParseError(f'unknown string {v!r}; only "inf" is allowed', f"{path}[{j}]")
            else:
                step.append(_complex(v, f"{path}[{j}]"))
        steps.append(step)
    first = rho = None
    if doc.get("first_row_signs") is not None:
        first = _signs(doc["first_row_signs"], n, "$.first_row_signs")
    if doc.get("rho_signs") is not None:
        rho = _signs(doc["rho_signs"], n - 1, "$.rho_signs")
    try:
        return Prescription(ResidualSchedule(norms), RitzPrescription(steps), first, rho)
    except ArgumentError as exc:
        raise ParseError(str(exc)) from exc


def write_matrix_market(m, path):
    """Dense ``array complex general`` Matrix Market file, column-major."""
    m = as_complex_matrix(m)
    rows, cols = m.shape
    lines = [MM_HEADER, f"{rows} {cols}"]
    for j in range(cols):
        for i in range(rows):
            z = m[i, j]
            lines.append(f"{format_float(z.real)} {format_float(z.imag)}")
    atomic_write(path, "\n".join(lines) + "\n")


def read_matrix_market(path):
    """Read a dense (``array``) real, integer or complex general Matrix Market file."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise MatrixMarketError(f"not UTF-8: {exc}") from exc
    if not lines:
        raise MatrixMarketError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0] != "%%MatrixMarket" or head[1].lower() != "matrix":
        raise MatrixMarketError("missing '%%MatrixMarket matrix ...' header", 1)
    fmt, field, sym = (h.lower() for h in head[2:])
    if fmt != "array":
        raise MatrixMarketError(f"only the dense 'array' format is supported, got {fmt!r}", 1)
    if field not in ("real", "integer", "complex"):
        raise MatrixMarketError(f"unsupported field {field!r}", 1)
    if sym != "general":
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", 1)
    body = [(no, ln) for no, ln in enumerate(lines[1:], start=2) if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixMarketError("missing size line", len(lines) + 1)
    no, ln = body[0]
    try:
        rows, cols = (int(t) for t in ln.split())
    except ValueError:
        raise MatrixMarketError(f"bad size line {ln!r}", no) from None
    if rows < 1 or cols < 1:
        raise MatrixMarketError("dimensions must be positive", no)
    want = 2 if field == "complex" else 1
    values = body[1:]
    if len(values) < rows * cols:
        last = values[-1][0] if values else no
        raise MatrixMarketError(
            f"truncated: expected {rows * cols} entries, found {len(values)}", last + 1
        )
    if len(values) > rows * cols:
        raise MatrixMarketError("trailing data after the last entry", values[rows * cols][0])
    flat = np.empty(rows * cols, dtype=np.complex128)
    for idx, (no, ln) in enumerate(values):
        toks = ln.split()
        if len(toks) != want:
            raise MatrixMarketError(f"expected {want} numbers, got {len(toks)}", no)
        try:
            nums = [float(t) for t in toks]
        except ValueError:
            raise MatrixMarketError(f"bad number in {ln!r}", no) from None
        flat[idx] = complex(nums[0], nums[1] if want == 2 else 0.0)
    return flat.reshape(cols, rows).T.copy()
