"""Canonical JSON for every domain type, plus report rendering.

Wire formats:

* complex number: two-element array ``[re, im]``
* matrix: ``{"rows": R, "cols": C, "data": [[re, im], ...]}`` with ``data``
  flat row-major (length R*C)
* matrix tuple: ``{"n": ..., "d": ..., "coords": [matrix, ...]}``
* free polynomial: ``{"d": ..., "terms": [{"word": [...], "coeff": [re, im]}, ...]}``
  with terms sorted by (length, lexicographic) word order, no zero
  coefficients, no duplicate words
* polynomial matrix: ``{"I": ..., "J": ..., "entries": [[poly, ...], ...]}``
* colligation: ``{"k1", "k2", "I", "J", "m", "A", "B", "C", "D",
  "isometric_certified"}`` — the flag is recomputed on load and the file must
  agree with the recomputation
* evaluation job: ``{"F": colligation, "delta": polymatrix, "T": tuple,
  "params": {"s", "tol", "max_terms"}}``

Loading is strict: unknown keys, wrong arity, or non-finite numbers raise
ValidationError with a path into the document.  ``dumps_canonical`` emits
sorted keys and two-space indentation so equal values serialize to equal
bytes.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Any

import numpy as np

from .errors import ValidationError
from .freepoly import FreePoly, PolyMatrix
from .funcalc import (
    CalcParams,
    CalcReport,
    Certificate,
    PolyConsistencyReport,
    WelldefReport,
)
from .matrix_core import ComplexMatrix, MatrixTuple, as_array
from .realization import Colligation, is_isometry
from .spectral import (
    CompressionReport,
    SampleConfig,
    SpectralReport,
)


# --- encoding -----------------------------------------------------------------


def _enc_complex(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _enc_matrix(a) -> dict:
    arr = as_array(a)
    rows, cols = arr.shape
    return {
        "rows": int(rows),
        "cols": int(cols),
        "data": [_enc_complex(arr[i, j]) for i in range(rows) for j in range(cols)],
    }


def _enc_tuple(x: MatrixTuple) -> dict:
    return {
        "n": x.n,
        "d": x.d,
        "coords": [_enc_matrix(c) for c in x.coords],
    }


def _enc_poly(p: FreePoly) -> dict:
    return {
        "d": p.d,
        "terms": [
            {"word": [int(i) for i in w], "coeff": _enc_complex(c)}
            for w, c in p.sorted_terms()
        ],
    }


def _enc_polymatrix(p: PolyMatrix) -> dict:
    return {
        "I": p.I,
        "J": p.J,
        "entries": [[_enc_poly(p.entry(i, j)) for j in range(p.J)] for i in range(p.I)],
    }


def _enc_colligation(F: Colligation) -> dict:
    return {
        "k1": F.k1,
        "k2": F.k2,
        "I": F.I,
        "J": F.J,
        "m": F.m,
        "A": _enc_matrix(F.A),
        "B": _enc_matrix(F.B),
        "C": _enc_matrix(F.C),
        "D": _enc_matrix(F.D),
        "isometric_certified": F.isometric_certified,
    }


def _enc_params(p: CalcParams) -> dict:
    return {"s": p.s, "tol": p.tol, "max_terms": p.max_terms}


def _num(x) -> float | None:
    """Floats for JSON: non-finite values become null (allow_nan is off)."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def encode(obj) -> Any:
    """Map a domain object (or report) onto plain JSON-ready data."""
    if isinstance(obj, ComplexMatrix):
        return _enc_matrix(obj)
    if isinstance(obj, np.ndarray):
        return _enc_matrix(obj)
    if isinstance(obj, MatrixTuple):
        return _enc_tuple(obj)
    if isinstance(obj, FreePoly):
        return _enc_poly(obj)
    if isinstance(obj, PolyMatrix):
        return _enc_polymatrix(obj)
    if isinstance(obj, Colligation):
        return _enc_colligation(obj)
    if isinstance(obj, CalcParams):
        return _enc_params(obj)
    if isinstance(obj, CalcReport):
        return {
            "value": _enc_matrix(obj.value),
            "t": _num(obj.t),
            "s": _num(obj.s),
            "terms_used": obj.terms_used,
            "tail_bound": _num(obj.tail_bound),
            "closed_form_agreement": _num(obj.closed_form_agreement),
            "certificates": [encode(c) for c in obj.certificates],
            "notes": list(obj.notes),
            "ok": obj.ok,
        }
    if isinstance(obj, Certificate):
        return {
            "name": obj.name,
            "passed": obj.passed,
            "lhs": _num(obj.lhs),
            "rhs": _num(obj.rhs),
            "detail": obj.detail,
        }
    if isinstance(obj, SpectralReport):
        return {
            "kind": obj.kind,
            "estimate": _num(obj.estimate),
            "witness": _enc_tuple(obj.witness) if obj.witness is not None else None,
            "witness_level": obj.witness_level,
            "witness_trial": obj.witness_trial,
            "witness_domain_norm": _num(obj.witness_domain_norm),
            "ascent_converged": obj.ascent_converged,
            "trials": obj.trials,
            "admissible": obj.admissible,
            "per_level": [
                {
                    "level": s.level,
                    "trials": s.trials,
                    "admissible": s.admissible,
                    "best_value": _num(s.best_value),
                    "best_trial": s.best_trial,
                }
                for s in obj.per_level
            ],
            "config": encode(obj.config),
            "violations": [
                {
                    "index": v.index,
                    "description": v.description,
                    "lhs": _num(v.lhs),
                    "rhs": _num(v.rhs),
                    "status": v.status,
                }
                for v in obj.violations
            ],
            "notes": list(obj.notes),
            "ok": obj.ok,
        }
    if isinstance(obj, SampleConfig):
        return {
            "levels": list(obj.levels),
            "trials_per_level": obj.trials_per_level,
            "ascent_steps": obj.ascent_steps,
            "step_size": obj.step_size,
            "margin": obj.margin,
            "seed": obj.seed,
            "norm_targets": list(obj.norm_targets),
        }
    if isinstance(obj, (WelldefReport, PolyConsistencyReport, CompressionReport)):
        out = {}
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            if isinstance(v, tuple):
                out[f.name] = list(v)
            elif isinstance(v, float):
                out[f.name] = _num(v)
            else:
                out[f.name] = v
        return out
    raise TypeError(f"no JSON encoding for {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Canonical text: encoded payload, sorted keys, 2-space indent, no NaN."""
    payload = encode(obj) if not isinstance(obj, (dict, list)) else obj
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


# --- decoding -----------------------------------------------------------------


def _want_dict(v, path: str) -> dict:
    if not isinstance(v, dict):
        raise ValidationError(f"expected an object, got {type(v).__name__}", path)
    return v


def _want_keys(v: dict, path: str, required: set[str], optional: set[str] = frozenset()):
    missing = required - v.keys()
    if missing:
        raise ValidationError(f"missing key(s) {sorted(missing)}", path)
    extra = v.keys() - required - optional
    if extra:
        raise ValidationError(f"unknown key(s) {sorted(extra)}", path)


def _want_int(v, path: str, minimum: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"expected an integer, got {type(v).__name__}", path)
    if minimum is not None and v < minimum:
        raise ValidationError(f"expected an integer >= {minimum}, got {v}", path)
    return v


def _want_real(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"expected a number, got {type(v).__name__}", path)
    v = float(v)
    if not math.isfinite(v):
        raise ValidationError("expected a finite number", path)
    return v


def _want_list(v, path: str, length: int | None = None) -> list:
    if not isinstance(v, list):
        raise ValidationError(f"expected an array, got {type(v).__name__}", path)
    if length is not None and len(v) != length:
        raise ValidationError(f"expected {length} element(s), got {len(v)}", path)
    return v


def _want_bool(v, path: str) -> bool:
    if not isinstance(v, bool):
        raise ValidationError(f"expected a boolean, got {type(v).__name__}", path)
    return v


def _dec_complex(v, path: str) -> complex:
    arr = _want_list(v, path)
    if len(arr) != 2:
        raise ValidationError(
            f"a complex scalar is a 2-array [re, im], got {len(arr)} element(s)", path
        )
    re = _want_real(arr[0], f"{path}[0]")
    im = _want_real(arr[1], f"{path}[1]")
    return complex(re, im)


def decode_matrix(v, path: str = "$") -> ComplexMatrix:
    obj = _want_dict(v, path)
    _want_keys(obj, path, {"rows", "cols", "data"})
    rows = _want_int(obj["rows"], f"{path}.rows", minimum=0)
    cols = _want_int(obj["cols"], f"{path}.cols", minimum=0)
    data = _want_list(obj["data"], f"{path}.data", length=rows * cols)
    out = np.zeros((rows, cols), dtype=np.complex128)
    for idx, cell in enumerate(data):
        i, j = divmod(idx, cols) if cols else (idx, 0)
        out[i, j] = _dec_complex(cell, f"{path}.data[{idx}]")
    return ComplexMatrix(out)


def decode_tuple(v, path: str = "$") -> MatrixTuple:
    obj = _want_dict(v, path)
    _want_keys(obj, path, {"n", "d", "coords"})
    n = _want_int(obj["n"], f"{path}.n", minimum=1)
    d = _want_int(obj["d"], f"{path}.d", minimum=1)
    coords = _want_list(obj["coords"], f"{path}.coords", length=d)
    mats = []
    for idx, c in enumerate(coords):
        m = decode_matrix(c, f"{path}.coords[{idx}]")
        if m.rows != n or m.cols != n:
            raise ValidationError(
                f"coordinate is {m.rows}x{m.cols}, expected {n}x{n}",
                f"{path}.coords[{idx}]",
            )
        mats.append(m.a)
    return MatrixTuple(mats)


def decode_poly(v, path: str = "$") -> FreePoly:
    obj = _want_dict(v, path)
    _want_keys(obj, path, {"d", "terms"})
    d = _want_int(obj["d"], f"{path}.d", minimum=0)
    terms = _want_list(obj["terms"], f"{path}.terms")
    seen: dict[tuple, complex] = {}
    order: list[tuple] = []
    for idx, t in enumerate(terms):
        tp = f"{path}.terms[{idx}]"
        td = _want_dict(t, tp)
        _want_keys(td, tp, {"word", "coeff"})
        word_raw = _want_list(td["word"], f"{tp}.word")
        word = tuple(
            _want_int(l, f"{tp}.word[{k}]", minimum=1) for k, l in enumerate(word_raw)
        )
        for k, letter in enumerate(word):
            if letter > d:
                raise ValidationError(
                    f"letter {letter} outside alphabet 1..{d}", f"{tp}.word[{k}]"
                )
        coeff = _dec_complex(td["coeff"], f"{tp}.coeff")
        if coeff == 0:
            raise ValidationError("zero coefficient not allowed in canonical form", tp)
        if word in seen:
            raise ValidationError(f"duplicate word {list(word)}", f"{tp}.word")
        seen[word] = coeff
        order.append(word)
    canon = sorted(order, key=lambda w: (len(w), w))
    if order != canon:
        raise ValidationError(
            "terms not in canonical (length, lexicographic) order", f"{path}.terms"
        )
    return FreePoly(d, seen)


def decode_polymatrix(v, path: str = "$") -> PolyMatrix:
    obj = _want_dict(v, path)
    _want_keys(obj, path, {"I", "J", "entries"})
    I = _want_int(obj["I"], f"{path}.I", minimum=1)
    J = _want_int(obj["J"], f"{path}.J", minimum=1)
    rows = _want_list(obj["entries"], f"{path}.entries", length=I)
    grid = []
    for i, row in enumerate(rows):
        cells = _want_list(row, f"{path}.entries[{i}]", length=J)
        grid.append(
            [decode_poly(c, f"{path}.entries[{i}][{j}]") for j, c in enumerate(cells)]
        )
    ds = {p.d for row in grid for p in row}
    if len(ds) > 1:
        raise ValidationError(
            f"entries disagree on the alphabet size: {sorted(ds)}", f"{path}.entries"
        )
    return PolyMatrix(grid)


def decode_colligation(v, path: str = "$") -> Colligation:
    obj = _want_dict(v, path)
    _want_keys(obj, path, {"k1", "k2", "I", "J", "m", "A", "B", "C", "D",
                           "isometric_certified"})
    k1 = _want_int(obj["k1"], f"{path}.k1", minimum=0)
    k2 = _want_int(obj["k2"], f"{path}.k2", minimum=0)
    I = _want_int(obj["I"], f"{path}.I", minimum=1)
    J = _want_int(obj["J"], f"{path}.J", minimum=1)
    m = _want_int(obj["m"], f"{path}.m", minimum=0)
    shapes = {
        "A": (k2, k1),
        "B": (k2, I * m),
        "C": (J * m, k1),
        "D": (J * m, I * m),
    }
    blocks = {}
    for name, (r, c) in shapes.items():
        mat = decode_matrix(obj[name], f"{path}.{name}")
        if (mat.rows, mat.cols) != (r, c):
            raise ValidationError(
                f"block {name} is {mat.rows}x{mat.cols}, expected {r}x{c}",
                f"{path}.{name}",
            )
        blocks[name] = mat.a
    claimed = _want_bool(obj["isometric_certified"], f"{path}.isometric_certified")
    F = Colligation(blocks["A"], blocks["B"], blocks["C"], blocks["D"], I, J)
    if F.isometric_certified != claimed:
        raise ValidationError(
            f"stored isometric_certified={claimed} contradicts the recomputed "
            f"defect {F.isometry_defect:.3e}",
            f"{path}.isometric_certified",
        )
    return F


def decode_params(v, path: str = "$") -> CalcParams:
    obj = _want_dict(v, path)
    _want_keys(obj, path, set(), {"s", "tol", "max_terms"})
    kwargs = {}
    if "s" in obj and obj["s"] is not None:
        kwargs["s"] = _want_real(obj["s"], f"{path}.s")
    if "tol" in obj:
        kwargs["tol"] = _want_real(obj["tol"], f"{path}.tol")
    if "max_terms" in obj:
        kwargs["max_terms"] = _want_int(obj["max_terms"], f"{path}.max_terms", minimum=1)
    try:
        return CalcParams(**kwargs)
    except Exception as exc:
        raise ValidationError(str(exc), path) from exc


def decode_job(v, path: str = "$") -> dict:
    obj = _want_dict(v, path)
    _want_keys(obj, path, {"F", "delta", "T"}, {"params"})
    return {
        "F": decode_colligation(obj["F"], f"{path}.F"),
        "delta": decode_polymatrix(obj["delta"], f"{path}.delta"),
        "T": decode_tuple(obj["T"], f"{path}.T"),
        "params": decode_params(obj.get("params", {}), f"{path}.params"),
    }


_DETECTORS = (
    ("job", {"F", "delta", "T"}, decode_job),
    ("colligation", {"A", "B", "C", "D"}, decode_colligation),
    ("matrix", {"rows", "cols", "data"}, decode_matrix),
    ("tuple", {"n", "coords"}, decode_tuple),
    ("polymatrix", {"entries"}, decode_polymatrix),
    ("freepoly", {"terms"}, decode_poly),
)


def detect_kind(v) -> str:
    """Name the domain type a JSON object encodes, from its key shape."""
    obj = _want_dict(v, "$")
    for name, keys, _ in _DETECTORS:
        if keys <= obj.keys():
            return name
    raise ValidationError(
        "unrecognized document: expected a matrix, tuple, polynomial, "
        "polynomial matrix, colligation, or evaluation job",
        "$",
    )


def decode_any(v, path: str = "$"):
    """Decode a JSON object of any supported domain type (detected by keys)."""
    for name, keys, dec in _DETECTORS:
        if isinstance(v, dict) and keys <= v.keys():
            return dec(v, path)
    raise ValidationError(
        "unrecognized document: expected a matrix, tuple, polynomial, "
        "polynomial matrix, colligation, or evaluation job",
        path,
    )


def loads(text: str):
    """Parse and decode a JSON document, with positions on syntax errors."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"invalid JSON: {exc.msg}", "$", line=exc.lineno, col=exc.colno
        ) from exc
    return decode_any(raw)


def load_path(path: str):
    """loads() for a file on disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
