"""JSON formats for tuples, polynomials, decompositions and reports.

Tuple files (format ``jspec-tuple``, version ``v1``)::

    {
      "format": "jspec-tuple", "version": "v1",
      "n": 2, "N": 2, "entries": "exact",
      "matrices": [[["1", "1"], ["0", "0"]], [["0", "0"], ["1", "1"]]],
      "selfadjoint": false
    }

Exact entries are rational strings such as ``"-1/2"`` or ``"1/2+3/4i"``;
float entries are ``[re, im]`` pairs. ``selfadjoint`` is an optional hint
that is checked against the data.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from jspec import __version__
from jspec.algebra.linalg import as_float, is_exact
from jspec.algebra.poly import MultiPoly
from jspec.algebra.scalars import ExactComplex
from jspec.config import DEFAULT_TOL, Tolerances

__all__ = [
    "TupleFileError",
    "parse_tuple",
    "load_tuple_dict",
    "tuple_to_dict",
    "emit_tuple",
    "poly_to_dict",
    "poly_from_dict",
    "decomposition_to_dict",
    "report_to_dict",
    "complex_pair",
]

FORMAT = "jspec-tuple"
VERSION = "v1"


class TupleFileError(ValueError):
    pass


def complex_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _scalar_to_json(x):
    if isinstance(x, ExactComplex):
        return str(x)
    return complex_pair(x)


def _parse_entry(raw, where: str, mode: str):
    if mode == "exact":
        if isinstance(raw, bool) or not isinstance(raw, (str, int)):
            raise TupleFileError(f"{where}: exact entries must be rational strings, got {raw!r}")
        try:
            return ExactComplex.parse(str(raw))
        except ValueError as exc:
            raise TupleFileError(f"{where}: invalid rational string {raw!r}") from exc
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return complex(raw)
    if (isinstance(raw, list) and len(raw) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
        z = complex(raw[0], raw[1])
        if not np.isfinite(z):
            raise TupleFileError(f"{where}: non-finite entry {raw!r}")
        return z
    raise TupleFileError(f"{where}: float entries must be [re, im] pairs, got {raw!r}")


def load_tuple_dict(data: dict, *, preprocess: bool = True, tol: Tolerances = DEFAULT_TOL):
    from jspec.pencil import TupleError, make_tuple

    if not isinstance(data, dict):
        raise TupleFileError("top level must be a JSON object")
    if data.get("format", FORMAT) != FORMAT:
        raise TupleFileError(f"format: expected {FORMAT!r}, got {data.get('format')!r}")
    if data.get("version", VERSION) != VERSION:
        raise TupleFileError(f"version: unsupported {data.get('version')!r}")
    mode = data.get("entries", "exact")
    if mode not in ("exact", "float"):
        raise TupleFileError(f"entries: must be 'exact' or 'float', got {mode!r}")
    mats_raw = data.get("matrices")
    if not isinstance(mats_raw, list) or not mats_raw:
        raise TupleFileError("matrices: must be a non-empty list")
    mats = []
    for k, M in enumerate(mats_raw):
        if not isinstance(M, list) or not M:
            raise TupleFileError(f"matrices[{k}]: must be a non-empty list of rows")
        size = len(M)
        rows = []
        for i, row in enumerate(M):
            if not isinstance(row, list):
                raise TupleFileError(f"matrices[{k}][{i}]: row must be a list")
            if len(row) != size:
                raise TupleFileError(
                    f"matrices[{k}]: row {i} has {len(row)} entries, expected {size} "
                    f"(matrix {k + 1} is not square)"
                )
            rows.append([_parse_entry(x, f"matrices[{k}][{i}][{j}]", mode) for j, x in enumerate(row)])
        mats.append(rows)
    sizes = {len(M) for M in mats}
    if len(sizes) != 1:
        raise TupleFileError(f"matrices: sizes differ {[len(M) for M in mats]}")
    N = sizes.pop()
    if "n" in data and data["n"] != len(mats):
        raise TupleFileError(f"n: declared {data['n']}, found {len(mats)} matrices")
    if "N" in data and data["N"] != N:
        raise TupleFileError(f"N: declared {data['N']}, matrices are {N}x{N}")
    try:
        t = make_tuple(mats, exact=(mode == "exact"), preprocess=preprocess, tol=tol)
    except TupleError as exc:
        raise TupleFileError(f"matrices: {exc}") from exc
    if data.get("selfadjoint") is True and not t.selfadjoint:
        raise TupleFileError("selfadjoint: hint is true but the matrices are not Hermitian")
    return t


def parse_tuple(path, *, preprocess: bool = True, tol: Tolerances = DEFAULT_TOL):
    """Read and validate a tuple file; errors name the offending field."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise TupleFileError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TupleFileError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return load_tuple_dict(data, preprocess=preprocess, tol=tol)
    except TupleFileError as exc:
        raise TupleFileError(f"{path}: {exc}") from exc


def tuple_to_dict(t, name: str | None = None, extra: dict | None = None) -> dict:
    """Serialise the tuple before any preprocessing shift."""
    base = t.unshifted()
    exact = base.exact
    out = {"format": FORMAT, "version": VERSION}
    if name:
        out["name"] = name
    out.update({
        "n": base.n,
        "N": base.N,
        "entries": "exact" if exact else "float",
        "selfadjoint": bool(base.selfadjoint),
        "matrices": [[[_scalar_to_json(x) for x in row] for row in M] for M in base.matrices],
    })
    if extra:
        out.update(extra)
    return out


def _dumps_tuple(data: dict) -> str:
    # one matrix row per line keeps fixtures readable and diff-friendly
    lines = []
    for key, val in data.items():
        if key == "matrices":
            mats = []
            for M in val:
                rows = ",\n    ".join(json.dumps(row) for row in M)
                mats.append(f"   [\n    {rows}\n   ]")
            body = "[\n" + ",\n".join(mats) + "\n  ]"
        else:
            body = json.dumps(val)
        lines.append(f"  {json.dumps(key)}: {body}")
    return "{\n" + ",\n".join(lines) + "\n}"


def emit_tuple(t, path=None, name: str | None = None, extra: dict | None = None) -> str:
    text = _dumps_tuple(tuple_to_dict(t, name, extra))
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


# ---------------------------------------------------------------------------


def poly_to_dict(p: MultiPoly) -> dict:
    """``{"e1,e2,...": value}`` with rational strings or ``[re, im]`` values."""
    return {",".join(map(str, e)): _scalar_to_json(c) for e, c in sorted(p.terms.items(), reverse=True)}


def poly_from_dict(data: dict, nvars: int) -> MultiPoly:
    terms = {}
    for key, val in data.items():
        e = tuple(int(k) for k in key.split(","))
        terms[e] = ExactComplex.parse(val) if isinstance(val, str) else complex(val[0], val[1])
    return MultiPoly(nvars, terms)


def _matrix_to_json(M) -> list:
    if is_exact(M):
        return [[str(x) for x in row] for row in M]
    Mf = as_float(M)
    return [[complex_pair(x) for x in row] for row in Mf]


def decomposition_to_dict(d) -> dict:
    return {
        "certified": d.certified,
        "seed": d.seed,
        "base_direction": [complex_pair(z) for z in d.base_direction],
        "base_branches": [{"value": complex_pair(v), "multiplicity": m, "component": s}
                          for (v, m), s in zip(d.base_branches, d.assignment)],
        "components": [
            {
                "id": c.id + 1,
                "degree": c.degree,
                "multiplicity": c.multiplicity,
                "eigenvalues": [[complex_pair(z) for z in row] for row in c.eigenvalues],
                "intersections": [[complex_pair(z) for z in row] for row in c.intersections],
            }
            for c in d.components
        ],
        "loops": [dict(e) for e in d.loop_log],
    }


def _verdict_to_dict(v) -> dict:
    out = {
        "subset": [s + 1 for s in v.subset],
        "derived_from": [s + 1 for s in v.derived_from] if v.derived_from else None,
        "rank": v.rank,
        "selfadjoint_check": v.selfadjoint_check,
        "general_check_b": v.general_check_b,
        "general_check_c": v.general_check_c,
        "permutation_sufficient": v.permutation_sufficient,
        "constancy_probe": v.constancy_probe,
        "residual": v.residual,
        "subspace": None if v.subspace is None else [[complex_pair(x) for x in col] for col in v.subspace.T],
        "notes": list(v.notes),
    }
    for k, val in v.details.items():
        if isinstance(val, (int, float, str, bool)) or val is None:
            out[k] = val
    return out


def report_to_dict(r, timing: bool = True) -> dict:
    """JSON mirror of an analysis report; component ids are 1-based."""
    out = {
        "tool": "jspec",
        "version": __version__,
        "reducible": r.reducible,
        "verdict": "reducible" if r.reducible else "irreducible",
        "mode": r.mode,
        "seed": r.seed,
        "shift": r.shift,
        "transform": _matrix_to_json(r.transform.C),
        "admissibility_tries": r.admissibility_tries,
        "tolerances": r.tol.as_dict(),
        "decomposition": decomposition_to_dict(r.decomposition),
        "verdicts": [_verdict_to_dict(v) for v in r.verdicts],
        "notes": list(r.notes),
    }
    if timing:
        out["timing"] = dict(r.timing)
    return out
