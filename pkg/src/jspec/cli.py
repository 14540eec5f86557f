"""Command-line interface: ``jspec <command> FILE [options]``.

Exit codes: 0 success, 1 usage or input error, 2 computation error (a JSON
error record with whatever was computed is still written).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from jspec import __version__
from jspec.config import DEFAULT_TOL
from jspec.io import (
    TupleFileError,
    complex_pair,
    decomposition_to_dict,
    emit_tuple,
    parse_tuple,
    poly_to_dict,
    report_to_dict,
)

__all__ = ["main", "run_cli", "build_parser"]


class UsageError(Exception):
    pass


class ComputationError(Exception):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial or {}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("JSPEC_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"JSPEC_SEED must be an integer, got {raw!r}") from None


def _subset(text: str) -> tuple:
    try:
        ids = tuple(sorted({int(s) for s in text.split(",") if s.strip()}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"subset must be comma-separated component ids, got {text!r}") from None
    if not ids or min(ids) < 1:
        raise argparse.ArgumentTypeError("component ids start at 1")
    return ids


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not np.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text!r}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: $JSPEC_SEED or 0)")
    common.add_argument("--tol-cluster", type=_positive, default=None, help="eigenvalue clustering tolerance")
    common.add_argument("--tol-eq", type=_positive, default=None, help="projection equality tolerance")
    common.add_argument("--mode", choices=["exact", "float"], default=None,
                        help="number mode (default: as stored in the file)")
    common.add_argument("--out", type=Path, default=None, help="write JSON here instead of stdout")
    common.add_argument("--subset", type=_subset, action="append", default=None,
                        help='component ids such as "1,3" (repeatable)')
    common.add_argument("--max-loops", type=_count, default=None, help="monodromy loop budget")

    p = _Parser(prog="jspec", description="Joint spectra of matrix tuples and their invariant subspaces.")
    p.add_argument("--version", action="version", version=f"jspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common], help="determinant of the pencil as a polynomial")
    s.add_argument("file", type=Path)
    s.add_argument("--csv", type=Path, default=None, help="write a real 2-D grid of det values (n=2)")
    s.add_argument("--grid", type=_count, default=101)
    s.add_argument("--extent", type=_positive, default=3.0)

    s = sub.add_parser("decompose", parents=[common], help="irreducible components by monodromy")
    s.add_argument("file", type=Path)

    s = sub.add_parser("analyze", parents=[common], help="full reducibility analysis")
    s.add_argument("file", type=Path)
    s.add_argument("--check", choices=["auto", "selfadjoint", "general"], default="auto",
                   help="criterion to apply (auto: self-adjoint iff the tuple is)")
    s.add_argument("--no-permutation", action="store_true", help="skip the permutation test")
    s.add_argument("--no-timing", action="store_true", help="omit timings from the report")

    s = sub.add_parser("probe", parents=[common], help="derivative of line projections in C")
    s.add_argument("file", type=Path)
    s.add_argument("--h", type=_positive, default=1e-4, help="finite-difference step")
    s.add_argument("--check", choices=["auto", "selfadjoint", "general"], default="auto")

    s = sub.add_parser("plant", parents=[common], help="generate a tuple with a planted invariant subspace")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--conditioning", type=_positive, default=10.0)
    s.add_argument("--selfadjoint", action="store_true")

    s = sub.add_parser("verify", parents=[common], help="check a claimed common invariant subspace")
    s.add_argument("file", type=Path)
    s.add_argument("--basis", required=True,
                   help='standard vectors such as "e1,e3", or a JSON file with a list of columns')
    return p


# ---------------------------------------------------------------------------


def _tolerances(args):
    tol = DEFAULT_TOL
    if args.tol_cluster is not None:
        tol = tol.with_(cluster=args.tol_cluster)
    if args.tol_eq is not None:
        tol = tol.with_(eq=args.tol_eq)
    return tol


def _load(args, tol):
    try:
        t = parse_tuple(args.file, tol=tol)
    except TupleFileError as exc:
        raise UsageError(str(exc)) from exc
    if args.mode == "float" and t.exact:
        t = t.as_float()
    elif args.mode == "exact" and not t.exact:
        raise UsageError(f"{args.file}: exact mode needs rational entries")
    return t


def _emit(payload: dict, out: Path | None):
    text = json.dumps(payload, indent=1, default=_json_default)
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        out.write_text(text + "\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_pair(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    return str(obj)


def _to_zero_based(subsets, k):
    if subsets is None:
        return None
    out = []
    for S in subsets:
        if max(S) > k:
            raise UsageError(f"subset {','.join(map(str, S))} names a component above {k}")
        out.append(tuple(s - 1 for s in S))
    return out


def _prepare(t, args, tol):
    """Admissible transform and decomposition shared by decompose/analyze/probe."""
    from jspec.decomposition import decompose
    from jspec.pencil import TransformMatrix, apply_transform, is_admissible, sample_admissible

    seed = args.seed
    partial = {"shift": t.shift}
    try:
        ident = TransformMatrix.identity(t.n, exact=t.exact)
        if is_admissible(t, ident, tol):
            C, tries = ident, 0
        else:
            C, tries = sample_admissible(t, seed, tol=tol)
        partial["admissibility_tries"] = tries
        That = apply_transform(t, C)
        kw = {} if args.max_loops is None else {"loop_budget": args.max_loops}
        d = decompose(That, seed=seed, tol=tol, **kw)
    except Exception as exc:  # noqa: BLE001 - reported with exit code 2
        raise ComputationError(f"{type(exc).__name__}: {exc}", partial) from exc
    return That, C, tries, d


def _cmd_spectrum(args, tol):
    from jspec.pencil import spectrum_polynomial

    t = _load(args, tol).unshifted()
    try:
        sp = spectrum_polynomial(t)
    except Exception as exc:  # noqa: BLE001
        raise ComputationError(f"{type(exc).__name__}: {exc}") from exc
    payload = {"n": t.n, "N": t.N, "exact": sp.exact, "variables": [f"x{i + 1}" for i in range(t.n + 1)],
               "polynomial": poly_to_dict(sp.poly)}
    if args.csv is not None:
        if t.n != 2:
            raise UsageError("--csv needs a pair of matrices (n=2)")
        if args.grid < 2:
            raise UsageError("--grid must be at least 2")
        A1, A2 = t.float_matrices()
        I = np.eye(t.N)
        xs = np.linspace(-args.extent, args.extent, args.grid)
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "x2", "det_re", "det_im"])
            for x1 in xs:
                for x2 in xs:
                    v = np.linalg.det(x1 * A1 + x2 * A2 - I)
                    w.writerow([f"{x1:.12g}", f"{x2:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])
        payload["csv"] = str(args.csv)
    _emit(payload, args.out)


def _cmd_decompose(args, tol):
    t = _load(args, tol)
    _, C, tries, d = _prepare(t, args, tol)
    payload = decomposition_to_dict(d)
    payload.update({"shift": t.shift, "admissibility_tries": tries,
                    "summary": [[c.degree, c.multiplicity] for c in d.components]})
    _emit(payload, args.out)


def _options(args, tol, d_k=None):
    from jspec.criteria import AnalysisOptions

    kw = {"seed": args.seed, "tol": tol}
    if args.max_loops is not None:
        kw["loop_budget"] = args.max_loops
    if getattr(args, "check", "auto") != "auto":
        kw["mode"] = args.check
    if getattr(args, "no_permutation", False):
        kw["permutation"] = False
    return AnalysisOptions(**kw)


def _cmd_analyze(args, tol):
    from jspec.criteria import analyze

    t = _load(args, tol)
    opts = _options(args, tol)
    if args.subset is not None:
        opts.subsets = [tuple(s - 1 for s in S) for S in args.subset]
    try:
        report = analyze(t, opts)
    except ValueError as exc:
        if "self-adjoint mode requested" in str(exc):
            raise UsageError(str(exc)) from exc
        raise ComputationError(f"{type(exc).__name__}: {exc}", {"shift": t.shift}) from exc
    except Exception as exc:  # noqa: BLE001
        raise ComputationError(f"{type(exc).__name__}: {exc}", {"shift": t.shift}) from exc
    if opts.subsets is not None and any(max(S, default=0) >= report.decomposition.k for S in opts.subsets):
        raise UsageError(f"--subset names a component above {report.decomposition.k}")
    _emit(report_to_dict(report, timing=not args.no_timing), args.out)


def _cmd_probe(args, tol):
    from jspec.criteria import constancy_probe, enumerate_subsets

    t = _load(args, tol)
    That, C, tries, d = _prepare(t, args, tol)
    mode = args.check if args.check != "auto" else ("selfadjoint" if That.selfadjoint else "general")
    if mode == "selfadjoint" and not That.selfadjoint:
        raise UsageError("self-adjoint probe requested for a tuple that is not self-adjoint")
    subsets = _to_zero_based(args.subset, d.k)
    if subsets is None:
        subsets = [S for S, parent in enumerate_subsets(d, "general")]
    results = []
    for S in subsets:
        try:
            worst, derivs = constancy_probe(That, d, S, None, args.h, mode=mode, tol=tol,
                                            return_derivatives=True)
        except Exception as exc:  # noqa: BLE001
            raise ComputationError(f"{type(exc).__name__}: {exc}",
                                   {"results": results, "admissibility_tries": tries}) from exc
        results.append({
            "subset": [s + 1 for s in S],
            "max_derivative_norm": worst,
            "derivatives": [[[complex_pair(z) for z in row] for row in D] for D in derivs],
        })
    _emit({"mode": mode, "h": args.h, "admissibility_tries": tries, "shift": t.shift,
           "components": [[c.degree, c.multiplicity] for c in d.components], "results": results},
          args.out)


def _cmd_plant(args, tol):
    from jspec.generators import plant_instance

    try:
        inst = plant_instance(args.N, args.n, args.d, seed=args.seed, conditioning=args.conditioning,
                              selfadjoint=args.selfadjoint)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    extra = {"planted": {
        "seed": args.seed,
        "d": args.d,
        "condition": inst.condition,
        "basis": [[complex_pair(x) for x in col] for col in inst.basis.T],
    }}
    text = emit_tuple(inst.tuple, path=args.out, name=f"planted-N{args.N}-n{args.n}-d{args.d}-s{args.seed}",
                      extra=extra)
    if args.out is None:
        sys.stdout.write(text + "\n")


def _parse_basis(spec: str, N: int) -> np.ndarray:
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        try:
            cols = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--basis: cannot read {spec}: {exc}") from exc
        try:
            B = np.array([[complex(*x) if isinstance(x, list) else complex(x) for x in col] for col in cols]).T
        except (TypeError, ValueError) as exc:
            raise UsageError(f"--basis: columns must hold numbers or [re, im] pairs ({exc})") from exc
    else:
        B = np.zeros((N, 0), dtype=complex)
        for tok in spec.split(","):
            tok = tok.strip()
            if not (tok.startswith("e") and tok[1:].isdigit()) or not 1 <= int(tok[1:]) <= N:
                raise UsageError(f"--basis: expected e1..e{N}, got {tok!r}")
            v = np.zeros((N, 1), dtype=complex)
            v[int(tok[1:]) - 1] = 1
            B = np.hstack([B, v])
    if B.ndim != 2 or B.shape[0] != N or B.shape[1] == 0:
        raise UsageError(f"--basis: need between 1 and {N} columns of length {N}")
    if np.linalg.matrix_rank(B) < B.shape[1]:
        raise UsageError("--basis: columns are linearly dependent")
    return B


def _cmd_verify(args, tol):
    from jspec.criteria import verify_invariance

    t = _load(args, tol).unshifted()
    B = _parse_basis(args.basis, t.N)
    res, ok = verify_invariance(t, B, tol=tol)
    tau = tol.inv_residual * max(max(np.linalg.norm(A, 2) for A in t.float_matrices()), 1.0)
    _emit({"dimension": int(B.shape[1]), "residuals": res, "max_residual": max(res), "tau": tau,
           "invariant": bool(ok)}, args.out)


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "decompose": _cmd_decompose,
    "analyze": _cmd_analyze,
    "probe": _cmd_probe,
    "plant": _cmd_plant,
    "verify": _cmd_verify,
}


def run_cli(argv=None) -> int:
    """Run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        tol = _tolerances(args)
        _COMMANDS[args.command](args, tol)
    except UsageError as exc:
        sys.stderr.write(f"jspec: error: {exc}\n")
        return 1
    except ComputationError as exc:
        sys.stderr.write(f"jspec: computation failed: {exc}\n")
        record = {"status": "error", "error": str(exc), "partial": exc.partial}
        try:
            _emit(record, getattr(args, "out", None))
        except OSError:
            pass
        return 2
    except OSError as exc:
        sys.stderr.write(f"jspec: error: {exc}\n")
        return 1
    except Exception as exc:  # noqa: BLE001 - numerical failure outside a guarded step
        msg = f"{type(exc).__name__}: {exc}"
        sys.stderr.write(f"jspec: computation failed: {msg}\n")
        try:
            _emit({"status": "error", "error": msg, "partial": None}, getattr(args, "out", None))
        except OSError:
            pass
        return 2
    return 0


def main(argv=None):
    sys.exit(run_cli(argv))
