"""Problem files, task dispatch and report serialization.

A problem file is JSON::

    {"phi": {"kind": "exp"},
     "A": [[[0.5, 0.0]]],
     "b": [[0.5, 0.0]],
     "truncation": 25,
     "tolerance": 1e-3,
     "seed": 0,
     "tasks": [{"task": "verdict"}, {"task": "oracle"}]}

Complex numbers are ``[re, im]`` pairs; matrices are row-major nested lists
of them.  Reports are plain dicts dumped with sorted keys so that identical
inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import engine as en
from . import linalg as la
from . import oracle as orc
from .errors import AffineUnsupportedError, CompopError, DimensionMismatchError, ParseError
from .fock import compose_matrix
from .phi import phi_from_json, phi_to_json

DEFAULT_TRUNCATION = 12
DEFAULT_TOLERANCE = 1e-3
TASKS = ("verdict", "oracle", "classify", "polar", "power", "aluthge", "equal", "sab", "l2", "iterate")


def parse_complex(pair):
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ParseError(f"complex numbers are [re, im] pairs, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def parse_matrix(rows):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError("matrix must be a nonempty list of rows")
    M = np.array([[parse_complex(z) for z in row] for row in rows], dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"symbol matrix must be square, got shape {M.shape}")
    return M


def parse_vector(items, d):
    v = np.array([parse_complex(z) for z in items], dtype=complex)
    if v.shape != (d,):
        raise DimensionMismatchError(f"translation must have {d} entries, got {v.shape[0]}")
    return v


def encode_complex(z):
    return [float(np.real(z)), float(np.imag(z))]


def encode_matrix(M):
    return [[encode_complex(z) for z in row] for row in np.asarray(M)]


def _clean(obj):
    """Make a report value JSON-serializable; nonfinite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dumps(report):
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


@dataclass
class ProblemSpec:
    phi: object
    A: np.ndarray
    b: np.ndarray
    truncation: int = DEFAULT_TRUNCATION
    tolerance: float = DEFAULT_TOLERANCE
    tasks: list = field(default_factory=list)
    seed: int = 0

    @property
    def affine(self):
        return bool(np.any(self.b != 0))


def parse_problem(text, truncation=None, tolerance=None, seed=None):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("problem must be a JSON object")
    try:
        phi = phi_from_json(raw["phi"])
        A = parse_matrix(raw["A"])
        b = parse_vector(raw.get("b", [[0, 0]] * A.shape[0]), A.shape[0])
        tasks = raw.get("tasks", [{"task": "verdict"}])
        tasks = [{"task": t} if isinstance(t, str) else dict(t) for t in tasks]
        for t in tasks:
            if t.get("task") not in TASKS:
                raise ParseError(f"unknown task {t.get('task')!r}")
        spec = ProblemSpec(
            phi,
            A,
            b,
            int(raw.get("truncation", DEFAULT_TRUNCATION)),
            float(raw.get("tolerance", DEFAULT_TOLERANCE)),
            tasks,
            int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CompopError):
            raise
        raise ParseError(f"malformed problem: {exc!r}") from exc
    if truncation is not None:
        spec.truncation = truncation
    if tolerance is not None:
        spec.tolerance = tolerance
    if seed is not None:
        spec.seed = seed
    return spec


def _require_exp(spec, task):
    if not spec.phi.is_exp:
        raise AffineUnsupportedError(f"task '{task}' requires Phi = exp")


def _require_linear(spec, task):
    if spec.affine:
        raise AffineUnsupportedError(f"task '{task}' requires b = 0")


def _verdict(spec):
    if spec.affine:
        _require_exp(spec, "verdict")
        return en.verdict_affine_exp(spec.A, spec.b)
    return en.verdict_linear(spec.phi, spec.A)


def _check(name, passed, **details):
    return {"check": name, "passed": bool(passed), **details}


def _task_verdict(spec, verify):
    v = _verdict(spec)
    out = {"verdict": v.as_dict()}
    if verify and v.bounded:
        out["checks"] = [_oracle_check(spec, v)]
    return out


def _oracle_check(spec, v=None):
    v = v or _verdict(spec)
    est = orc.compression_norm_curve(spec.phi, spec.A, spec.b if spec.affine else None, spec.truncation)
    monotone = all(x <= y * (1 + 1e-12) + 1e-12 for x, y in zip(est.values, est.values[1:]))
    if not v.bounded:
        return _check("compression_below_formula", monotone, oracle_final=est.final, formula=v.norm, monotone=monotone)
    below = est.final <= v.norm * (1 + 1e-9)
    rel = abs(est.final - v.norm) / v.norm
    return _check(
        "compression_matches_formula",
        monotone and below and rel <= spec.tolerance,
        oracle_final=est.final,
        formula=v.norm,
        relative_gap=rel,
        monotone=monotone,
        converged=est.converged,
    )


def _task_oracle(spec, verify):
    est = orc.compression_norm_curve(spec.phi, spec.A, spec.b if spec.affine else None, spec.truncation)
    out = {"oracle": {"values": est.values, "bound_kind": est.bound_kind, "converged": est.converged, "final": est.final}}
    out["checks"] = [_oracle_check(spec)]
    return out


def _task_classify(spec, verify):
    if spec.affine:
        _require_exp(spec, "classify")
        rep = en.classify_affine_exp(spec.A, spec.b)
        return {"classes": rep.as_dict()}
    rep = en.classify_compop(spec.phi, spec.A)
    out = {"classes": rep.as_dict()}
    if verify:
        N = min(spec.truncation, 6)
        comp = compose_matrix(spec.phi, spec.A, None, N)
        blocks_psd = all(la.is_psd(comp.block(n)) for n in comp.basis.degrees)
        hypo = all(la.classify_matrix(comp.block(n)).hyponormal for n in comp.basis.degrees)
        out["checks"] = [
            _check("positive_blockwise", rep.flags["positive"] == blocks_psd, blocks_psd=blocks_psd, N=N),
            _check("hyponormal_blockwise", rep.flags["hyponormal"] == hypo, blocks_hyponormal=hypo, N=N),
        ]
    return out


def _block(spec, kind, params, name):
    N = min(spec.truncation, 6)
    resid = orc.block_identity_check(kind, spec.phi, spec.A, params, N)
    return _check(name, resid <= 1e-8, residual=resid, N=N)


def _task_polar(spec, verify):
    _require_linear(spec, "polar")
    U, P = en.polar_of_compop(spec.phi, spec.A)
    out = {"polar": {"U": encode_matrix(U), "abs_adjoint": encode_matrix(P)}}
    if verify:
        out["checks"] = [_block(spec, "polar", {}, "polar_blockwise")]
    return out


def _task_power(spec, verify, t=0.5):
    _require_linear(spec, "power")
    At = en.power_symbol(spec.A, t)
    out = {"power": {"t": t, "symbol": encode_matrix(At)}}
    if verify:
        out["checks"] = [_block(spec, "power", {"t": t}, "power_blockwise")]
    return out


def _task_aluthge(spec, verify, s=0.5, t=0.5):
    _require_linear(spec, "aluthge")
    symbol, adjoint = en.aluthge_symbol(spec.phi, spec.A, s, t)
    out = {"aluthge": {"s": s, "t": t, "symbol": encode_matrix(symbol), "adjoint": adjoint}}
    if verify:
        out["checks"] = [_block(spec, "aluthge", {"s": s, "t": t}, "aluthge_blockwise")]
    return out


def _task_equal(spec, verify, other=None):
    if other is None:
        raise ParseError("task 'equal' needs an 'other' symbol")
    A2 = parse_matrix(other["A"])
    if A2.shape != spec.A.shape:
        raise DimensionMismatchError("symbols act on different dimensions")
    b2 = parse_vector(other.get("b", [[0, 0]] * A2.shape[0]), A2.shape[0])
    equal, alpha = en.symbols_equal(spec.phi, en.AffineSymbol(spec.A, spec.b), en.AffineSymbol(A2, b2))
    return {"equal": {"equal": equal, "alpha": None if alpha is None else encode_complex(alpha)}}


def _task_sab(spec, verify, variant="general"):
    _require_exp(spec, "sab")
    chain = en.ProjectionChain.coordinate(spec.A.shape[0])
    res = en.sab_chain(spec.A, spec.b, chain, variant)
    out = {"sab": {"values": res.values, "monotone": res.monotone, "limit": res.limit, "sup": res.sup}}
    out["checks"] = [_check("sab_limit", res.monotone and res.agrees, sup=res.sup, limit=res.limit)]
    return out


def _task_l2(spec, verify, N=None, mode="analytic"):
    v = en.verdict_l2_gaussian(spec.A, spec.b)
    out = {"l2": v.as_dict()}
    if verify and v.bounded:
        N = N or min(spec.truncation, 8 if spec.A.shape[0] == 1 else 4)
        est = orc.l2_gram_norm(spec.A, spec.b, N, mode, seed=spec.seed)
        below = est.final <= v.norm * (1 + 1e-9)
        out["checks"] = [
            _check(
                "l2_compression_below_formula",
                below,
                oracle_final=est.final,
                formula=v.norm,
                relative_gap=abs(est.final - v.norm) / v.norm,
                N=N,
            )
        ]
    return out


def _task_iterate(spec, verify, n_max=20):
    _require_exp(spec, "iterate")
    curve = en.iterate_norm_curve(spec.A, spec.b, n_max)
    return {"iterate": {"values": curve.values, "w_sq": curve.w_sq, "in_range": curve.in_range}}


_DISPATCH = {
    "verdict": _task_verdict,
    "oracle": _task_oracle,
    "classify": _task_classify,
    "polar": _task_polar,
    "power": _task_power,
    "aluthge": _task_aluthge,
    "equal": _task_equal,
    "sab": _task_sab,
    "l2": _task_l2,
    "iterate": _task_iterate,
}


def run_task(spec, task, verify=True):
    params = {k: v for k, v in task.items() if k != "task"}
    fn = _DISPATCH[task["task"]]
    try:
        result = fn(spec, verify, **params)
    except CompopError as exc:
        return {"task": task["task"], "status": "error", "error": exc.code, "message": str(exc)}
    except TypeError as exc:
        return {"task": task["task"], "status": "error", "error": ParseError.code, "message": str(exc)}
    checks = result.get("checks", [])
    status = "pass" if all(c["passed"] for c in checks) else "fail"
    return {"task": task["task"], "status": status, **result}


def run(spec, verify=True, jobs=1, timings=False):
    """Run every task of ``spec``; results keep the task order whatever ``jobs`` is."""

    def one(task):
        start = time.perf_counter()
        out = run_task(spec, task, verify)
        if timings:
            out["seconds"] = time.perf_counter() - start
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, spec.tasks))
    else:
        results = [one(t) for t in spec.tasks]
    return {
        "problem": {
            "phi": phi_to_json(spec.phi),
            "A": encode_matrix(spec.A),
            "b": [encode_complex(z) for z in spec.b],
            "truncation": spec.truncation,
            "tolerance": spec.tolerance,
            "seed": spec.seed,
        },
        "results": results,
        "passed": all(r["status"] == "pass" for r in results),
    }


def curve_csv(estimate, index_name="N"):
    """CSV with columns ``(N_or_n, value, bound_kind, converged)``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([index_name, "value", "bound_kind", "converged"])
    for n, value, kind, conv in estimate.rows():
        writer.writerow([n, repr(float(value)), kind, str(bool(conv)).lower()])
    return buf.getvalue()
