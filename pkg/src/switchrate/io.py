"""Readers and writers for the on-disk formats.

* system JSON: ``{"dimension", "subsystems": [...], "lyapunov": {...}}``
* signal JSON ``{"switch_times", "values", "horizon"}`` or CSV ``t,i``
* trajectory CSV ``t,i,x1..xd,V,normP``
* certificate JSON and curve CSVs

Floats are written with 17 significant digits so files round-trip exactly.
"""

import csv
import io as _io
import json
from dataclasses import fields, is_dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import Subsystem, SubsystemKind, SwitchedSystem
from .errors import InputError
from .lyapunov import PolynomialForm, QuadraticForm
from .signals import SwitchingSignal

__all__ = [
    "system_from_dict",
    "system_to_dict",
    "load_system",
    "dump_system",
    "signal_from_dict",
    "signal_to_dict",
    "load_signal",
    "dump_signal",
    "write_trajectory_csv",
    "certificate_to_dict",
    "dump_json",
    "write_csv",
]


def _fmt(x):
    return format(float(x), ".17g")


def _load_json_text(text, source="<string>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _matrix(obj, d, what):
    try:
        A = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what} is not a numeric matrix") from exc
    if A.shape != (d, d):
        raise InputError(f"{what} has shape {A.shape}, expected ({d}, {d})")
    return A


# systems -----------------------------------------------------------------


def _lyapunov_from_dict(obj, d):
    kind = obj.get("type")
    if kind == "quadratic":
        return QuadraticForm(_matrix(obj.get("P"), d, "lyapunov.P"))
    if kind == "polynomial":
        terms = obj.get("terms")
        if not isinstance(terms, list):
            raise InputError("lyapunov.terms must be a list")
        try:
            form = PolynomialForm([(t["coeff"], t["exponents"]) for t in terms])
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad lyapunov term: {exc}") from exc
        if form.dimension != d:
            raise InputError(f"lyapunov terms have dimension {form.dimension}, expected {d}")
        return form
    raise InputError(f"unknown lyapunov type {kind!r}")


def _lyapunov_to_dict(V):
    if isinstance(V, QuadraticForm):
        return {"type": "quadratic", "P": V.P.tolist()}
    return {
        "type": "polynomial",
        "terms": [{"coeff": c, "exponents": list(e)} for c, e in V.terms],
    }


def system_from_dict(obj) -> SwitchedSystem:
    if not isinstance(obj, dict):
        raise InputError("system description must be a JSON object")
    try:
        d = int(obj["dimension"])
        subs = obj["subsystems"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"system description missing or invalid key: {exc}") from exc
    if d < 1 or not isinstance(subs, list) or not subs:
        raise InputError("need dimension >= 1 and a nonempty subsystems list")
    built = []
    for k, s in enumerate(subs, start=1):
        if not isinstance(s, dict):
            raise InputError(f"subsystem {k}: expected a JSON object")
        kind = s.get("type")
        if kind not in ("linear", "polynomial"):
            raise InputError(f"subsystem {k}: unknown type {kind!r}")
        A = _matrix(s.get("matrix"), d, f"subsystem {k} matrix")
        if kind == "linear":
            if s.get("terms"):
                raise InputError(f"subsystem {k}: linear subsystems take no terms")
            built.append(Subsystem.linear(A))
        else:
            try:
                terms = [(t["target"], t["coeff"], t["exponents"]) for t in s.get("terms", [])]
            except (KeyError, TypeError) as exc:
                raise InputError(f"subsystem {k}: bad term {exc}") from exc
            built.append(Subsystem.polynomial(A, terms))
    lyap = obj.get("lyapunov")
    if lyap is not None and not isinstance(lyap, dict):
        raise InputError("lyapunov must be a JSON object")
    V = _lyapunov_from_dict(lyap, d) if lyap is not None else None
    return SwitchedSystem(tuple(built), V)


def system_to_dict(sys: SwitchedSystem) -> dict:
    subs = []
    for s in sys.subsystems:
        entry = {"type": s.kind.value, "matrix": s.matrix.tolist()}
        if s.kind is SubsystemKind.POLYNOMIAL:
            entry["terms"] = [
                {"target": t.target, "coeff": t.coeff, "exponents": list(t.exponents)}
                for t in s.terms
            ]
        subs.append(entry)
    out = {"dimension": sys.dimension, "subsystems": subs}
    if sys.lyapunov is not None:
        out["lyapunov"] = _lyapunov_to_dict(sys.lyapunov)
    return out


def load_system(path) -> SwitchedSystem:
    return system_from_dict(_load_json_text(_read(path), str(path)))


def dump_system(sys: SwitchedSystem, path):
    dump_json(system_to_dict(sys), path)


# signals -----------------------------------------------------------------


def signal_from_dict(obj) -> SwitchingSignal:
    if not isinstance(obj, dict):
        raise InputError("signal description must be a JSON object")
    try:
        return SwitchingSignal(obj["switch_times"], obj["values"], float(obj["horizon"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"signal description missing key: {exc}") from exc


def signal_to_dict(u: SwitchingSignal) -> dict:
    return {
        "switch_times": u.switch_times.tolist(),
        "values": u.values.tolist(),
        "horizon": u.horizon,
    }


def load_signal(path, horizon=None) -> SwitchingSignal:
    """Read a signal from JSON, or from a ``t,i`` CSV (then ``horizon`` is required)."""
    path = Path(path)
    text = _read(path)
    if path.suffix.lower() == ".csv":
        rows = list(csv.reader(_io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["t", "i"]:
            raise InputError(f"{path}: signal CSV must start with header 't,i'")
        try:
            t = [float(r[0]) for r in rows[1:] if r]
            v = [int(r[1]) for r in rows[1:] if r]
        except (ValueError, IndexError) as exc:
            raise InputError(f"{path}: bad CSV row: {exc}") from exc
        if horizon is None:
            raise InputError("a CSV signal needs an explicit horizon")
        return SwitchingSignal(t, v, horizon)
    return signal_from_dict(_load_json_text(text, str(path)))


def dump_signal(u: SwitchingSignal, path):
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_csv(path, ["t", "i"], zip(u.switch_times, u.values))
    else:
        dump_json(signal_to_dict(u), path)


# tables ------------------------------------------------------------------


def _cell(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return _fmt(x)


def write_csv(path, header, rows):
    """Locale-independent CSV: ``.`` decimals, LF line endings, 17 digits."""
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(x) for x in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def write_trajectory_csv(traj, sys: SwitchedSystem, path):
    V = sys.lyapunov
    d = sys.dimension
    header = ["t", "i"] + [f"x{k + 1}" for k in range(d)] + ["V", "normP"]
    vals = V.value(traj.states) if V is not None else np.full(len(traj), np.nan)
    norms = V.norm(traj.states) if V is not None else np.full(len(traj), np.nan)
    rows = (
        [t, int(i), *x, v, n]
        for t, i, x, v, n in zip(traj.times, traj.input_trace, traj.states, vals, norms)
    )
    write_csv(path, header, rows)


def _jsonable(obj):
    if is_dataclass(obj):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj


def certificate_to_dict(cert, kind=None, extra=None) -> dict:
    out = {"tool": "switchrate", "version": __version__}
    if kind:
        out["kind"] = kind
    out.update(_jsonable(cert))
    if extra:
        out.update(_jsonable(extra))
    return out


def dump_json(obj, path):
    text = json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")
