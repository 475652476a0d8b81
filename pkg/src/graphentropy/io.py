"""JSON and CSV I/O for systems, graphs, step graphons and certificates.

Input masses may be JSON numbers or decimal strings (fractions such as
"1/3" are accepted too). Model serialization writes masses as the shortest
round-trip decimal string so that parse and serialize are exact inverses;
computed results are written with 12 significant digits.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import Distribution, DomainError, EntropyError, FiniteGraph, SetSystem
from .graphon import StepGraphon
from .solver import EntropyCertificate

SIG_DIGITS = 12
LOG_BASES = {"nat": 1.0, "bit": math.log(2.0)}


class InputError(EntropyError, ValueError):
    """Malformed input; ``path`` locates the offending JSON node."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def fmt_real(x: float):
    """A real rounded to 12 significant digits; infinities become strings."""
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "infinity" if x > 0 else "-infinity"
    return float(f"{x:.{SIG_DIGITS}g}")


def fmt_csv(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def digest(obj) -> str:
    """sha256 of the canonical JSON form of ``obj``."""
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None


def load(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(str(path), f"cannot read file ({exc})") from None
    try:
        return loads(text)
    except InputError as exc:
        raise InputError(f"{path}:{exc.path}", str(exc).split(": ", 1)[1]) from None


def _expect(obj, kind, path: str):
    if not isinstance(obj, kind) or isinstance(obj, bool):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise InputError(path, f"expected {names}, got {type(obj).__name__}")
    return obj


def _key(obj: dict, key: str, path: str):
    if key not in obj:
        raise InputError(path, f"missing key {key!r}")
    return obj[key]


def parse_mass(value, path: str) -> float:
    if isinstance(value, bool):
        raise InputError(path, "mass must be a number or decimal string")
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        try:
            x = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise InputError(path, f"cannot parse mass {value!r}") from None
    else:
        raise InputError(path, "mass must be a number or decimal string")
    if not math.isfinite(x) or x < 0:
        raise InputError(path, f"mass must be finite and nonnegative, got {value!r}")
    return x


def _mass_str(x: float) -> str:
    return repr(float(x))


def _symbol(value, path: str) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    raise InputError(path, "ids must be strings or integers")


def _distribution(symbols, masses, path: str) -> Distribution:
    try:
        return Distribution(tuple(symbols), np.array(masses, dtype=float))
    except DomainError as exc:
        raise InputError(path, str(exc)) from None


def system_from_json(obj, path: str = "$") -> SetSystem:
    _expect(obj, dict, path)
    atoms = _expect(_key(obj, "universe", path), list, f"{path}.universe")
    symbols, masses = [], []
    for i, atom in enumerate(atoms):
        p = f"{path}.universe[{i}]"
        _expect(atom, dict, p)
        symbols.append(_symbol(_key(atom, "id", p), f"{p}.id"))
        masses.append(parse_mass(_key(atom, "mass", p), f"{p}.mass"))
    pi = _distribution(symbols, masses, f"{path}.universe")
    sets = _expect(_key(obj, "sets", path), list, f"{path}.sets")
    family = []
    for k, J in enumerate(sets):
        p = f"{path}.sets[{k}]"
        _expect(J, list, p)
        members = [_symbol(x, f"{p}[{j}]") for j, x in enumerate(J)]
        for j, x in enumerate(members):
            if x not in pi.index:
                raise InputError(f"{p}[{j}]", f"unknown symbol {x!r}")
        family.append(frozenset(members))
    try:
        return SetSystem(pi, tuple(family))
    except DomainError as exc:
        raise InputError(f"{path}.sets", str(exc)) from None


def system_to_json(system: SetSystem) -> dict:
    pi = system.universe
    return {
        "universe": [{"id": s, "mass": _mass_str(m)} for s, m in pi.atoms],
        "sets": [system.sorted_members(k) for k in range(len(system.family))],
    }


def graph_from_json(obj, path: str = "$") -> FiniteGraph:
    _expect(obj, dict, path)
    verts = _expect(_key(obj, "vertices", path), list, f"{path}.vertices")
    vertices = [_symbol(v, f"{path}.vertices[{i}]") for i, v in enumerate(verts)]
    edges = []
    for i, e in enumerate(_expect(obj.get("edges", []), list, f"{path}.edges")):
        p = f"{path}.edges[{i}]"
        _expect(e, list, p)
        if len(e) != 2:
            raise InputError(p, "an edge has exactly two endpoints")
        edges.append(tuple(_symbol(x, f"{p}[{j}]") for j, x in enumerate(e)))
    raw_pi = obj.get("pi")
    if raw_pi is None:
        pi = _distribution(vertices, np.full(len(vertices), 1.0 / max(len(vertices), 1)), f"{path}.vertices")
    else:
        _expect(raw_pi, dict, f"{path}.pi")
        missing = [v for v in vertices if v not in raw_pi]
        if missing:
            raise InputError(f"{path}.pi", f"no mass for vertex {missing[0]!r}")
        extra = [k for k in raw_pi if k not in set(vertices)]
        if extra:
            raise InputError(f"{path}.pi.{extra[0]}", "not a vertex")
        pi = _distribution(vertices, [parse_mass(raw_pi[v], f"{path}.pi.{v}") for v in vertices], f"{path}.pi")
    try:
        return FiniteGraph(tuple(vertices), tuple(edges), pi)
    except DomainError as exc:
        raise InputError(f"{path}.edges", str(exc)) from None


def graph_to_json(graph: FiniteGraph) -> dict:
    order = {v: i for i, v in enumerate(graph.vertices)}
    edges = sorted((sorted(e, key=order.__getitem__) for e in graph.edges),
                   key=lambda e: (order[e[0]], order[e[1]]))
    return {
        "vertices": list(graph.vertices),
        "edges": edges,
        "pi": {v: _mass_str(m) for v, m in graph.pi.atoms},
    }


def graphon_from_json(obj, path: str = "$") -> StepGraphon:
    _expect(obj, dict, path)
    raw = _expect(_key(obj, "masses", path), list, f"{path}.masses")
    masses = [parse_mass(m, f"{path}.masses[{i}]") for i, m in enumerate(raw)]
    rows = _expect(_key(obj, "support", path), list, f"{path}.support")
    if len(rows) != len(masses):
        raise InputError(f"{path}.support", f"expected {len(masses)} rows, got {len(rows)}")
    support = np.zeros((len(masses), len(masses)), dtype=bool)
    for i, row in enumerate(rows):
        p = f"{path}.support[{i}]"
        _expect(row, list, p)
        if len(row) != len(masses):
            raise InputError(p, f"expected {len(masses)} entries, got {len(row)}")
        for j, v in enumerate(row):
            if isinstance(v, bool):
                support[i, j] = v
            elif isinstance(v, (int, float)) and 0 <= v <= 1:
                support[i, j] = v > 0
            else:
                raise InputError(f"{p}[{j}]", "entries must be booleans or values in [0, 1]")
    try:
        return StepGraphon(np.array(masses), support)
    except DomainError as exc:
        raise InputError(path, str(exc)) from None


def graphon_to_json(w: StepGraphon) -> dict:
    return {
        "masses": [_mass_str(m) for m in w.block_masses],
        "support": w.support.astype(int).tolist(),
    }


def certificate_to_json(cert: EntropyCertificate, log_base: str = "nat") -> dict:
    """Certificate in output units; ``entropy`` duplicates ``value`` for quick reading."""
    if log_base not in LOG_BASES:
        raise DomainError(f"unknown log base {log_base!r}")
    unit = LOG_BASES[log_base]
    if cert.infinite:
        return {"entropy": "infinity", "value": "infinity", "gap": "infinity",
                "bracket": ["infinity", "infinity"], "weights": [], "a": {},
                "converged": True, "log_base": log_base}
    point = cert.point
    value = fmt_real(cert.value / unit)
    return {
        "entropy": value,
        "value": value,
        "gap": fmt_real(cert.gap),
        "bracket": [fmt_real(cert.bracket_lo / unit), fmt_real(cert.bracket_hi / unit)],
        "weights": [[k, fmt_real(q)] for k, q in point.weights],
        "a": {s: fmt_real(v) for s, v in point.a_map().items()},
        "converged": bool(cert.converged),
        "iterations": int(cert.iterations),
        "log_base": log_base,
    }


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_csv(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path
