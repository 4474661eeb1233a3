"""JSON readers and writers. Rationals travel as strings, keys in a fixed order."""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from . import fields as fl
from .complexes import Certificate, ModuleComplex
from .core import GridModule, ModuleMorphism
from .decomposition import PersistenceDiagram
from .kan import CoherentSystem
from .rational import as_rational, format_rational
from .spacetime import FiniteMetricSpace


class FormatError(ValueError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def _require(data: dict, keys: tuple, what: str) -> None:
    if not isinstance(data, dict):
        raise FormatError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise FormatError(f"{what} is missing {', '.join(missing)}")


def _rational(text, what: str):
    if not isinstance(text, str):
        raise FormatError(f"{what} must be a string like \"1/2\", got {text!r}")
    return as_rational(text)


def label(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return format_rational(Fraction(x))
    if isinstance(x, tuple):
        return "".join(label(y) for y in x)
    return str(x)


def _matrix(entries, rows: int, cols: int, p: int, what: str) -> np.ndarray:
    try:
        return fl.as_matrix(entries if rows and cols else np.zeros((rows, cols), dtype=np.int64), p, shape=(rows, cols))
    except ValueError as exc:
        raise FormatError(f"{what} should be {rows}x{cols}: {exc}") from exc


def _matrix_json(m: np.ndarray) -> list:
    return [[int(v) for v in row] for row in m]


# modules

def module_to_json(u: GridModule) -> dict:
    return {
        "p": u.p,
        "grid": [format_rational(t) for t in u.grid],
        "dims": list(u.dims),
        "maps": [_matrix_json(m) for m in u.maps],
    }


def module_from_json(data: dict) -> GridModule:
    _require(data, ("grid", "dims", "maps"), "module")
    p = data.get("p", fl.DEFAULT_PRIME)
    grid = [_rational(t, "grid value") for t in data["grid"]]
    dims = data["dims"]
    if not isinstance(dims, list) or len(dims) != len(grid):
        raise FormatError("module needs one dim per grid value")
    maps = data["maps"]
    if not isinstance(maps, list) or len(maps) != max(len(grid) - 1, 0):
        raise FormatError(f"module needs {max(len(grid) - 1, 0)} maps")
    mats = [_matrix(m, dims[i + 1], dims[i], p, f"map {i}") for i, m in enumerate(maps)]
    return GridModule(p, tuple(grid), tuple(dims), tuple(mats))


# diagrams

def diagram_to_json(d: PersistenceDiagram) -> dict:
    return {"points": [{"birth": format_rational(b), "death": format_rational(e), "mult": m} for b, e, m in d]}


def diagram_from_json(data: dict) -> PersistenceDiagram:
    _require(data, ("points",), "diagram")
    pts = []
    for pt in data["points"]:
        _require(pt, ("birth", "death"), "diagram point")
        pts.append((_rational(pt["birth"], "birth"), _rational(pt["death"], "death"), pt.get("mult", 1)))
    return PersistenceDiagram(pts)


# metric spaces

def metric_to_json(m: FiniteMetricSpace) -> dict:
    return {
        "points": [label(x) for x in m.points],
        "dist": [[format_rational(m.d(x, y)) for y in m.points] for x in m.points],
    }


def metric_from_json(data: dict) -> FiniteMetricSpace:
    _require(data, ("points", "dist"), "metric")
    pts = data["points"]
    if not all(isinstance(x, str) for x in pts):
        raise FormatError("metric point labels must be strings")
    table = [[_rational(v, "distance") for v in row] for row in data["dist"]]
    return FiniteMetricSpace(pts, table)


# morphisms and coherent systems

def morphism_to_json(phi: ModuleMorphism) -> dict:
    return {
        "shift": format_rational(phi.shift),
        "grid": [format_rational(t) for t in phi.grid],
        "components": [_matrix_json(c) for c in phi.components],
    }


def morphism_from_json(data: dict, source: GridModule, target: GridModule) -> ModuleMorphism:
    _require(data, ("shift", "grid", "components"), "morphism")
    e = _rational(data["shift"], "shift")
    grid = [_rational(t, "morphism grid value") for t in data["grid"]]
    comps = data["components"]
    if len(comps) != len(grid):
        raise FormatError("morphism needs one component per grid value")
    mats = [
        _matrix(c, target.dim(s + e), source.dim(s), source.p, f"component at {format_rational(s)}")
        for s, c in zip(grid, comps)
    ]
    return ModuleMorphism(source, target, e, tuple(grid), tuple(mats))


def system_to_json(system: CoherentSystem) -> dict:
    pts = system.points
    return {
        "metric": metric_to_json(system.space),
        "modules": {label(x): module_to_json(system.modules[x]) for x in pts},
        "morphisms": {
            f"{label(a)}->{label(b)}": morphism_to_json(system.morphisms[(a, b)])
            for a in pts
            for b in pts
            if (a, b) in system.morphisms
        },
    }


def system_from_json(data: dict) -> CoherentSystem:
    _require(data, ("metric", "modules", "morphisms"), "coherent system")
    space = metric_from_json(data["metric"])
    mods = data["modules"]
    if set(mods) != set(space.points):
        raise FormatError("system needs exactly one module per metric point")
    modules = {x: module_from_json(mods[x]) for x in space.points}
    morphisms = {}
    for key, m in data["morphisms"].items():
        a, sep, b = key.partition("->")
        if not sep or a not in modules or b not in modules:
            raise FormatError(f"bad morphism key {key!r}")
        morphisms[(a, b)] = morphism_from_json(m, modules[a], modules[b])
    return CoherentSystem(space, modules, morphisms)


# complexes

def _simplex_key(s) -> str:
    return ",".join(str(i) for i in sorted(s))


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "witness": cert.witness,
        "center": module_to_json(cert.center),
        "system": system_to_json(cert.system),
    }


def complex_to_json(c: ModuleComplex, certificates: bool = True) -> dict:
    out = {
        "scale": format_rational(c.scale),
        "simplices": [list(s) for s in c.sorted_simplices()],
        "unknown": [list(s) for s in sorted((tuple(sorted(s)) for s in c.unknown), key=lambda s: (len(s), s))],
    }
    if certificates:
        keys = sorted(c.certificates, key=lambda s: (len(s), sorted(s)))
        out["certificates"] = {_simplex_key(s): certificate_to_json(c.certificates[s]) for s in keys}
    return out


def complex_from_json(data: dict, modules: list[GridModule]) -> ModuleComplex:
    """Scale, simplices and unknowns; certificates are not re-read."""
    _require(data, ("scale", "simplices"), "complex")
    simplices = {frozenset(int(i) for i in s) for s in data["simplices"]}
    unknown = {frozenset(int(i) for i in s) for s in data.get("unknown", [])}
    return ModuleComplex(list(modules), _rational(data["scale"], "scale"), simplices, {}, unknown)


def load(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed JSON ({exc})") from exc
