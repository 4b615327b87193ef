"""JSON encoding of groups, crossed modules, complexes, configurations and reports.

All tables index elements by integer position with the identity at 0.
"""
from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import CrossedModule, FiniteGroup, builtin_modules
from .complexes import CellComplex, Face, FaceTerm, SphereWord, builtin_complexes, cubic_lattice
from .configuration import Configuration
from .errors import ParseError
from .hamiltonian import ROLES, ModelResult, WeightFunction, Weights, canonical_weight


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ParseError(f"{where}: missing field {key!r}")
    return d[key]


# ---------------------------------------------------------------- groups and modules

def group_to_json(G: FiniteGroup) -> dict:
    out: dict[str, Any] = {"order": G.order, "mul": [list(r) for r in G.mul]}
    if G.names is not None:
        out["names"] = list(G.names)
    return out


def group_from_json(d: dict) -> FiniteGroup:
    mul = _need(d, "mul", "group")
    if "order" in d and d["order"] != len(mul):
        raise ParseError("group: order does not match the table")
    return FiniteGroup(mul, d.get("names"))


def module_to_json(cm: CrossedModule) -> dict:
    return {"name": cm.name, "E": group_to_json(cm.E), "Phi": group_to_json(cm.Phi),
            "delta": list(cm.delta.map), "act": [list(r) for r in cm.act.act]}


def module_from_json(d: dict) -> CrossedModule:
    return CrossedModule.from_tables(group_from_json(_need(d, "E", "module")),
                                     group_from_json(_need(d, "Phi", "module")),
                                     _need(d, "delta", "module"), _need(d, "act", "module"),
                                     d.get("name", ""))


# ---------------------------------------------------------------- complexes

def _letters(w) -> list[list[int]]:
    return [[int(e), int(s)] for e, s in w]


def sphere_to_json(sw: SphereWord) -> dict:
    return {"base": sw.base, "terms": [{"whisker": _letters(t.whisker), "face": t.face,
                                        "sign": t.sign} for t in sw.terms]}


def sphere_from_json(d) -> SphereWord:
    if isinstance(d, list):
        d = {"terms": d}
    terms = tuple(FaceTerm(tuple(map(tuple, t.get("whisker", []))), int(_need(t, "face", "ball term")),
                           int(t.get("sign", 1))) for t in _need(d, "terms", "ball"))
    return SphereWord(int(d.get("base", 0)), terms)


def complex_to_json(X: CellComplex) -> dict:
    return {"name": X.name, "n_vertices": X.n_vertices,
            "edges": [list(e) for e in X.edges],
            "faces": [{"base": f.base, "boundary": _letters(f.boundary)} for f in X.faces],
            "balls": [sphere_to_json(q) for q in X.balls]}


def complex_from_json(d: dict) -> CellComplex:
    edges = [tuple(e) for e in _need(d, "edges", "complex")]
    faces = []
    for f in d.get("faces", []):
        if isinstance(f, list):      # bare boundary: based at the start of its first letter
            e, s = f[0]
            f = {"base": edges[e][0] if s > 0 else edges[e][1], "boundary": f}
        faces.append(Face(int(_need(f, "base", "face")), tuple(map(tuple, f["boundary"]))))
    balls = tuple(sphere_from_json(q) for q in d.get("balls", []))
    return CellComplex(int(_need(d, "n_vertices", "complex")), tuple(edges), tuple(faces),
                       balls, d.get("name", ""))


# ---------------------------------------------------------------- configurations

def config_to_json(cfg: Configuration) -> dict:
    return {"eps": list(cfg.eps), "phi": list(cfg.phi)}


def config_from_json(cm: CrossedModule, X: CellComplex, d: dict) -> Configuration:
    return Configuration(cm, X, _need(d, "eps", "configuration"), _need(d, "phi", "configuration"))


# ---------------------------------------------------------------- weights

def _complex_values(raw) -> list[complex]:
    out = []
    for v in raw:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ParseError("complex weight must be [re, im]")
            out.append(complex(v[0], v[1]))
        else:
            out.append(complex(v))
    return out


def weights_from_json(cm: CrossedModule, d: dict | None) -> Weights:
    """Weight tables keyed by role; missing roles take the canonical weight.

    A role maps to one array (the same weight on every site) or to
    {"sites": [array, ...]} with one array per edge, face or ball.
    """
    d = d or {}
    if not isinstance(d, dict):
        raise ParseError("weights must be a JSON object keyed by role")
    unknown = set(d) - set(ROLES)
    if unknown:
        raise ParseError(f"unknown weight roles {sorted(unknown)}")
    parts = {}
    for role in ROLES:
        raw = d.get(role)
        if raw is None:
            parts[role] = canonical_weight(cm, role)
        elif isinstance(raw, dict):
            parts[role] = [WeightFunction(role, tuple(_complex_values(r)))
                           for r in _need(raw, "sites", role)]
        else:
            parts[role] = WeightFunction(role, tuple(_complex_values(raw)))
    return Weights(**parts)


def weights_to_json(w: Weights) -> dict:
    def enc(f: WeightFunction):
        return [[v.real, v.imag] if v.imag else v.real for v in f.values]
    out = {}
    for role in ROLES:
        x = getattr(w, role)
        out[role] = enc(x) if isinstance(x, WeightFunction) else {"sites": [enc(f) for f in x]}
    return out


# ---------------------------------------------------------------- spectra

def spectrum_to_json(result: ModelResult, oracle: int | None = None) -> dict:
    out = {"model": result.model,
           "eigenvalues": [float(x) for x in result.spectrum.eigenvalues],
           "ground_multiplicity": result.ground_multiplicity,
           "basis_size": result.basis_size,
           "physical_dim": result.physical_dim}
    if oracle is not None:
        out["oracle_prediction"] = oracle
    return out


def spectrum_to_csv(result: ModelResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eigenvalue", "multiplicity"])
    for value, mult in result.spectrum.levels():
        w.writerow([repr(float(value)), mult])
    return buf.getvalue()


# ---------------------------------------------------------------- references

_CUBE = re.compile(r"CUBE_L(\d+)$")


def _read_json(ref: str, what: str):
    text = ref
    if not ref.lstrip().startswith(("{", "[")):
        path = Path(ref)
        if not path.exists():
            raise ParseError(f"{what} {ref!r} is neither a catalog name, a file nor inline JSON")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as ex:
        raise ParseError(f"{what}: invalid JSON ({ex.msg} at line {ex.lineno} column {ex.colno})") from None


def load_module(ref: str) -> CrossedModule:
    """Catalog name, JSON file path or inline JSON."""
    catalog = builtin_modules()
    if ref in catalog:
        return catalog[ref]
    d = _read_json(ref, "module")
    try:
        return module_from_json(d)
    except (TypeError, KeyError, IndexError) as ex:
        raise ParseError(f"module: {ex}") from None


def load_complex(ref: str) -> CellComplex:
    catalog = builtin_complexes()
    if ref in catalog:
        return catalog[ref]
    m = _CUBE.match(ref)
    if m:
        return cubic_lattice(int(m.group(1)))
    d = _read_json(ref, "complex")
    try:
        return complex_from_json(d)
    except (TypeError, KeyError, IndexError) as ex:
        raise ParseError(f"complex: {ex}") from None


def load_weights(cm: CrossedModule, ref: str | None) -> Weights:
    if not ref or ref == "canonical":
        return Weights.canonical(cm)
    try:
        return weights_from_json(cm, _read_json(ref, "weights"))
    except (TypeError, ValueError) as ex:
        if isinstance(ex, ParseError):
            raise
        raise ParseError(f"weights: {ex}") from None


def dump(obj, path: str | Path | None = None) -> str:
    text = json.dumps(obj, indent=2, default=_default)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def _default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot encode {type(x).__name__}")
