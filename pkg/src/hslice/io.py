"""Reading and writing collections, vectors and reports."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

from .cube import EdgeId, Hyperplane, to_fraction


class InputError(ValueError):
    pass


def _exact_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def collection_to_dict(n: int, hyperplanes) -> dict:
    exact = all(h.exact for h in hyperplanes) if hyperplanes else True
    if exact:
        rows = [{"a": [_exact_str(c) for c in h.a], "b": _exact_str(h.b)} for h in hyperplanes]
    else:
        rows = [{"a": [float(c) for c in h.a], "b": float(h.b)} for h in hyperplanes]
    return {"n": n, "mode": "exact" if exact else "float", "hyperplanes": rows}


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def dump_collection(n: int, hyperplanes) -> str:
    return dumps(collection_to_dict(n, hyperplanes))


def collection_from_dict(d: dict) -> tuple[int, list[Hyperplane]]:
    try:
        n = int(d["n"])
        mode = d.get("mode", "exact")
        rows = d["hyperplanes"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"collection is missing field {exc}") from None
    if mode not in ("exact", "float"):
        raise InputError(f"unknown mode {mode!r}")
    out = []
    for i, r in enumerate(rows):
        try:
            a, b = r["a"], r["b"]
            h = Hyperplane.exact_of(a, b) if mode == "exact" else Hyperplane.float_of(a, b)
        except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
            raise InputError(f"hyperplane {i}: {exc}") from None
        if h.n != n:
            raise InputError(f"hyperplane {i} has {h.n} coefficients, expected {n}")
        out.append(h)
    return n, out


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load_collection(path) -> tuple[int, list[Hyperplane]]:
    return collection_from_dict(read_json(path))


def load_vector(path) -> list:
    """A JSON list, or an object with key "v"; strings are read as exact rationals."""
    d = read_json(path)
    v = d.get("v") if isinstance(d, dict) else d
    if not isinstance(v, list):
        raise InputError("vector file must hold a list or {\"v\": [...]}")
    try:
        return [to_fraction(x) if isinstance(x, str) else x for x in v]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad vector entry: {exc}") from None


def edges_to_csv(edges) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["base_bits_hex", "flip_index"])
    for e in edges:
        w.writerow([f"{e.base:x}", e.flip])
    return buf.getvalue()


def edges_from_csv(text: str) -> list[EdgeId]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [EdgeId(int(r["base_bits_hex"], 16), int(r["flip_index"])) for r in rows]
