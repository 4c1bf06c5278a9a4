"""JSON encodings shared by the CLI and the cover schema.

* complex numbers: ``[re, im]``; complex matrices: row-major lists of such pairs;
* rationals: strings ``"p/q"`` (integers as ``"p"``);
* floats are rounded to 15 significant digits on output.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from .core import Characteristic, PolarizationType, validate_polarization
from .errors import InputError

SIG_DIGITS = 15


def round_sig(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def normalize(obj: Any) -> Any:
    """Recursively convert to plain JSON types with rounded floats."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return fraction_to_json(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_sig(obj.real) + 0.0, round_sig(obj.imag) + 0.0]
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj)) + 0.0
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(normalize(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def fraction_to_json(x: Fraction) -> str:
    return str(Fraction(x))


def fraction_from_json(x) -> Fraction | float:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational number: {x!r}") from exc
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"not a number: {x!r}")
    return Fraction(x) if isinstance(x, int) else x


def complex_from_json(x) -> complex:
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, str):
        return parse_complex(x)
    raise InputError(f"not a complex number: {x!r}")


def parse_complex(s: str) -> complex:
    """Parse ``"i"``, ``"2i"``, ``"0.5+1.2i"`` and the like."""
    t = s.strip().replace(" ", "").replace("I", "i").replace("j", "i")
    if t in ("i", "+i"):
        return 1j
    if t == "-i":
        return -1j
    t = t.replace("i", "j")
    if t.endswith("j") and (t[:-1] == "" or t[:-1][-1] in "+-"):
        t = t[:-1] + "1j"
    try:
        return complex(t)
    except ValueError as exc:
        raise InputError(f"cannot parse complex number {s!r}") from exc


def matrix_to_json(A) -> list:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return [[[round_sig(z.real) + 0.0, round_sig(z.imag) + 0.0] for z in row] for row in A]


def matrix_from_json(doc, g: int) -> np.ndarray:
    """A ``g x g`` complex matrix from nested lists of ``[re, im]`` pairs or scalars."""
    if isinstance(doc, str) and g == 1:
        return np.array([[parse_complex(doc)]])
    if isinstance(doc, (int, float, list)) and g == 1 and not _is_nested(doc):
        return np.array([[complex_from_json(doc)]])
    if not isinstance(doc, list) or len(doc) != g:
        raise InputError(f"expected a {g}x{g} matrix")
    rows = []
    for row in doc:
        if not isinstance(row, list) or len(row) != g:
            raise InputError(f"expected a {g}x{g} matrix")
        rows.append([complex_from_json(x) for x in row])
    return np.array(rows, dtype=complex)


def _is_nested(doc) -> bool:
    return isinstance(doc, list) and len(doc) > 0 and isinstance(doc[0], list)


def vector_from_json(doc, g: int) -> np.ndarray:
    if not isinstance(doc, list):
        doc = [doc]
    if len(doc) != g:
        raise InputError(f"expected a vector of length {g}")
    return np.array([complex_from_json(x) for x in doc])


def polarization_from_json(doc) -> PolarizationType:
    if isinstance(doc, int):
        doc = [doc]
    if isinstance(doc, str):
        doc = [int(x) for x in doc.replace("(", "").replace(")", "").split(",") if x.strip()]
    if not isinstance(doc, list):
        raise InputError(f"polarization type must be a list of integers, got {doc!r}")
    return validate_polarization(doc)


def characteristic_to_json(c: Characteristic) -> dict:
    def enc(x):
        return fraction_to_json(x) if isinstance(x, Fraction) else round_sig(float(x))

    return {"c1": [enc(x) for x in c.c1], "c2": [enc(x) for x in c.c2]}


def characteristic_from_json(doc: dict, g: int) -> Characteristic:
    c1 = doc.get("c1", [0] * g)
    c2 = doc.get("c2", [0] * g)
    if len(c1) != g or len(c2) != g:
        raise InputError(f"characteristic must have {g} entries per part")
    return Characteristic(tuple(_as_exact(x) for x in c1), tuple(_as_exact(x) for x in c2))


def _as_exact(x):
    v = fraction_from_json(x)
    return Characteristic.from_arrays([v], [0]).c1[0] if isinstance(v, float) else v
