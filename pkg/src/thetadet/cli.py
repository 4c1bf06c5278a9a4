"""Command-line front end.

Every invocation prints one JSON report (to stdout or ``--out``).  Exit status:
0 on success, 1 on malformed input, 2 when an asserted identity fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import acceptance
from .core import Characteristic, random_siegel, validate_period_matrix
from .errors import ClassificationError, IdentityViolation, InputError, ThetaDetError
from .fibration import cover_from_json, cover_to_json, theorem_c_coefficient, two_chart_cover, verify_torsion
from .jsonio import (
    characteristic_from_json,
    dumps,
    matrix_from_json,
    parse_complex,
    polarization_from_json,
    vector_from_json,
)
from .symplectic import SymplecticElement, frac_matrix, from_gd, gamma_membership, int_matrix, random_gd, to_gd
from .theta import theta_char
from .transform import classify, dft_determinant, dft_determinant_tensor

EXIT_OK, EXIT_INPUT, EXIT_IDENTITY = 0, 1, 2
SUBCOMMANDS = ("theta", "classify", "dft", "torsion", "coeff", "selftest")
DEFAULT_SEED = 20240521
THETA_EPS = 1e-15


@dataclass
class CommandRequest:
    """A subcommand with its parameters; parameters are JSON values."""

    subcommand: str
    params: dict[str, Any] = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand!r}")

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, "params": dict(sorted(self.params.items())), "out": self.out}

    @classmethod
    def from_json(cls, doc: dict) -> "CommandRequest":
        if not isinstance(doc, dict) or "subcommand" not in doc:
            raise InputError("request must be an object with a 'subcommand' field")
        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise InputError("'params' must be an object")
        return cls(str(doc["subcommand"]), dict(params), doc.get("out"))


# ----------------------------------------------------------------------------
# argument parsing


def _load_json_arg(text: str) -> Any:
    """Inline JSON or ``@path`` to a JSON file."""
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {text[1:]}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc


def _flag_value(text: str) -> Any:
    """JSON when it parses, otherwise the raw string (e.g. ``2i`` or ``1/2,0``)."""
    if text.startswith("@"):
        return _load_json_arg(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not identity failures."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="thetadet", description=__doc__.splitlines()[0])
    p.add_argument("--input", help="JSON request file (or inline JSON) instead of flags")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("--out", help="write the report here instead of stdout")
        if seed:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    sp = sub.add_parser("theta", help="evaluate a classical theta function")
    sp.add_argument("--D", required=True)
    sp.add_argument("--Z", required=True, help="period matrix: 'i', '2i', JSON, or @file.json")
    sp.add_argument("--c1")
    sp.add_argument("--c2")
    sp.add_argument("--v", default="0")
    # tight enough that all 15 printed digits are covered by the truncation bound
    sp.add_argument("--eps", type=float, default=THETA_EPS)
    common(sp, seed=False)

    sp = sub.add_parser("classify", help="extract det C_M and check its root-of-unity order")
    sp.add_argument("--D", required=True)
    sp.add_argument("--Z", required=True)
    sp.add_argument("--c1")
    sp.add_argument("--c2")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--M", help="rational 2g x 2g matrix in G_D (entries may be 'p/q')")
    g.add_argument("--R", help="integer 2g x 2g matrix in Gamma_D")
    sp.add_argument("--mode", default="symmetric", choices=["symmetric", "totally_symmetric"])
    sp.add_argument("--eps", type=float, default=1e-10)
    common(sp)

    sp = sub.add_parser("dft", help="determinant of the finite Fourier matrix of Z_D")
    sp.add_argument("--D", required=True)
    common(sp, seed=False)

    sp = sub.add_parser("torsion", help="verify a torsion relation on a cover")
    sp.add_argument("--cover", help="cover JSON or @file.json; a random two-chart cover otherwise")
    sp.add_argument("--D")
    sp.add_argument("--c1")
    sp.add_argument("--c2")
    sp.add_argument("--mode", default="A", choices=["A", "A-exceptional", "B", "B-exceptional"])
    sp.add_argument("--samples", type=int, default=5)
    sp.add_argument("--eps", type=float, default=1e-10)
    common(sp)

    sp = sub.add_parser("coeff", help="closing coefficient a(n)")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    common(sp, seed=False)

    sp = sub.add_parser("selftest", help="run the acceptance suite")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    common(sp)
    return p


def request_from_args(args: argparse.Namespace) -> CommandRequest:
    skip = {"subcommand", "out", "input"}
    params = {}
    for k, v in vars(args).items():
        if k in skip or v is None:
            continue
        params[k] = _flag_value(v) if isinstance(v, str) and k not in ("mode",) else v
    return CommandRequest(args.subcommand, params, args.out)


# ----------------------------------------------------------------------------
# parameter decoding


def _period(value, D) -> np.ndarray:
    g = D.g
    if isinstance(value, str):
        z = parse_complex(value)
        return z * np.eye(g)
    if isinstance(value, (int, float)) or (isinstance(value, list) and len(value) == 2 and not isinstance(value[0], list)):
        if g == 1:
            return matrix_from_json(value, 1)
    return matrix_from_json(value, g)


def _rational_list(value, g: int) -> list:
    if value is None:
        return [0] * g
    if isinstance(value, (int, float)):
        value = [value]
    if isinstance(value, str):
        value = [x for x in value.split(",") if x.strip()]
    if not isinstance(value, list) or len(value) != g:
        raise InputError(f"expected {g} characteristic entries, got {value!r}")
    return value


def _characteristic(params: dict, g: int) -> Characteristic:
    return characteristic_from_json(
        {"c1": _rational_list(params.get("c1"), g), "c2": _rational_list(params.get("c2"), g)}, g
    )


def _vector(value, g: int) -> np.ndarray:
    if isinstance(value, str):
        parts = [x for x in value.split(",") if x.strip()]
        if len(parts) == 1 and g > 1:
            parts = parts * g
        return np.array([parse_complex(x) for x in parts]) if len(parts) == g else vector_from_json(parts, g)
    if isinstance(value, (int, float)):
        return np.full(g, complex(value))
    return vector_from_json(value, g)


def _element(params: dict, D):
    if params.get("R") is not None:
        return to_gd(gamma_membership(int_matrix(_matrix_arg(params["R"])), D))
    if params.get("M") is not None:
        M = frac_matrix(_matrix_arg(params["M"]))
        g = D.g
        if M.shape != (2 * g, 2 * g):
            raise InputError(f"M must be {2 * g} x {2 * g}")
        el = SymplecticElement(M[:g, :g], M[:g, g:], M[g:, :g], M[g:, g:], D)
        from_gd(el)  # validates membership in G_D
        return el
    raise InputError("classify needs --M or --R")


def _matrix_arg(value):
    if isinstance(value, str):
        value = _load_json_arg(value)
    if not isinstance(value, list):
        raise InputError("matrix must be a JSON list of rows")
    return [[Fraction(x) if isinstance(x, str) else x for x in row] for row in value]


# ----------------------------------------------------------------------------
# subcommands


def cmd_theta(p: dict) -> tuple[int, dict]:
    D = polarization_from_json(p["D"])
    Z = validate_period_matrix(_period(p["Z"], D), D)
    c = _characteristic(p, D.g)
    v = _vector(p.get("v", 0), D.g)
    val = theta_char(c, v, Z, float(p.get("eps", THETA_EPS)))
    return EXIT_OK, {
        "value": complex(val),
        "radius": val.radius,
        "error_bound": val.error_bound,
        "npoints": val.npoints,
    }


def cmd_classify(p: dict) -> tuple[int, dict]:
    D = polarization_from_json(p["D"])
    Z = validate_period_matrix(_period(p["Z"], D), D)
    c = _characteristic(p, D.g)
    M = _element(p, D)
    rng = np.random.default_rng(int(p.get("seed", DEFAULT_SEED)))
    try:
        res = classify(M, Z, c, p.get("mode", "symmetric"), eps=float(p.get("eps", 1e-10)), rng=rng)
    except ClassificationError as exc:
        return EXIT_IDENTITY, {"passed": False, "detCM": exc.det, "order": exc.order, "message": str(exc)}
    return EXIT_OK, {"passed": True, **res.to_json()}


def cmd_dft(p: dict) -> tuple[int, dict]:
    D = polarization_from_json(p["D"])
    res = dft_determinant(D)
    oracle = dft_determinant_tensor(D)
    return EXIT_OK, {
        "det": res.det,
        "zeta4": res.zeta4,
        "log_abs_det": res.log_abs,
        "tensor_oracle": oracle,
    }


def cmd_torsion(p: dict) -> tuple[int, dict]:
    rng = np.random.default_rng(int(p.get("seed", DEFAULT_SEED)))
    if p.get("cover") is not None:
        doc = p["cover"]
        cover = cover_from_json(_load_json_arg(doc) if isinstance(doc, str) else doc)
    else:
        if p.get("D") is None:
            raise InputError("torsion needs --cover or --D")
        D = polarization_from_json(p["D"])
        M = random_gd(rng, D)
        c = _characteristic(p, D.g)
        cover = two_chart_cover(M, random_siegel(rng, D.g), random_siegel(rng, D.g), int(p.get("samples", 5)), c)
    rep = verify_torsion(cover, p.get("mode", "A"), eps=float(p.get("eps", 1e-10)), rng=rng)
    return (EXIT_OK if rep.passed else EXIT_IDENTITY), {"cover": cover_to_json(cover), **rep.to_json()}


def cmd_coeff(p: dict) -> tuple[int, dict]:
    g, n = int(p["g"]), int(p["n"])
    return EXIT_OK, {"g": g, "n": n, "a_n": str(theorem_c_coefficient(g, n))}


def cmd_selftest(p: dict) -> tuple[int, dict]:
    only = p.get("only")
    if isinstance(only, (int, str)):
        only = [int(x) for x in str(only).split(",") if x.strip()]
    for n in only or []:
        if n not in acceptance.CRITERIA:
            raise InputError(f"no acceptance criterion {n}")
    results = acceptance.run_all(int(p.get("seed", DEFAULT_SEED)), only, echo=lambda s: print(s, file=sys.stderr))
    ok = all(r.passed for r in results)
    return (EXIT_OK if ok else EXIT_IDENTITY), {"passed": ok, "criteria": [r.to_json() for r in results]}


HANDLERS = {
    "theta": cmd_theta,
    "classify": cmd_classify,
    "dft": cmd_dft,
    "torsion": cmd_torsion,
    "coeff": cmd_coeff,
    "selftest": cmd_selftest,
}


def run(request: CommandRequest) -> tuple[int, dict]:
    """Execute a request; never raises for package errors."""
    try:
        status, body = HANDLERS[request.subcommand](request.params)
        report = {"status": "ok" if status == EXIT_OK else "identity_failure", **body}
    except KeyError as exc:
        status, report = EXIT_INPUT, {"status": "input_error", "error": f"missing parameter {exc}"}
    except IdentityViolation as exc:
        status, report = EXIT_IDENTITY, {"status": "identity_failure", "error": str(exc)}
    except (InputError, ThetaDetError, ValueError) as exc:
        status, report = EXIT_INPUT, {"status": "input_error", "error": f"{type(exc).__name__}: {exc}"}
    report["request"] = request.to_json()
    return status, report


def emit(report: dict, out: str | None):
    text = dumps(report)
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.input is not None:
            src = "@" + args.input if Path(args.input).is_file() else args.input
            request = CommandRequest.from_json(_load_json_arg(src))
        elif args.subcommand is None:
            parser.print_usage(sys.stderr)
            emit({"status": "input_error", "error": "no subcommand given"}, None)
            return EXIT_INPUT
        else:
            request = request_from_args(args)
    except InputError as exc:
        emit({"status": "input_error", "error": str(exc)}, None)
        return EXIT_INPUT
    status, report = run(request)
    emit(report, request.out)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
