"""File formats: matrices and spectra as CSV, paths / policies / results as
JSON. Floats are written with shortest round-trip precision so emitted files
re-ingest to bitwise-identical values."""

from __future__ import annotations

import json

import numpy as np

from sympath.linham import SturmData
from sympath.paths import (CoefficientGenerator, DiagonalGenerator,
                           RotationGenerator, SymplecticPath, make_path)
from sympath.policy import DEFAULT_POLICY, NumericPolicy, ValidationError
from sympath.selberg import LengthSpectrum


def _fmt(x: float) -> str:
    return repr(float(x))


def matrix_to_csv(M: np.ndarray) -> str:
    return "\n".join(",".join(_fmt(v) for v in row) for row in np.asarray(M)) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.strip().splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise ValidationError(f"matrix CSV parse error at line {lineno}: {exc}") from exc
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValidationError("matrix CSV must be rectangular and nonempty")
    return np.array(rows)


def matrix_to_json(M: np.ndarray) -> str:
    return json.dumps([[float(v) for v in row] for row in np.asarray(M)])


def matrix_from_json(text: str) -> np.ndarray:
    data = json.loads(text)
    return np.array(data, dtype=float)


def values_to_csv(rows, header: tuple | None = None) -> str:
    out = []
    if header:
        out.append(",".join(header))
    for row in rows:
        out.append(",".join(_fmt(v) for v in np.atleast_1d(row)))
    return "\n".join(out) + "\n"


def spectrum_from_csv(text: str):
    """value[, multiplicity] per line; returns list of (value, multiplicity)."""
    entries = []
    for lineno, line in enumerate(text.strip().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line[0].isalpha():
            continue
        parts = [p for p in line.split(",") if p.strip()]
        try:
            value = float(parts[0])
            mult = int(parts[1]) if len(parts) > 1 else 1
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"spectrum CSV parse error at line {lineno}: {exc}") from exc
        entries.append((value, mult))
    return entries


def length_spectrum_from_csv(text: str, area: float) -> LengthSpectrum:
    return LengthSpectrum(tuple(spectrum_from_csv(text)), area)


def density_to_csv(density) -> str:
    rows = zip(density.energies, density.values)
    return values_to_csv(rows, header=("energy", "density"))


def policy_to_json(policy: NumericPolicy) -> str:
    return json.dumps({"tol_sym": policy.tol_sym, "tol_rank": policy.tol_rank,
                       "tol_det": policy.tol_det, "tol_cluster": policy.tol_cluster,
                       "seed": policy.seed}, indent=2)


def policy_from_json(text: str) -> NumericPolicy:
    data = json.loads(text)
    return NumericPolicy(**data)


# ---------------------------------------------------------------------------
# path specifications


def path_to_json(path: SymplecticPath) -> str:
    return json.dumps({
        "n": path.n, "tau": path.tau,
        "generator": {"type": "samples",
                      "times": [float(t) for t in path.times],
                      "mats": [[[float(v) for v in row] for row in M] for M in path.mats]},
    })


def path_from_spec(data, samples: int = 257,
                   policy: NumericPolicy = DEFAULT_POLICY) -> SymplecticPath:
    """Build a path from a specification dict:
    {"n": int, "tau": float, "generator": {"type": ..., ...}}.

    Generator types: rotation (theta), diagonal (lam_end), coefficient
    (const plus optional cos/sin mode lists), samples (times + mats inline).
    """
    if isinstance(data, str):
        data = json.loads(data)
    try:
        n = int(data["n"])
        tau = float(data["tau"])
        gen = data["generator"]
        kind = gen["type"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed path spec: {exc}") from exc
    if kind == "rotation":
        g = RotationGenerator(float(gen["theta"]), tau, n)
    elif kind == "diagonal":
        g = DiagonalGenerator(float(gen["lam_end"]), tau, n)
    elif kind == "coefficient":
        g = CoefficientGenerator(
            n=n, tau=tau, const=np.array(gen["const"], dtype=float),
            cos_terms=tuple(np.array(c, dtype=float) for c in gen.get("cos", [])),
            sin_terms=tuple(np.array(s, dtype=float) for s in gen.get("sin", [])))
    elif kind == "samples":
        times = np.array(gen["times"], dtype=float)
        mats = np.array(gen["mats"], dtype=float)
        return make_path(n, tau, times, mats, None, policy)
    else:
        raise ValidationError(f"unknown generator type {kind!r}")
    ts = np.linspace(0.0, tau, samples)
    return make_path(n, tau, ts, g.sample(ts), g, policy)


def sturm_from_spec(data) -> SturmData:
    """{"n", "tau", "P": matrix, "Q": matrix, "R": matrix} (constant blocks)."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        n = int(data["n"])
        tau = float(data["tau"])
        P = np.array(data["P"], dtype=float)
        Q = np.array(data.get("Q", np.zeros((n, n))), dtype=float)
        R = np.array(data["R"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed Sturm spec: {exc}") from exc
    return SturmData(n, P, Q, R, tau).validate()


def parse_complex_pair(text: str) -> complex:
    """CLI scalar 're,im'; unit-circle inputs are renormalized (a deviation
    above 1e-8 earns a warning from the caller)."""
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as exc:
        raise ValidationError(f"expected 're,im', got {text!r}") from exc
