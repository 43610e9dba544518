"""Splitting numbers, ultimate types, basic-normal-form recognition and the
precise iteration formula.

Splitting numbers are computed from their definition: one-sided jumps of the
omega-index of any path ending at M. The basic-normal-form route (Krein type
for nontrivial forms, (0,0) for trivial ones) provides the independent
second leg for the table tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sympath import spcore
from sympath.index import omega_index
from sympath.paths import polar_path
from sympath.policy import DEFAULT_POLICY, GapError, NumericPolicy, ValidationError


@dataclass(frozen=True)
class SplittingNumbers:
    omega: complex
    s_plus: int
    s_minus: int

    def pair(self):
        return self.s_plus, self.s_minus


@dataclass(frozen=True)
class BasicNormalForm:
    """One factor of a diamond decomposition into basic normal forms."""
    kind: str                 # 'D', 'N1', 'R', 'N2'
    parameters: tuple
    trivial: bool

    def matrix(self) -> np.ndarray:
        if self.kind == "D":
            return spcore.Dmat(self.parameters[0])
        if self.kind == "N1":
            return spcore.N1mat(*self.parameters)
        if self.kind == "R":
            return spcore.Rmat(self.parameters[0])
        theta, b = self.parameters[0], np.array(self.parameters[1])
        return spcore.N2mat(theta, b)


def _angular_gap(M: np.ndarray, omega: complex, policy: NumericPolicy) -> float:
    """Half the angular distance from omega to the nearest other unit-circle
    eigenvalue of M (2 pi when the circle spectrum is empty or only omega)."""
    target = np.angle(omega)
    gaps = []
    for lam, _, _ in spcore.unit_circle_eigenvalues(M, policy):
        d = np.angle(lam * np.conj(omega))
        if abs(d) > policy.tol_cluster:
            gaps.append(abs(d))
    return min(gaps) if gaps else 2.0 * np.pi


def splitting_numbers(M: np.ndarray, omega: complex,
                      policy: NumericPolicy = DEFAULT_POLICY,
                      path=None) -> SplittingNumbers:
    """S_M^{+-}(omega) = i at omega e^{+- i eps} minus i at omega, along any
    path ending at M (default: polar interpolation from the identity)."""
    M = spcore.validate_symplectic(M, policy)
    omega = complex(omega)
    omega = omega / abs(omega)
    gamma = polar_path(M) if path is None else path
    gap = _angular_gap(M, omega, policy)
    eps = min(1e-3, gap / 2.0)
    if eps < 1e-10:
        raise GapError(f"angular gap {gap:.2e} too small for splitting epsilon",
                       suggested_eps=gap / 4.0)
    base = omega_index(gamma, omega, policy).index
    up = omega_index(gamma, omega * np.exp(1j * eps), policy).index
    down = omega_index(gamma, omega * np.exp(-1j * eps), policy).index
    return SplittingNumbers(omega, up - base, down - base)


# ---------------------------------------------------------------------------
# basic normal forms: recognition, triviality, ultimate type


def _is_trivial(kind: str, parameters: tuple) -> bool:
    """Triviality per the basic-normal-form classification: the form stays
    eigenvalue-free on the unit circle under the clockwise untwisting."""
    if kind == "D":
        return True
    if kind == "N1":
        lam, b = parameters
        return (lam, b) in ((1.0, -1.0), (-1.0, 1.0))
    if kind == "R":
        return False
    theta, b = parameters
    b = np.asarray(b)
    return (b[0, 1] - b[1, 0]) * np.sin(theta) > 0


def recognize_2x2(B: np.ndarray) -> BasicNormalForm | None:
    tol = 1e-8
    if abs(B[0, 1]) < tol and abs(B[1, 0]) < tol and abs(B[0, 0] * B[1, 1] - 1.0) < tol:
        return BasicNormalForm("D", (float(B[0, 0]),), True)
    c, s = B[0, 0], B[1, 0]
    if abs(c - B[1, 1]) < tol and abs(s + B[0, 1]) < tol and abs(c * c + s * s - 1.0) < tol \
            and abs(s) > tol:
        theta = float(np.arctan2(s, c)) % (2 * np.pi)
        return BasicNormalForm("R", (theta,), False)
    for lam in (1.0, -1.0):
        for b in (1.0, -1.0, 0.0):
            if np.max(np.abs(B - spcore.N1mat(lam, b))) < tol:
                return BasicNormalForm("N1", (lam, b), _is_trivial("N1", (lam, b)))
    return None


def recognize_4x4(B: np.ndarray) -> BasicNormalForm | None:
    tol = 1e-8
    R = B[:2, :2]
    if np.max(np.abs(B[2:, :2])) > tol or np.max(np.abs(B[2:, 2:] - R)) > tol:
        return None
    c, s = R[0, 0], R[1, 0]
    if abs(c - R[1, 1]) > tol or abs(s + R[0, 1]) > tol or abs(c * c + s * s - 1.0) > tol:
        return None
    if abs(s) < tol:
        return None
    b = B[:2, 2:]
    if abs(b[0, 1] - b[1, 0]) < tol:
        return None  # N2 requires b2 != b3
    theta = float(np.arctan2(s, c)) % (2 * np.pi)
    return BasicNormalForm("N2", (theta, b.copy()), _is_trivial("N2", (theta, b)))


def recognize_normal_form(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY):
    """Exact recognition of M as a diamond product of basic normal forms.

    Returns (factors, m0_factors) where m0_factors collects the D(+-2)
    blocks, or None when M is not entrywise such a product. Recognition
    only; no homotopy to the normal form is constructed.
    """
    M = spcore.validate_symplectic(M, policy)
    n = spcore.half_dim(M)
    from sympath.completion import _diamond_components, _slot_rows
    comps = _diamond_components(M, tol=1e-12)
    if comps is None:
        comps = [list(range(n))]
    factors, m0 = [], []
    for comp in comps:
        rows = _slot_rows(comp, n)
        B = M[np.ix_(rows, rows)]
        if len(comp) == 1:
            f = recognize_2x2(B)
        elif len(comp) == 2:
            f = recognize_4x4(B)
        else:
            f = None
        if f is None:
            return None
        if f.kind == "D" and abs(abs(f.parameters[0]) - 2.0) < 1e-8:
            m0.append(f)
        else:
            factors.append(f)
    return factors, m0


def krein_type_of(M: np.ndarray, omega: complex,
                  policy: NumericPolicy = DEFAULT_POLICY):
    """Krein type (p, q) of omega as an eigenvalue of M; (0, 0) off-spectrum."""
    for entry in spcore.krein_types(M, policy):
        if abs(entry.value - omega) < 1e-6:
            return entry.krein_type
    return (0, 0)


@dataclass(frozen=True)
class UltimateType:
    omega: complex
    p: int
    q: int
    route: str   # 'normal-form' or 'splitting'

    def pair(self):
        return self.p, self.q


def ultimate_type(M: np.ndarray, omega: complex,
                  policy: NumericPolicy = DEFAULT_POLICY) -> UltimateType:
    """Ultimate type of omega for M.

    Recognized diamond products of basic normal forms sum per-factor types
    (Krein type if the factor is nontrivial, (0,0) if trivial); any other M
    goes through the splitting-number characterization, flagged by `route`.
    """
    M = spcore.validate_symplectic(M, policy)
    omega = complex(omega)
    omega = omega / abs(omega)
    rec = recognize_normal_form(M, policy)
    if rec is not None:
        factors, m0 = rec
        p = q = 0
        for f in factors:
            if f.trivial:
                continue
            B = f.matrix()
            if spcore.nullity(B, omega, policy) == 0:
                continue
            tp = krein_type_of(B, omega, policy)
            p, q = p + tp[0], q + tp[1]
        return UltimateType(omega, p, q, "normal-form")
    s = splitting_numbers(M, omega, policy)
    return UltimateType(omega, s.s_plus, s.s_minus, "splitting")


# ---------------------------------------------------------------------------
# homotopy invariants and the precise iteration formula


def homotopy_invariants(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY):
    """The data defining Omega(M): unit-circle spectrum with nullities,
    sorted by angle. Record equality is the membership test."""
    M = spcore.validate_symplectic(M, policy)
    out = []
    for lam, mult, _ in spcore.unit_circle_eigenvalues(M, policy):
        out.append((complex(lam), spcore.nullity(M, lam, policy)))
    return tuple(out)


def invariants_equal(a, b, tol: float = 1e-6) -> bool:
    if len(a) != len(b):
        return False
    return all(abs(la - lb) < tol and na == nb
               for (la, na), (lb, nb) in zip(a, b))


def precise_iteration_index(i1: int, M: np.ndarray, m: int,
                            policy: NumericPolicy = DEFAULT_POLICY) -> int:
    """i(gamma, m) from i(gamma, 1) and the splitting numbers of M:

        m (i1 + S^+(1) - C) + 2 sum_theta ceil(m theta / 2 pi) S^-(e^{i theta})
          - (S^+(1) + C),

    with C = sum over theta in (0, 2 pi) of S^-(e^{i theta}); the bracket is
    the least integer >= its argument. Only eigenvalue angles contribute.
    """
    if m < 1:
        raise ValidationError("iteration count must be >= 1")
    M = spcore.validate_symplectic(M, policy)
    gamma = polar_path(M)
    s_plus_1 = splitting_numbers(M, 1.0, policy, path=gamma).s_plus
    angle_terms = 0
    C = 0
    for lam, _, _ in spcore.unit_circle_eigenvalues(M, policy):
        theta = float(np.angle(lam)) % (2.0 * np.pi)
        if theta < policy.tol_cluster or theta > 2.0 * np.pi - policy.tol_cluster:
            continue
        s_minus = splitting_numbers(M, lam, policy, path=gamma).s_minus
        C += s_minus
        angle_terms += math.ceil(m * theta / (2.0 * np.pi)) * s_minus
    return m * (i1 + s_plus_1 - C) + 2 * angle_terms - (s_plus_1 + C)
