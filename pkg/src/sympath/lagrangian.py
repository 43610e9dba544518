"""Lagrangian-Grassmannian index machinery.

Triple signatures, pair intersection numbers and Leray indices for paths of
Lagrangian frames, over an arbitrary nondegenerate skew form (the doubled
space of graphs uses diag(J, -J)). This is the independent route to the
Maslov-type index: i_1(gamma) = [M : gamma(t) L] + s(Delta, L x M,
graph(gamma(tau))) / 2.

Frames are 2N x N matrices whose columns span the subspace; all comparisons
go through orthonormalized copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sympath import spcore
from sympath.paths import SymplecticPath
from sympath.policy import (DEFAULT_POLICY, NumericPolicy, RefinementError,
                            ValidationError)

MAX_FRAME_RETRIES = 64
ANGLE_CONTRACT = 0.2
_TRANSVERSAL_MARGIN = 1e-6


def vertical_frame(n: int) -> np.ndarray:
    F = np.zeros((2 * n, n))
    F[n:, :] = np.eye(n)
    return F


def horizontal_frame(n: int) -> np.ndarray:
    F = np.zeros((2 * n, n))
    F[:n, :] = np.eye(n)
    return F


def orthonormal(F: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(F)
    return q


def validate_frame(F: np.ndarray, form: np.ndarray | None = None,
                   policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Check full rank and isotropy of a Lagrangian frame."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != 2 * F.shape[1]:
        raise ValidationError(f"frame must be 2N x N, got {F.shape}")
    sv = np.linalg.svd(F, compute_uv=False)
    if sv[-1] <= 1e-8 * sv[0]:
        raise ValidationError("frame is rank deficient")
    K = standard_form(F.shape[1]) if form is None else form
    Q = orthonormal(F)
    res = np.max(np.abs(Q.T @ K @ Q))
    if res > 1e-10:
        raise ValidationError(f"frame is not isotropic (residual {res:.2e})")
    return F


def standard_form(n: int) -> np.ndarray:
    return spcore.standard_J(n)


def doubled_form(n: int) -> np.ndarray:
    """The form pr1* omega - pr2* omega on R^{2n} x R^{2n}."""
    K = np.zeros((4 * n, 4 * n))
    K[:2 * n, :2 * n] = spcore.standard_J(n)
    K[2 * n:, 2 * n:] = -spcore.standard_J(n)
    return K


def principal_angle(F1: np.ndarray, F2: np.ndarray) -> float:
    """Largest principal angle between the column spans."""
    s = np.linalg.svd(orthonormal(F1).T @ orthonormal(F2), compute_uv=False)
    return float(np.arccos(np.clip(s[-1], -1.0, 1.0)))


def intersection_dimension(F1: np.ndarray, F2: np.ndarray, tol: float = 1e-8) -> int:
    """dim(span F1 intersect span F2); also the stratum label of the pair."""
    A = np.column_stack([orthonormal(F1), orthonormal(F2)])
    sv = np.linalg.svd(A, compute_uv=False)
    N = F1.shape[1]
    rank = int(np.sum(sv > tol * sv[0]))
    return 2 * N - rank


# ---------------------------------------------------------------------------
# triple signature


def triple_signature(F1: np.ndarray, F2: np.ndarray, F3: np.ndarray,
                     form: np.ndarray | None = None,
                     policy: NumericPolicy = DEFAULT_POLICY) -> int:
    """Signature of the quadratic form
    Q(x1, x2, x3) = omega(x1, x2) + omega(x2, x3) + omega(x3, x1)
    on the direct sum of the three frames; near-zero eigenvalues excluded.
    """
    N = F1.shape[1]
    K = standard_form(N) if form is None else form
    Q1, Q2, Q3 = orthonormal(F1), orthonormal(F2), orthonormal(F3)

    def pairing(A, B):
        # omega(a, b) = a . (K b) on columns; this orientation makes the
        # index identities hold with the signs the axioms demand
        return A.T @ (K @ B)

    G = np.zeros((3 * N, 3 * N))
    G[:N, N:2 * N] = pairing(Q1, Q2)
    G[N:2 * N, 2 * N:] = pairing(Q2, Q3)
    G[2 * N:, :N] = pairing(Q3, Q1)
    G = (G + G.T) / 2.0
    w = np.linalg.eigvalsh(G)
    # frames are orthonormalized, so genuine eigenvalues are O(1) against
    # the form scale; the absolute floor keeps an identically-zero Gram clean
    thr = max(1e-8 * np.max(np.abs(w), initial=0.0), 1e-12 * np.linalg.norm(K, 2))
    pos = int(np.sum(w > thr))
    neg = int(np.sum(w < -thr))
    return pos - neg


# ---------------------------------------------------------------------------
# Lagrangian paths and the pair intersection number


@dataclass(frozen=True)
class LagrangianPath:
    """Sampled path in the Lagrangian Grassmannian of (R^{2N}, form)."""
    times: np.ndarray
    frames: np.ndarray          # (k, 2N, N)
    form: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if self.form is None:
            object.__setattr__(self, "form", standard_form(self.frames.shape[2]))

    @property
    def n(self):
        return self.frames.shape[2]

    def check_contract(self):
        for a, b in zip(self.frames[:-1], self.frames[1:]):
            if principal_angle(a, b) > ANGLE_CONTRACT:
                raise RefinementError(
                    "consecutive Lagrangian frames exceed the 0.2 rad contract")
        return self


def constant_path(F: np.ndarray, times: np.ndarray,
                  form: np.ndarray | None = None) -> LagrangianPath:
    F = np.asarray(F, dtype=float)
    return LagrangianPath(np.asarray(times, dtype=float),
                          np.repeat(F[None, :, :], len(times), axis=0), form)


def image_path(path: SymplecticPath, F: np.ndarray) -> LagrangianPath:
    """t -> gamma(t) . span(F) in the standard symplectic space."""
    sp = path
    while True:
        frames = np.array([M @ F for M in sp.mats])
        lp = LagrangianPath(sp.times, frames)
        try:
            return lp.check_contract()
        except RefinementError:
            sp = sp.refine(2)


def graph_frame(M: np.ndarray) -> np.ndarray:
    """Frame of the graph {(Mx, x)} in the doubled space."""
    M = np.asarray(M, dtype=float)
    return np.vstack([M, np.eye(M.shape[0])])


def diagonal_frame(d: int) -> np.ndarray:
    return np.vstack([np.eye(d), np.eye(d)])


def product_frame(FL: np.ndarray, FM: np.ndarray) -> np.ndarray:
    """Frame of L x M inside the doubled space."""
    top = np.hstack([FL, np.zeros_like(FM)])
    bottom = np.hstack([np.zeros_like(FL), FM])
    return np.vstack([top, bottom])


def graph_path(path: SymplecticPath) -> LagrangianPath:
    sp = path
    while True:
        frames = np.array([graph_frame(M) for M in sp.mats])
        lp = LagrangianPath(sp.times, frames, form=doubled_form(sp.n))
        try:
            return lp.check_contract()
        except RefinementError:
            sp = sp.refine(2)


def graph_lagrangian(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Validated graph frame of a symplectic matrix in the doubled space."""
    M = spcore.validate_symplectic(M, policy)
    F = graph_frame(M)
    return validate_frame(F, form=doubled_form(spcore.half_dim(M)), policy=policy)


def darboux_basis(K: np.ndarray) -> np.ndarray:
    """Columns (q's then p's) with C^T K C = standard J (up to sign fixes)."""
    d = K.shape[0]
    from sympath.completion import _symplectic_gram_schmidt
    cols = _symplectic_gram_schmidt(np.eye(d), K)
    qs = cols[:, 0::2]
    ps = cols[:, 1::2]
    C = np.column_stack([qs, ps])
    res = C.T @ K @ C - spcore.standard_J(d // 2)
    if np.max(np.abs(res)) > 1e-8:
        raise ValidationError("failed to build a Darboux basis for the form")
    return C


def random_lagrangian(N: int, rng: np.random.Generator,
                      form: np.ndarray | None = None,
                      darboux: np.ndarray | None = None) -> np.ndarray:
    """Haar-ish random Lagrangian frame for the given form."""
    U = spcore.random_orthosymplectic(N, rng)
    F = U @ vertical_frame(N)
    if form is None:
        return F
    C = darboux_basis(form) if darboux is None else darboux
    return C @ F


def _margin(Fref: np.ndarray, F: np.ndarray) -> float:
    A = np.column_stack([orthonormal(Fref), orthonormal(F)])
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def pair_intersection_number(p1: LagrangianPath, p2: LagrangianPath,
                             policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """The half-integer intersection number [L1 : L2].

    A partition and per-interval auxiliary frames are chosen greedily
    (seeded draws); the result is half the telescoping sum of
    triple-signature differences. An auxiliary frame is accepted over an
    interval only when its transversality margin at every sample exceeds a
    multiple of the local subspace motion, which rules out crossings hiding
    between samples.
    """
    if len(p1.times) != len(p2.times) or np.max(np.abs(p1.times - p2.times)) > 1e-12:
        raise ValidationError("paths must share their sample times")
    K = p1.form
    if np.max(np.abs(K - p2.form)) > 0:
        raise ValidationError("paths must live in the same symplectic space")
    C = darboux_basis(K)
    rng = np.random.default_rng(policy.seed + 101)
    k = len(p1.times)
    # per-interval subspace motion: the margin an auxiliary frame must beat
    steps = np.zeros(k)
    for i in range(k - 1):
        steps[i] = max(principal_angle(p1.frames[i], p1.frames[i + 1]),
                       principal_angle(p2.frames[i], p2.frames[i + 1]))
    need = 2.5 * steps + 1e-9

    total = 0
    i = 0
    while i < k - 1:
        best_j, best_frame = i, None
        for _ in range(MAX_FRAME_RETRIES):
            Faux = random_lagrangian(p1.n, rng, form=K, darboux=C)
            if min(_margin(Faux, p1.frames[i]), _margin(Faux, p2.frames[i])) < need[i]:
                continue
            j = i
            while j + 1 < k:
                req = max(need[j], need[min(j + 1, k - 2)])
                if min(_margin(Faux, p1.frames[j + 1]),
                       _margin(Faux, p2.frames[j + 1])) < req:
                    break
                j += 1
            if j > best_j:
                best_j, best_frame = j, Faux
            if j >= k - 1:
                break
        if best_frame is None:
            raise RefinementError(
                f"no transversal auxiliary frame found after {MAX_FRAME_RETRIES} draws "
                f"at t = {p1.times[i]!r}")
        total += triple_signature(p1.frames[i], p2.frames[i], best_frame, form=K)
        total -= triple_signature(p1.frames[best_j], p2.frames[best_j], best_frame, form=K)
        i = best_j
    return total / 2.0


def leray_index(path: LagrangianPath, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """nu(u1, u2) = [L(t) : L(b)] for the covering points represented by the
    path (base lift at t = a, target lift at t = b)."""
    const = constant_path(path.frames[-1], path.times, form=path.form)
    return pair_intersection_number(path, const, policy)


def reverse_path(path: LagrangianPath) -> LagrangianPath:
    return LagrangianPath(path.times[-1] - path.times[::-1], path.frames[::-1].copy(),
                          form=path.form)


def concat_paths(p1: LagrangianPath, p2: LagrangianPath) -> LagrangianPath:
    """Concatenation (p2 follows p1; frames must match at the junction)."""
    if principal_angle(p1.frames[-1], p2.frames[0]) > 1e-8:
        raise ValidationError("paths do not match at the junction")
    times = np.concatenate([p1.times, p1.times[-1] + p2.times[1:] - p2.times[0]])
    frames = np.concatenate([p1.frames, p2.frames[1:]])
    return LagrangianPath(times, frames, form=p1.form)


def cz_from_lagrangian(path: SymplecticPath, L: np.ndarray | None = None,
                       M: np.ndarray | None = None,
                       policy: NumericPolicy = DEFAULT_POLICY) -> int:
    """Maslov-type index through the Lagrangian route:
    [M : gamma(t) L] + s(Delta, L x M, graph(gamma(tau))) / 2.

    The intersection number weights a degenerate final crossing
    symmetrically, while the Maslov-type index takes the lower (clockwise
    perturbation) value; the difference is nu_1 / 2, subtracted here so the
    result matches the index convention for every endpoint. On nondegenerate
    endpoints the shift vanishes and this is the displayed identity
    verbatim.
    """
    n = path.n
    FL = vertical_frame(n) if L is None else np.asarray(L, dtype=float)
    FM = vertical_frame(n) if M is None else np.asarray(M, dtype=float)
    moving = image_path(path, FL)
    const = constant_path(FM, moving.times)
    term1 = pair_intersection_number(const, moving, policy)
    K2 = doubled_form(n)
    term2 = 0.5 * triple_signature(diagonal_frame(2 * n), product_frame(FL, FM),
                                   graph_frame(path.endpoint), form=K2)
    nu = spcore.nullity(path.endpoint, 1.0, policy)
    value = term1 + term2 - nu / 2.0
    result = int(np.rint(value))
    if abs(value - result) > 1e-9:
        raise ValidationError(f"Lagrangian index {value!r} is not an integer")
    return result
