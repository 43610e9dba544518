"""Exact-tolerance symplectic linear algebra.

Symplectic matrices are plain real ndarrays of shape (2n, 2n) satisfying
``M.T @ J @ M = J`` for the standard block form J = [[0, -I], [I, 0]].
``validate_symplectic`` is the gate; the typed wrappers in this module
(UnitCircleEigenvalue, Sp2Coords) carry derived spectral data.

The symplectic form used throughout is omega(x, y) = (J x) . y, for which
omega(e_i, e_{n+i}) = +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from sympath.policy import DEFAULT_POLICY, ConditioningError, NumericPolicy, ValidationError


def standard_J(n: int) -> np.ndarray:
    """The 2n x 2n matrix [[0, -I], [I, 0]]."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def half_dim(M: np.ndarray) -> int:
    """Half-dimension n of a square even-dimensional matrix; raises otherwise."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2 != 0:
        raise ValidationError(f"odd dimension {M.shape[0]}: not a symplectic candidate")
    return M.shape[0] // 2


def symplectic_residual(M: np.ndarray) -> float:
    """Max-abs entry of M^T J M - J."""
    n = half_dim(M)
    J = standard_J(n)
    return float(np.max(np.abs(M.T @ J @ M - J)))


def check_symplectic(M: np.ndarray, tol: float = 1e-10) -> bool:
    if tol <= 0:
        raise ValidationError("tolerance must be positive")
    return symplectic_residual(np.asarray(M, dtype=float)) <= tol


def validate_symplectic(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Return M as a float array after checking the symplectic relation and det = +1."""
    M = np.asarray(M, dtype=float)
    res = symplectic_residual(M)
    if res > policy.tol_sym:
        raise ValidationError(f"symplecticity residual {res:.3e} exceeds {policy.tol_sym:.1e}")
    det = float(np.linalg.det(M))
    if abs(det - 1.0) > 1e-8:
        raise ValidationError(f"det(M) = {det!r} not within 1e-8 of +1")
    return M


def omega_form(x: np.ndarray, y: np.ndarray, J: np.ndarray) -> complex:
    """omega(x, y) = (J x) . y; complex arguments allowed (bilinear, no conjugation)."""
    return (J @ x) @ y


# ---------------------------------------------------------------------------
# diamond product and standard generators


def diamond(M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    """Block-interleaving product of symplectic matrices.

    For M1 of half-dimension i and M2 of half-dimension j the result has
    half-dimension i + j and acts as M1 on the (q_1..q_i, p_1..p_i) pairs
    and as M2 on the remaining pairs.
    """
    M1 = np.asarray(M1, dtype=float)
    M2 = np.asarray(M2, dtype=float)
    i, j = half_dim(M1), half_dim(M2)
    A1, B1, C1, D1 = M1[:i, :i], M1[:i, i:], M1[i:, :i], M1[i:, i:]
    A2, B2, C2, D2 = M2[:j, :j], M2[:j, j:], M2[j:, :j], M2[j:, j:]
    n = i + j
    out = np.zeros((2 * n, 2 * n))
    out[:i, :i] = A1
    out[:i, n:n + i] = B1
    out[n:n + i, :i] = C1
    out[n:n + i, n:n + i] = D1
    out[i:n, i:n] = A2
    out[i:n, n + i:] = B2
    out[n + i:, i:n] = C2
    out[n + i:, n + i:] = D2
    return out


def diamond_all(mats) -> np.ndarray:
    mats = list(mats)
    if not mats:
        raise ValidationError("diamond_all needs at least one factor")
    out = np.asarray(mats[0], dtype=float)
    for M in mats[1:]:
        out = diamond(out, M)
    return out


def diamond_power(M: np.ndarray, k: int) -> np.ndarray:
    return diamond_all([M] * k)


def Dmat(lam: float) -> np.ndarray:
    """D(lambda) = diag(lambda, 1/lambda)."""
    if lam == 0:
        raise ValidationError("D(lambda) needs lambda != 0")
    return np.array([[lam, 0.0], [0.0, 1.0 / lam]])


def Rmat(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def N1mat(lam: float, b: float) -> np.ndarray:
    """N1(lambda, b) = [[lambda, b], [0, lambda]] with lambda = +-1."""
    if lam not in (1.0, -1.0, 1, -1):
        raise ValidationError("N1 requires lambda = +-1")
    return np.array([[float(lam), float(b)], [0.0, float(lam)]])


def N2mat(theta: float, b: np.ndarray) -> np.ndarray:
    """N2(omega, b) = [[R(theta), b], [0, R(theta)]] in Sp(4).

    The 2x2 block b must make the result symplectic (b^T R(theta) symmetric);
    this is validated rather than repaired.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (2, 2):
        raise ValidationError("N2 block b must be 2x2")
    M = np.zeros((4, 4))
    R = Rmat(theta)
    M[:2, :2] = R
    M[:2, 2:] = b
    M[2:, 2:] = R
    validate_symplectic(M)
    return M


def n2_block(theta: float, b2: float, b3: float) -> np.ndarray:
    """A valid N2 off-diagonal block with prescribed b2, b3 entries.

    Symplecticity of N2 forces b^T R(theta) symmetric, one linear constraint;
    we solve it for b1 with b4 = 0.
    """
    s, c = np.sin(theta), np.cos(theta)
    if abs(s) < 1e-12:
        raise ValidationError("theta too close to 0 or pi for an N2 block")
    # (b^T R)_{12} = (b^T R)_{21}:  -b1 s + b3 c = b2 c + b4 s
    b4 = 0.0
    b1 = (b3 * c - b2 * c - b4 * s) / s
    return np.array([[b1, b2], [b3, b4]])


def Mplus(n: int) -> np.ndarray:
    """M_n^+ = D(2)^{diamond n}, base point of the plus component."""
    return diamond_power(Dmat(2.0), n)


def Mminus(n: int) -> np.ndarray:
    """M_n^- = D(-2) diamond D(2)^{diamond (n-1)}."""
    if n == 1:
        return Dmat(-2.0)
    return diamond(Dmat(-2.0), diamond_power(Dmat(2.0), n - 1))


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """exp(J S) for a random symmetric S: symplectic by construction."""
    S = rng.standard_normal((2 * n, 2 * n))
    S = scale * (S + S.T) / 2.0
    return scipy.linalg.expm(standard_J(n) @ S)


def random_orthosymplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal symplectic matrix from a Haar-ish random unitary."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return unitary_to_orthosymplectic(q)


# ---------------------------------------------------------------------------
# polar decomposition


def symmetric_sqrt(S: np.ndarray) -> np.ndarray:
    """Spectral square root of a symmetric positive-definite matrix."""
    w, V = np.linalg.eigh((S + S.T) / 2.0)
    if w.min() <= 0:
        raise ConditioningError("matrix not positive definite in symmetric_sqrt")
    return (V * np.sqrt(w)) @ V.T


def polar_unitary(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY):
    """Symplectic polar decomposition M = A U.

    Returns (A, U, u): A = (M M^T)^{1/2} symmetric positive definite and
    symplectic, U orthogonal symplectic, and u = u1 + i u2 the n x n unitary
    assembled from the blocks of U = [[u1, -u2], [u2, u1]].
    """
    M = validate_symplectic(M, policy)
    n = half_dim(M)
    A = symmetric_sqrt(M @ M.T)
    U = np.linalg.solve(A, M)
    u = U[:n, :n] + 1j * U[n:, :n]
    return A, U, u


def unitary_to_orthosymplectic(u: np.ndarray) -> np.ndarray:
    """Real 2n x 2n orthogonal symplectic matrix of the unitary u."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    U = np.zeros((2 * n, 2 * n))
    U[:n, :n] = u.real
    U[n:, :n] = u.imag
    U[:n, n:] = -u.imag
    U[n:, n:] = u.real
    return U


def det_u(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY) -> complex:
    """det of the unitary polar part, the S^1-valued rotation tracker."""
    _, _, u = polar_unitary(M, policy)
    d = np.linalg.det(u)
    return d / abs(d)


def polar_u_det(M: np.ndarray) -> complex:
    """det of the unitary polar factor without the symplecticity gate;
    fast path for winding measurements along constructed segments."""
    n = M.shape[0] // 2
    A = symmetric_sqrt(M @ M.T)
    U = np.linalg.solve(A, M)
    u = U[:n, :n] + 1j * U[n:, :n]
    d = np.linalg.det(u)
    return d / abs(d)


def unitary_interpolation(u: np.ndarray):
    """s -> exactly-unitary interpolation from I to u (Schur of a normal matrix)."""
    T, Z = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    angles = np.angle(np.diagonal(T))

    def at(s):
        return (Z * np.exp(1j * s * angles)) @ Z.conj().T
    return at


def symplectic_interpolation_to(P: np.ndarray):
    """s -> Q(s) symplectic with Q(0) = I, Q(1) = P, through the polar factors."""
    n = half_dim(P)
    A = symmetric_sqrt(P @ P.T)
    w, V = np.linalg.eigh(A)
    U = np.linalg.solve(A, P)
    u = U[:n, :n] + 1j * U[n:, :n]
    uat = unitary_interpolation(u)

    def at(s):
        As = (V * w ** s) @ V.T
        return As @ unitary_to_orthosymplectic(uat(s))
    return at


# ---------------------------------------------------------------------------
# spectra on the unit circle: nullity, Krein types, components


def nullity(M: np.ndarray, omega: complex, policy: NumericPolicy = DEFAULT_POLICY) -> int:
    """dim_C ker(M - omega I), counted by singular values below
    tol_rank * (1 + ||M||)."""
    M = np.asarray(M, dtype=float)
    if abs(abs(omega) - 1.0) > 1e-8:
        raise ValidationError(f"|omega| = {abs(omega)!r} not on the unit circle")
    d = M.shape[0]
    sv = np.linalg.svd(M.astype(complex) - omega * np.eye(d), compute_uv=False)
    thr = policy.tol_rank * (1.0 + np.linalg.norm(M, 2))
    return int(np.sum(sv < thr))


def _cluster_values(values: np.ndarray, tol: float):
    """Greedy clustering of complex values within distance tol; returns
    (representatives, members) where each representative is the cluster mean."""
    reps, members = [], []
    for v in values:
        for k, r in enumerate(reps):
            if abs(v - r) <= tol:
                members[k].append(v)
                reps[k] = np.mean(members[k])
                break
        else:
            reps.append(v)
            members.append([v])
    return reps, members


def unit_circle_eigenvalues(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY):
    """Clustered eigenvalues of M snapped onto the unit circle.

    Returns a list of (lambda, algebraic_multiplicity, cluster_spread) with
    |lambda| = 1, sorted by angle in [0, 2 pi).
    """
    M = np.asarray(M, dtype=float)
    vals = np.linalg.eigvals(M)
    reps, members = _cluster_values(vals, policy.tol_cluster)
    out = []
    for r, mem in zip(reps, members):
        if abs(abs(r) - 1.0) < policy.tol_cluster:
            lam = r / abs(r)
            spread = max(abs(v - lam) for v in mem)
            out.append((complex(lam), len(mem), float(spread)))
    out.sort(key=lambda t: np.angle(t[0]) % (2 * np.pi))
    return out


def kernel_basis(A: np.ndarray, rel_tol: float, abs_floor: float = 0.0) -> np.ndarray:
    """Orthonormal kernel basis via SVD; singular values below
    max(rel_tol * sigma_max, abs_floor) count as zero."""
    A = np.asarray(A)
    _, sv, vh = np.linalg.svd(A)
    smax = sv[0] if sv.size else 0.0
    thr = max(rel_tol * smax, abs_floor)
    k = int(np.sum(sv <= thr))
    if smax <= abs_floor or smax == 0.0:
        return np.eye(A.shape[1], dtype=A.dtype)
    if k == 0:
        return np.zeros((A.shape[1], 0), dtype=A.dtype)
    return vh[-k:].conj().T


def root_space(M: np.ndarray, lam: complex, policy: NumericPolicy = DEFAULT_POLICY,
               spread: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the root space E_lambda = union_k ker (M - lam)^k.

    Kernels of increasing powers are computed until the dimension stabilizes,
    capped at k = 2n. ``spread`` widens the rank threshold when lam stands
    for a cluster of nearby eigenvalues.
    """
    M = np.asarray(M, dtype=complex)
    d = M.shape[0]
    A = M - lam * np.eye(d)
    normA = max(np.linalg.norm(A, 2), 1.0)
    P = np.eye(d, dtype=complex)
    basis = np.zeros((d, 0), dtype=complex)
    for k in range(1, d + 1):
        P = P @ A
        floor = 10.0 * spread * normA ** (k - 1)
        newbasis = kernel_basis(P, policy.tol_rank, abs_floor=floor)
        if newbasis.shape[1] <= basis.shape[1]:
            break
        basis = newbasis
        if basis.shape[1] == d:
            break
    if basis.shape[1] == 0:
        raise ConditioningError(f"empty root space for eigenvalue {lam!r}")
    q, _ = np.linalg.qr(basis)
    return q


def krein_gram(M_or_n, basis: np.ndarray) -> np.ndarray:
    """Hermitian Gram matrix of the Krein form G = i J on the given basis."""
    if np.isscalar(M_or_n):
        n = int(M_or_n)
    else:
        n = half_dim(np.asarray(M_or_n))
    G = 1j * standard_J(n)
    return basis.conj().T @ G @ basis


@dataclass(frozen=True)
class UnitCircleEigenvalue:
    value: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    krein_type: tuple  # (p, q) inertia of iJ on the root space


def krein_types(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY):
    """Krein type (p, q) for each unit-circle eigenvalue of M.

    p + q equals the algebraic multiplicity (the Krein form is nondegenerate
    on each root space); a Gram eigenvalue below 1e-6 * ||Gram|| signals a
    clustering failure and raises ConditioningError.
    """
    M = validate_symplectic(M, policy)
    out = []
    for lam, mult, spread in unit_circle_eigenvalues(M, policy):
        basis = root_space(M, lam, policy, spread=spread)
        K = krein_gram(M, basis)
        w = np.linalg.eigvalsh(K)
        norm = max(np.max(np.abs(w)), 1e-300)
        if np.min(np.abs(w)) < 1e-6 * norm:
            raise ConditioningError(
                f"degenerate Krein Gram matrix at eigenvalue {lam!r}: "
                f"eigenvalues {w!r} (clustering failure?)")
        p = int(np.sum(w > 0))
        q = int(np.sum(w < 0))
        geo = nullity(M, lam, policy)
        out.append(UnitCircleEigenvalue(lam, basis.shape[1], geo, (p, q)))
    return out


def component_quantity(M: np.ndarray, omega: complex) -> float:
    """The real number (-1)^{n-1} omega^{-n} det(M - omega I)."""
    M = np.asarray(M, dtype=float)
    n = half_dim(M)
    q = (-1.0) ** (n - 1) * omega ** (-n) * np.linalg.det(M.astype(complex) - omega * np.eye(2 * n))
    if abs(q.imag) > 1e-6 * (1.0 + abs(q.real)):
        raise ConditioningError(f"component quantity unexpectedly complex: {q!r}")
    return float(q.real)


def component_sign(M: np.ndarray, omega: complex, policy: NumericPolicy = DEFAULT_POLICY) -> str:
    """'plus' / 'minus' / 'singular' placement of M relative to Sp(2n)_omega^0.

    The plus component is the one containing M_n^+, defined by the quantity
    above being negative.
    """
    q = component_quantity(M, omega)
    if q < -policy.tol_det:
        return "plus"
    if q > policy.tol_det:
        return "minus"
    return "singular"


# ---------------------------------------------------------------------------
# Sp(2) cylindrical model


@dataclass(frozen=True)
class Sp2Coords:
    """Cylindrical coordinates (r, theta, z) of an Sp(2) matrix.

    M = [[r, z], [z, (1+z^2)/r]] . R(theta) with r > 0, theta in (-pi, pi].
    """
    r: float
    theta: float
    z: float

    def matrix(self) -> np.ndarray:
        P = np.array([[self.r, self.z], [self.z, (1.0 + self.z ** 2) / self.r]])
        return P @ Rmat(self.theta)

    def trace_factor(self) -> float:
        """g = r + (1+z^2)/r, so that tr M = g cos(theta)."""
        return self.r + (1.0 + self.z ** 2) / self.r


def sp2_model(M: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY) -> Sp2Coords:
    M = validate_symplectic(M, policy)
    if half_dim(M) != 1:
        raise ValidationError("sp2_model needs n = 1")
    A, U, u = polar_unitary(M, policy)
    theta = float(np.arctan2(U[1, 0], U[0, 0]))
    return Sp2Coords(r=float(A[0, 0]), theta=theta, z=float(A[0, 1]))


def sp2_membership(coords: Sp2Coords, omega: complex, policy: NumericPolicy = DEFAULT_POLICY) -> str:
    """Component via the cylindrical-model inequality.

    The singular surface is (r^2 + z^2 + 1) cos(theta) = 2 r Re(omega),
    equivalently tr M = 2 Re(omega); the side with the larger trace is the
    plus component (it contains D(2)).
    """
    lhs = (coords.r ** 2 + coords.z ** 2 + 1.0) * np.cos(coords.theta)
    rhs = 2.0 * coords.r * omega.real
    if lhs > rhs + policy.tol_det:
        return "plus"
    if lhs < rhs - policy.tol_det:
        return "minus"
    return "singular"
