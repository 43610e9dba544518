"""Linear Hamiltonian systems and the Fourier-truncation Morse index.

Fundamental solutions of y' = J B(t) y are produced by a midpoint
exponential integrator (exactly symplectic per step), Sturm data (P, Q, R)
converts to the Hamiltonian coefficient matrix, and the Hessian of the
periodic action functional is truncated onto trigonometric polynomials to
give the Morse index m- and nullity m0. The identities m- = i_1 and
m0 = nu_1 (configuration form), and m- = d + i_1 (phase-space form), are the
variational oracle for the index engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from sympath import spcore
from sympath.paths import CoefficientGenerator, SymplecticPath, make_path
from sympath.policy import (ConditioningError, DEFAULT_POLICY, NumericPolicy,
                            TruncationError, ValidationError)


@dataclass(frozen=True)
class SturmData:
    """Coefficients of the periodic Sturm system -(P y' + Q y)' + Q^T y' + R y = 0.

    P(t) symmetric positive definite, R(t) symmetric; each entry is either a
    constant matrix or a callable of t.
    """
    n: int
    P: object
    Q: object
    R: object
    tau: float

    def at(self, name, t):
        value = getattr(self, name)
        M = value(t) if callable(value) else value
        return np.asarray(M, dtype=float)

    def validate(self, grid: int = 32):
        for t in np.linspace(0.0, self.tau, grid):
            P = self.at("P", t)
            if np.max(np.abs(P - P.T)) > 1e-12:
                raise ValidationError("P(t) must be symmetric")
            if np.linalg.eigvalsh(P).min() <= 1e-8:
                raise ValidationError("P(t) must be positive definite")
            R = self.at("R", t)
            if np.max(np.abs(R - R.T)) > 1e-12:
                raise ValidationError("R(t) must be symmetric")
        return self


def coefficient_matrix(B, n: int, tau: float):
    """Wrap a constant or callable symmetric B(t) with symmetry validation."""
    def at(t):
        M = np.asarray(B(t) if callable(B) else B, dtype=float)
        if np.max(np.abs(M - M.T)) > 1e-12:
            raise ValidationError("coefficient matrix must be symmetric")
        return M
    at.n = n
    at.tau = tau
    return at


def fundamental_solution(B, n: int, tau: float, steps: int = 64,
                         policy: NumericPolicy = DEFAULT_POLICY,
                         drift_tol: float = 1e-10) -> SymplecticPath:
    """Fundamental solution of y' = J B(t) y on [0, tau].

    Midpoint-exponential stepping (each step the exponential of a
    Hamiltonian matrix, hence exactly symplectic); the step count doubles
    until the endpoint moves by less than drift_tol.
    """
    if steps < 16:
        raise ValidationError("need at least 16 steps")
    Bat = coefficient_matrix(B, n, tau)
    J = spcore.standard_J(n)

    def integrate(k):
        ts = np.linspace(0.0, tau, k + 1)
        mats = np.empty((k + 1, 2 * n, 2 * n))
        mats[0] = np.eye(2 * n)
        h = tau / k
        for i in range(k):
            tm = (i + 0.5) * h
            mats[i + 1] = scipy.linalg.expm(h * (J @ Bat(tm))) @ mats[i]
        return ts, mats

    k = steps
    ts, mats = integrate(k)
    while True:
        ts2, mats2 = integrate(2 * k)
        drift = np.max(np.abs(mats2[-1] - mats[-1])) / (1.0 + np.max(np.abs(mats2[-1])))
        ts, mats, k = ts2, mats2, 2 * k
        if drift < drift_tol or k >= (1 << 15):
            break
    gen = _OdeGenerator(Bat, n, tau)
    return make_path(n, tau, ts, mats, gen, policy)


class _OdeGenerator:
    """Resampling hook for fundamental solutions (integrates through the
    requested times with bounded internal steps)."""

    def __init__(self, Bat, n, tau, hmax=1.0 / 256.0):
        self.Bat, self.n, self.tau, self.hmax = Bat, n, tau, hmax

    def sample(self, times):
        J = spcore.standard_J(self.n)
        out = np.empty((len(times), 2 * self.n, 2 * self.n))
        Phi = np.eye(2 * self.n)
        t_prev = 0.0
        for k, t in enumerate(times):
            span = t - t_prev
            if span > 0:
                m = max(1, int(np.ceil(span / (self.hmax * self.tau))))
                h = span / m
                for j in range(m):
                    tm = t_prev + (j + 0.5) * h
                    Phi = scipy.linalg.expm(h * (J @ self.Bat(tm))) @ Phi
            out[k] = Phi
            t_prev = t
        return out


def sturm_to_hamiltonian(S: SturmData):
    """The block coefficient matrix of the phase-space form of the Sturm
    system: [[P^{-1}, -P^{-1} Q], [-Q^T P^{-1}, Q^T P^{-1} Q - R]]."""
    S.validate()

    def B(t):
        P = S.at("P", t)
        Q = S.at("Q", t)
        R = S.at("R", t)
        try:
            Pi = np.linalg.inv(P)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(f"P(t) singular at t = {t}") from exc
        top = np.hstack([Pi, -Pi @ Q])
        bottom = np.hstack([-Q.T @ Pi, Q.T @ Pi @ Q - R])
        out = np.vstack([top, bottom])
        return (out + out.T) / 2.0
    return coefficient_matrix(B, S.n, S.tau)


def sturm_path(S: SturmData, steps: int = 64,
               policy: NumericPolicy = DEFAULT_POLICY) -> SymplecticPath:
    B = sturm_to_hamiltonian(S)
    return fundamental_solution(B, S.n, S.tau, steps, policy)


# ---------------------------------------------------------------------------
# Fourier-truncation Morse indices


def _trig_basis(K: int, tau: float, grid: np.ndarray):
    """Values and derivatives of the 2K+1 trigonometric basis functions."""
    funcs = [np.ones_like(grid)]
    dfuncs = [np.zeros_like(grid)]
    for k in range(1, K + 1):
        w = 2.0 * np.pi * k / tau
        funcs.append(np.cos(w * grid))
        dfuncs.append(-w * np.sin(w * grid))
        funcs.append(np.sin(w * grid))
        dfuncs.append(w * np.cos(w * grid))
    return np.array(funcs), np.array(dfuncs)


def _hessian_configuration(S: SturmData, K: int) -> np.ndarray:
    """Gram matrix of the action Hessian
    H(y) = int (y' P y' + 2 y' Q y + y R y) dt
    on configuration loops built from modes |k| <= K."""
    n, tau = S.n, S.tau
    m = 2 * K + 1
    quad = 8 * m
    grid = (np.arange(quad) + 0.5) * tau / quad
    wq = tau / quad
    f, df = _trig_basis(K, tau, grid)
    dim = n * m
    H = np.zeros((dim, dim))
    Pg = np.array([S.at("P", t) for t in grid])
    Qg = np.array([S.at("Q", t) for t in grid])
    Rg = np.array([S.at("R", t) for t in grid])
    # basis function a*n + i  <->  component i carrying mode a
    for a in range(m):
        for b in range(a, m):
            # n x n blocks integrated over the grid
            blk = np.einsum("t,tij,t->ij", df[a], Pg, df[b]) * wq
            blk += np.einsum("t,tij,t->ij", df[a], Qg, f[b]) * wq
            blk += np.einsum("t,tij,t->ij", f[a], Qg.transpose(0, 2, 1), df[b]) * wq
            blk += np.einsum("t,tij,t->ij", f[a], Rg, f[b]) * wq
            H[a * n:(a + 1) * n, b * n:(b + 1) * n] = blk
            if b > a:
                H[b * n:(b + 1) * n, a * n:(a + 1) * n] = blk.T
    return (H + H.T) / 2.0


def _count(H: np.ndarray, zero_tol: float = 1e-6):
    w = np.linalg.eigvalsh(H)
    scale = max(np.max(np.abs(w)), 1e-300)
    minus = int(np.sum(w < -zero_tol * scale))
    zero = int(np.sum(np.abs(w) <= zero_tol * scale))
    return minus, zero


def morse_index_fourier(S: SturmData, K: int = 8,
                        policy: NumericPolicy = DEFAULT_POLICY):
    """(m-, m0) of the periodic action functional, truncated to modes
    |k| <= K; m- must agree across two successive doublings of K."""
    if K < 8:
        raise ValidationError("truncation K must be at least 8")
    S.validate()
    trace = []
    prev = None
    stable = 0
    k = K
    while k <= 16 * K:
        m_minus, m_zero = _count(_hessian_configuration(S, k))
        trace.append((k, m_minus, m_zero))
        if prev is not None and prev == (m_minus, m_zero):
            stable += 1
            if stable >= 2:
                return m_minus, m_zero
        else:
            stable = 0
        prev = (m_minus, m_zero)
        k *= 2
    raise TruncationError("Morse index failed to stabilize across doublings",
                          trace=trace)


def _hessian_phase(B, n: int, tau: float, K: int) -> np.ndarray:
    """Gram matrix of phi(z) = int (-J z' . z - B(t) z . z) dt on phase-space
    loops with modes |k| <= K (dimension 2 d, d = n (2K+1))."""
    m = 2 * K + 1
    quad = 8 * m
    grid = (np.arange(quad) + 0.5) * tau / quad
    wq = tau / quad
    f, df = _trig_basis(K, tau, grid)
    d2 = 2 * n
    J = spcore.standard_J(n)
    Bg = np.array([np.asarray(B(t) if callable(B) else B, dtype=float) for t in grid])
    dim = d2 * m
    H = np.zeros((dim, dim))
    for a in range(m):
        for b in range(m):
            blk = -J * np.sum(df[b] * f[a]) * wq
            blk = blk - np.einsum("t,tij,t->ij", f[a], Bg, f[b]) * wq
            H[a * d2:(a + 1) * d2, b * d2:(b + 1) * d2] += blk
    return (H + H.T) / 2.0


def phase_space_morse(B, n: int, tau: float, K: int = 8):
    """(m-, m0, d) for the phase-space (saddle-point) truncation; the
    identity m- = d + i_1 holds at any fixed cutoff."""
    H = _hessian_phase(B, n, tau, K)
    m_minus, m_zero = _count(H)
    d = n * (2 * K + 1)
    return m_minus, m_zero, d
