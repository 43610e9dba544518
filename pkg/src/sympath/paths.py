"""Sampled paths in the symplectic group starting at the identity.

A path carries its samples plus, when available, a closed-form generator that
allows resampling. The trust-region contract
``||gamma(t_{i+1}) gamma(t_i)^{-1} - I||_inf < 0.5`` guarantees unambiguous
argument tracking for the rotation number; constructors refine automatically
when a generator exists and raise RefinementError otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from sympath.policy import DEFAULT_POLICY, NumericPolicy, RefinementError, ValidationError
from sympath import spcore

TRUST_RADIUS = 0.5
_MAX_SAMPLES = 1 << 16


# ---------------------------------------------------------------------------
# generators


class PathGenerator:
    """Closed-form time law gamma(t); subclasses implement sample()."""

    def sample(self, times: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class RotationGenerator(PathGenerator):
    """gamma(t) = R(theta * t / tau)^{diamond n}: total angle theta over [0, tau]."""
    theta: float
    tau: float
    n: int = 1

    def sample(self, times):
        out = np.empty((len(times), 2 * self.n, 2 * self.n))
        for k, t in enumerate(times):
            out[k] = spcore.diamond_power(spcore.Rmat(self.theta * t / self.tau), self.n)
        return out


@dataclass(frozen=True)
class DiagonalGenerator(PathGenerator):
    """gamma(t) = D(1 + (lam_end - 1) t / tau)^{diamond n}."""
    lam_end: float
    tau: float
    n: int = 1

    def sample(self, times):
        out = np.empty((len(times), 2 * self.n, 2 * self.n))
        for k, t in enumerate(times):
            lam = 1.0 + (self.lam_end - 1.0) * t / self.tau
            out[k] = spcore.diamond_power(spcore.Dmat(lam), self.n)
        return out


@dataclass(frozen=True)
class CoefficientGenerator(PathGenerator):
    """Fundamental solution of y' = J B(t) y for a symmetric coefficient
    matrix B(t) = S0 + sum_k (Ck cos(2 pi k t / tau) + Sk sin(2 pi k t / tau)).

    Sampling integrates with the midpoint-exponential scheme through the
    requested times, inserting internal steps so every step is below `hmax`.
    """
    n: int
    tau: float
    const: np.ndarray
    cos_terms: tuple = ()
    sin_terms: tuple = ()
    hmax: float = 1.0 / 64.0

    def coefficient(self, t: float) -> np.ndarray:
        B = np.array(self.const, dtype=float)
        for k, C in enumerate(self.cos_terms, start=1):
            B = B + np.asarray(C) * np.cos(2 * np.pi * k * t / self.tau)
        for k, S in enumerate(self.sin_terms, start=1):
            B = B + np.asarray(S) * np.sin(2 * np.pi * k * t / self.tau)
        return B

    def sample(self, times):
        J = spcore.standard_J(self.n)
        out = np.empty((len(times), 2 * self.n, 2 * self.n))
        Phi = np.eye(2 * self.n)
        t_prev = 0.0
        if times[0] != 0.0:
            raise ValidationError("coefficient paths must be sampled from t = 0")
        for k, t in enumerate(times):
            if t < t_prev:
                raise ValidationError("sample times must be nondecreasing")
            span = t - t_prev
            if span > 0:
                steps = max(1, int(np.ceil(span / (self.hmax * self.tau))))
                h = span / steps
                for j in range(steps):
                    tm = t_prev + (j + 0.5) * h
                    Phi = scipy.linalg.expm(h * (J @ self.coefficient(tm))) @ Phi
            out[k] = Phi
            t_prev = t
        return out


@dataclass(frozen=True)
class DiamondGenerator(PathGenerator):
    left: PathGenerator
    right: PathGenerator

    def sample(self, times):
        a = self.left.sample(times)
        b = self.right.sample(times)
        return np.array([spcore.diamond(x, y) for x, y in zip(a, b)])


@dataclass(frozen=True)
class WarpedGenerator(PathGenerator):
    """Time-reparametrized view of another generator."""
    inner: PathGenerator
    warp: object
    tau: float

    def sample(self, times):
        warped = np.array([self.tau * float(self.warp(t / self.tau)) for t in times])
        warped = np.clip(warped, 0.0, self.tau)
        return self.inner.sample(warped)


# ---------------------------------------------------------------------------
# the path object


def _max_step(mats: np.ndarray) -> float:
    worst = 0.0
    for a, b in zip(mats[:-1], mats[1:]):
        step = np.max(np.abs(b @ np.linalg.inv(a) - np.eye(a.shape[0])))
        worst = max(worst, step)
    return worst


@dataclass(frozen=True)
class SymplecticPath:
    n: int
    tau: float
    times: np.ndarray
    mats: np.ndarray
    generator: PathGenerator | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.times[0] != 0.0 or abs(self.times[-1] - self.tau) > 1e-12 * max(1.0, self.tau):
            raise ValidationError("path samples must cover [0, tau]")
        if np.max(np.abs(self.mats[0] - np.eye(2 * self.n))) > 1e-12:
            raise ValidationError("gamma(0) must be the identity")

    @property
    def endpoint(self) -> np.ndarray:
        return self.mats[-1]

    def validate(self, policy: NumericPolicy = DEFAULT_POLICY) -> "SymplecticPath":
        for M in self.mats[:: max(1, len(self.mats) // 64)]:
            if spcore.symplectic_residual(M) > 1e-8:
                raise ValidationError("path sample fails symplecticity at 1e-8")
        return self

    def max_step(self) -> float:
        return _max_step(self.mats)

    def refine(self, factor: int = 2) -> "SymplecticPath":
        if self.generator is None:
            raise RefinementError("cannot refine a sample-only path")
        k = (len(self.times) - 1) * factor + 1
        if k > _MAX_SAMPLES:
            raise RefinementError("refinement limit reached")
        times = np.linspace(0.0, self.tau, k)
        return SymplecticPath(self.n, self.tau, times,
                              self.generator.sample(times), self.generator)

    def reparametrized(self, warp) -> "SymplecticPath":
        """Resample through a monotone map warp: [0,1] -> [0,1] (needs generator)."""
        if self.generator is None:
            raise RefinementError("cannot reparametrize a sample-only path")
        s = np.linspace(0.0, 1.0, len(self.times))
        new_times = self.tau * np.asarray([warp(x) for x in s])
        new_times[0], new_times[-1] = 0.0, self.tau
        if np.any(np.diff(new_times) < 0):
            raise ValidationError("reparametrization must be monotone")
        mats = self.generator.sample(new_times)
        gen = WarpedGenerator(self.generator, warp, self.tau)
        return SymplecticPath(self.n, self.tau, np.linspace(0, self.tau, len(new_times)),
                              mats, gen)

    def diamond(self, other: "SymplecticPath") -> "SymplecticPath":
        if abs(self.tau - other.tau) > 1e-12:
            raise ValidationError("diamond of paths needs a common duration")
        if self.generator is not None and other.generator is not None:
            ts = np.linspace(0.0, self.tau, max(len(self.times), len(other.times)))
            am, bm = self.generator.sample(ts), other.generator.sample(ts)
            gen = DiamondGenerator(self.generator, other.generator)
        else:
            if len(self.times) != len(other.times) or np.max(np.abs(self.times - other.times)) > 1e-12:
                raise ValidationError("sample-only paths need identical time grids for diamond")
            ts, am, bm, gen = self.times, self.mats, other.mats, None
        mats = np.array([spcore.diamond(x, y) for x, y in zip(am, bm)])
        return make_path(self.n + other.n, self.tau, ts, mats, gen)

    def iterate(self, m: int) -> "SymplecticPath":
        """m-th iteration gamma^m(t) = gamma(t - j tau) gamma(tau)^j."""
        if m < 1:
            raise ValidationError("iteration count must be >= 1")
        if m == 1:
            return self
        Mtau = self.endpoint
        times = [self.times]
        mats = [self.mats]
        power = np.eye(2 * self.n)
        for j in range(1, m):
            power = Mtau @ power
            times.append(self.times[1:] + j * self.tau)
            mats.append(np.array([S @ power for S in self.mats[1:]]))
        return SymplecticPath(self.n, m * self.tau, np.concatenate(times),
                              np.concatenate(mats), None)

    def append_matrices(self, tail_times: np.ndarray, tail_mats: np.ndarray) -> "SymplecticPath":
        """Concatenate a tail (tail starts at this path's endpoint)."""
        if np.max(np.abs(tail_mats[0] - self.endpoint)) > 1e-9 * (1 + np.max(np.abs(self.endpoint))):
            raise ValidationError("tail must start at the path endpoint")
        times = np.concatenate([self.times, self.tau + tail_times[1:]])
        mats = np.concatenate([self.mats, tail_mats[1:]])
        return SymplecticPath(self.n, float(times[-1]), times, mats, None)


def make_path(n: int, tau: float, times: np.ndarray, mats: np.ndarray,
              generator: PathGenerator | None = None,
              policy: NumericPolicy = DEFAULT_POLICY) -> SymplecticPath:
    """Construct and validate a path, auto-refining through the generator
    until the trust-region contract holds."""
    path = SymplecticPath(n, tau, np.asarray(times, dtype=float),
                          np.asarray(mats, dtype=float), generator)
    while path.max_step() >= TRUST_RADIUS:
        if generator is None:
            raise RefinementError(
                f"trust-region violation (step {path.max_step():.3f} >= {TRUST_RADIUS}) "
                "on a sample-only path")
        path = path.refine(2)
    return path.validate(policy)


def rotation_path(theta: float, tau: float = 1.0, n: int = 1, samples: int = 129) -> SymplecticPath:
    gen = RotationGenerator(theta, tau, n)
    ts = np.linspace(0.0, tau, samples)
    return make_path(n, tau, ts, gen.sample(ts), gen)


def diagonal_path(lam_end: float = 2.0, tau: float = 1.0, n: int = 1,
                  samples: int = 65) -> SymplecticPath:
    gen = DiagonalGenerator(lam_end, tau, n)
    ts = np.linspace(0.0, tau, samples)
    return make_path(n, tau, ts, gen.sample(ts), gen)


def coefficient_path(gen: CoefficientGenerator, samples: int = 257) -> SymplecticPath:
    ts = np.linspace(0.0, gen.tau, samples)
    return make_path(gen.n, gen.tau, ts, gen.sample(ts), gen)


def random_coefficient_generator(n: int, rng: np.random.Generator, tau: float = 1.0,
                                 scale: float = 1.2, modes: int = 2) -> CoefficientGenerator:
    """Seeded random smooth symmetric coefficient matrix, for test suites."""
    def sym():
        S = rng.standard_normal((2 * n, 2 * n))
        return scale * (S + S.T) / 2.0
    return CoefficientGenerator(n=n, tau=tau, const=sym(),
                                cos_terms=tuple(sym() for _ in range(modes)),
                                sin_terms=tuple(sym() for _ in range(modes)))


@dataclass(frozen=True)
class PolarGenerator(PathGenerator):
    """Polar interpolation from I to a target symplectic matrix over [0, tau]."""
    target: tuple  # matrix rows as tuples, to stay hashable
    tau: float

    def sample(self, times):
        M = np.asarray(self.target, dtype=float)
        at = spcore.symplectic_interpolation_to(M)
        return np.array([at(t / self.tau) for t in times])


def polar_path(M: np.ndarray, tau: float = 1.0, samples: int = 65) -> SymplecticPath:
    """Geodesic-like path from I to M through the polar factors."""
    M = np.asarray(M, dtype=float)
    gen = PolarGenerator(tuple(map(tuple, M)), tau)
    ts = np.linspace(0.0, tau, samples)
    return make_path(spcore.half_dim(M), tau, ts, gen.sample(ts), gen)


def append_rotation_tail(path: SymplecticPath, angle: float,
                         samples: int = 33) -> SymplecticPath:
    """Append t -> gamma(tau) expm(angle * (t/tail) * J), the R(angle)^{diamond n}
    endpoint rotation used by perturbation families. Negative angle = clockwise."""
    n = path.n
    J = spcore.standard_J(n)
    tail_tau = max(abs(angle), 1e-6)
    ts = np.linspace(0.0, tail_tau, samples)
    end = path.endpoint
    mats = np.array([end @ (np.cos(angle * t / tail_tau) * np.eye(2 * n)
                            + np.sin(angle * t / tail_tau) * J) for t in ts])
    return path.append_matrices(ts, mats)


def append_exponential_tail(path: SymplecticPath, S: np.ndarray, eps: float,
                            samples: int = 33) -> SymplecticPath:
    """Append t -> gamma(tau) expm(eps * (t/tail) * J S) for symmetric S."""
    n = path.n
    J = spcore.standard_J(n)
    X = J @ ((S + S.T) / 2.0)
    ts = np.linspace(0.0, 1.0, samples)
    end = path.endpoint
    mats = np.array([end @ scipy.linalg.expm(eps * t * X) for t in ts])
    return path.append_matrices(ts, mats)
