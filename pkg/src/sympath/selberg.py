"""Selberg trace formula evaluators and the exact flat-torus check.

The hyperbolic side is evaluator-only: Laplace eigenvalues and geodesic
length spectra are user-supplied data and both sides of the heat-kernel
and general test-function identities are computed with reported truncation
bounds. The flat-torus analogue (Poisson summation of the heat trace) is
exact and self-contained, and serves as the acceptance anchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from sympath.policy import DomainError, ValidationError


def hyperbolic_distance(z: complex, zp: complex) -> float:
    """Distance on the upper half plane: cosh d = 1 + |z - z'|^2 / (2 Im z Im z')."""
    z, zp = complex(z), complex(zp)
    if z.imag <= 0 or zp.imag <= 0:
        raise DomainError("points must have positive imaginary part")
    c = 1.0 + abs(z - zp) ** 2 / (2.0 * z.imag * zp.imag)
    return float(np.arccosh(c))


@dataclass(frozen=True)
class LengthSpectrum:
    """Primitive geodesic lengths with multiplicities, plus the area."""
    entries: tuple          # ((length, multiplicity), ...) ascending
    area: float

    def __post_init__(self):
        lengths = [e[0] for e in self.entries]
        if any(l2 <= l1 for l1, l2 in zip(lengths, lengths[1:])):
            raise ValidationError("lengths must be strictly ascending")
        if any(e[0] <= 0 or e[1] < 1 for e in self.entries):
            raise ValidationError("lengths must be positive, multiplicities >= 1")
        if self.area <= 0:
            raise ValidationError("area must be positive")


@dataclass(frozen=True)
class TestFunction:
    """Even analytic test function h with closed-form Fourier transform g.

    Built-ins: gaussian h(r) = exp(-t r^2) and the squared-Cauchy family
    h(r) = (r^2 + a^2)^{-2} (a > 1/2 keeps the poles outside the strip).
    The decay certificate (A, delta) with |h(r)| <= A (1 + |r|)^{-2-delta}
    is validated on a sampling grid.
    """
    kind: str
    parameter: float
    decay: tuple = field(default=None)

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.parameter <= 0:
                raise ValidationError("gaussian needs t > 0")
        elif self.kind == "cauchy2":
            if self.parameter <= 0.5:
                raise ValidationError("squared Cauchy needs a > 1/2 for analyticity")
        else:
            raise ValidationError(f"unknown test function kind {self.kind!r}")
        if self.decay is None:
            object.__setattr__(self, "decay", self._default_decay())
        self.check()

    def _default_decay(self):
        delta = 2.0
        grid = np.linspace(0.0, 400.0, 4001)
        vals = np.abs(self.h(grid)) * (1.0 + grid) ** (2.0 + delta)
        return (float(np.max(vals) * 1.01), delta)

    def h(self, r):
        r = np.asarray(r, dtype=complex)
        if self.kind == "gaussian":
            out = np.exp(-self.parameter * r ** 2)
        else:
            out = (r ** 2 + self.parameter ** 2) ** (-2.0)
        out = np.where(np.abs(out.imag) < 1e-12 * (1.0 + np.abs(out.real)), out.real, out)
        return out if out.shape else complex(out)

    def g(self, x):
        """Fourier transform g(x) = (1/2pi) int h(r) e^{-irx} dr, closed form."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            t = self.parameter
            out = np.exp(-x ** 2 / (4.0 * t)) / (2.0 * np.sqrt(np.pi * t))
        else:
            a = self.parameter
            out = (1.0 + a * np.abs(x)) * np.exp(-a * np.abs(x)) / (4.0 * a ** 3)
        return out if out.shape else float(out)

    def check(self, grid_max: float = 50.0, samples: int = 501):
        r = np.linspace(-grid_max, grid_max, samples)
        hv = self.h(r)
        if np.max(np.abs(hv - self.h(-r))) > 1e-12:
            raise ValidationError("test function must be even")
        A, delta = self.decay
        bound = A * (1.0 + np.abs(r)) ** (-2.0 - delta)
        if np.any(np.abs(hv) > bound * (1.0 + 1e-9)):
            raise ValidationError("test function violates its decay certificate")
        return self

    def cutoff(self, tail: float = 1e-14) -> float:
        """Integration cutoff R with A (1+R)^{-1-delta} / (1+delta) < tail."""
        A, delta = self.decay
        R = (A / (tail * (1.0 + delta))) ** (1.0 / (1.0 + delta))
        return float(max(R, 10.0))


def selberg_lhs_heat(eigenvalues, t: float):
    """e^{t/4} sum_k e^{-t lambda_k} over the supplied finite list, plus the
    tail scale e^{t/4} e^{-t lambda_max} of the first omitted mode."""
    if t <= 0:
        raise ValidationError("t must be positive")
    lam = np.asarray(sorted(eigenvalues), dtype=float)
    value = float(np.exp(t / 4.0) * np.sum(np.exp(-t * lam)))
    tail_scale = float(np.exp(t / 4.0 - t * lam[-1])) if lam.size else 0.0
    return value, tail_scale


def _identity_term_heat(area: float, t: float) -> float:
    """Area/(4 pi t)^{3/2} int (tau/2)/sinh(tau/2) e^{-tau^2/4t} dtau."""
    def f(tau):
        if abs(tau) < 1e-8:
            base = 1.0 - tau * tau / 24.0
        else:
            base = (tau / 2.0) / np.sinh(tau / 2.0)
        return base * np.exp(-tau * tau / (4.0 * t))
    cut = max(10.0, 20.0 * np.sqrt(t))
    val, _ = integrate.quad(f, 0.0, cut, epsabs=1e-15, epsrel=1e-13, limit=400)
    return float(area / (4.0 * np.pi * t) ** 1.5 * 2.0 * val)


def selberg_rhs_heat(L: LengthSpectrum, t: float, k_max: int = 32):
    """Identity term plus the orbit sum
    (4 pi t)^{-1/2} sum_gamma sum_{k <= k_max} tau/(2 sinh(k tau/2)) e^{-(k tau)^2/4t};
    the reported tail bound covers the omitted k > k_max terms."""
    if t <= 0:
        raise ValidationError("t must be positive")
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    ident = _identity_term_heat(L.area, t)
    pref = 1.0 / np.sqrt(4.0 * np.pi * t)
    orbit = 0.0
    tail = 0.0
    for tau, mult in L.entries:
        for k in range(1, k_max + 1):
            orbit += mult * tau / (2.0 * np.sinh(k * tau / 2.0)) * np.exp(-(k * tau) ** 2 / (4.0 * t))
        ktail = (k_max + 1) * tau
        # geometric-Gaussian bound on the omitted repetitions
        tail += mult * tau * np.exp(-ktail ** 2 / (4.0 * t)) / (1.0 - np.exp(-tau))
    return float(ident + pref * orbit), float(pref * tail)


def selberg_general(h: TestFunction, eigenvalues, L: LengthSpectrum, k_max: int = 32):
    """Both sides of the general trace formula.

    lhs = sum h(r_k), r_k = sqrt(lambda_k - 1/4) with the principal branch
    (small eigenvalues give imaginary r_k, where the built-ins stay real);
    rhs = Area/4pi int h(r) tanh(pi r) r dr + orbit sum with g.
    """
    h.check()
    lam = np.asarray(sorted(eigenvalues), dtype=float)
    r = np.sqrt(lam.astype(complex) - 0.25)
    hvals = h.h(r)
    if np.max(np.abs(np.imag(hvals))) > 1e-10:
        raise ValidationError("test function not real on the spectrum branch")
    lhs = float(np.sum(np.real(hvals)))

    cut = h.cutoff()
    edges = [0.0, 1.0]
    while edges[-1] < cut:
        edges.append(min(edges[-1] * 4.0, cut))
    val = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        piece, _ = integrate.quad(lambda x: float(np.real(h.h(x))) * np.tanh(np.pi * x) * x,
                                  a, b, epsabs=1e-16, epsrel=1e-13, limit=200)
        val += piece
    ident = L.area / (4.0 * np.pi) * 2.0 * val
    orbit = 0.0
    for tau, mult in L.entries:
        for k in range(1, k_max + 1):
            orbit += mult * tau * float(h.g(k * tau)) / (2.0 * np.sinh(k * tau / 2.0))
    rhs = float(ident + orbit)
    return lhs, rhs


# ---------------------------------------------------------------------------
# flat torus / Poisson


def _lattice_points(basis: np.ndarray, radius: float):
    """All nonzero lattice points B m with |B m| <= radius, plus the origin."""
    Binv = np.linalg.inv(basis)
    corner = int(np.ceil(radius * np.linalg.norm(Binv, 2))) + 1
    rng = np.arange(-corner, corner + 1)
    I, Jg = np.meshgrid(rng, rng, indexing="ij")
    coeffs = np.stack([I.ravel(), Jg.ravel()], axis=1)
    pts = coeffs @ basis.T
    norms = np.linalg.norm(pts, axis=1)
    return pts[norms <= radius]


def torus_trace_check(basis, t: float, tail_tol: float = 1e-14):
    """Heat-trace Poisson identity on the torus R^2 / (B Z^2):

    lhs = sum over the dual lattice of e^{-4 pi^2 |k*|^2 t},
    rhs = (Area / 4 pi t) sum over the lattice of e^{-|l|^2 / 4 t};
    both sums grow their radius until the Gaussian tail bound drops below
    tail_tol. Returns (lhs, rhs, gap).
    """
    basis = np.asarray(basis, dtype=float).reshape(2, 2)
    area = abs(np.linalg.det(basis))
    if area < 1e-12:
        raise ValidationError("degenerate lattice basis")
    if t <= 0:
        raise ValidationError("t must be positive")
    dual = np.linalg.inv(basis).T

    def grown_sum(B, alpha):
        # sum of e^{-alpha |x|^2} over the lattice of B; the radius grows
        # until the integral bound on the Gaussian tail drops below tail_tol
        density = 1.0 / abs(np.linalg.det(B))
        radius = max(3.0 / np.sqrt(alpha), 2.0 * np.linalg.norm(B, 2))
        while True:
            pts = _lattice_points(B, radius)
            total = float(np.sum(np.exp(-alpha * np.linalg.norm(pts, axis=1) ** 2)))
            bound = 4.0 * np.pi * density * (1.0 + alpha * radius ** 2) \
                * np.exp(-alpha * radius ** 2) / alpha
            if bound < tail_tol or radius > 1e4:
                return total, bound
            radius *= 1.5

    lhs, lhs_bound = grown_sum(dual, 4.0 * np.pi ** 2 * t)
    rhs_sum, rhs_bound = grown_sum(basis, 1.0 / (4.0 * t))
    rhs = area / (4.0 * np.pi * t) * rhs_sum
    gap = abs(lhs - rhs)
    return lhs, rhs, gap


def torus_eigenvalues(basis, count: int):
    """Lowest `count` Laplace eigenvalues 4 pi^2 |k*|^2 of the flat torus."""
    basis = np.asarray(basis, dtype=float).reshape(2, 2)
    dual = np.linalg.inv(basis).T
    radius = 2.0
    while True:
        pts = _lattice_points(dual, radius)
        if len(pts) >= count:
            vals = np.sort(4.0 * np.pi ** 2 * np.linalg.norm(pts, axis=1) ** 2)
            return vals[:count]
        radius *= 1.5
