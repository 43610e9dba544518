"""Maslov-type index engine.

The omega-index of a path gamma in Sp(2n) with gamma(0) = I is computed the
way it is defined: extend the path from its endpoint to the base point
M_n^+ or M_n^- inside the regular set Sp(2n)_omega^* and count the total
rotation of det u along the extended path in units of pi. Degenerate
endpoints take the minimum over a perturbation family whose spread is
pinned to the endpoint nullity.

An independent Sp(2) oracle counts signed transversal crossings of the
singular surface using the crossing form -J gamma' gamma^{-1} restricted to
the omega-kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sympath import spcore
from sympath.completion import completion_rotation
from sympath.paths import (SymplecticPath, append_exponential_tail,
                           append_rotation_tail)
from sympath.policy import (ConditioningError, DEFAULT_POLICY, NumericPolicy,
                            OracleInconclusiveError,
                            PerturbationCoverageError, ValidationError)

_RESIDUE_GUARD = 1e-6


@dataclass(frozen=True)
class IndexResult:
    index: int
    nullity: int
    omega: complex
    diagnostics: dict

    def pair(self):
        return self.index, self.nullity


def _normalize_omega(omega) -> complex:
    omega = complex(omega)
    if abs(abs(omega) - 1.0) > 1e-8:
        raise ValidationError(f"omega must be unit-modulus, got |omega| = {abs(omega)}")
    return omega / abs(omega)


def winding(mats: np.ndarray) -> float:
    """Total continuous argument variation of det u over a sample chain.

    Steps are taken in (-pi, pi); the trust-region contract keeps every true
    step well inside that window so there is no aliasing.
    """
    dets = np.array([spcore.polar_u_det(M) for M in mats])
    steps = np.angle(dets[1:] / dets[:-1])
    if steps.size and np.max(np.abs(steps)) > 2.0:
        raise ValidationError("argument step too large; path under-sampled")
    return float(np.sum(steps))


def rotation_number(path: SymplecticPath, policy: NumericPolicy = DEFAULT_POLICY) -> float:
    """Delta_tau(gamma): rotation of det u(t) along the path."""
    return winding(path.mats)


def index_nondegenerate(path: SymplecticPath, omega=1.0,
                        policy: NumericPolicy = DEFAULT_POLICY) -> IndexResult:
    """Index via completion to M_n^{+-}: Delta_tau(beta * gamma) / pi."""
    omega = _normalize_omega(omega)
    M = path.endpoint
    nu = spcore.nullity(M, omega, policy)
    if nu != 0:
        raise ValidationError("endpoint is omega-degenerate; use index_degenerate")
    delta = winding(path.mats)
    rot, sign, info = completion_rotation(M, omega, policy)
    x = (delta + rot) / np.pi
    k = int(np.rint(x))
    if abs(x - k) > _RESIDUE_GUARD:
        raise ValidationError(
            f"rotation total {x!r} is {abs(x - k):.2e} away from an integer")
    diag = {"path_rotation": delta, "completion_rotation": rot,
            "target": "M+" if sign > 0 else "M-", "margin": info["margin"]}
    return IndexResult(k, 0, omega, diag)


def _perturbation_family(path: SymplecticPath, omega: complex,
                         policy: NumericPolicy):
    """Rotation tails in both senses plus seeded random exponential tails."""
    members = []
    for sense in (-1, +1):
        for theta0 in (1e-3, 1e-4):
            tail = append_rotation_tail(path, sense * theta0)
            if spcore.nullity(tail.endpoint, omega, policy) == 0:
                members.append((f"rot{sense:+d}", tail))
                break
    rng = np.random.default_rng(policy.seed + 417)
    for k in range(8):
        S = rng.standard_normal((2 * path.n, 2 * path.n))
        S = (S + S.T) / 2.0
        S = S / np.linalg.norm(S, 2)
        tail = append_exponential_tail(path, S, 1e-4)
        if spcore.nullity(tail.endpoint, omega, policy) == 0:
            members.append((f"rand{k}", tail))
    return members


def index_degenerate(path: SymplecticPath, omega=1.0,
                     policy: NumericPolicy = DEFAULT_POLICY) -> IndexResult:
    """Index for arbitrary endpoints: minimum over a perturbation family.

    When both one-sided rotation tails are resolvable the family spread must
    equal the endpoint nullity; a mismatch raises PerturbationCoverageError.
    """
    omega = _normalize_omega(omega)
    nu = spcore.nullity(path.endpoint, omega, policy)
    if nu == 0:
        return index_nondegenerate(path, omega, policy)
    values = {}
    for name, tail in _perturbation_family(path, omega, policy):
        try:
            values[name] = index_nondegenerate(tail, omega, policy).index
        except ConditioningError:
            # random members are optional safety; the rotation pair is not
            if name.startswith("rot"):
                raise
    if not values:
        raise PerturbationCoverageError("no resolvable perturbation found")
    vmin, vmax = min(values.values()), max(values.values())
    if "rot-1" in values and "rot+1" in values:
        if vmax - vmin != nu:
            raise PerturbationCoverageError(
                f"perturbation spread {vmax - vmin} != nullity {nu}: {values!r}")
    return IndexResult(vmin, nu, omega, {"family": values})


def omega_index(path: SymplecticPath, omega=1.0,
                policy: NumericPolicy = DEFAULT_POLICY) -> IndexResult:
    """(i_omega, nu_omega) of a symplectic path; handles degenerate endpoints."""
    omega = _normalize_omega(omega)
    if spcore.nullity(path.endpoint, omega, policy) == 0:
        return index_nondegenerate(path, omega, policy)
    return index_degenerate(path, omega, policy)


def index1(path: SymplecticPath, policy: NumericPolicy = DEFAULT_POLICY) -> IndexResult:
    """The Maslov-type index pair (i_1, nu_1)."""
    return omega_index(path, 1.0, policy)


def roots_of(z: complex, m: int):
    """The m-th roots of a unit-modulus z, as exact unit-modulus numbers."""
    alpha = np.angle(z)
    return [np.exp(1j * (alpha + 2 * np.pi * k) / m) for k in range(m)]


@dataclass(frozen=True)
class BottCheck:
    lhs_index: int
    rhs_index: int
    lhs_nullity: int
    rhs_nullity: int

    @property
    def index_ok(self):
        return self.lhs_index == self.rhs_index

    @property
    def nullity_ok(self):
        return self.lhs_nullity == self.rhs_nullity


def bott_check(path: SymplecticPath, m: int, z=1.0,
               policy: NumericPolicy = DEFAULT_POLICY) -> BottCheck:
    """Both sides of i_z(gamma, m) = sum over omega^m = z of i_omega(gamma),
    together with the nullity counterpart."""
    if m < 1:
        raise ValidationError("iteration count must be >= 1")
    z = _normalize_omega(z)
    iterated = path.iterate(m)
    lhs = omega_index(iterated, z, policy)
    rhs_i, rhs_nu = 0, 0
    for w in roots_of(z, m):
        r = omega_index(path, w, policy)
        rhs_i += r.index
        rhs_nu += r.nullity
    return BottCheck(lhs.index, rhs_i, lhs.nullity, rhs_nu)


def endpoint_free_index(mats: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY,
                        base_samples: int = 65) -> int:
    """Index of a free curve f in Sp(2n): i(f) = i_1(xi * f) - i_1(xi)
    for a path xi from I to f's start point."""
    mats = np.asarray(mats, dtype=float)
    n = spcore.half_dim(mats[0])
    start = mats[0]
    at = spcore.symplectic_interpolation_to(start)
    ts = np.linspace(0.0, 1.0, base_samples)
    xi_mats = np.array([at(t) for t in ts])
    xi = SymplecticPath(n, 1.0, ts, xi_mats)
    if xi.max_step() >= 0.5:
        raise ValidationError("base path under-sampled in endpoint_free_index")
    tail_times = np.linspace(0.0, 1.0, len(mats))
    eta = xi.append_matrices(tail_times, mats)
    i_eta = index_degenerate(eta, 1.0, policy).index
    i_xi = index_degenerate(xi, 1.0, policy).index
    return i_eta - i_xi


# ---------------------------------------------------------------------------
# Sp(2) crossing oracle


def _one_sided_velocity(times: np.ndarray, mats: np.ndarray, i: int, side: str) -> np.ndarray:
    """One-sided gamma' gamma^{-1} near sample i, from a centered stencil on
    the requested side (second-order where the path is smooth)."""
    if side == "right":
        a, b = i, min(i + 2, len(times) - 1)
    else:
        a, b = max(i - 2, 0), i
    h = times[b] - times[a]
    if h <= 0:
        raise OracleInconclusiveError("no room for a one-sided velocity")
    return (mats[b] @ np.linalg.inv(mats[a]) - np.eye(mats.shape[1])) / h


def _near_kernel(M: np.ndarray, omega: complex, step_scale: float):
    """Approximate omega-kernel at a sample adjacent to a crossing.

    Singular values of (M - omega I) below ~ the local sampling step count
    as kernel directions; a clear gap to the rest is required.
    """
    d = M.shape[0]
    U, sv, Vh = np.linalg.svd(M.astype(complex) - omega * np.eye(d))
    thr = 50.0 * step_scale + 1e-9 * (1.0 + sv[0])
    k = int(np.sum(sv < thr))
    if k == 0:
        raise OracleInconclusiveError("crossing form requested off the surface")
    if k < d and sv[d - k - 1] < 5.0 * thr:
        raise OracleInconclusiveError("kernel dimension ambiguous at crossing")
    return Vh[d - k:].conj().T


def _crossing_form(times: np.ndarray, mats: np.ndarray, i: int, omega: complex, side: str):
    """Eigenvalues of the Hermitian crossing form v* B_loc v on the
    omega-kernel at sample i, B_loc = -J gamma' gamma^{-1}, plus its scale."""
    M = mats[i]
    n = M.shape[0] // 2
    J = spcore.standard_J(n)
    X = _one_sided_velocity(times, mats, i, side)
    B = -J @ X
    B = (B + B.T) / 2.0
    j1, j2 = max(i - 1, 0), min(i + 1, len(times) - 1)
    step_scale = np.linalg.norm(mats[j2] - mats[j1], 2) / max(j2 - j1, 1)
    K = _near_kernel(M, omega, step_scale)
    C = K.conj().T @ B.astype(complex) @ K
    C = (C + C.conj().T) / 2.0
    return np.linalg.eigvalsh(C), float(np.linalg.norm(B, 2))


def _form_counts(eigs: np.ndarray, scale: float):
    tol = 1e-6 * max(scale, 1e-12)
    if np.any(np.abs(eigs) < tol):
        raise OracleInconclusiveError(
            f"degenerate crossing form (eigenvalues {eigs!r})")
    return int(np.sum(eigs > 0)), int(np.sum(eigs < 0))


def _boundary_form(path: SymplecticPath, omega: complex, at: str):
    """Crossing form at an on-surface boundary (t = 0 or t = tau), evaluated
    with shrinking finite-difference stencils until its eigenvalues
    stabilize; near-degenerate directions would otherwise pick up the sign
    of the stencil error."""
    tau = path.tau
    w = 8.0 * tau / max(len(path.times) - 1, 1)
    prev = None
    eigs = bscale = None
    last_exc = None
    for _ in range(10):
        try:
            if at == "start":
                ts, ms = _window(path, 0.0, w, samples=5)
                eigs, bscale = _crossing_form(ts, ms, 0, omega, "right")
            else:
                ts, ms = _window(path, tau - w, tau, samples=5)
                eigs, bscale = _crossing_form(ts, ms, len(ts) - 1, omega, "left")
        except OracleInconclusiveError as exc:
            # a wide stencil can blur the kernel; shrink and retry
            last_exc = exc
            if path.generator is None or w < 1e-8 * tau:
                raise
            w /= 32.0
            continue
        if prev is not None and len(prev) == len(eigs):
            drift = np.max(np.abs(eigs - prev)) / max(bscale, 1e-12)
            if drift < 1e-3 and np.all(np.sign(eigs) == np.sign(prev)) \
                    and np.min(np.abs(eigs)) > 1e-5 * bscale:
                return eigs, bscale
        prev = eigs
        if path.generator is None or w < 1e-8 * tau:
            break
        w /= 32.0
    if eigs is None:
        raise last_exc or OracleInconclusiveError("boundary form never resolved")
    return eigs, bscale


def _window(path: SymplecticPath, lo: float, hi: float, samples: int = 129):
    """Locally resampled (times, mats) around [lo, hi] through the generator;
    falls back to the existing samples when no generator is available."""
    lo = max(0.0, lo)
    hi = min(path.tau, hi)
    if path.generator is None or hi <= lo:
        sel = (path.times >= lo - 1e-15) & (path.times <= hi + 1e-15)
        if np.sum(sel) < 3:
            lo_i = max(0, np.searchsorted(path.times, lo) - 1)
            hi_i = min(len(path.times) - 1, np.searchsorted(path.times, hi) + 1)
            sel = np.zeros(len(path.times), dtype=bool)
            sel[lo_i:hi_i + 1] = True
        return path.times[sel], path.mats[sel]
    ts = np.linspace(lo, hi, samples)
    if ts[0] > 0.0:
        full = np.concatenate([[0.0], ts])
        mats = path.generator.sample(full)[1:]
    else:
        mats = path.generator.sample(ts)
    return ts, mats


def _locate_crossing(path: SymplecticPath, level: float, lo: float, hi: float,
                     resolution: float):
    """Narrow a sign change of h(t) = tr - level down to `resolution * tau`,
    keeping a sign-change bracket at every step; returns
    (times, mats, index-of-nearest-sample)."""
    for _ in range(8):
        times, mats = _window(path, lo, hi, samples=65)
        h = np.array([float(np.trace(M)) for M in mats]) - level
        flips = np.nonzero(np.sign(h[1:]) != np.sign(h[:-1]))[0]
        if len(flips) == 0:
            j = int(np.argmin(np.abs(h)))
            break
        f = int(flips[0])
        j = f if abs(h[f]) < abs(h[f + 1]) else f + 1
        if hi - lo <= resolution * path.tau or path.generator is None:
            break
        lo, hi = times[max(f - 1, 0)], times[min(f + 2, len(times) - 1)]
    j = min(max(j, 2), len(times) - 3)
    return times, mats, j


def _eval_crossing(path: SymplecticPath, level: float, lo: float, hi: float,
                   omega: complex, resolution: float) -> float:
    """m+(right form) - m-(left form) at the crossing bracketed by (lo, hi).

    Slow or near-identity crossings (form values comparable to the
    finite-difference error of the velocity, or kernels not yet separated
    from spectators) are relocated at sharper resolution before judging.
    """
    res = resolution
    last_exc = None
    for attempt in range(4):
        ts, ms, j = _locate_crossing(path, level, lo, hi, res)
        try:
            left, bl = _crossing_form(ts, ms, j, omega, "left")
            right, br = _crossing_form(ts, ms, j, omega, "right")
        except OracleInconclusiveError as exc:
            if path.generator is None or attempt == 3:
                raise
            last_exc = exc
            res /= 256.0
            continue
        dt_local = ts[min(j + 1, len(ts) - 1)] - ts[j]
        err = 20.0 * (dt_local / path.tau) * (1.0 + max(bl, br)) ** 2
        small = min(np.min(np.abs(left)), np.min(np.abs(right)))
        if (small > 3.0 * err and small > 1e-6 * max(bl, br)) \
                or path.generator is None or attempt == 3:
            _, ql = _form_counts(left, bl)
            pr, _ = _form_counts(right, br)
            return float(pr - ql)
        res /= 256.0
    raise last_exc or OracleInconclusiveError("crossing never resolved")


def _zone_scan(path: SymplecticPath, lo: float, hi: float, level: float,
               omega: complex, resolution: float, noise_floor: float,
               anchor: str, levels: int = 2) -> float:
    """Sum of crossing contributions hidden inside (lo, hi), detected by
    nested fine scans anchored at the on-surface end ('lo' for the start
    zone, 'hi' for the end zone). Crossings here can sit far below the base
    sampling when the initial form is nearly degenerate."""
    total = 0.0
    for _ in range(levels):
        ts, ms = _window(path, lo, hi, samples=257)
        hz = np.array([float(np.trace(M)) for M in ms]) - level
        flips = np.nonzero(np.sign(hz[1:]) != np.sign(hz[:-1]))[0]
        done = []
        for f in flips:
            if max(abs(hz[f]), abs(hz[f + 1])) > noise_floor and \
                    min(abs(hz[f]), abs(hz[f + 1])) > 0.0:
                total += _eval_crossing(path, level, ts[f], ts[f + 1], omega, resolution)
                done.append(ts[f])
        # descend into the still-unresolved sliver next to the anchor
        if anchor == "lo":
            hi = min(min(done) if done else hi, lo + (hi - lo) / 64.0)
        else:
            lo = max(max(done) if done else lo, hi - (hi - lo) / 64.0)
        if hi - lo <= 4.0 * np.finfo(float).eps * path.tau or path.generator is None:
            break
    return total


def _touch_contribution(path: SymplecticPath, level: float, lo: float, hi: float,
                        omega: complex, scale: float, resolution: float):
    """Handle a sign-preserving approach of h to zero.

    Refinement distinguishes three outcomes: a hidden pair of ordinary
    crossings (each counted), a genuine touch with a two-dimensional kernel
    (passage through +-I, contributing the full form signature), or a
    near-miss (no contribution). A one-dimensional tangency is inconclusive.
    """
    times, mats = _window(path, lo, hi)
    prev_min = np.inf
    floor = 1e-14 * max(1.0, scale)
    for _ in range(12):
        hraw = np.array([float(np.trace(M)) for M in mats]) - level
        sgn = np.sign(hraw) * (np.abs(hraw) > floor)
        flips = [f for f in np.nonzero(sgn[1:] != sgn[:-1])[0]
                 if sgn[f] != 0 and sgn[f + 1] != 0]
        if len(flips) > 4:
            raise OracleInconclusiveError("oscillatory surface contact")
        if flips:
            return sum(_eval_crossing(path, level, times[f], times[f + 1],
                                      omega, resolution) for f in flips)
        h = np.abs(hraw)
        j = int(np.argmin(h))
        hmin = h[j]
        if hmin > 1e-10 * scale and hmin > 1e-4 * prev_min:
            return 0.0  # bounded away from the surface: no event
        if (times[-1] - times[0]) <= resolution * path.tau * 16 or path.generator is None:
            break
        prev_min = max(hmin, 1e-300)
        lo2, hi2 = times[max(j - 2, 0)], times[min(j + 2, len(times) - 1)]
        times, mats = _window(path, lo2, hi2)
    if hmin > 1e-8 * scale:
        return 0.0
    # a genuine touch: the one-sided junction forms decide (a smooth kiss has
    # a vanishing transversal form there and is flagged as degenerate)
    j = min(max(j, 2), len(times) - 3)
    left, bl = _crossing_form(times, mats, j, omega, "left")
    right, br = _crossing_form(times, mats, j, omega, "right")
    _, ql = _form_counts(left, bl)
    pr, _ = _form_counts(right, br)
    return float(pr - ql)


def sp2_crossing_oracle(path: SymplecticPath, omega=1.0,
                        policy: NumericPolicy = DEFAULT_POLICY,
                        resolution: float = 1e-4) -> int:
    """Brute-force i_omega for Sp(2) paths by signed surface crossings.

    The singular surface is tr M = 2 Re(omega). Interior transversal
    crossings contribute m+(right form) - m-(left form); the start (on the
    surface only for omega = 1) contributes half the signature of the
    initial form; an end on the surface contributes -m-(left form), which
    reproduces the minimum convention of the degenerate index. Crossings are
    located by local refinement through the generator down to
    `resolution * tau`.
    """
    if path.n != 1:
        raise ValidationError("the crossing oracle is an Sp(2) tool")
    omega = _normalize_omega(omega)
    while path.generator is not None and len(path.times) < 513:
        path = path.refine(2)
    level = 2.0 * omega.real
    h = np.array([float(np.trace(M)) for M in path.mats]) - level
    k = len(h)
    scale = float(np.max(np.abs(h)))
    if scale == 0.0:
        raise OracleInconclusiveError("path lies entirely on the singular surface")
    # traces are exact to ~1e-15, so "on the surface" can be judged tightly;
    # genuinely shallow excursions (depth ~1e-10) are real crossings
    touch_tol = 1e-12 * max(1.0, scale)

    i0 = 0
    while i0 < k and abs(h[i0]) < touch_tol:
        i0 += 1
    i1 = k - 1
    while i1 >= 0 and abs(h[i1]) < touch_tol:
        i1 -= 1

    total = 0.0
    dt_base = path.tau / max(k - 1, 1)
    noise_floor = 3e-14 * max(1.0, scale)
    if i0 > 0:
        # the path starts on the surface (always the case for omega = 1)
        eigs, bscale = _boundary_form(path, omega, "start")
        p, q = _form_counts(eigs, bscale)
        total += 0.5 * (p - q)
        # crossings hidden between the surface departure and the first clean sample
        total += _zone_scan(path, 0.0, path.times[i0], level, omega,
                            resolution, noise_floor, anchor="lo")
    elif abs(omega - 1.0) < 1e-12:
        raise OracleInconclusiveError("omega = 1 path failed to start on the surface")

    # interior events at base resolution: sign changes and candidate touches
    brackets, touch_centers = [], []
    prev_sign = np.sign(h[i0]) if i0 <= i1 else 0.0
    i = i0 + 1
    while i <= i1:
        if abs(h[i]) < touch_tol:
            j = i
            while j <= i1 and abs(h[j]) < touch_tol:
                j += 1
            if j > i1:
                break
            if j - i > 2:
                raise OracleInconclusiveError("path runs along the singular surface")
            if np.sign(h[j]) != prev_sign:
                brackets.append((max(i - 2, 0), min(j + 1, k - 1)))
                prev_sign = np.sign(h[j])
            else:
                touch_centers.append(i)
            i = j + 1
        else:
            s = np.sign(h[i])
            if s != prev_sign:
                brackets.append((i - 1, i))
                prev_sign = s
            elif i + 1 <= i1 and abs(h[i]) < 1e-3 * scale and \
                    abs(h[i]) <= abs(h[i - 1]) and abs(h[i]) < abs(h[i + 1]):
                touch_centers.append(i)
            i += 1

    for lo_i, hi_i in brackets:
        total += _eval_crossing(path, level, path.times[lo_i], path.times[hi_i],
                                omega, resolution)
    flip_samples = {b for br in brackets for b in br}
    for c in touch_centers:
        if any(abs(c - b) <= 2 for b in flip_samples):
            continue  # adjacent to a crossing that has been counted
        total += _touch_contribution(path, level, path.times[max(c - 2, 0)],
                                     path.times[min(c + 2, k - 1)],
                                     omega, scale, resolution)

    # endpoint on the surface: clockwise-retraction minimum
    if i1 < k - 1 or spcore.nullity(path.endpoint, omega, policy) > 0:
        total += _zone_scan(path, path.times[i1], path.tau, level, omega,
                            resolution, noise_floor, anchor="hi")
        eigs, bscale = _boundary_form(path, omega, "end")
        _, q = _form_counts(eigs, bscale)
        total += -q

    result = int(np.rint(total))
    if abs(total - result) > 1e-9:
        raise OracleInconclusiveError(f"non-integer crossing count, residue {result - total:.2e}")
    return result
