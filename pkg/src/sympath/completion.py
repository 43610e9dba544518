"""Completion paths inside the regular set Sp(2n)_omega^*.

Given M without eigenvalue omega, this module constructs a concrete path
from M to the standard base point M_n^+ or M_n^- of its component, staying
inside the regular set the whole way, and measures the winding of the
determinant of the unitary polar factor along it. Simple connectedness of
the two components makes that winding independent of the construction, so
every stage is verified numerically rather than trusted.

Stages:
  * n = 1: explicit legs in the cylindrical (r, theta, z) model; the
    regular-set condition is a strict trace inequality that each leg
    preserves by monotonicity.
  * exact diamond-block structure: recurse factor by factor.
  * block-triangular [[A, B], [0, D]]: contract B to zero (spectrum frozen).
  * general: spectrum-preserving conjugation onto a diamond assembly of
    invariant 2-dim planes and 4-dim complex-saddle blocks, then explicit
    routes per block.
  * assembly: permutation conjugations plus pairwise merging of D(-2)
    blocks through complex-saddle rotations that never touch the unit
    circle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sympath.policy import DEFAULT_POLICY, CompletionError, NumericPolicy
from sympath import spcore

_MARGIN_FLOOR = 1e-12
_MAX_SEG_SAMPLES = 8193


@dataclass
class Segment:
    fn: object          # callable s in [0, 1] -> (2n, 2n) ndarray
    label: str


# ---------------------------------------------------------------------------
# Sp(2): explicit cylindrical-model route


def _sp2_coords_raw(M2: np.ndarray):
    A = spcore.symmetric_sqrt(M2 @ M2.T)
    U = np.linalg.solve(A, M2)
    theta = float(np.arctan2(U[1, 0], U[0, 0]))
    return float(A[0, 0]), theta, float(A[0, 1])


def _sp2_matrix(r: float, theta: float, z: float) -> np.ndarray:
    P = np.array([[r, z], [z, (1.0 + z * z) / r]])
    return P @ spcore.Rmat(theta)


def _sp2_route(M2: np.ndarray, omega: complex):
    """Segments from M2 in Sp(2)_omega^* to D(2) or D(-2); returns
    (segments, sign). Regularity is the strict inequality
    cos(theta) (r + (1+z^2)/r) != 2 Re omega, monotone along every leg."""
    r0, th0, z0 = _sp2_coords_raw(M2)
    g0 = r0 + (1.0 + z0 * z0) / r0
    trace0 = g0 * np.cos(th0)
    level = 2.0 * omega.real
    if trace0 > level:
        sign, th_end = +1, 0.0
    elif trace0 < level:
        sign, th_end = -1, np.pi if th0 >= 0 else -np.pi
    else:
        raise CompletionError("start matrix sits on the singular surface", M2)

    segs = []
    if th0 != th_end:
        segs.append(Segment(lambda s, a=th0, b=th_end, r=r0, z=z0:
                            _sp2_matrix(r, a + s * (b - a), z), "sp2-rotate"))
    z_mid = np.sign(z0) * max(1.0, abs(z0)) if z0 != 0 else 1.0
    if z0 != z_mid:
        segs.append(Segment(lambda s, a=z0, b=z_mid, r=r0, th=th_end:
                            _sp2_matrix(r, th, a + s * (b - a)), "sp2-z-out"))
    if r0 != 2.0:
        segs.append(Segment(lambda s, a=r0, th=th_end, z=z_mid:
                            _sp2_matrix(a * (2.0 / a) ** s, th, z), "sp2-r"))
    segs.append(Segment(lambda s, th=th_end, z=z_mid:
                        _sp2_matrix(2.0, th, (1.0 - s) * z), "sp2-z-in"))
    return segs, sign


# ---------------------------------------------------------------------------
# embeddings


def _slot_rows(idx, n):
    idx = list(idx)
    return idx + [n + i for i in idx]


def _embed(seg_fn, rows, template):
    rows = np.asarray(rows)
    base = template.copy()

    def fn(s):
        out = base.copy()
        out[np.ix_(rows, rows)] = seg_fn(s)
        return out
    return fn


def _diamond_components(M: np.ndarray, tol: float = 1e-11):
    """Connected components of the diamond-coupling graph; None if trivial."""
    n = spcore.half_dim(M)
    if n == 1:
        return None
    scale = max(1.0, np.max(np.abs(M)))
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent[find(a)] = find(b)

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            coupled = max(abs(M[i, j]), abs(M[i, n + j]),
                          abs(M[n + i, j]), abs(M[n + i, n + j]))
            if coupled > tol * scale:
                union(i, j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    comps = sorted(groups.values(), key=lambda g: g[0])
    if len(comps) == 1:
        return None
    return comps


# ---------------------------------------------------------------------------
# conjugation segments


def _conjugation_segment(M: np.ndarray, P: np.ndarray, label: str) -> Segment:
    """N(s) = Q(s)^{-1} M Q(s): spectrum-constant drive of M to P^{-1} M P."""
    qat = spcore.symplectic_interpolation_to(P)

    def fn(s):
        Q = qat(s)
        return np.linalg.solve(Q, M @ Q)
    return Segment(fn, label)


def _orthogonal_conjugation_segment(M: np.ndarray, u_target: np.ndarray, label: str) -> Segment:
    uat = spcore.unitary_interpolation(u_target)

    def fn(s):
        U = spcore.unitary_to_orthosymplectic(uat(s))
        return U @ M @ U.T
    return Segment(fn, label)


# ---------------------------------------------------------------------------
# complex-saddle (quadruple) blocks


def _t_form(rho: float, phi: float) -> np.ndarray:
    R = spcore.Rmat(phi)
    out = np.zeros((4, 4))
    out[:2, :2] = rho * R
    out[2:, 2:] = R / rho
    return out


def _t_params(B: np.ndarray):
    A = B[:2, :2]
    rho = float(np.sqrt(np.linalg.det(A)))
    phi = float(np.arctan2(A[1, 0], A[0, 0]))
    return rho, phi


def _quad_route(B: np.ndarray):
    """Path from a T-form complex-saddle block to D(2) diamond D(2); the
    spectrum rho^{+-1} e^{+-i phi} never meets the unit circle."""
    rho0, phi0 = _t_params(B)
    if abs(rho0 - 1.0) < 1e-9:
        raise CompletionError("complex-saddle block with modulus ~ 1", B)
    resid = np.max(np.abs(B - _t_form(rho0, phi0))) / max(1.0, rho0)
    if resid > 1e-6:
        raise CompletionError(f"saddle block not in T-form (residual {resid:.2e})", B)

    def fn(s):
        rho = rho0 * (2.0 / rho0) ** s
        phi = (1.0 - s) * phi0
        return _t_form(rho, phi)
    return [Segment(fn, "saddle-contract")], (+1, +1)


# ---------------------------------------------------------------------------
# spectral splitting into invariant symplectic planes / quads


def _real_kernel_basis(M: np.ndarray, lam: float, policy, spread: float):
    d = M.shape[0]
    A = M - lam * np.eye(d)
    return spcore.kernel_basis(A, policy.tol_rank,
                               abs_floor=10.0 * spread + 1e-13 * np.linalg.norm(M, 2))


def _complex_eigenspace(M: np.ndarray, lam: complex, policy, spread: float):
    d = M.shape[0]
    A = M.astype(complex) - lam * np.eye(d)
    return spcore.kernel_basis(A, policy.tol_rank,
                               abs_floor=10.0 * spread + 1e-13 * np.linalg.norm(M, 2))


def _group_clusters(M: np.ndarray, policy: NumericPolicy):
    """Cluster eigenvalues and close the clusters under conjugation and
    inversion. Returns a list of groups, each a list of
    (lambda, multiplicity, spread)."""
    vals = np.linalg.eigvals(M)
    reps, members = spcore._cluster_values(vals, policy.tol_cluster)
    entries = []
    for r, mem in zip(reps, members):
        lam = complex(r)
        if abs(abs(lam) - 1.0) < policy.tol_cluster:
            lam = lam / abs(lam)
            if abs(lam.imag) < policy.tol_cluster:
                lam = complex(np.sign(lam.real), 0.0)
        elif abs(lam.imag) < policy.tol_cluster * abs(lam):
            lam = complex(lam.real, 0.0)
        spread = max(abs(v - lam) for v in mem)
        entries.append([lam, len(mem), spread])

    used = [False] * len(entries)

    def close_to(a, b):
        return abs(a - b) <= 10 * policy.tol_cluster * max(1.0, abs(a))

    groups = []
    for i, (lam, mult, spread) in enumerate(entries):
        if used[i]:
            continue
        orbit = {lam, np.conj(lam), 1.0 / lam, 1.0 / np.conj(lam)}
        group = []
        for j, (mu, mj, sj) in enumerate(entries):
            if not used[j] and any(close_to(mu, o) for o in orbit):
                used[j] = True
                group.append((mu, mj, sj))
        groups.append(group)
    return groups


def _normalize_pairing(V: np.ndarray, W: np.ndarray, J: np.ndarray, conj_w: bool):
    """Rescale the columns of W so that omega(v_i, w'_j) = delta_ij
    (with conjugation of W in the pairing when conj_w)."""
    Wp = W.conj() if conj_w else W
    Z = np.array([[spcore.omega_form(V[:, i], Wp[:, j], J) for j in range(W.shape[1])]
                  for i in range(V.shape[1])])
    if min(Z.shape) == 0 or abs(np.linalg.det(Z)) < 1e-12:
        raise CompletionError("degenerate symplectic pairing in spectral split")
    C = np.linalg.inv(Z)
    Wn = W @ (C.conj() if conj_w else C)
    return Wn


def _split_units(M: np.ndarray, omega: complex, policy: NumericPolicy):
    """Minimal invariant symplectic units of M.

    Returns a list of dicts with keys 'cols' (real basis columns, q's then
    p's) and 'kind' ('plane' or 'quad'). Raises CompletionError for
    non-semisimple clusters of real dimension > 2.
    """
    d = M.shape[0]
    n = d // 2
    J = spcore.standard_J(n)
    units = []
    for group in _group_clusters(M, policy):
        total_mult = sum(m for _, m, _ in group)
        lam0, _, spread0 = group[0]
        if abs(lam0.imag) < 1e-14 and abs(abs(lam0) - 1.0) < 1e-14:
            # lambda = +-1
            lam = float(np.sign(lam0.real))
            root = spcore.root_space(M, lam, policy, spread=spread0)
            eig = _real_kernel_basis(M, lam, policy, spread0)
            if eig.shape[1] == root.shape[1]:
                # semisimple: symplectic Gram-Schmidt on the real eigenspace
                basis = eig.real if np.iscomplexobj(eig) else eig
                cols = _symplectic_gram_schmidt(basis, J)
                for k in range(cols.shape[1] // 2):
                    units.append({"kind": "plane",
                                  "cols": cols[:, [2 * k, 2 * k + 1]]})
            elif root.shape[1] == 2:
                q, p = _plane_from_real_basis(root, J)
                units.append({"kind": "plane", "cols": np.column_stack([q, p])})
            else:
                raise CompletionError(
                    f"non-semisimple eigenvalue cluster at {lam} of dimension "
                    f"{root.shape[1]} is unsupported", M)
        elif abs(lam0.imag) < 1e-14:
            # real pair {lambda, 1/lambda}
            lam = lam0.real
            lam = lam if abs(lam) > 1 else 1.0 / lam
            mult = total_mult // 2
            V = _real_kernel_basis(M, lam, policy, spread0).real
            W = _real_kernel_basis(M, 1.0 / lam, policy, spread0).real
            if V.shape[1] != mult or W.shape[1] != mult:
                raise CompletionError(
                    f"non-semisimple real pair at {lam:.6g}", M)
            Wn = _normalize_pairing(V, W, J, conj_w=False)
            for i in range(mult):
                units.append({"kind": "plane",
                              "cols": np.column_stack([V[:, i], Wn[:, i].real])})
        elif abs(abs(lam0) - 1.0) < 1e-12:
            # circle pair {e^{i theta}, e^{-i theta}}
            lam = lam0 if lam0.imag > 0 else np.conj(lam0)
            mult = total_mult // 2
            E = _complex_eigenspace(M, lam, policy, spread0)
            if E.shape[1] != mult:
                raise CompletionError(
                    f"non-semisimple circle pair at angle {np.angle(lam):.6g}", M)
            K = E.conj().T @ (1j * J) @ E
            w, Vk = np.linalg.eigh((K + K.conj().T) / 2.0)
            if np.min(np.abs(w)) < 1e-8 * max(np.max(np.abs(w)), 1e-30):
                raise CompletionError("isotropic Krein direction in circle cluster", M)
            for i in range(mult):
                v = E @ Vk[:, i]
                kappa = float(w[i])
                x1, x2 = v.real, v.imag
                a = np.sqrt(2.0 / abs(kappa))
                if kappa > 0:
                    q, p = a * x1, a * x2
                else:
                    q, p = a * x2, a * x1
                units.append({"kind": "plane", "cols": np.column_stack([q, p])})
        else:
            # complex quadruple {lam, conj, inverses}
            lam = lam0
            if abs(lam) < 1.0:
                lam = 1.0 / np.conj(lam)
            mult = total_mult // 4
            V = _complex_eigenspace(M, lam, policy, spread0)
            Wraw = _complex_eigenspace(M, 1.0 / np.conj(lam), policy, spread0)
            if V.shape[1] != mult or Wraw.shape[1] != mult:
                raise CompletionError(
                    f"non-semisimple complex quadruple at {lam:.6g}", M)
            Wn = _normalize_pairing(V, Wraw, J, conj_w=True)
            for i in range(mult):
                v, w = V[:, i], Wn[:, i]
                q1, q2 = np.sqrt(2.0) * v.real, np.sqrt(2.0) * v.imag
                p1, p2 = np.sqrt(2.0) * w.real, np.sqrt(2.0) * w.imag
                units.append({"kind": "quad",
                              "cols": np.column_stack([q1, q2, p1, p2])})
    got = sum(2 if u["kind"] == "plane" else 4 for u in units)
    if got != d:
        raise CompletionError(f"spectral split covered {got} of {d} dimensions", M)
    return units


def _plane_from_real_basis(basis: np.ndarray, J: np.ndarray):
    b = basis.real if np.iscomplexobj(basis) else basis
    b1, b2 = b[:, 0], b[:, 1]
    c = float(np.real(spcore.omega_form(b1, b2, J)))
    if abs(c) < 1e-12:
        raise CompletionError("isotropic invariant plane")
    return b1, b2 / c


def _symplectic_gram_schmidt(basis: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Darboux pairs (q1, p1, q2, p2, ...) spanning the column space."""
    cols = [basis[:, k] for k in range(basis.shape[1])]
    out = []
    while cols:
        v = cols.pop(0)
        if np.linalg.norm(v) < 1e-12:
            continue
        pair_vals = [abs(spcore.omega_form(v, w, J)) for w in cols]
        if not pair_vals:
            raise CompletionError("odd leftover in symplectic Gram-Schmidt")
        k = int(np.argmax(pair_vals))
        if pair_vals[k] < 1e-10:
            raise CompletionError("could not find a symplectic partner")
        w = cols.pop(k)
        w = w / spcore.omega_form(v, w, J)
        # omega-orthogonalize the rest against span{v, w}
        rest = []
        for x in cols:
            a = spcore.omega_form(v, x, J)
            b = spcore.omega_form(w, x, J)
            rest.append(x - a * w + b * v)
        cols = rest
        out.extend([v, w])
    return np.column_stack(out)


# ---------------------------------------------------------------------------
# routing


def _route_to_dblocks(M: np.ndarray, omega: complex, policy: NumericPolicy):
    """Segments carrying M to a diamond assembly of D(+-2) blocks.

    Returns (segments, signs, final) with one sign per diamond slot.
    """
    n = spcore.half_dim(M)
    if n == 1:
        segs, sign = _sp2_route(M, omega)
        return segs, [sign], spcore.Dmat(2.0 * sign)

    comps = _diamond_components(M)
    if comps is not None:
        segments = []
        signs = [0] * n
        current = M.copy()
        for comp in comps:
            rows = _slot_rows(comp, n)
            block = current[np.ix_(rows, rows)]
            sub_segs, sub_signs, sub_final = _route_to_dblocks(block, omega, policy)
            for seg in sub_segs:
                segments.append(Segment(_embed(seg.fn, rows, current), seg.label))
            out = current.copy()
            out[np.ix_(rows, rows)] = sub_final
            current = out
            for slot, s in zip(comp, sub_signs):
                signs[slot] = s
        return segments, signs, current

    scale = max(1.0, np.max(np.abs(M)))
    if np.max(np.abs(M[n:, :n])) < 1e-11 * scale and np.max(np.abs(M[:n, n:])) > 1e-11 * scale:
        # block upper-triangular: contract the coupling block, spectrum frozen
        A, B = M[:n, :n].copy(), M[:n, n:].copy()
        D = M[n:, n:].copy()

        def fn(s, A=A, B=B, D=D):
            out = np.zeros_like(M)
            out[:n, :n] = A
            out[:n, n:] = (1.0 - s) * B
            out[n:, n:] = D
            return out
        seg = Segment(fn, "triangular-contract")
        tail_segs, signs, final = _route_to_dblocks(fn(1.0), omega, policy)
        return [seg] + tail_segs, signs, final

    # spectrum-preserving conjugation onto invariant units
    units = _split_units(M, omega, policy)
    cols_q, cols_p, kinds = [], [], []
    for u in units:
        c = u["cols"]
        k = c.shape[1] // 2
        # balance (q/a, p*a) to improve conditioning; a single scale per unit
        # keeps the quad blocks in exact T-form
        a = np.mean([np.linalg.norm(c[:, j]) for j in range(k)])
        c[:, :k] = c[:, :k] / a
        c[:, k:] = c[:, k:] * a
        cols_q.append(c[:, :k])
        cols_p.append(c[:, k:])
        kinds.append((u["kind"], k))
    P = np.column_stack(cols_q + cols_p)
    J = spcore.standard_J(n)
    resid = np.max(np.abs(P.T @ J @ P - J))
    if resid > 1e-6:
        raise CompletionError(f"split basis not symplectic (residual {resid:.2e})", M)
    blocks = np.linalg.solve(P, M @ P)
    segments = [_conjugation_segment(M, P, "split-conjugation")]

    # snap to exact diamond-of-blocks form
    slot = 0
    snapped = np.zeros_like(blocks)
    slot_ranges = []
    for kind, k in kinds:
        rows = _slot_rows(range(slot, slot + k), n)
        snapped[np.ix_(rows, rows)] = blocks[np.ix_(rows, rows)]
        slot_ranges.append((kind, list(range(slot, slot + k))))
        slot += k
    offresid = np.max(np.abs(blocks - snapped)) / max(1.0, np.max(np.abs(blocks)))
    if offresid > 1e-6:
        raise CompletionError(f"off-block residual {offresid:.2e} after split", M)
    current = snapped

    signs = [0] * n
    for kind, slots in slot_ranges:
        rows = _slot_rows(slots, n)
        block = current[np.ix_(rows, rows)]
        if kind == "plane":
            segs2, sgn = _sp2_route(block, omega)
            for seg in segs2:
                segments.append(Segment(_embed(seg.fn, rows, current), seg.label))
            final_block = spcore.Dmat(2.0 * sgn)
            signs[slots[0]] = sgn
        else:
            segs2, sgn_pair = _quad_route(block)
            for seg in segs2:
                segments.append(Segment(_embed(seg.fn, rows, current), seg.label))
            final_block = _t_form(2.0, 0.0)
            signs[slots[0]], signs[slots[1]] = sgn_pair
        out = current.copy()
        out[np.ix_(rows, rows)] = final_block
        current = out
    return segments, signs, current


def _assembly_segments(current: np.ndarray, signs, omega: complex):
    """From a diamond assembly of D(+-2) blocks to M_n^+ or M_n^-."""
    n = len(signs)
    segments = []
    minus = [i for i, s in enumerate(signs) if s < 0]
    plus = [i for i, s in enumerate(signs) if s > 0]
    order = minus + plus
    if order != list(range(n)):
        # permutation conjugation: slot order[k] -> slot k
        perm = np.zeros((n, n))
        for new, old in enumerate(order):
            perm[new, old] = 1.0
        seg = _orthogonal_conjugation_segment(current, perm, "slot-sort")
        segments.append(seg)
        current = seg.fn(1.0)
        # snap
        sorted_signs = [signs[o] for o in order]
        current = spcore.diamond_all([spcore.Dmat(2.0 * s) for s in sorted_signs])
    m = len(minus)
    keep = m % 2
    # merge trailing pairs of D(-2) blocks through complex saddles
    i = m - 2
    while i >= keep:
        rows = _slot_rows([i, i + 1], n)

        def fn(s, rows=rows, base=current.copy()):
            out = base.copy()
            out[np.ix_(rows, rows)] = _t_form(2.0, np.pi * (1.0 - s))
            return out
        segments.append(Segment(fn, f"merge-{i}"))
        current = fn(1.0)
        i -= 2
    sign = -1 if keep else +1
    return segments, current, sign


# ---------------------------------------------------------------------------
# measurement


def _measure_segments(segments, omega: complex, policy: NumericPolicy,
                      start: np.ndarray | None = None):
    """Winding of det u along the chain, with regularity verification.

    The chain may carry tiny snap discontinuities between segments (block
    rounding after conjugations); the argument step across each gap is
    accumulated as well, so the total telescopes to the exact winding of
    the underlying continuous construction.
    """
    total = 0.0
    min_margin = np.inf
    prev_end = None
    prev_det = None if start is None else spcore.polar_u_det(start)
    for seg in segments:
        k = 65
        while True:
            ss = np.linspace(0.0, 1.0, k)
            mats = [seg.fn(s) for s in ss]
            dets = np.array([spcore.polar_u_det(Mk) for Mk in mats])
            steps = np.angle(dets[1:] / dets[:-1])
            if (len(steps) == 0 or np.max(np.abs(steps)) < 1.0) or k >= _MAX_SEG_SAMPLES:
                break
            k = 2 * k - 1
        if len(steps) and np.max(np.abs(steps)) >= 1.0:
            raise CompletionError(f"winding under-resolved on segment {seg.label}")
        d = mats[0].shape[0]
        eye = np.eye(d, dtype=complex)
        for Mk in mats:
            sv = np.linalg.svd(Mk.astype(complex) - omega * eye, compute_uv=False)
            margin = sv[-1] / (1.0 + sv[0])
            min_margin = min(min_margin, margin)
            if margin < _MARGIN_FLOOR:
                raise CompletionError(
                    f"segment {seg.label} touches the singular set "
                    f"(margin {margin:.2e})", Mk)
        if prev_end is not None:
            gap = np.max(np.abs(mats[0] - prev_end)) / max(1.0, np.max(np.abs(prev_end)))
            if gap > 1e-5:
                raise CompletionError(f"discontinuous chain before {seg.label} (gap {gap:.2e})")
        if prev_det is not None:
            total += float(np.angle(dets[0] / prev_det))
        prev_end = mats[-1]
        prev_det = dets[-1]
        total += float(np.sum(steps))
    return total, min_margin, prev_end


def completion_rotation(M: np.ndarray, omega: complex,
                        policy: NumericPolicy = DEFAULT_POLICY):
    """Winding of det u along a verified completion path from M to M_n^{+-}.

    Returns (rotation, sign, info): rotation is the measured total argument
    change, sign +1/-1 says which base point was reached.
    """
    M = np.asarray(M, dtype=float)
    n = spcore.half_dim(M)
    omega = complex(omega)
    omega = omega / abs(omega)
    if spcore.nullity(M, omega, policy) > 0:
        raise CompletionError("endpoint is omega-degenerate; no completion exists", M)
    segments, signs, dblocks = _route_to_dblocks(M, omega, policy)
    asm_segments, final, sign = _assembly_segments(dblocks, signs, omega)
    segments = segments + asm_segments
    target = spcore.Mplus(n) if sign > 0 else spcore.Mminus(n)
    if np.max(np.abs(final - target)) > 1e-8:
        raise CompletionError("assembly did not land on the base point", final)
    rotation, margin, last = _measure_segments(segments, omega, policy, start=M)
    expected = spcore.component_sign(M, omega, policy)
    landed = "plus" if sign > 0 else "minus"
    if expected != "singular" and expected != landed:
        raise CompletionError(
            f"construction landed in the {landed} component but the "
            f"determinant sign says {expected}", M)
    info = {"sign": sign, "margin": margin, "segments": [s.label for s in segments]}
    return rotation, sign, info
