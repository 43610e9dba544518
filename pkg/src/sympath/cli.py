"""Command-line front end.

Subcommands cover the index engine (index, omega-index, iterate, splitting,
normal-form, krein), the variational oracle (morse), and the trace formulas
(trace, weyl, selberg, torus-check). Results go to --out or stdout as JSON
or CSV; report commands optionally render a matplotlib figure next to the
delimited output via --plot.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from sympath import io as sio
from sympath import spcore
from sympath.gutzwiller import (SystemDescriptor, anisotropic_ho_catalog,
                                anisotropic_ho_levels, exact_spectrum_density,
                                gutzwiller_density, weyl_term)
from sympath.index import omega_index
from sympath.iteration import (precise_iteration_index, recognize_normal_form,
                               splitting_numbers)
from sympath.linham import morse_index_fourier, sturm_path
from sympath.paths import SymplecticPath
from sympath.policy import (ConditioningError, DEFAULT_POLICY, NumericPolicy,
                            SympathError, ValidationError)
from sympath.selberg import (LengthSpectrum, selberg_lhs_heat, selberg_rhs_heat,
                             torus_trace_check)


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def _opt(args, name, default=None):
    return getattr(args, name, default)


def _emit(args, text: str):
    out = _opt(args, "out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(data) -> str:
    return json.dumps(data, sort_keys=True) + "\n"


def _policy(args) -> NumericPolicy:
    policy_file = _opt(args, "policy")
    policy = sio.policy_from_json(_read(policy_file)) if policy_file else DEFAULT_POLICY
    overrides = {}
    for name in ("tol_sym", "tol_rank", "tol_det", "tol_cluster", "seed"):
        value = _opt(args, name)
        if value is not None:
            overrides[name] = value
    if overrides:
        from dataclasses import replace
        policy = replace(policy, **overrides)
    return policy


def _unit_omega(args) -> complex:
    omega = sio.parse_complex_pair(args.omega)
    r = abs(omega)
    if abs(r - 1.0) > 1e-8:
        print(f"warning: |omega| = {r!r} renormalized onto the unit circle",
              file=sys.stderr)
    if r == 0:
        raise ValidationError("omega must be nonzero")
    return omega / r


def _load_path(args, policy) -> SymplecticPath:
    return sio.path_from_spec(_read(args.path), policy=policy)


def _load_matrix(name: str) -> np.ndarray:
    text = _read(name)
    if name.endswith(".json"):
        return sio.matrix_from_json(text)
    return sio.matrix_from_csv(text)


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_index(args, policy):
    path = _load_path(args, policy)
    r = omega_index(path, 1.0, policy)
    _emit(args, _json({"omega": [1.0, 0.0], "index": r.index, "nullity": r.nullity}))


def cmd_omega_index(args, policy):
    path = _load_path(args, policy)
    w = _unit_omega(args)
    r = omega_index(path, w, policy)
    _emit(args, _json({"omega": [w.real, w.imag], "index": r.index, "nullity": r.nullity}))


def cmd_iterate(args, policy):
    path = _load_path(args, policy)
    i1 = omega_index(path, 1.0, policy).index
    formula = precise_iteration_index(i1, path.endpoint, args.m, policy)
    direct = omega_index(path.iterate(args.m), 1.0, policy).index
    _emit(args, _json({"m": args.m, "index_formula": formula, "index_direct": direct}))


def cmd_splitting(args, policy):
    M = _load_matrix(args.matrix)
    w = _unit_omega(args)
    s = splitting_numbers(M, w, policy)
    _emit(args, _json({"omega": [w.real, w.imag], "s_plus": s.s_plus, "s_minus": s.s_minus}))


def cmd_normal_form(args, policy):
    M = _load_matrix(args.matrix)
    rec = recognize_normal_form(M, policy)
    if rec is None:
        _emit(args, _json({"recognized": False}))
        return
    factors, m0 = rec
    def describe(f):
        if f.kind == "N2":
            theta, b = f.parameters
            return {"kind": "N2", "theta": theta, "b": [list(r) for r in np.asarray(b)],
                    "trivial": f.trivial}
        return {"kind": f.kind, "parameters": list(f.parameters), "trivial": f.trivial}
    _emit(args, _json({"recognized": True,
                       "factors": [describe(f) for f in factors],
                       "m0": [describe(f) for f in m0]}))


def cmd_krein(args, policy):
    M = _load_matrix(args.matrix)
    entries = spcore.krein_types(M, policy)
    _emit(args, _json({"eigenvalues": [
        {"value": [e.value.real, e.value.imag],
         "algebraic_multiplicity": e.algebraic_multiplicity,
         "geometric_multiplicity": e.geometric_multiplicity,
         "krein_type": list(e.krein_type)} for e in entries]}))


def cmd_morse(args, policy):
    S = sio.sturm_from_spec(_read(args.sturm))
    m_minus, m_zero = morse_index_fourier(S, args.K, policy)
    r = omega_index(sturm_path(S, policy=policy), 1.0, policy)
    _emit(args, _json({"m_minus": m_minus, "m_zero": m_zero,
                       "i1": r.index, "nu1": r.nullity,
                       "identity_holds": (m_minus == r.index and m_zero == r.nullity)}))


def cmd_trace(args, policy):
    if args.system != "aniso-ho":
        raise ValidationError("only the built-in system 'aniso-ho' is available")
    grid = np.linspace(args.emin, args.emax, args.esteps)
    orbits = anisotropic_ho_catalog(args.w1, args.w2, args.emax, args.max_rep,
                                    args.hbar, policy)
    system = SystemDescriptor("harmonic", 2, 1.0, (args.w1, args.w2))
    density = gutzwiller_density(orbits, grid, args.hbar, args.sigma, system, policy)
    levels = anisotropic_ho_levels(args.w1, args.w2, args.emax + 6.0 * args.sigma)
    exact = exact_spectrum_density(levels, grid, args.sigma)
    rows = zip(grid, density.values, exact.values)
    _emit(args, sio.values_to_csv(rows, header=("energy", "semiclassical", "exact")))
    if args.plot:
        from sympath import plotting
        plotting.density_figure(density, args.plot, exact=exact,
                                title=f"anisotropic oscillator, sigma={args.sigma}")


def cmd_weyl(args, policy):
    if args.system == "aniso-ho":
        system = SystemDescriptor("harmonic", 2, 1.0, (args.w1, args.w2))
    elif args.system == "box":
        system = SystemDescriptor("box", 1, args.mass, lengths=(args.length,))
    else:
        raise ValidationError(f"unknown system {args.system!r}")
    grid = np.linspace(args.emin, args.emax, args.esteps)
    values = [weyl_term(system, float(E), args.hbar) for E in grid]
    _emit(args, sio.values_to_csv(zip(grid, values), header=("energy", "weyl_density")))
    if args.plot:
        from sympath import plotting
        plotting.weyl_figure(grid, values, args.plot)


def cmd_selberg(args, policy):
    lengths = sio.length_spectrum_from_csv(_read(args.lengths), args.area)
    eigs = [v for v, mult in sio.spectrum_from_csv(_read(args.eigs)) for _ in range(mult)]
    lhs, lhs_tail = selberg_lhs_heat(eigs, args.t)
    rhs, rhs_tail = selberg_rhs_heat(lengths, args.t, args.k_max)
    _emit(args, _json({"t": args.t, "lhs": lhs, "rhs": rhs, "gap": abs(lhs - rhs),
                       "tail_bounds": {"lhs_scale": lhs_tail, "rhs_bound": rhs_tail}}))
    if args.plot:
        from sympath import plotting
        ts = np.geomspace(max(args.t / 8.0, 1e-3), args.t * 8.0, 9)
        lv = [selberg_lhs_heat(eigs, float(s))[0] for s in ts]
        rv = [selberg_rhs_heat(lengths, float(s), args.k_max)[0] for s in ts]
        plotting.heat_trace_figure(ts, lv, rv, args.plot)


def cmd_torus_check(args, policy):
    vals = [float(v) for v in args.basis.split(",")]
    if len(vals) != 4:
        raise ValidationError("--basis needs four numbers a,b,c,d")
    basis = np.array(vals).reshape(2, 2)
    lhs, rhs, gap = torus_trace_check(basis, args.t)
    _emit(args, _json({"t": args.t, "lhs": lhs, "rhs": rhs, "gap": gap,
                       "relative_gap": gap / abs(lhs)}))
    if args.plot:
        from sympath import plotting
        ts = np.geomspace(args.t / 8.0, args.t * 8.0, 9)
        pairs = [torus_trace_check(basis, float(s)) for s in ts]
        plotting.heat_trace_figure(ts, [p[0] for p in pairs], [p[1] for p in pairs],
                                   args.plot, title="torus Poisson identity")


# ---------------------------------------------------------------------------


def _common_options() -> argparse.ArgumentParser:
    """Global options accepted before or after the subcommand."""
    c = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = c.add_argument_group("global options")
    g.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS,
                   help="output format for commands that support both")
    g.add_argument("--out", default=argparse.SUPPRESS, help="write output to a file")
    g.add_argument("--policy", default=argparse.SUPPRESS, help="NumericPolicy JSON file")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    for name in ("tol-sym", "tol-rank", "tol-det", "tol-cluster"):
        g.add_argument(f"--{name}", dest=name.replace("-", "_"),
                       type=float, default=argparse.SUPPRESS)
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    top = argparse.ArgumentParser(prog="sympath", allow_abbrev=False, parents=[common],
                                  description="Maslov-type indices and trace formulas")
    sub = top.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], allow_abbrev=False, **kw)

    p = add_parser("index", help="Maslov-type index of a path spec")
    p.add_argument("--path", required=True)
    p.set_defaults(func=cmd_index)

    p = add_parser("omega-index", help="omega-index of a path spec")
    p.add_argument("--path", required=True)
    p.add_argument("--omega", required=True, help="unit complex as re,im")
    p.set_defaults(func=cmd_omega_index)

    p = add_parser("iterate", help="precise iteration formula vs direct index")
    p.add_argument("--path", required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_iterate)

    p = add_parser("splitting", help="splitting numbers of a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--omega", required=True)
    p.set_defaults(func=cmd_splitting)

    p = add_parser("normal-form", help="basic-normal-form recognition")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_normal_form)

    p = add_parser("krein", help="Krein types of unit-circle eigenvalues")
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_krein)

    p = add_parser("morse", help="Fourier Morse index with i1 cross-check")
    p.add_argument("--sturm", required=True, help="Sturm data JSON")
    p.add_argument("--K", type=int, default=8)
    p.set_defaults(func=cmd_morse)

    p = add_parser("trace", help="semiclassical density CSV (and figure)")
    p.add_argument("--system", default="aniso-ho")
    p.add_argument("--w1", type=float, default=1.0)
    p.add_argument("--w2", type=float, default=float(np.sqrt(2.0)))
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.15)
    p.add_argument("--emin", type=float, default=2.0)
    p.add_argument("--emax", type=float, default=12.0)
    p.add_argument("--esteps", type=int, default=1001)
    p.add_argument("--max-rep", dest="max_rep", type=int, default=20)
    p.add_argument("--plot", default=None, help="render a figure to this file")
    p.set_defaults(func=cmd_trace)

    p = add_parser("weyl", help="mean density of states CSV")
    p.add_argument("--system", default="aniso-ho")
    p.add_argument("--w1", type=float, default=1.0)
    p.add_argument("--w2", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--emin", type=float, default=1.0)
    p.add_argument("--emax", type=float, default=10.0)
    p.add_argument("--esteps", type=int, default=101)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_weyl)

    p = add_parser("selberg", help="heat-kernel trace formula from data files")
    p.add_argument("--lengths", required=True, help="CSV: length[,multiplicity]")
    p.add_argument("--eigs", required=True, help="CSV: eigenvalue[,multiplicity]")
    p.add_argument("--area", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k-max", dest="k_max", type=int, default=32)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_selberg)

    p = add_parser("torus-check", help="flat-torus Poisson identity")
    p.add_argument("--basis", required=True, help="a,b,c,d row-major")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--plot", default=None)
    p.set_defaults(func=cmd_torus_check)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        policy = _policy(args)
        args.func(args, policy)
    except ConditioningError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except SympathError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
