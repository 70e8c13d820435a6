"""Command line interface: one subcommand per operation, JSON reports on stdout.

Exit codes: 0 pass, 1 fail, 2 usage error.
"""

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .config import load_defaults
from .foundation import (
    DomainError, SiegelThetaError, StructuralError, decode_matrix, encode_complex, encode_matrix,
)


class UsageError(Exception):
    pass


# JSON helpers ------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, (complex, np.complexfloating)):
        return encode_complex(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.ndarray):
        return encode_matrix(v) if v.ndim == 2 else [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if v is None or isinstance(v, str):
        return v
    return str(v)


class Context:
    """Parsed arguments merged with --json-in, plus the effective tolerances."""

    def __init__(self, args, defaults):
        self.args = args
        self.extra = {}
        if args.json_in:
            try:
                with open(args.json_in) as fh:
                    data = json.load(fh)
            except OSError as exc:
                raise UsageError(f"cannot read {args.json_in}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise UsageError(f"malformed JSON in {args.json_in}: {exc}") from exc
            if not isinstance(data, dict):
                raise UsageError("--json-in must contain a JSON object")
            self.extra = data
        self.tol = args.tol if args.tol is not None else defaults["tol"]
        self.tail = args.tail if args.tail is not None else defaults["tail"]
        self.radius_max = args.radius_max if args.radius_max is not None else defaults["radius_max"]
        self.seed = args.seed if args.seed is not None else defaults["seed"]
        self.threads = args.threads if args.threads is not None else defaults["threads"]
        self.inputs = {}

    @property
    def policy(self):
        from .theta import TruncationPolicy
        return TruncationPolicy(target_tail=self.tail, max_radius=self.radius_max)

    def raw(self, name, default=None, required=True):
        v = getattr(self.args, name, None)
        if v is None:
            v = self.extra.get(name)
        if v is None:
            if default is None and required:
                raise UsageError(f"missing required input --{name.replace('_', '-')}")
            return default
        return v

    def json(self, name, default=None, required=True):
        v = self.raw(name, default, required)
        if isinstance(v, str):
            try:
                v = json.loads(v)
            except json.JSONDecodeError as exc:
                raise UsageError(f"malformed JSON for --{name}: {exc}") from exc
        self.inputs[name] = v
        return v

    def matrix(self, name, default=None, required=True):
        v = self.json(name, default, required)
        if v is None:
            return None
        if isinstance(v, (int, float)):
            v = [[v]]
        try:
            return decode_matrix(v)
        except StructuralError as exc:
            raise UsageError(f"--{name}: {exc}") from exc

    def integer(self, name, default=None):
        v = self.raw(name, default)
        try:
            out = int(v)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"--{name} must be an integer") from exc
        self.inputs[name] = out
        return out

    def tolerances(self):
        return {"tol": self.tol, "tail": self.tail, "radius_max": self.radius_max}


def report(ctx, command, values, residuals=None, tail_bounds=None, tolerances=None):
    residuals = residuals or {}
    tols = {k: (tolerances or {}).get(k, ctx.tol) for k in residuals}
    ok = all(float(residuals[k]) < tols[k] for k in residuals)
    return {
        "command": command,
        "inputs": ctx.inputs,
        "values": values,
        "residuals": residuals,
        "residual_tolerances": tols,
        "tail_bounds": tail_bounds or {},
        "status": "pass" if ok else "fail",
        "seed": ctx.seed,
        "tolerances": ctx.tolerances(),
        "threads": ctx.threads,
    }


def _omega(ctx, name="omega"):
    return np.asarray(ctx.matrix(name), dtype=complex)


# siegel ------------------------------------------------------------------------------

def siegel_act(ctx):
    from .symplectic import act, symplectic_defect
    M, Om = ctx.matrix("M"), _omega(ctx)
    return report(ctx, "siegel act", {"omega": act(M, Om)},
                  {"symplectic_defect": float(np.max(np.abs(np.asarray(symplectic_defect(M), dtype=float))))})


def siegel_distance(ctx):
    from .symplectic import geodesic_distance
    return report(ctx, "siegel distance", {"distance": geodesic_distance(_omega(ctx), _omega(ctx, "omega2"))})


def siegel_reduce_cmd(ctx):
    from .symplectic import act, siegel_reduce
    Om = _omega(ctx)
    W, gamma = siegel_reduce(Om)
    return report(ctx, "siegel reduce", {"omega": W, "gamma": gamma},
                  {"action_mismatch": float(np.max(np.abs(act(gamma, Om) - W)))})


def siegel_volume_cmd(ctx):
    from .symplectic import format_pi_multiple, siegel_volume
    coeff, power = siegel_volume(ctx.integer("n"))
    return report(ctx, "siegel volume", {"volume": format_pi_multiple(coeff, power),
                                         "coefficient": str(coeff), "pi_power": power})


def siegel_maslov(ctx):
    from .symplectic import maslov_index
    L = [ctx.matrix(k) for k in ("L1", "L2", "L3")]
    return report(ctx, "siegel maslov", {"index": maslov_index(*L)})


# heis --------------------------------------------------------------------------------

def _heis_element(ctx, name):
    from .heisenberg import HeisenbergElement
    d = ctx.json(name)
    try:
        return HeisenbergElement(decode_matrix(d["lambda"]), decode_matrix(d["mu"]),
                                 decode_matrix(d["kappa"]), d.get("law", "circle"))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"--{name} needs lambda, mu, kappa and law") from exc


def _heis_json(g):
    return {"lambda": encode_matrix(g.lam), "mu": encode_matrix(g.mu), "kappa": encode_matrix(g.kappa),
            "law": g.law}


def heis_mul(ctx):
    from .heisenberg import embed_sp, mul
    g1, g2 = _heis_element(ctx, "g"), _heis_element(ctx, "g2")
    g = mul(g1, g2)
    hom = embed_sp(g) - embed_sp(g1) @ embed_sp(g2) if g1.law == "circle" else np.zeros(1)
    return report(ctx, "heis mul", {"product": _heis_json(g)},
                  {"embedding_homomorphism": float(np.max(np.abs(np.asarray(hom, dtype=float))))})


def heis_embed(ctx):
    from .heisenberg import embed_sp
    from .symplectic import symplectic_defect
    E = embed_sp(_heis_element(ctx, "g"))
    return report(ctx, "heis embed", {"matrix": E},
                  {"symplectic_defect": float(np.max(np.abs(np.asarray(symplectic_defect(E), dtype=float))))})


def heis_coadjoint(ctx):
    from .heisenberg import CoadjointFunctional, coadjoint
    g = _heis_element(ctx, "g")
    d = ctx.json("F")
    try:
        F = CoadjointFunctional(decode_matrix(d["a"]), decode_matrix(d["b"]), decode_matrix(d["c"]))
    except (KeyError, TypeError) as exc:
        raise UsageError("--F needs a, b and c") from exc
    G = coadjoint(g, F)
    return report(ctx, "heis coadjoint", {"a": G.a, "b": G.b, "c": G.c})


def heis_act(ctx):
    from .heisenberg import schrodinger_act
    from .states import GaussianPolynomialState
    c, Om = ctx.matrix("c"), _omega(ctx)
    g = _heis_element(ctx, "g")
    f = GaussianPolynomialState(1, c, Om)
    out = schrodinger_act(c, g, f)
    x = ctx.matrix("x", default=[[0.0] * Om.shape[0]] * c.shape[0])
    return report(ctx, "heis act", {"state": str(out.expr()), "value_at_x": out.evaluate(x)})


# theta -------------------------------------------------------------------------------

def _zeros_like(ctx, name, m, n):
    return ctx.matrix(name, default=[[0] * n for _ in range(m)])


def theta_eval(ctx):
    from .theta import ThetaSpec, theta_char
    S, Om = ctx.matrix("S"), _omega(ctx)
    m, n = S.shape[0], Om.shape[0]
    for k, v in (("m", m), ("n", n)):
        if getattr(ctx.args, k, None) not in (None, v):
            raise UsageError(f"--{k} does not match the matrix shapes")
    A, B, W = (_zeros_like(ctx, k, m, n) for k in ("A", "B", "W"))
    r = theta_char(ThetaSpec(S, A, B, ctx.policy), Om, np.asarray(W, dtype=complex))
    return report(ctx, "theta eval", r.to_json(), tail_bounds={"value": r.tail_bound})


def theta_inversion(ctx):
    from .theta import inversion_residual
    return report(ctx, "theta inversion", {},
                  {"inversion": inversion_residual(ctx.matrix("S"), _omega(ctx), ctx.policy)})


def theta_null_cmd(ctx):
    from .theta import theta_null
    a, b = ctx.json("a"), ctx.json("b")
    r = theta_null(_omega(ctx), None, ctx.policy, a=a, b=b)
    return report(ctx, "theta null", r.to_json(),
                  tail_bounds={"value": r.tail_bound})


def theta_delta(ctx):
    from .theta import delta_n
    r = delta_n(_omega(ctx), ctx.policy)
    return report(ctx, "theta delta", r.to_json(), tail_bounds={"value": r.tail_bound})


def theta_invariance(ctx):
    from .symplectic import inversion
    from .theta import delta_modularity_residual
    Om = _omega(ctx)
    gamma = ctx.matrix("gamma", default=inversion(Om.shape[0]).tolist())
    return report(ctx, "theta invariance", {},
                  {"delta_modularity": delta_modularity_residual(gamma, Om, ctx.policy)})


# harmonic ----------------------------------------------------------------------------

def _poly(ctx, m, n):
    from .harmonic import Polynomial
    try:
        return Polynomial.from_json(ctx.json("poly"), m, n)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--poly: malformed polynomial ({exc})") from exc


def harmonic_check(ctx):
    from .harmonic import is_pluriharmonic
    S = ctx.matrix("S")
    P = _poly(ctx, S.shape[0], ctx.integer("n"))
    ok = is_pluriharmonic(P, S)
    return report(ctx, "harmonic check", {"pluriharmonic": ok}, {"not_pluriharmonic": 0.0 if ok else 1.0})


def harmonic_decompose(ctx):
    from .harmonic import decompose, is_pluriharmonic
    S = ctx.matrix("S")
    P = _poly(ctx, S.shape[0], ctx.integer("n"))
    d = decompose(P, S)
    exact = (d.h + d.ideal_part - P).is_zero()
    return report(ctx, "harmonic decompose", {"h": d.h.to_json(), "ideal_part": d.ideal_part.to_json()},
                  {"sum_mismatch": 0.0 if exact else 1.0,
                   "h_not_pluriharmonic": 0.0 if is_pluriharmonic(d.h, S) else 1.0})


def harmonic_theta(ctx):
    from .harmonic import theta_harmonic
    S, Om = ctx.matrix("S"), _omega(ctx)
    m, n = S.shape[0], Om.shape[0]
    P = _poly(ctx, m, n)
    alpha, beta = _zeros_like(ctx, "alpha", m, n), _zeros_like(ctx, "beta", m, n)
    r = theta_harmonic(S, P, alpha, beta, Om, policy=ctx.policy)
    return report(ctx, "harmonic theta", r.to_json(),
                  tail_bounds={"value": r.tail_bound})


# hermite / fock ----------------------------------------------------------------------

def _J(ctx, name="J"):
    J = ctx.json(name)
    if isinstance(J, int):
        J = [[J]]
    return tuple(tuple(int(v) for v in row) for row in J)


def hermite_eval(ctx):
    from .hermite_fock import hermite_h
    h = hermite_h(_J(ctx))
    x = ctx.matrix("x")
    return report(ctx, "hermite eval", {"value": h.evaluate(x), "polynomial": str(h.P)})


def hermite_ortho(ctx):
    import sympy
    from .hermite_fock import gaussian_inner, hermite_h
    J, K = _J(ctx), _J(ctx, "K")
    v = gaussian_inner(hermite_h(J), hermite_h(K))
    res = sympy.simplify(v - (1 if J == K else 0))
    return report(ctx, "hermite ortho", {"inner": str(v)}, {"exact_defect": 0.0 if res == 0 else abs(complex(res))})


def hermite_fourier(ctx):
    from .hermite_fock import hermite_fourier_residual
    res = hermite_fourier_residual(_J(ctx))
    return report(ctx, "hermite fourier", {"residual": str(res)}, {"exact_defect": 0.0 if res == 0 else 1.0})


def hermite_hamiltonian(ctx):
    from .hermite_fock import hermite_operator_residual
    J = _J(ctx)
    res = hermite_operator_residual(J, ctx.json("pos", default=[0, 0]))
    return report(ctx, "hermite hamiltonian", {"residual": str(res)}, {"exact_defect": 0.0 if res == 0 else 1.0})


def fock_basis(ctx):
    from .hermite_fock import fock_basis_eval
    return report(ctx, "fock basis", {"value": fock_basis_eval(ctx.matrix("M"), _J(ctx), _omega(ctx, "W"))})


def fock_kernel_cmd(ctx):
    from .hermite_fock import fock_kernel, fock_kernel_series
    Mi, W, W2 = ctx.matrix("M"), _omega(ctx, "W"), _omega(ctx, "W2")
    deg = ctx.integer("degree", 45)
    k = fock_kernel(Mi, W, W2)
    s = fock_kernel_series(Mi, W, W2, deg)
    return report(ctx, "fock kernel", {"kernel": k, "series": s},
                  {"series_vs_closed_form": abs(k - s) / max(abs(k), 1.0)})


def fock_bargmann(ctx):
    from .hermite_fock import intertwiner_residual
    Mi, W, J = ctx.matrix("M"), _omega(ctx, "W"), _J(ctx)
    lit = intertwiner_residual(Mi, J, W, corrected=False)
    cor = intertwiner_residual(Mi, J, W, corrected=True)
    return report(ctx, "fock bargmann", {"corrected_residual": cor}, {"intertwiner": lit})


# weil --------------------------------------------------------------------------------

def _word(ctx):
    from .weil import Generator
    word = ctx.json("word")
    try:
        return [Generator(g["kind"], g.get("arg")) for g in word]
    except (KeyError, TypeError) as exc:
        raise UsageError("--word must be a list of {\"kind\": \"t\"|\"d\"|\"s\", \"arg\": matrix}") from exc


def _exact_omega(ctx, name="omega"):
    """Omega as a sympy matrix; [re, im] entries are read as exact rationals."""
    import sympy
    v = ctx.json(name)

    def ent(z):
        if isinstance(z, list):
            return sympy.nsimplify(z[0]) + sympy.I * sympy.nsimplify(z[1])
        return sympy.nsimplify(z)

    if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
        raise UsageError(f"--{name} must be a matrix")
    return sympy.Matrix([[ent(z) for z in r] for r in v])


def weil_act(ctx):
    import sympy
    from .weil import covariant_state, omega_apply
    Om = _exact_omega(ctx)
    c = sympy.Matrix(ctx.json("c", default=[[1]]))
    f = omega_apply(_word(ctx), covariant_state(c, Om))
    return report(ctx, "weil act", {"amplitude": f.amplitude, "omega": str(f.Omega.tolist()),
                                    "amplitude_squared": str(f.amp2), "branch_flags": f.branch_flags})


def weil_covariance(ctx):
    import sympy
    from .weil import covariance_residual
    c = sympy.Matrix(ctx.json("c", default=[[1]]))
    r = covariance_residual(_word(ctx), _exact_omega(ctx), c)
    return report(ctx, "weil covariance",
                  {"r2": str(r["r2"]), "r": r["r"], "branch_flags": r["branch_flags"]},
                  {"omega_mismatch": 0.0 if r["omega_match"] else 1.0,
                   "r2_not_one": 0.0 if r["r2_is_one"] else 1.0})


def weil_cocycle(ctx):
    from .weil import cocycle_residual
    Ms = [ctx.matrix(k, required=False) for k in ("M1", "M2", "M3")]
    if any(M is None for M in Ms):
        rng = np.random.default_rng(ctx.seed)
        n = ctx.integer("n", 2)
        Ms = [_random_sp(rng, n) for _ in range(3)]
    return report(ctx, "weil cocycle", {"matrices": [np.asarray(M, dtype=float) for M in Ms]},
                  {"cocycle": cocycle_residual(*Ms)}, tolerances={"cocycle": min(ctx.tol, 1e-12)})


def _random_sp(rng, n):
    from .symplectic import dilation, inversion, translation
    M = np.eye(2 * n)
    for _ in range(int(rng.integers(1, 5))):
        kind = rng.integers(0, 3)
        if kind == 0:
            b = rng.normal(size=(n, n))
            M = M @ translation((b + b.T) / 2)
        elif kind == 1:
            M = M @ dilation(rng.normal(size=(n, n)) + 2 * np.eye(n))
        else:
            M = M @ inversion(n)
    return M


def weil_lift(ctx):
    from .weil import lift_rho
    Mi, Om = ctx.matrix("M"), _omega(ctx)
    rho, dev = lift_rho(Mi, Om, policy=ctx.policy)
    return report(ctx, "weil lift", {"rho": rho}, {"rho8_minus_1": dev}, tolerances={"rho8_minus_1": 1e-7})


def weil_poisson(ctx):
    from .weil import GaussianState, poisson_residual
    import sympy
    Om = _exact_omega(ctx)
    c = sympy.Matrix(ctx.json("c", default=[[1]])).applyfunc(sympy.nsimplify)
    amp = ctx.json("amplitude", default=1)
    amp = complex(*amp) if isinstance(amp, list) else complex(amp)
    res, tail, lhs, rhs = poisson_residual(GaussianState(amp, Om, c), ctx.policy)
    return report(ctx, "weil poisson", {"lhs": lhs, "rhs": rhs}, {"poisson": res}, {"combined": tail},
                  tolerances={"poisson": max(ctx.tol * 0.1, 1e-10)})


def weil_nu(ctx):
    from .weil import level, nu_ratio, random_gamma0
    S = ctx.matrix("S")
    rng = np.random.default_rng(ctx.seed)
    q = level(S.tolist())
    gamma = ctx.matrix("gamma", required=False)
    if gamma is None:
        gamma = random_gamma0(q, rng, size=ctx.integer("size", 5))
    vals, mod, spread = nu_ratio(S, gamma, 3, rng, ctx.policy)
    return report(ctx, "weil nu", {"level": q, "gamma": gamma, "nu": vals[0], "samples": vals},
                  {"abs_nu_minus_1": mod, "spread": spread}, tolerances={"abs_nu_minus_1": 1e-8, "spread": 1e-8})


# abelian -----------------------------------------------------------------------------

def abelian_eigen(ctx):
    from .abelian import eigenfunction_eval, laplacian_eigenvalue, periodicity_residual
    Om = _omega(ctx)
    A, B = ctx.matrix("A"), ctx.matrix("B")
    Z = _omega(ctx, "Z")
    m, n = A.shape
    rng = np.random.default_rng(ctx.seed)
    lam, mu = rng.integers(-3, 4, (m, n)), rng.integers(-3, 4, (m, n))
    return report(ctx, "abelian eigen",
                  {"value": eigenfunction_eval(Om, A, B, Z), "eigenvalue": laplacian_eigenvalue(Om, A, B)},
                  {"periodicity": periodicity_residual(Om, A, B, Z, lam, mu)}, tolerances={"periodicity": 1e-12})


def abelian_spectrum(ctx):
    from .abelian import spectrum
    out = spectrum(_omega(ctx), ctx.integer("m", 1), ctx.integer("radius", 1))
    limit = ctx.integer("limit", 20)
    return report(ctx, "abelian spectrum",
                  {"eigenvalues": [{"lambda": lam, "A": A, "B": B} for lam, A, B in out[:limit]]})


def abelian_reduce(ctx):
    from .abelian import fundamental_domain_member
    Om = _omega(ctx)
    Z = _omega(ctx, "Z")
    inside, Z0, (lam, mu) = fundamental_domain_member(Om, Z)
    return report(ctx, "abelian reduce", {"inside": inside, "Z0": Z0, "lambda": lam, "mu": mu},
                  {"reconstruction": float(np.max(np.abs(Z0 + lam @ Om + mu - Z)))},
                  tolerances={"reconstruction": 1e-12})


def abelian_ortho(ctx):
    from .abelian import orthonormality, orthonormality_quadrature
    Om = _omega(ctx)
    A, B, A2, B2 = (ctx.matrix(k) for k in ("A", "B", "A2", "B2"))
    exact = orthonormality(A, B, A2, B2)
    res = {}
    values = {"exact": exact}
    if Om.shape == (1, 1) and A.shape == (1, 1):
        q = orthonormality_quadrature(Om, A, B, A2, B2, ctx.integer("grid", 32))
        values["quadrature"] = q
        res["quadrature_vs_exact"] = abs(q - exact)
    return report(ctx, "abelian ortho", values, res, tolerances={"quadrature_vs_exact": 1e-10})


# parser ------------------------------------------------------------------------------

COMMANDS = {
    "siegel": {
        "act": (siegel_act, ["M", "omega"]),
        "distance": (siegel_distance, ["omega", "omega2"]),
        "reduce": (siegel_reduce_cmd, ["omega"]),
        "volume": (siegel_volume_cmd, ["n"]),
        "maslov": (siegel_maslov, ["L1", "L2", "L3"]),
    },
    "heis": {
        "mul": (heis_mul, ["g", "g2"]),
        "embed": (heis_embed, ["g"]),
        "coadjoint": (heis_coadjoint, ["g", "F"]),
        "act": (heis_act, ["c", "g", "omega", "x"]),
    },
    "theta": {
        "eval": (theta_eval, ["n", "m", "S", "omega", "A", "B", "W"]),
        "inversion": (theta_inversion, ["S", "omega"]),
        "null": (theta_null_cmd, ["omega", "a", "b"]),
        "delta": (theta_delta, ["omega"]),
        "invariance": (theta_invariance, ["omega", "gamma"]),
    },
    "harmonic": {
        "check": (harmonic_check, ["S", "n", "poly"]),
        "decompose": (harmonic_decompose, ["S", "n", "poly"]),
        "theta": (harmonic_theta, ["S", "poly", "omega", "alpha", "beta"]),
    },
    "hermite": {
        "eval": (hermite_eval, ["J", "x"]),
        "ortho": (hermite_ortho, ["J", "K"]),
        "fourier": (hermite_fourier, ["J"]),
        "hamiltonian": (hermite_hamiltonian, ["J", "pos"]),
    },
    "fock": {
        "basis": (fock_basis, ["M", "J", "W"]),
        "kernel": (fock_kernel_cmd, ["M", "W", "W2", "degree"]),
        "bargmann": (fock_bargmann, ["M", "J", "W"]),
    },
    "weil": {
        "act": (weil_act, ["word", "omega", "c"]),
        "covariance": (weil_covariance, ["word", "omega", "c"]),
        "cocycle": (weil_cocycle, ["M1", "M2", "M3", "n"]),
        "lift": (weil_lift, ["M", "omega"]),
        "poisson": (weil_poisson, ["omega", "c", "amplitude"]),
        "nu": (weil_nu, ["S", "gamma", "size"]),
    },
    "abelian": {
        "eigen": (abelian_eigen, ["omega", "A", "B", "Z"]),
        "spectrum": (abelian_spectrum, ["omega", "m", "radius", "limit"]),
        "reduce": (abelian_reduce, ["omega", "Z"]),
        "ortho": (abelian_ortho, ["omega", "A", "B", "A2", "B2", "grid"]),
    },
}

_INT_OPTS = {"n", "m", "degree", "radius", "limit", "grid", "size"}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--tail", type=float, help="target truncation tail")
    common.add_argument("--radius-max", type=int, help="largest lattice radius")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--threads", type=int, help="thread count (results are deterministic at 1)")
    common.add_argument("--json-in", help="JSON object file supplying any of the inputs")
    parser = argparse.ArgumentParser(prog="siegeltheta", description=__doc__.splitlines()[0])
    mods = parser.add_subparsers(dest="module", required=True)
    for mod, cmds in COMMANDS.items():
        mp = mods.add_parser(mod)
        sub = mp.add_subparsers(dest="command", required=True)
        for name, (fn, opts) in cmds.items():
            sp = sub.add_parser(name, parents=[common])
            for o in opts:
                sp.add_argument(f"--{o}", type=int if o in _INT_OPTS else str, default=None)
            sp.set_defaults(func=fn)
    return parser


def run(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        defaults = load_defaults()
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be at least 1")
        threads = args.threads or defaults["threads"]
        os.environ.setdefault("OMP_NUM_THREADS", str(threads))
        ctx = Context(args, defaults)
        rep = args.func(ctx)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return 2
    except (StructuralError, DomainError) as exc:
        print(f"invalid input: {exc}", file=err)
        return 2
    except SiegelThetaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return 1
    print(json.dumps(_jsonable(rep), indent=2, allow_nan=False), file=out)
    return 0 if rep["status"] == "pass" else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
