"""Acceptance criteria 1-19, one PASS/FAIL line each.

Every test records its line (criterion number, verdict, measured numbers)
before asserting, so the summary shows the measured values even when a
criterion fails.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import sympy
from sympy import I, Rational

from conftest import ACCEPTANCE_LINES, random_siegel_point
from siegeltheta import abelian, harmonic, heisenberg, hermite_fock, symplectic, theta, weil
from siegeltheta.harmonic import Polynomial, zmatrix
from siegeltheta.heisenberg import HeisenbergElement
from siegeltheta.states import GaussianPolynomialState, xvars

THETA_I = 1.0864348112133080


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _random_sp(rng, n, steps=3):
    M = np.eye(2 * n)
    for _ in range(steps):
        b = rng.normal(size=(n, n))
        M = M @ symplectic.translation((b + b.T) / 2) @ symplectic.dilation(rng.normal(size=(n, n)) + 2 * np.eye(n))
        M = M @ symplectic.inversion(n)
    return M


def _frac(rng, shape, den=4):
    return np.array([[Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, den + 1))) for _ in range(shape[1])]
                     for _ in range(shape[0])], dtype=object)


def test_criterion_01_scalar_theta():
    r = theta.theta_S([[1]], [[1j]])
    k = np.arange(-40, 41)
    direct = float(np.sum(np.exp(-math.pi * k * k)))
    err = abs(r.value - THETA_I)
    ok = err < 1e-10 and r.tail_bound <= 1e-12 and abs(r.value - direct) < 1e-10
    record(1, ok, f"|value - 1.0864348112133080| = {err:.1e}, tail bound {r.tail_bound:.1e}, "
                  f"direct radius-40 sum differs by {abs(r.value - direct):.1e}")


def test_criterion_02_inversion_law():
    rng = np.random.default_rng(2)
    worst = 0.0
    for S in (np.eye(2), np.diag([1.0, 2.0]), np.array([[2.0, 1.0], [1.0, 2.0]])):
        for _ in range(20):
            worst = max(worst, theta.inversion_residual(S, random_siegel_point(rng, 2)))
    record(2, worst < 1e-9, f"max relative residual {worst:.1e} over 60 instances")


def test_criterion_03_characteristic_inversion():
    rng = np.random.default_rng(3)
    worst = 0.0
    count = 0
    while count < 10:
        a, c = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        b = int(rng.integers(-2, 3))
        S = np.array([[2 * a, b], [b, 2 * c]])
        if np.linalg.det(S) <= 0:
            continue
        A = rng.integers(-3, 4, (2, 1)) / rng.integers(1, 5)
        B = rng.integers(-3, 4, (2, 1)) / rng.integers(1, 5)
        worst = max(worst, theta.char_inversion_residual(S, A, B, random_siegel_point(rng, 1)))
        count += 1
    record(3, worst < 1e-9, f"max residual {worst:.1e} over 10 even S with rational A, B")


def test_criterion_04_quasi_periodicity():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        m, n = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        S = np.array([[2, 1], [1, 2]]) if m == 2 else np.array([[2]])
        spec = theta.ThetaSpec(S, rng.uniform(-0.5, 0.5, (m, n)), rng.uniform(-0.5, 0.5, (m, n)))
        Om = random_siegel_point(rng, n)
        W = (rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))) * 0.3
        res = theta.theta_law_residuals(spec, Om, W, lam=rng.uniform(-1, 1, (m, n)), mu=rng.uniform(-1, 1, (m, n)),
                                        xi=rng.integers(-1, 2, (m, n)), eta=rng.integers(-2, 3, (m, n)))
        worst = max(worst, max(res.values()))
    record(4, worst < 1e-9, f"max residual of the five laws {worst:.1e} over 50 instances")


def test_criterion_05_thetanullwerte():
    rng = np.random.default_rng(5)
    odd = 0.0
    for n in (1, 2, 3):
        Om = random_siegel_point(rng, n)
        for ch in theta.characteristics(n):
            if not ch.is_even:
                odd = max(odd, abs(theta.theta_null(Om, ch).value))
    counts = [len(theta.even_characteristics(n)) for n in range(1, 5)]
    expected = [(2 ** n + 1) * 2 ** (n - 1) for n in range(1, 5)]
    trans = 0.0
    Om = random_siegel_point(rng, 2)
    for S in (np.array([[1, 0], [0, 2]]), np.array([[0, 1], [1, 1]])):
        for ch in theta.characteristics(2):
            trans = max(trans, theta.translation_law_residual(Om, ch, S))
    ok = odd < 1e-12 and counts == expected and trans < 1e-9
    record(5, ok, f"max odd |theta| {odd:.1e}, even counts {counts} (expected {expected}), "
                  f"translation law residual {trans:.1e}")


def test_criterion_06_delta_modularity():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(5):
        Om = [[rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0.9, 1.6)]]
        for g in (symplectic.inversion(1), symplectic.translation([[1]])):
            worst = max(worst, theta.delta_modularity_residual(g, Om))
    record(6, worst < 1e-8, f"max residual under sigma_1 and t_1 {worst:.1e} at 5 points")


def test_criterion_07_e8():
    E = theta.e8_gram()
    q1 = theta.count_vectors(E, 2)
    Mi = np.asarray(E) / 2
    rho, dev8 = weil.lift_rho(Mi, [[0.2 + 1.1j]])
    worst = 0.0
    for Om in ([[-0.3 + 0.9j]], [[0.05 + 1.3j]]):
        Om = np.array(Om)
        lhs = weil.theta_lift(Mi, symplectic.act(symplectic.inversion(1), Om)).value
        rhs = rho * symplectic.automorphic_factor(symplectic.inversion(1), Om, 8) * weil.theta_lift(Mi, Om).value
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    trans = weil.lift_translation_residual(Mi, [[0.1 + 0.8j]], [[1]])
    ok = q1 == 240 and worst < 1e-7 and dev8 < 1e-7 and trans < 1e-9
    record(7, ok, f"q^1 coefficient {q1}, functional equation residual {worst:.1e} with rho = "
                  f"{rho.real:.6f}{rho.imag:+.6f}i, |rho^8 - 1| = {dev8:.1e}, translation {trans:.1e}")


def test_criterion_08_siegel_volumes():
    expected = {1: "pi/3", 2: "pi^3/270", 3: "pi^6/127575", 4: "pi^10/200930625"}
    got = {n: symplectic.format_pi_multiple(*symplectic.siegel_volume(n)) for n in expected}
    record(8, got == expected, f"volumes {list(got.values())}")


def test_criterion_09_geodesic_distance():
    err = 0.0
    for n in (1, 2, 3):
        for t in (0.1, 0.5, 2.0):
            d = symplectic.geodesic_distance(1j * np.eye(n), 1j * t * np.eye(n))
            err = max(err, abs(d - math.sqrt(n) * abs(math.log(t))))
    rng = np.random.default_rng(9)
    inv = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 3))
        W0, W1 = random_siegel_point(rng, n), random_siegel_point(rng, n)
        M = _random_sp(rng, n)
        d0 = symplectic.geodesic_distance(W0, W1)
        inv = max(inv, abs(d0 - symplectic.geodesic_distance(symplectic.act(M, W0), symplectic.act(M, W1)))
                  / max(1.0, d0))
    record(9, err < 1e-10 and inv < 1e-9, f"closed-form error {err:.1e}, Sp-invariance residual {inv:.1e}")


def test_criterion_10_maslov():
    e, f, ef = np.array([[1, 0]]), np.array([[0, 1]]), np.array([[1, 1]])
    base = symplectic.maslov_index(e, f, ef)
    rng = np.random.default_rng(10)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 3))
        Ls = []
        for _ in range(3):
            W = random_siegel_point(rng, n)
            Ls.append(np.hstack([np.eye(n), W.real]) @ _random_sp(rng, n, 1).T)
        t = symplectic.maslov_index(*Ls)
        M = _random_sp(rng, n, 1)
        if (symplectic.maslov_index(Ls[1], Ls[0], Ls[2]) != -t
                or symplectic.maslov_index(*(L @ M.T for L in Ls)) != t):
            bad += 1
    record(10, base == -1 and bad == 0, f"tau(e, f, e+f) = {base}, {bad} violations over 100 triples")


def _indices(shape, top):
    m, n = shape
    for vals in itertools.product(range(top + 1), repeat=m * n):
        if sum(vals) <= top:
            yield tuple(tuple(vals[k * n:(k + 1) * n]) for k in range(m))


def test_criterion_11_hermite_suite():
    bad = []
    for shape in [(1, 1), (1, 2)]:
        idx = list(_indices(shape, 3))
        for J, K in itertools.product(idx, idx):
            if hermite_fock.gaussian_inner(hermite_fock.hermite_h(J), hermite_fock.hermite_h(K)) != (1 if J == K else 0):
                bad.append(("inner", J, K))
        for J in _indices(shape, 4):
            if hermite_fock.hermite_fourier_residual(J) != 0:
                bad.append(("fourier", J))
        for J in idx:
            for a in range(shape[1]):
                if hermite_fock.hermite_operator_residual(J, (0, a)) != 0:
                    bad.append(("hamiltonian", J))
                if hermite_fock.ladder_residuals(J, 0, a) != (0, 0):
                    bad.append(("ladder", J))
    record(11, not bad, f"{len(bad)} exact identities failed (orthonormality |J|,|K| <= 3, Fourier |J| <= 4, "
                        f"eigenrelation, ladder), first: {bad[:1]}")


def test_criterion_12_fock_bargmann():
    kern = max(hermite_fock.kernel_identity_residual(1.0, w, w2)
               for w, w2 in [(0.1 + 0.2j, -0.3 + 0.1j), (0.0, 0.0), (0.4j, 0.2)])
    kern_c = max(hermite_fock.kernel_identity_residual(1.0, w, w2, corrected=True)
                 for w, w2 in [(0.1 + 0.2j, -0.3 + 0.1j), (0.0, 0.0), (0.4j, 0.2)])
    Ws = [0.0, 0.25 + 0.1j, -0.2 + 0.3j]
    intw = max(hermite_fock.intertwiner_residual(1.0, ((j,),), w) for j in range(3) for w in Ws)
    intw_c = max(hermite_fock.intertwiner_residual(1.0, ((j,),), w, corrected=True) for j in range(3) for w in Ws)
    ok = kern < 1e-7 and intw < 1e-7
    record(12, ok, f"kernel identity residual {kern:.2e} (with the factor 1/2: {kern_c:.1e}); "
                   f"intertwiner residual {intw:.2e} (with (-1)^|J|/2: {intw_c:.1e})")


def _word(rng, n):
    out = []
    for _ in range(int(rng.integers(1, 6))):
        kind = rng.choice(["t", "d", "s"])
        if kind == "t":
            b = rng.integers(-2, 3, (n, n))
            out.append(weil.Generator("t", ((b + b.T) // 2).tolist()))
        elif kind == "d":
            while True:
                a = rng.integers(-2, 3, (n, n))
                if round(np.linalg.det(a)) != 0:
                    break
            out.append(weil.Generator("d", a.tolist()))
        else:
            out.append(weil.Generator("s"))
    return out


def test_criterion_13_weil_covariance():
    rng = np.random.default_rng(13)
    Om = sympy.Matrix([[I + Rational(1, 3), Rational(1, 4)], [Rational(1, 4), 2 * I - Rational(1, 5)]])
    bad = 0
    for _ in range(50):
        out = weil.covariance_residual(_word(rng, 2), Om)
        bad += not (out["omega_match"] and out["r2_is_one"])
    quad = max(abs(weil.sigma_operator_quadrature(c, w, x) - weil.sigma_closed_form(c, w, x))
               for c, w in [(1.0, 0.3 + 1.1j), (2.0, -0.4 + 0.7j)] for x in (0.0, 0.3, -0.7))
    record(13, bad == 0 and quad < 1e-7, f"{bad} of 50 words fail the exact check, sigma_1 operator residual {quad:.1e}")


def test_criterion_14_cocycle():
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 3))
        worst = max(worst, weil.cocycle_residual(*(_random_sp(rng, n) for _ in range(3))))
    record(14, worst < 1e-12, f"max cocycle residual {worst:.1e} over 100 triples")


def test_criterion_15_poisson():
    f0 = weil.GaussianState(1.0, [[I / 2]], [[1]])
    self_dual = weil.poisson_residual(f0)[0]
    states = [
        f0,
        weil.GaussianState(1.0, [[I]], [[1]]),
        weil.GaussianState(2.0 - 1j, [[I * Rational(3, 4) + Rational(1, 3)]], [[1]]),
        weil.GaussianState(1.0, [[I * 2 - Rational(1, 2)]], [[3]]),
        weil.GaussianState(1.0, [[I, 0], [0, 2 * I]], [[1]]),
        weil.GaussianState(1.0, [[I + Rational(1, 3), Rational(1, 4)], [Rational(1, 4), 2 * I]], [[1]]),
        weil.GaussianState(1j, [[I / 3 + Rational(1, 5)]], [[1]]),
        weil.GaussianState(1.0, [[I]], [[2, 1], [1, 2]]),
        weil.GaussianState(1.0, [[I * Rational(3, 2)]], [[1, 0], [0, 2]]),
        weil.GaussianState(1.0, [[I, Rational(1, 2)], [Rational(1, 2), I]], [[1, 0], [0, 1]]),
    ]
    worst = max(weil.poisson_residual(f)[0] for f in states)
    record(15, worst < 1e-10 and self_dual < 1e-12,
           f"max residual {worst:.1e} over 10 states, self-dual residual {self_dual:.1e}")


def test_criterion_16_harmonic():
    bad = []
    for m, n in [(2, 1), (2, 2), (3, 2)]:
        for d in range(7):
            total, h, ideal = harmonic.dimension_bookkeeping(np.eye(m, dtype=int), m, n, d)
            if total != h + ideal:
                bad.append((m, n, d))
    rng = np.random.default_rng(16)
    Z = list(zmatrix(3, 2))
    S3 = np.array([[2, 1, 0], [1, 2, 0], [0, 0, 1]])
    orth = True
    for _ in range(3):
        e = sum(int(rng.integers(-3, 4)) * sympy.prod([Z[int(i)] for i in rng.integers(0, 6, 3)]) for _ in range(6))
        D = harmonic.decompose(Polynomial(e, 3, 2), S3)
        orth &= harmonic.pairing(D.h, D.ideal_part) == 0 and D.h + D.ideal_part == Polynomial(e, 3, 2)
    z = zmatrix(2, 1)
    I2 = 2 * np.eye(2, dtype=int)
    zero = [[0], [0]]
    cases = [
        harmonic.theta_transform_residual(I2, Polynomial(z[0] - I * z[1], 2, 1), zero, zero, np.eye(2), [[1j]]),
        harmonic.theta_transform_residual(I2, Polynomial(z[0] - I * z[1], 2, 1), zero, zero, symplectic.inversion(1),
                                          [[1j]]),
        harmonic.theta_transform_residual(theta.e8_gram(), Polynomial(1, 8, 1), np.zeros((8, 1)), np.zeros((8, 1)),
                                          symplectic.inversion(1), [[0.2 + 1.1j]]),
    ]
    P3 = Polynomial((z[0] + I * z[1]) ** 3, 2, 1)
    deriv = harmonic.derivative_identity_residual(I2, P3, [[0.1], [0.3]], [[0.2], [-0.1]], [[0.3 + 1.2j]])
    ok = not bad and orth and max(cases) < 1e-8 and deriv < 1e-9
    record(16, ok, f"bookkeeping failures {bad}, pairing orthogonal {orth}, transform residuals "
                   f"{[f'{c:.1e}' for c in cases]}, derivative identity {deriv:.1e}")


def _heis(rng, m, n):
    lam, mu = _frac(rng, (m, n)), _frac(rng, (m, n))
    s = _frac(rng, (m, m))
    return HeisenbergElement(lam, mu, (s + s.T) - mu @ lam.T)


def test_criterion_17_heisenberg():
    rng = np.random.default_rng(17)
    bad = []
    for _ in range(20):
        g1, g2 = _heis(rng, 2, 2), _heis(rng, 2, 2)
        if ((heisenberg.embed_sp(heisenberg.mul(g1, g2)) - heisenberg.embed_sp(g1) @ heisenberg.embed_sp(g2)) != 0).any():
            bad.append("embedding")
        X, Y, W = (heisenberg.HeisenbergAlgebraElement(_frac(rng, (2, 2)), _frac(rng, (2, 2)),
                                                       (lambda s: s + s.T)(_frac(rng, (2, 2)))) for _ in range(3))
        B = heisenberg.bracket(X, Y)
        comm = X.matrix() @ Y.matrix() - Y.matrix() @ X.matrix()
        if ((B.matrix() - comm) != 0).any():
            bad.append("bracket")
        if (heisenberg.bracket(B, W).matrix() != 0).any() or (heisenberg.bracket(W, B).matrix() != 0).any():
            bad.append("nilpotency")
        s = _frac(rng, (2, 2))
        F = heisenberg.CoadjointFunctional(_frac(rng, (2, 2)), _frac(rng, (2, 2)), s + s.T)
        if not heisenberg.coadjoint(heisenberg.mul(g1, g2), F).equals(
                heisenberg.coadjoint(g1, heisenberg.coadjoint(g2, F))):
            bad.append("coadjoint")
    x = xvars(1, 2)
    f = GaussianPolynomialState(x[0, 0] ** 2 - 3 * x[0, 1] + 1, [[1]],
                                [[I, Rational(1, 3)], [Rational(1, 3), 2 * I]])
    for _ in range(5):
        g1, g2 = _heis(rng, 1, 2), _heis(rng, 1, 2)
        lhs = heisenberg.schrodinger_act([[1]], g1, heisenberg.schrodinger_act([[1]], g2, f))
        if not lhs.equals(heisenberg.schrodinger_act([[1]], heisenberg.mul(g1, g2), f)):
            bad.append("schrodinger")
    record(17, not bad, f"failed exact identities: {bad or 'none'}")


def test_criterion_18_abelian():
    rng = np.random.default_rng(18)
    Om = np.array([[0.2 + 1.1j, 0.3 + 0.1j], [0.3 + 0.1j, -0.1 + 1.3j]])
    per = 0.0
    for _ in range(30):
        A, B = rng.integers(-3, 4, (2, 2)), rng.integers(-3, 4, (2, 2))
        Zp = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        per = max(per, abelian.periodicity_residual(Om, A, B, Zp, rng.integers(-3, 4, (2, 2)),
                                                    rng.integers(-3, 4, (2, 2))))
    O1 = np.array([[0.3 + 1.2j]])
    quad = 0.0
    for A, B, A2, B2 in [([[1]], [[2]], [[1]], [[2]]), ([[1]], [[2]], [[0]], [[2]]), ([[-2]], [[1]], [[1]], [[1]])]:
        quad = max(quad, abs(abelian.orthonormality_quadrature(O1, A, B, A2, B2) - abelian.orthonormality(A, B, A2, B2)))
    pts = [rng.normal(size=(1, 2)) + 1j * rng.normal(size=(1, 2)) for _ in range(5)]
    const = abelian.eigenratio_constancy(Om, [[1, 2]], [[-1, 1]], pts)
    rc1, rc2 = abelian.riemann_conditions(Om)
    ok = per < 1e-12 and quad < 1e-10 and const < 1e-10 and rc1 < 1e-12 and rc2 > 0
    record(18, ok, f"periodicity {per:.1e}, orthonormality quadrature {quad:.1e}, eigenratio constancy {const:.1e}, "
                   f"RC.1 {rc1:.1e}, RC.2 min eigenvalue {rc2:.3f}")


def test_criterion_19_lattice_rep_invariance():
    rng = np.random.default_rng(19)
    g = HeisenbergElement([[0.3]], [[-0.2]], [[0.06]])
    Om = [[0.1 + 1.2j]]
    worst = {}
    for M in (0.5, 1.0, 1.5):
        w = 0.0
        for _ in range(20):
            gamma = HeisenbergElement(rng.integers(-2, 3, (1, 1)), rng.integers(-2, 3, (1, 1)), rng.integers(-3, 4, (1, 1)))
            w = max(w, theta.lattice_rep_invariance_residual([[M]], [[1]], [[0]], Om, gamma, g))
        worst[M] = w
    record(19, max(worst.values()) < 1e-9,
           "max residual per M: " + ", ".join(f"M={k}: {v:.1e}" for k, v in worst.items()))
