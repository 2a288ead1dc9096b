"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Lines are echoed in the terminal summary under "acceptance criteria".
"""

import numpy as np
import pytest

from bfspectrum import asymptotics as asy, blochop, blockdiag as bd, katoreduce as kr
from bfspectrum.blochop import BlochParams, FourierTruncation, field_from_functions
from bfspectrum.wavecoeff import stokes_coefficients

from conftest import GRID, boundary, decomposed, reduced

EPS3 = (0.005, 0.01, 0.02)


def test_c1_unperturbed_exactness(report):
    worst = 0.0
    for mu in (0.01, 0.04, 0.09):
        want = [1j * (mu - np.sqrt(mu)), 1j * (mu + np.sqrt(mu)),
                1j * (1 + mu - np.sqrt(1 + mu)), 1j * (-1 + mu + np.sqrt(1 - mu))]
        worst = max(worst, blochop.multiset_distance(reduced(mu, 0.0, 16).eigenvalues, want))
    assert report("C1", worst <= 1e-9, f"flat-wave reduced eigenvalues, max error {worst:.2e} (tol 1e-9)")


def test_c2_projector_certificate(report):
    tol = {"idempotency": 1e-10, "trace_error": 1e-8, "commutator": 1e-9,
           "skew_hamiltonian": 1e-10, "reversibility": 1e-10}
    worst = {k: 0.0 for k in tol}
    for eps, mu in GRID:
        cert = reduced(mu, eps).certificate
        for k in tol:
            worst[k] = max(worst[k], cert[k])
    ok = all(worst[k] <= tol[k] for k in tol)
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert report("C2", ok, f"projector certificate over grid: {detail}")


def test_c3_basis_certificates(report):
    gram = parity = 0.0
    for eps, mu in GRID + [(e, 0.0) for e in EPS3]:
        G = reduced(mu, eps).G
        gram = max(gram, G.gram_residual)
        parity = max(parity, max(kr.parity_residual(v, G.trunc, s) for v, s in zip(G.vectors, kr.BASIS_SIGNS)))
    avg = 0.0
    for eps in EPS3:
        G = reduced(0.0, eps).G
        g = G[1]
        avg = max(avg, abs(g[G.trunc.index(0, 0)]), abs(g[G.trunc.index(0, 1)]))
    ok = gram <= 1e-9 and avg <= 1e-10 and parity <= 1e-9
    assert report("C3", ok, f"Gram-J4 {gram:.1e} (1e-9), zero average {avg:.1e} (1e-10), parity {parity:.1e} (1e-9)")


def test_c4_finite_difference_oracle(report):
    h, T = 1e-4, FourierTruncation(32)

    def F(mu, eps):
        return kr.reduce_point(mu, eps, analytic=True).F.vectors

    d_eps = [(a - b) / (2 * h) for a, b in zip(F(0.0, h), F(0.0, -h))]
    d_mu = [(a - b) / (2 * h) for a, b in zip(F(h, 0.0), F(-h, 0.0))]
    errs = [
        np.linalg.norm(d_eps[0] - field_from_functions(T, lambda x: 2 * np.cos(2 * x), lambda x: np.sin(2 * x))),
        np.linalg.norm(d_mu[0] - field_from_functions(T, lambda x: 0.25j * np.sin(x), lambda x: 0.25j * np.cos(x))),
        np.linalg.norm(d_mu[2]),
        np.linalg.norm(d_mu[3]),
    ]
    worst = max(errs)
    assert report("C4", worst <= 1e-6, f"centred differences of the transported basis, max error {worst:.1e} (tol 1e-6)")


def test_c5_reduction_vs_direct(report):
    worst, spread = 0.0, 0.0
    for eps, mu in GRID:
        per_N = []
        for N in (16, 32, 48):
            r = reduced(mu, eps, N)
            dense = blochop.nearest_eigs(blochop.direct_eigs(r.L), 4)
            worst = max(worst, blochop.multiset_distance(r.eigenvalues, dense))
            per_N.append(r.eigenvalues)
        spread = max(spread, *(blochop.multiset_distance(per_N[0], e) for e in per_N[1:]))
    ok = worst <= 1e-8 and spread <= 1e-8
    assert report("C5", ok, f"reduced vs dense eigenvalues {worst:.1e}, spread over N=16/32/48 {spread:.1e} (tol 1e-8)")


def test_c6_entry_expansions(report):
    ratios = {}

    def track(name, value, bound):
        ratios[name] = max(ratios.get(name, 0.0), value / bound)

    f11 = 0.0
    for eps, mu in GRID:
        b = reduced(mu, eps).blocks
        E, G = b.E, b.G
        track("E11", abs(E[0, 0] - (eps ** 2 - mu ** 2 / 8)), 10 * (eps ** 3 + mu ** 2 * eps + mu ** 3))
        track("E12", abs(E[0, 1].imag - mu / 2), 10 * (mu * eps ** 2 + mu ** 2 * eps + mu ** 3))
        track("E22", abs(E[1, 1] + mu ** 2 / 8), 10 * mu ** 2 * (eps + mu))
        track("G11", abs(G[0, 0] - 1), 10 * (eps ** 3 + mu ** 2 * eps + mu * eps ** 2 + mu ** 3))
        track("G22", abs(G[1, 1] - mu), 10 * (mu ** 2 * eps + mu ** 3))
        f11 = max(f11, abs(bd.step1_remove_F11(b)[0].F[0, 0]))
    mu, eps = 0.02, 0.01
    _, flat, _ = kr.split_B_contributions(BlochParams(mu, eps), stokes_coefficients(eps), FourierTruncation(32),
                                          reduced(mu, eps).G)
    track("Bflat22", abs(flat[1, 1] + mu ** 2 / 4), 10 * (mu ** 2 * eps + mu ** 3))
    ok = max(ratios.values()) <= 1 and f11 <= 1e-15
    detail = ", ".join(f"{k} {v:.1e}" for k, v in ratios.items())
    assert report("C6", ok, f"error/bound ratios {detail}; F11 after step 1 {f11:.1e}")


def test_c7_block_decoupling(report):
    f2_ratio, offdiag, iters, drift = 0.0, 0.0, 0, 0.0
    for eps, mu in GRID:
        red = reduced(mu, eps)
        b1, _ = bd.step1_remove_F11(red.blocks)
        L2, _ = bd.step2_conjugate(b1.L4, bd.solve_sylvester(b1, mu))
        F2 = bd.blocks_of(L2).F
        size = np.array([[mu ** 2 * eps ** 3 + mu ** 3 * eps ** 2 + mu ** 5 * eps + mu ** 7, mu ** 2 * eps ** 2 + mu ** 4 * eps + mu ** 6],
                         [mu * eps ** 3 + mu ** 2 * eps ** 2 + mu ** 4 * eps + mu ** 6, mu ** 2 * eps ** 2 + mu ** 3 * eps + mu ** 5]])
        f2_ratio = max(f2_ratio, float(np.max(np.abs(F2) / (100 * size))))
        dec = decomposed(mu, eps)
        offdiag, iters = max(offdiag, dec.offdiag_residual), max(iters, dec.iterations)
        ev0 = red.eigenvalues
        for M in (b1.L4, L2):
            drift = max(drift, blochop.multiset_distance(np.linalg.eigvals(M) + 1j * mu, ev0))
        drift = max(drift, blochop.multiset_distance(dec.eigenvalues, ev0))
    ok = f2_ratio <= 1 and offdiag <= 1e-12 and iters <= 10 and drift <= 1e-10
    assert report("C7", ok, f"F2/(100*pattern) {f2_ratio:.2f}, off-diagonal {offdiag:.1e}, "
                            f"iterations {iters}, eigenvalue drift {drift:.1e}")


def test_c8_figure8(report):
    eps = 0.01
    b = boundary(eps)
    a = abs(b.ratio_to_asymptotic - 1) <= 0.05
    trace = asy.trace_figure8(eps, 16, boundary=b)
    # refine the maximum on a finer grid around its location
    mus = np.linspace(0.5 * eps, 3 * eps, 26)
    re = np.array([decomposed(float(m), eps).lambda1[0].real for m in mus])
    k = int(np.argmax(re))
    bb = abs(re[k] - eps ** 2 / 2) <= 0.1 * eps ** 2 / 2 and abs(mus[k] - 2 * eps) <= 0.15 * 2 * eps
    lp, lm = decomposed(1.2 * b.mu_critical, eps).lambda1
    c = abs(lp.real) <= 1e-9 and abs(lm.real) <= 1e-9 and abs(lp.imag - lm.imag) > 1e-9
    dev = [abs(boundary(e).ratio_to_asymptotic - 1) for e in (0.02, 0.01, 0.005)]
    d = dev[0] > dev[1] > dev[2]
    ok = a and bb and c and d and trace.max_real > 0
    detail = (f"(a) mu_c {b.mu_critical:.6f} ratio {b.ratio_to_asymptotic:.4f}; "
              f"(b) max Re {re[k]:.3e} at mu {mus[k]:.4f}; (c) Re at 1.2 mu_c {max(abs(lp.real), abs(lm.real)):.1e}; "
              f"(d) |ratio-1| {dev[0]:.4f} > {dev[1]:.4f} > {dev[2]:.4f}")
    assert report("C8", ok, detail)


def test_c9_sideband_pair(report):
    worst = 0.0
    for eps, mu in GRID:
        lp, _ = decomposed(mu, eps).lambda0
        worst = max(worst, abs(lp.imag - (np.sqrt(mu) + mu)) / (10 * np.sqrt(mu) * (eps ** 2 + mu * eps + mu ** 2)))
    assert report("C9", worst <= 1, f"sideband pair error/bound ratio {worst:.1e}")


def test_c10_jordan_structure(report):
    worst = max(np.linalg.norm(reduced(0.0, eps).blocks.L4 @ reduced(0.0, eps).blocks.L4) / (50 * eps ** 3)
                for eps in EPS3)
    assert report("C10", worst <= 1, f"||L4(0,eps)^2|| / (50 eps^3) max {worst:.1e}")


def test_c11_structured_inverse(report, rng):
    worst, n = 0.0, 0
    while n < 1000:
        a, b, c, d, e = rng.uniform(-1, 1, 5)
        A = bd.sylvester_matrix(a, b, c, d, e)
        if abs(np.linalg.det(A)) < 1e-3:
            continue
        det, inv = bd.structured_inverse_4x4(a, b, c, d, e)
        ref = np.linalg.solve(A, np.eye(4))
        worst = max(worst, np.linalg.norm(inv - ref) / np.linalg.norm(ref),
                    abs(det - np.linalg.det(A)) / abs(np.linalg.det(A)))
        n += 1
    assert report("C11", worst <= 1e-12, f"closed-form 4x4 inverse vs dense solve, 1000 samples, max rel {worst:.1e}")


def test_c12_symmetry(report):
    ham = 0.0
    for eps, mu in GRID + [(e, 0.0) for e in EPS3]:
        ev = np.linalg.eigvals(reduced(mu, eps).blocks.L4)
        ham = max(ham, blochop.multiset_distance(ev, -np.conj(ev)))
    trace = asy.trace_figure8(0.01, 16, boundary=boundary(0.01))
    pos = {p.mu: p for p in trace.branch(1)}
    mirror = max(max(abs(q.lambda_plus - np.conj(pos[-q.mu].lambda_plus)),
                     abs(q.lambda_minus - np.conj(pos[-q.mu].lambda_minus))) for q in trace.branch(-1))
    ok = ham <= 1e-9 and mirror <= 1e-12
    assert report("C12", ok, f"L4 spectrum vs -conj {ham:.1e} (1e-9), mu<0 branch vs conjugate {mirror:.1e} (1e-12)")
