import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bfspectrum.errors import DomainError
from bfspectrum.wavecoeff import TrigPolynomial, eval_trig, stokes_coefficients

coeff = st.floats(-10, 10, allow_nan=False)
amplitude = st.floats(-0.1, 0.1, allow_nan=False)


def test_flat_wave():
    sc = stokes_coefficients(0.0)
    assert sc.c == 1.0
    for poly in (sc.p, sc.a):
        assert poly.constant == 0.0
        assert poly.cos_coeffs == () and poly.sin_coeffs == ()


def test_coefficients_at_cap():
    sc = stokes_coefficients(0.1)
    assert sc.c == pytest.approx(1.005, abs=1e-15)
    assert sc.p.cos_coeffs == pytest.approx((-0.2, -0.02), abs=1e-15)
    assert sc.p.constant == pytest.approx(0.015, abs=1e-15)
    assert sc.a.cos_coeffs == pytest.approx((-0.2, -0.02), abs=1e-15)
    assert sc.a.constant == pytest.approx(0.02, abs=1e-15)


@pytest.mark.parametrize("eps", [0.2, -0.11, math.inf, math.nan])
def test_amplitude_out_of_range(eps):
    with pytest.raises(DomainError, match="0.1"):
        stokes_coefficients(eps)


def test_eval_hand_sums():
    p = stokes_coefficients(0.1).p
    assert eval_trig(p, 0.0) == pytest.approx(-0.205, abs=1e-15)
    assert eval_trig(p, math.pi) == pytest.approx(0.195, abs=1e-15)
    assert eval_trig(TrigPolynomial(0.0, (), ()), 1.234) == 0.0


def test_eval_vectorized():
    p = stokes_coefficients(0.05).p
    x = np.linspace(0, 2 * np.pi, 7)
    assert np.allclose(eval_trig(p, x), [eval_trig(p, xi) for xi in x])


def test_fourier_coefficients_reconstruct():
    poly = TrigPolynomial(0.3, (1.0, -0.5), (0.25, 2.0))
    c = poly.fourier_coefficients()
    x = np.linspace(0, 2 * np.pi, 11)
    recon = sum(ck * np.exp(1j * k * x) for k, ck in c.items())
    assert np.allclose(recon.imag, 0, atol=1e-14)
    assert np.allclose(recon.real, eval_trig(poly, x), atol=1e-14)


@given(coeff, st.lists(coeff, max_size=4), st.lists(coeff, max_size=4), st.floats(-20, 20))
def test_periodic(c0, cs, ss, x):
    poly = TrigPolynomial(c0, tuple(cs), tuple(ss))
    assert eval_trig(poly, x) == pytest.approx(eval_trig(poly, x + 2 * np.pi), abs=1e-9)


@given(coeff, st.lists(coeff, max_size=4), st.floats(-20, 20))
def test_cosine_only_is_even(c0, cs, x):
    poly = TrigPolynomial(c0, tuple(cs), ())
    assert poly.is_even
    assert eval_trig(poly, x) == pytest.approx(eval_trig(poly, -x), abs=1e-9)


@given(amplitude)
def test_structure_of_expansion(eps):
    sc = stokes_coefficients(eps)
    assert sc.p.is_even and sc.a.is_even
    assert sc.p.degree <= 2 and sc.a.degree <= 2
    # same first harmonic, constants differ by eps^2 / 2
    assert sc.p.cos_coeffs[:1] == sc.a.cos_coeffs[:1]
    assert sc.a.constant - sc.p.constant == pytest.approx(eps * eps / 2, abs=1e-16)
    assert sc.c == pytest.approx(1 + eps * eps / 2)
