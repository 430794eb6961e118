import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ddmsim.dsp import dft, dft_matrix, idft, make_window, osc_vector, windowed_response
from conftest import crandn


def brute_dft(x):
    n = len(x)
    return np.array([sum(x[k] * np.exp(-2j * np.pi * l * k / n) for k in range(n)) for l in range(n)])


def test_impulse():
    assert np.allclose(dft(np.array([1, 0, 0, 0])), [1, 1, 1, 1])


def test_matches_brute_force_sum(rng):
    x = crandn(rng, 16)
    assert np.allclose(dft(x), brute_dft(x), atol=1e-12)
    assert np.allclose(dft_matrix(16) @ x, brute_dft(x), atol=1e-12)


def test_inverse_pair(rng):
    x = crandn(rng, 256)
    assert np.max(np.abs(idft(dft(x)) - x)) < 1e-12 * np.max(np.abs(x))


@pytest.mark.parametrize("n", [3, 6, 100, 0])
def test_rejects_non_pow2(n):
    with pytest.raises(ValueError):
        dft(np.ones(n))
    with pytest.raises(ValueError):
        idft(np.ones(n))


@pytest.mark.parametrize("m", [0, 1, 5, 31])
def test_on_grid_tone(m):
    n = 32
    X = dft(osc_vector(n, m / n))
    expect = np.zeros(n)
    expect[m] = n
    assert np.max(np.abs(X - expect)) < 1e-9 * n


def test_osc_vector_values():
    assert np.allclose(osc_vector(4, 0), 1)
    assert np.allclose(osc_vector(2, 0.5), [1, -1], atol=1e-15)
    assert abs(osc_vector(8, 1 / 8)[2] - 1j) < 1e-15
    with pytest.raises(ValueError):
        osc_vector(0, 0.1)


def test_windowed_response_rect_on_grid():
    u = windowed_response(16, 3 / 16, make_window("rectangular", 16))
    assert abs(u[3] - 16) < 1e-12
    assert np.max(np.abs(np.delete(u, 3))) < 1e-12


def test_windowed_response_hann_dc():
    w = make_window("hann", 16)
    u = windowed_response(16, 0.0, w)
    assert abs(u[0] - np.sum(w.coeffs)) < 1e-12


def test_windowed_response_half_bin():
    u = windowed_response(16, 3.5 / 16, make_window("rectangular", 16))
    mags = np.abs(u)
    assert set(np.argsort(mags)[-2:]) == {3, 4}
    # Dirichlet kernel by brute force: |sum_n e^{j2 pi n (0.5)/16}| = |sin(pi/2) / sin(pi/32)|
    expect = abs(np.sum(np.exp(1j * np.pi * np.arange(16) / 16)))
    assert mags[3] == pytest.approx(expect, rel=1e-12)
    assert mags[4] == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(1 / np.sin(np.pi / 32), rel=1e-12)  # 10.2023


def test_windowed_response_length_mismatch():
    with pytest.raises(ValueError):
        windowed_response(16, 0.1, make_window("hann", 8))


@pytest.mark.parametrize("kind", ["rectangular", "hann", "hamming", "chebyshev"])
def test_windows_finite_nonnegative(kind):
    w = make_window(kind, 64).coeffs
    assert w.shape == (64,) and np.all(np.isfinite(w)) and np.all(w >= 0)


def test_rect_window_is_ones():
    assert np.array_equal(make_window("rectangular", 8).coeffs, np.ones(8))
    with pytest.raises(ValueError):
        make_window("kaiser", 8)


complex_vecs = st.integers(0, 7).flatmap(
    lambda k: arrays(np.complex128, 2**k, elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False))
)


@given(complex_vecs)
def test_parseval(x):
    lhs = np.sum(np.abs(dft(x)) ** 2)
    rhs = len(x) * np.sum(np.abs(x) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@given(complex_vecs, st.integers(-64, 64))
def test_shift_theorem(x, p):
    n = len(x)
    shifted = dft(x * osc_vector(n, p / n))
    assert np.allclose(shifted, np.roll(dft(x), p), atol=1e-9 * (1 + np.max(np.abs(x))) * n)


@given(st.integers(1, 7), st.floats(-2, 2))
def test_rect_response_equals_dft_of_osc(k, f):
    n = 2**k
    assert np.array_equal(windowed_response(n, f, make_window("rect", n)), dft(osc_vector(n, f)))
