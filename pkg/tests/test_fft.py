import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eegspect.fft import dft, fft, ifft, is_power_of_two
from oracles import naive_dft


def test_constant_sequence_is_pure_dc():
    X = dft(np.ones(8))
    assert abs(X[0] - 8) < 1e-12
    assert np.max(np.abs(X[1:])) < 1e-12


def test_impulse_is_flat():
    x = np.zeros(13)
    x[0] = 1
    assert np.allclose(dft(x), 1, atol=1e-12)


def test_random_length_64_matches_naive_sum(rng):
    x = rng.standard_normal(64)
    ref = naive_dft(x)
    assert np.max(np.abs(dft(x) - ref)) <= 1e-9 * np.max(np.abs(ref))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 7, 12, 17, 31, 48, 96, 100, 127, 250, 640, 1000, 1023, 1280])
def test_every_code_path_matches_naive_sum(rng, n):
    # powers of two, small odd factors (mixed radix) and primes (Bluestein)
    x = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
    ref = naive_dft(x)
    assert np.max(np.abs(fft(x) - ref)) <= 1e-9 * max(np.max(np.abs(ref)), 1e-300)


def test_leading_axes_broadcast(rng):
    x = rng.standard_normal((3, 4, 40))
    assert np.allclose(fft(x)[2, 1], fft(x[2, 1]))


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        dft([])


def test_inverse_round_trip(rng):
    x = rng.standard_normal(77) + 1j * rng.standard_normal(77)
    assert np.allclose(ifft(fft(x)), x, atol=1e-12)


def test_is_power_of_two():
    assert [n for n in range(20) if is_power_of_two(n)] == [1, 2, 4, 8, 16]


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 300), elements=st.floats(-1e3, 1e3)))
def test_parseval(x):
    X = fft(x)
    energy = np.sum(x * x)
    assert abs(energy - np.sum(np.abs(X) ** 2) / x.size) <= 1e-9 * max(energy, 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_linearity(n, a, b, seed):
    r = np.random.default_rng(seed)
    x, y = r.standard_normal(n), r.standard_normal(n)
    lhs = fft(a * x + b * y)
    rhs = a * fft(x) + b * fft(y)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(np.max(np.abs(rhs)), 1.0)
