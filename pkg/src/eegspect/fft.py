"""Discrete Fourier transform kernels.

The contract everywhere is the plain DFT sum

    X[k] = sum_n x[n] * exp(-2j*pi*k*n/N),   k = 0..N-1

computed by an iterative radix-2 Cooley-Tukey transform for power-of-two
lengths. A length ``r * 2**m`` with a small odd factor ``r`` takes one mixed
radix step (``r`` radix-2 transforms combined by an ``r``-point DFT); any
other length goes through Bluestein's chirp-z algorithm. All functions
operate along the last axis and broadcast over any leading axes.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["dft", "fft", "ifft", "is_power_of_two"]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@lru_cache(maxsize=64)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=64)
def _twiddles(size: int) -> np.ndarray:
    half = size // 2
    tw = np.exp(-2j * np.pi * np.arange(half) / size)
    tw.setflags(write=False)
    return tw


def _radix2(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    lead = x.shape[:-1]
    a = np.asarray(x, dtype=np.complex128)[..., _bit_reversal(n)]
    size = 2
    while size <= n:
        half = size // 2
        a = a.reshape(lead + (n // size, size))
        even = a[..., :half]
        odd = a[..., half:] * _twiddles(size)
        a = np.concatenate([even + odd, even - odd], axis=-1)
        size *= 2
    return a.reshape(lead + (n,))


def _radix2_inverse(x: np.ndarray) -> np.ndarray:
    return np.conj(_radix2(np.conj(x))) / x.shape[-1]


# largest odd factor handled by a direct r-point DFT instead of Bluestein
_MAX_DIRECT_ODD = 15


def _odd_part(n: int) -> int:
    while n % 2 == 0:
        n //= 2
    return n


@lru_cache(maxsize=32)
def _mixed_plan(r: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    n = r * m
    s = np.arange(r)
    # exponents reduced mod n/r before scaling keep the phases exact
    twiddle = np.exp(-2j * np.pi * (np.outer(s, np.arange(m)) % n) / n)
    small = np.exp(-2j * np.pi * (np.outer(s, s) % r) / r)
    twiddle.setflags(write=False)
    small.setflags(write=False)
    return twiddle, small


def _mixed(x: np.ndarray, r: int) -> np.ndarray:
    # n = r*M; decimate by r, transform each phase, combine with an r-point DFT
    n = x.shape[-1]
    m = n // r
    lead = x.shape[:-1]
    twiddle, small = _mixed_plan(r, m)
    phases = np.swapaxes(x.reshape(lead + (m, r)), -1, -2)
    y = _radix2(phases) * twiddle if m > 1 else phases.astype(np.complex128)
    return (small @ y).reshape(lead + (n,))


@lru_cache(maxsize=32)
def _bluestein_plan(n: int) -> tuple[np.ndarray, np.ndarray, int]:
    m = 1
    while m < 2 * n - 1:
        m *= 2
    # n^2 mod 2n keeps the chirp phase exact for large n
    k = np.arange(n, dtype=np.int64)
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    kernel = np.zeros(m, dtype=np.complex128)
    kernel[:n] = np.conj(chirp)
    kernel[m - n + 1:] = np.conj(chirp[1:])[::-1]
    kernel_f = _radix2(kernel)
    chirp.setflags(write=False)
    kernel_f.setflags(write=False)
    return chirp, kernel_f, m


def _bluestein(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    chirp, kernel_f, m = _bluestein_plan(n)
    padded = np.zeros(x.shape[:-1] + (m,), dtype=np.complex128)
    padded[..., :n] = x * chirp
    conv = _radix2_inverse(_radix2(padded) * kernel_f)
    return conv[..., :n] * chirp


def fft(x) -> np.ndarray:
    """Fast DFT along the last axis.

    Radix-2 for power-of-two lengths, one mixed-radix step for lengths whose
    odd part is at most 15, Bluestein otherwise.

    Raises
    ------
    ValueError
        If the last axis is empty.
    """
    x = np.asarray(x)
    n = x.shape[-1] if x.ndim else 0
    if n == 0:
        raise ValueError("dft of an empty sequence is undefined")
    if n == 1:
        return x.astype(np.complex128)
    if is_power_of_two(n):
        return _radix2(x)
    r = _odd_part(n)
    if r <= _MAX_DIRECT_ODD:
        return _mixed(x, r)
    return _bluestein(x.astype(np.complex128))


def ifft(X) -> np.ndarray:
    """Inverse of :func:`fft` (1/N normalisation)."""
    X = np.asarray(X, dtype=np.complex128)
    return np.conj(fft(np.conj(X))) / X.shape[-1]


def dft(x) -> np.ndarray:
    """DFT of a real or complex sequence; alias of :func:`fft`."""
    return fft(x)

