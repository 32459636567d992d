"""Power spectra, Slepian tapers, multitaper estimates and spectrograms.

All estimators work along the last axis of their input, so a
``(channels, samples)`` matrix is processed channel by channel in one call.

One-sided spectra keep bins ``k = 0 .. N/2 - 1`` (DC kept, Nyquist dropped),
so a window of ``N`` samples yields exactly ``N/2`` frequency bins.
Power values are ``|X[k]|**2`` divided by the taper/window energy; no
sampling-rate scaling is applied.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.linalg import eigh_tridiagonal
from scipy.signal import get_window

from .fft import dft, fft

__all__ = [
    "Spectrum",
    "TaperBank",
    "SpectrogramGrid",
    "FrequencyBand",
    "DEFAULT_BANDS",
    "MULTITAPER_MODES",
    "dft",
    "power_spectrum",
    "welch_psd",
    "dpss",
    "multitaper_components",
    "multitaper_average",
    "multitaper_psd",
    "stft",
    "multitaper_spectrogram",
    "band_power",
]

MULTITAPER_MODES = ("paper-coherent", "incoherent")


@dataclass(frozen=True)
class Spectrum:
    """Frequency axis plus power (or complex) values along the last axis."""

    freqs: np.ndarray
    values: np.ndarray
    resolution: float


@dataclass(frozen=True, eq=False)
class TaperBank:
    """Orthonormal DPSS tapers, one per row, with concentration ratios."""

    tapers: np.ndarray
    eigenvalues: np.ndarray
    nw: float

    @property
    def q(self) -> int:
        return self.tapers.shape[0]

    @property
    def n(self) -> int:
        return self.tapers.shape[1]

    @classmethod
    def from_tapers(cls, tapers, eigenvalues=None, nw: float = 0.0) -> "TaperBank":
        """Wrap an arbitrary taper matrix (rows = tapers)."""
        tapers = np.atleast_2d(np.asarray(tapers, dtype=np.float64)).copy()
        if eigenvalues is None:
            eigenvalues = np.ones(tapers.shape[0])
        eigenvalues = np.asarray(eigenvalues, dtype=np.float64).copy()
        tapers.setflags(write=False)
        eigenvalues.setflags(write=False)
        return cls(tapers, eigenvalues, float(nw))


@dataclass(frozen=True)
class SpectrogramGrid:
    freqs: np.ndarray
    times: np.ndarray
    values: np.ndarray  # (..., freq, time)
    window_len: int
    hop: int


@dataclass(frozen=True)
class FrequencyBand:
    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise ValueError(f"band {self.name!r} needs 0 <= lo < hi, got ({self.lo}, {self.hi})")


DEFAULT_BANDS = (
    FrequencyBand("delta", 0.5, 3.5),
    FrequencyBand("theta", 3.5, 7.5),
    FrequencyBand("alpha", 7.5, 12.5),
    FrequencyBand("beta", 12.5, 30.0),
    FrequencyBand("low_gamma", 30.0, 60.0),
    FrequencyBand("high_gamma", 80.0, math.inf),
)


def power_spectrum(X) -> np.ndarray:
    """Elementwise squared magnitude ``|X|**2``."""
    X = np.asarray(X)
    return X.real**2 + X.imag**2


def _one_sided(n_fft: int) -> int:
    return max(n_fft // 2, 1)


def _window(kind: str, n: int) -> np.ndarray:
    kind = kind.lower()
    if kind in ("rectangular", "rect", "boxcar"):
        return np.ones(n)
    return get_window(kind, n, fftbins=True)


def welch_psd(x, fs: float, seg_len: int | None = None, overlap_frac: float = 0.5,
              window_kind: str = "hamming", fft_len: int | None = None) -> Spectrum:
    """Welch PSD: average of windowed, zero-padded segment periodograms.

    Defaults give ``seg_len = N // 2``, 50 % overlap and ``fft_len = N`` so a
    window of ``N`` samples produces ``N // 2`` bins at ``fs / N`` spacing.
    Each periodogram is divided by the window energy ``sum(h**2)``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if seg_len is None:
        seg_len = max(n // 2, 1)
    if fft_len is None:
        fft_len = n
    if seg_len < 1 or seg_len > n:
        raise ValueError(f"seg_len={seg_len} must lie in [1, {n}]")
    if fft_len < seg_len:
        raise ValueError(f"fft_len={fft_len} is shorter than seg_len={seg_len}")
    if not 0 <= overlap_frac < 1:
        raise ValueError("overlap_frac must lie in [0, 1)")

    hop = max(1, int(seg_len * (1.0 - overlap_frac)))
    h = _window(window_kind, seg_len)
    segments = sliding_window_view(x, seg_len, axis=-1)[..., ::hop, :]
    tapered = segments * h
    if fft_len > seg_len:
        pad = [(0, 0)] * (tapered.ndim - 1) + [(0, fft_len - seg_len)]
        tapered = np.pad(tapered, pad)
    bins = _one_sided(fft_len)
    pxx = power_spectrum(fft(tapered)[..., :bins]).mean(axis=-2) / np.sum(h * h)
    return Spectrum(np.arange(bins) * fs / fft_len, pxx, fs / fft_len)


def _concentration(taper: np.ndarray, w: float) -> float:
    # v^T A v with A[n, m] = sin(2 pi W (n - m)) / (pi (n - m))
    n = taper.size
    r = np.correlate(taper, taper, mode="full")[n - 1:]
    lags = np.arange(1, n)
    return float(2 * w * r[0] + 2 * np.sum(r[1:] * np.sin(2 * np.pi * w * lags) / (np.pi * lags)))


@lru_cache(maxsize=64)
def dpss(n: int, nw: float, q: int) -> TaperBank:
    """Discrete prolate spheroidal sequences of length ``n``.

    Tapers are the ``q`` leading eigenvectors of the symmetric tridiagonal
    matrix that commutes with the time-bandwidth concentration operator.
    Each is scaled to unit energy. Taper 0 is signed to have a nonnegative
    sum; higher tapers have a positive first (non-negligible) sample.

    Parameters
    ----------
    n : int
        Taper length in samples.
    nw : float
        Time-bandwidth product; half bandwidth is ``nw / n`` cycles/sample.
    q : int
        Number of tapers, conventionally at most ``2 * nw - 1``.
    """
    n, q, nw = int(n), int(q), float(nw)
    if nw <= 0:
        raise ValueError("nw must be positive")
    if q < 1 or q > n:
        raise ValueError(f"need 1 <= q <= n, got q={q}, n={n}")
    if q > 2 * nw - 1:
        warnings.warn(f"q={q} exceeds 2*nw-1={2 * nw - 1:g}; trailing tapers leak badly",
                      stacklevel=2)

    w = nw / n
    idx = np.arange(n, dtype=np.float64)
    diag = ((n - 1 - 2 * idx) / 2.0) ** 2 * np.cos(2 * np.pi * w)
    off = idx[1:] * (n - idx[1:]) / 2.0
    if n == 1:
        vecs = np.ones((1, 1))
    else:
        _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(n - q, n - 1))
    tapers = vecs[:, ::-1].T.copy()
    tapers /= np.linalg.norm(tapers, axis=1, keepdims=True)

    for l, taper in enumerate(tapers):
        if l == 0:
            flip = taper.sum() < 0
        else:
            big = np.flatnonzero(np.abs(taper) > 1e-12 * np.abs(taper).max())
            flip = taper[big[0]] < 0
        if flip:
            tapers[l] = -taper

    eigenvalues = np.array([_concentration(t, w) for t in tapers])
    return TaperBank.from_tapers(tapers, eigenvalues, nw)


def _check_length(x: np.ndarray, bank: TaperBank):
    if x.shape[-1] != bank.n:
        raise ValueError(f"signal length {x.shape[-1]} does not match taper length {bank.n}")


def multitaper_components(x, bank: TaperBank) -> np.ndarray:
    """DFT of every tapered copy of ``x``; shape ``(..., q, N)``."""
    x = np.asarray(x, dtype=np.float64)
    _check_length(x, bank)
    return fft(x[..., None, :] * bank.tapers)


def multitaper_average(Y) -> np.ndarray:
    """Coherent average over the taper axis (second to last)."""
    Y = np.asarray(Y)
    if Y.ndim < 2 or Y.shape[-2] < 1:
        raise ValueError("expected at least one taper row")
    return Y.mean(axis=-2)


def _tapered_power(frames: np.ndarray, bank: TaperBank, mode: str, bins: int) -> np.ndarray:
    if mode == "paper-coherent":
        # mean_l DFT(M_l x) == DFT(mean_l(M_l) x): one transform instead of q
        return power_spectrum(fft(frames * bank.tapers.mean(axis=0))[..., :bins])
    if mode == "incoherent":
        out = np.zeros(frames.shape[:-1] + (bins,))
        for taper in bank.tapers:
            out += power_spectrum(fft(frames * taper)[..., :bins])
        return out / bank.q
    raise ValueError(f"unknown multitaper mode {mode!r}; expected one of {MULTITAPER_MODES}")


def multitaper_psd(x, bank: TaperBank, mode: str = "paper-coherent", fs: float = 1.0) -> Spectrum:
    """Multitaper PSD over bins ``0 .. N/2 - 1``.

    ``paper-coherent`` squares the magnitude of the taper-averaged complex
    spectrum; ``incoherent`` averages the per-taper powers.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_length(x, bank)
    n = bank.n
    bins = _one_sided(n)
    return Spectrum(np.arange(bins) * fs / n, _tapered_power(x, bank, mode, bins), fs / n)


def _frames(x: np.ndarray, w: int, hop: int, center: bool) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[-1]
    if hop <= 0:
        raise ValueError("hop must be positive")
    if center:
        half = w // 2
        pad = [(0, 0)] * (x.ndim - 1) + [(half, half)]
        padded = np.pad(x, pad, mode="reflect") if n > 1 else np.pad(x, pad, mode="edge")
        count = -(-n // hop)
        centers = np.arange(count) * hop
    else:
        padded = x
        if w > n:
            raise ValueError(f"window length {w} exceeds signal length {n}")
        count = (n - w) // hop + 1
        centers = np.arange(count) * hop + w / 2.0
    if w > padded.shape[-1]:
        raise ValueError(f"window length {w} exceeds padded length {padded.shape[-1]}")
    frames = sliding_window_view(padded, w, axis=-1)[..., ::hop, :][..., :count, :]
    return frames, centers


def stft(x, window, hop: int = 1, fs: float = 1.0, center: bool = True) -> SpectrogramGrid:
    """Short-time power spectrum ``|X[t, k]|**2`` with a sliding window.

    ``window`` is either an array of window weights or ``(kind, length)``.
    Output values have shape ``(..., window_len // 2, n_frames)``.
    """
    if isinstance(window, tuple):
        window = _window(window[0], int(window[1]))
    h = np.asarray(window, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    w = h.size
    frames, centers = _frames(x, w, int(hop), center)
    bins = _one_sided(w)
    values = power_spectrum(fft(frames * h)[..., :bins])
    return SpectrogramGrid(np.arange(bins) * fs / w, centers / fs,
                           np.swapaxes(values, -1, -2), w, int(hop))


def multitaper_spectrogram(x, fs: float, bank: TaperBank, hop: int = 1, f_hi: float = 60.0,
                           mode: str = "paper-coherent") -> SpectrogramGrid:
    """Sliding multitaper spectrogram truncated to ``[0, f_hi]`` Hz.

    The signal is reflect-padded by ``w // 2`` on both sides and frame ``t``
    is centred on sample ``t * hop``, so ``hop=1`` gives one column per
    input sample. Values have shape ``(..., F, n_frames)``.
    """
    x = np.asarray(x, dtype=np.float64)
    w = bank.n
    frames, centers = _frames(x, w, int(hop), center=True)
    bins = min(int(math.floor(f_hi * w / fs + 1e-9)), w // 2) + 1
    values = _tapered_power(frames, bank, mode, bins)
    return SpectrogramGrid(np.arange(bins) * fs / w, centers / fs,
                           np.swapaxes(values, -1, -2), w, int(hop))


def band_power(spectrum: Spectrum, band: FrequencyBand):
    """Sum of PSD values with ``lo <= f < hi``, times the bin resolution."""
    mask = (spectrum.freqs >= band.lo) & (spectrum.freqs < band.hi)
    if not mask.any():
        raise ValueError(f"band {band.name!r} has no bins in the spectrum")
    return np.sum(np.asarray(spectrum.values)[..., mask], axis=-1) * spectrum.resolution
