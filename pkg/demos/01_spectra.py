"""
Spectral estimates of a noisy EEG-like trace
============================================

A 10 Hz rhythm buried in pink noise, looked at three ways: a Welch average,
a multitaper estimate and a sliding multitaper spectrogram.
"""
import numpy as np

from eegspect.spectral import (DEFAULT_BANDS, band_power, dpss, multitaper_psd,
                               multitaper_spectrogram, welch_psd)

fs = 256
t = np.arange(2 * fs) / fs
rng = np.random.default_rng(0)
x = np.cumsum(rng.standard_normal(t.size)) * 0.05 + np.sin(2 * np.pi * 10 * t)

# Welch: half-length Hamming segments, 50% overlap
welch = welch_psd(x, fs)
print("welch bins:", welch.values.shape, "resolution", welch.resolution, "Hz")
print("welch peak at", welch.freqs[np.argmax(welch.values)], "Hz")

# The tapers: orthonormal, each with one more sign change than the last
bank = dpss(t.size, 4, 7)
print("concentration:", np.round(bank.eigenvalues, 6))
print("gram error:", np.abs(bank.tapers @ bank.tapers.T - np.eye(bank.q)).max())

# Both multitaper modes
for mode in ("paper-coherent", "incoherent"):
    mt = multitaper_psd(x, bank, mode=mode, fs=fs)
    print(f"{mode:>15}: peak at {mt.freqs[np.argmax(mt.values)]} Hz")

mt = multitaper_psd(x, bank, mode="incoherent", fs=fs)
for band in DEFAULT_BANDS:
    print(f"  {band.name:<10} {band_power(mt, band):10.4f}")

# Time-frequency: 0.25 s tapers, one column per sample
grid = multitaper_spectrogram(x, fs, dpss(64, 2, 3), hop=1)
print("spectrogram:", grid.values.shape, "bins", grid.freqs[:4], "...")
