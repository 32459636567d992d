"""EEG seizure-window spectral representations with a reference evaluation pipeline."""

__version__ = "0.1.0"
