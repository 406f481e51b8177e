"""Discrete Fourier transforms and periodic convolution.

Conventions: the forward transform carries no normalization and the inverse
carries the 1/N factor.  Arbitrary lengths N >= 1 are supported; the fast
paths run in O(N log N) for any N.  All functions are pure.
"""

import numpy as np

from .errors import LengthMismatch, NonSymmetricSpectrum

# Relative imaginary residue allowed when a real inverse transform is requested.
REAL_RESIDUE_TOL = 1e-9


def dft(f):
    """Forward DFT of a length-N sequence: F_xi = sum_n f_n exp(-i 2pi n xi / N)."""
    f = np.asarray(f)
    if f.ndim != 1 or f.size < 1:
        raise LengthMismatch("dft expects a 1-D sequence of length >= 1")
    return np.fft.fft(f)


def idft(spectrum, real_output=True):
    """Inverse DFT with 1/N normalization.

    With ``real_output`` (the default) the imaginary residue is asserted to be
    below REAL_RESIDUE_TOL * ||spectrum|| and then discarded; a spectrum that
    is not conjugate-symmetric raises NonSymmetricSpectrum instead of silently
    returning a truncated result.
    """
    spectrum = np.asarray(spectrum, dtype=complex)
    if spectrum.ndim != 1 or spectrum.size < 1:
        raise LengthMismatch("idft expects a 1-D sequence of length >= 1")
    out = np.fft.ifft(spectrum)
    if not real_output:
        return out
    residue = np.linalg.norm(out.imag)
    if residue > REAL_RESIDUE_TOL * np.linalg.norm(spectrum):
        raise NonSymmetricSpectrum(
            f"imaginary residue {residue:.3e} exceeds tolerance for a real result"
        )
    return out.real


def circular_convolve(f, g, method="fft"):
    """Periodic convolution (f * g)_m = sum_n f_n g_{(m-n) mod N}.

    ``method`` selects the O(N log N) transform path ("fft") or the O(N^2)
    reference summation ("direct"); the two agree to ~1e-10 relative and the
    direct path exists so the fast one can be checked against it.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape or f.ndim != 1:
        raise LengthMismatch(f"convolution operands must share a 1-D shape, got {f.shape} vs {g.shape}")
    if method == "direct":
        n = f.size
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return (g[idx] * f[None, :]).sum(axis=1)
    if method != "fft":
        raise ValueError(f"unknown convolution method {method!r}")
    return np.fft.ifft(np.fft.fft(f) * np.fft.fft(g)).real
