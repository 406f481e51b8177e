"""Translation-invariant Daubechies wavelet frame (cycle spinning baseline).

The undecimated (a trous) analysis keeps every shift at every scale, so the
transform is shift-covariant.  Filters are rescaled by sqrt(2) relative to the
orthonormal pair inside the cascade: an undecimated frame does not need the
decimated transform's per-stage 1/sqrt(2), and with this normalization the
order-1 (Haar) detail planes coincide exactly with the order-1 multiscale
difference planes, so one regularization weight scale serves both transforms.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch, UnsupportedOrder

_SQRT2 = math.sqrt(2.0)

# Canonical orthonormal scaling (lowpass) filters, sum = sqrt(2).  Transcribed
# values are never trusted: daubechies_filters re-verifies every invariant.
_LOWPASS = {
    1: np.array([1.0, 1.0]) / _SQRT2,
    2: np.array([1.0 + math.sqrt(3.0), 3.0 + math.sqrt(3.0),
                 3.0 - math.sqrt(3.0), 1.0 - math.sqrt(3.0)]) / (4.0 * _SQRT2),
    3: np.array([0.3326705529509569, 0.8068915093133388, 0.4598775021193313,
                 -0.13501102001039084, -0.08544127388224149, 0.035226291882100656]),
}


@dataclass
class WaveletFilters:
    """Orthonormal scaling/wavelet filter pair with k vanishing moments."""
    moments: int
    lowpass: np.ndarray = field(repr=False)
    highpass: np.ndarray = field(repr=False)


@dataclass
class FrameStack:
    """Undecimated wavelet detail planes (approximation coefficients excluded)."""
    planes: list
    moments: int
    weights: list

    @property
    def num_levels(self):
        return len(self.planes)


def wavelet_level_weights(moments, levels):
    """Weight 2**-(j+k-1) / levels for level j = 0..levels-1 (mirrors the
    multiscale difference weights so one lambda scale transfers)."""
    if levels < 1:
        raise UnsupportedOrder("levels must be >= 1")
    return [2.0 ** -(j + moments - 1) / levels for j in range(levels)]


def daubechies_filters(moments):
    """Canonical Daubechies filter pair for k in {1, 2, 3} vanishing moments.

    Construction re-checks, at tight tolerance, that the transcribed lowpass
    filter sums to sqrt(2), is orthonormal to its even shifts, and that the
    quadrature-mirror highpass annihilates monomials of degree < k.
    """
    if moments not in _LOWPASS:
        raise UnsupportedOrder(f"supported vanishing moments are 1, 2, 3; got {moments}")
    h = _LOWPASS[moments].copy()
    taps = 2 * moments
    g = np.array([(-1.0) ** n * h[taps - 1 - n] for n in range(taps)])
    if abs(h.sum() - _SQRT2) > 1e-10:
        raise UnsupportedOrder(f"lowpass filter for k={moments} does not sum to sqrt(2)")
    for m in range(moments):
        target = 1.0 if m == 0 else 0.0
        if abs(np.dot(h[: taps - 2 * m], h[2 * m:]) - target) > 1e-10:
            raise UnsupportedOrder(f"lowpass filter for k={moments} fails orthonormality at shift {2 * m}")
    n = np.arange(taps)
    for p in range(moments):
        if abs(np.dot(g, n.astype(float) ** p)) > 1e-8:
            raise UnsupportedOrder(f"highpass filter for k={moments} fails vanishing moment {p}")
    return WaveletFilters(moments=moments, lowpass=h, highpass=g)


# ---------------------------------------------------------------------------
# a trous cascade (periodic wrap)

def _correlate(a, w, step, axis):
    out = w[0] * a
    for i in range(1, w.size):
        out = out + w[i] * np.roll(a, -step * i, axis=axis)
    return out


def _convolve(a, w, step, axis):
    out = w[0] * a
    for i in range(1, w.size):
        out = out + w[i] * np.roll(a, step * i, axis=axis)
    return out


def _frame_filters(moments):
    filt = daubechies_filters(moments)
    return _SQRT2 * filt.lowpass, _SQRT2 * filt.highpass


def _analyze_axis(f, moments, levels, axis):
    h, g = _frame_filters(moments)
    approx = np.asarray(f, dtype=float)
    planes = []
    for j in range(levels):
        step = 2 ** j
        planes.append(_correlate(approx, g, step, axis))
        approx = _correlate(approx, h, step, axis)
    return planes


def _adjoint_axis(planes, moments, levels, axis):
    h, g = _frame_filters(moments)
    acc = np.zeros_like(np.asarray(planes[0], dtype=float))
    for j in range(levels - 1, -1, -1):
        step = 2 ** j
        acc = _convolve(acc, h, step, axis) + _convolve(np.asarray(planes[j], dtype=float), g, step, axis)
    return acc


def ti_wavelet_transform(f, moments, levels):
    """Undecimated detail coefficients: level j is the circular correlation of
    the running approximation with the step-2**j upsampled wavelet filter,
    equivalently the inner products with every shift of the level-j frame
    element."""
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise ShapeMismatch("ti_wavelet_transform expects a 1-D signal")
    planes = _analyze_axis(f, moments, levels, axis=-1)
    return FrameStack(planes=planes, moments=moments, weights=wavelet_level_weights(moments, levels))


def ti_wavelet_adjoint(stack, moments, levels, length):
    """Adjoint of ti_wavelet_transform (unweighted sum over levels)."""
    planes = stack.planes if isinstance(stack, FrameStack) else list(stack)
    if len(planes) != levels:
        raise ShapeMismatch(f"expected {levels} planes, got {len(planes)}")
    for p in planes:
        if np.ndim(p) != 1 or np.shape(p)[0] != length:
            raise ShapeMismatch("plane shapes inconsistent with signal length")
    return _adjoint_axis(planes, moments, levels, axis=-1)


def ti_wavelet_transform_2d(img, moments, levels):
    """Row- and column-direction detail planes, same scheme as the 2-D
    multiscale difference transform."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ShapeMismatch("ti_wavelet_transform_2d expects a 2-D image")
    by_row = _analyze_axis(img, moments, levels, axis=1)
    by_col = _analyze_axis(img, moments, levels, axis=0)
    planes = [np.stack([by_row[j], by_col[j]], axis=-1) for j in range(levels)]
    return FrameStack(planes=planes, moments=moments, weights=wavelet_level_weights(moments, levels))


def ti_wavelet_adjoint_2d(stack, moments, levels, shape):
    planes = stack.planes if isinstance(stack, FrameStack) else list(stack)
    rows, cols = shape
    if len(planes) != levels or any(np.shape(p) != (rows, cols, 2) for p in planes):
        raise ShapeMismatch("plane shapes inconsistent with image shape")
    acc_r = _adjoint_axis([p[..., 0] for p in planes], moments, levels, axis=1)
    acc_c = _adjoint_axis([p[..., 1] for p in planes], moments, levels, axis=0)
    return acc_r + acc_c


def frame_multipliers(moments, levels, length):
    """Fourier multipliers of the level-j analysis operators.

    The level-j detail plane equals ifft(fft(f) * multiplier[j]).real; useful
    for diagonal preconditioning and for cross-checking the cascade.
    """
    h, g = _frame_filters(moments)
    xi = np.arange(length)
    mults = []
    running = np.ones(length, dtype=complex)
    for j in range(levels):
        step = 2 ** j
        ghat = np.sum(g[:, None] * np.exp(2j * np.pi * xi[None, :] * step * np.arange(g.size)[:, None] / length), axis=0)
        mults.append(running * ghat)
        hhat = np.sum(h[:, None] * np.exp(2j * np.pi * xi[None, :] * step * np.arange(h.size)[:, None] / length), axis=0)
        running = running * hhat
    return mults
