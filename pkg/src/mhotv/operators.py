"""Multiscale higher-order finite-difference operators.

Three interchangeable ways of computing the same coefficients are provided:

* ``apply_direct`` — periodic convolution with the explicit stencil;
* ``transform_decomposition`` — one sweep of sparse binomial ("P-chain")
  passes that produces every dyadic scale from the previous one;
* ``transform_fourier`` — closed-form filters applied in Fourier space,
  which also extends the construction to fractional orders.

Scales are dyadic: level j uses the stencil of scale 2**j for j = 0..max_level.
An arithmetic-cost counter can be enabled to verify the advertised flop counts
of each path; counting is process-global and not thread-safe.
"""

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidOrder, LengthMismatch, ShapeMismatch, StencilTooLong
from .spectral import circular_convolve


# ---------------------------------------------------------------------------
# instrumentation

class FlopCounter:
    """Accumulates the arithmetic cost of transform calls while enabled.

    Decomposition-path charges equal the adds/subtracts actually performed.
    The Fourier path charges the conventional N*log2(N) per length-N transform
    plus N per filter multiply.  ``apply_direct`` charges the direct scheme's
    cost model scale*N*order.
    """

    def __init__(self):
        self.enabled = False
        self.total = 0.0

    def add(self, amount):
        if self.enabled:
            self.total += amount

    def reset(self):
        self.total = 0.0


flops = FlopCounter()


@contextmanager
def count_flops():
    """Enable the flop counter within a block; yields the counter.

    The accumulated total stays readable after the block exits.  Not
    reentrant: entering resets the running total.
    """
    prev_enabled = flops.enabled
    flops.enabled = True
    flops.reset()
    try:
        yield flops
    finally:
        flops.enabled = prev_enabled


def _fft_cost(n):
    return n * math.log2(n)


# ---------------------------------------------------------------------------
# domain types

@dataclass
class Stencil:
    """Periodic finite-difference vector of a given order and dyadic-free scale."""
    order: int
    scale: int
    length: int
    values: np.ndarray = field(repr=False)


@dataclass
class FilterSpectrum:
    """DFT of a stencil, from the closed-form expression (order may be fractional)."""
    order: float
    scale: int
    length: int
    values: np.ndarray = field(repr=False)


@dataclass
class CoefficientStack:
    """Per-level transform coefficients plus the model's level weights.

    levels[j] holds the scale-2**j coefficients: length-N arrays in 1-D, or
    (rows, cols, 2) arrays in 2-D with [..., 0] the row-direction (along each
    row) and [..., 1] the column-direction planes.
    """
    levels: list
    order: float
    weights: list

    @property
    def num_levels(self):
        return len(self.levels)


def level_weights(order, max_level):
    """Weight 2**-(j+k-1) / (max_level+1) for level j = 0..max_level."""
    if max_level < 0:
        raise InvalidOrder("max_level must be >= 0")
    return [2.0 ** -(j + order - 1) / (max_level + 1) for j in range(max_level + 1)]


# ---------------------------------------------------------------------------
# stencil construction

def build_stencil(order, scale, length):
    """Construct the periodic finite-difference vector phi of the given order
    and scale.

    Entries: (-1)**order at index 0; zero on 1 <= m <= N - scale*(order+1);
    alternating binomial weights repeated in runs of ``scale`` on the tail.
    Exactly scale*(order+1) entries are nonzero and they sum to zero.
    """
    if order < 1 or int(order) != order:
        raise InvalidOrder(f"stencil order must be a positive integer, got {order}")
    if scale < 1 or int(scale) != scale:
        raise InvalidOrder(f"stencil scale must be a positive integer, got {scale}")
    order, scale, length = int(order), int(scale), int(length)
    if scale * (order + 1) > length:
        raise StencilTooLong(
            f"support {scale * (order + 1)} exceeds signal length {length}"
        )
    values = np.zeros(length)
    values[0] = (-1.0) ** order
    for m in range(length - scale * (order + 1) + 1, length):
        if m < 1:
            continue
        q = (length - m) // scale
        values[m] = (-1.0) ** (order + q) * math.comb(order, q)
    return Stencil(order=order, scale=scale, length=length, values=values)


def circulant_matrix(stencil):
    """Dense circulant matrix whose action equals convolution with the stencil."""
    n = stencil.length
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return stencil.values[idx]


# ---------------------------------------------------------------------------
# the three computation paths (axis-generic internals)

def _forward_diff(x, axis):
    return np.roll(x, -1, axis=axis) - x


def _forward_diff_adjoint(y, axis):
    return np.roll(y, 1, axis=axis) - y


def _p_pass(x, spacing, axis):
    return x + np.roll(x, -spacing, axis=axis)


def _p_pass_adjoint(y, spacing, axis):
    return y + np.roll(y, spacing, axis=axis)


def apply_direct(f, stencil):
    """Convolve a signal with an explicit stencil (reference path)."""
    f = np.asarray(f, dtype=float)
    if f.shape != stencil.values.shape:
        raise LengthMismatch(f"signal length {f.shape} does not match stencil length {stencil.values.shape}")
    flops.add(stencil.scale * stencil.length * stencil.order)
    return circular_convolve(f, stencil.values)


def apply_pchain(f, spacing, order, axis=-1):
    """Apply the binomial-weight chain matrix P_spacing**(order+1).

    Realized as order+1 elementary passes x -> x + shift(x, -spacing), which
    reproduces the binomial-weighted sum of shifts without materializing the
    matrix and costs N*(order+1) additions.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    if spacing * (order + 1) > n:
        raise StencilTooLong(f"P-chain span {spacing * (order + 1)} exceeds length {n}")
    out = f
    for _ in range(order + 1):
        out = _p_pass(out, spacing, axis)
    flops.add(n * (order + 1))
    return out


def _decompose_axis(f, order, max_level, axis):
    n = f.shape[axis]
    if (2 ** max_level) * (order + 1) > n:
        raise StencilTooLong(
            f"largest stencil support {(2 ** max_level) * (order + 1)} exceeds length {n}"
        )
    level = f
    for _ in range(order):
        level = _forward_diff(level, axis)
    flops.add(n * order)
    levels = [level]
    for j in range(1, max_level + 1):
        spacing = 2 ** (j - 1)
        for _ in range(order + 1):
            level = _p_pass(level, spacing, axis)
        flops.add(n * (order + 1))
        levels.append(level)
    return levels


def _adjoint_axis(levels, order, max_level, axis):
    acc = np.array(levels[max_level], dtype=float, copy=True)
    for j in range(max_level, 0, -1):
        spacing = 2 ** (j - 1)
        for _ in range(order + 1):
            acc = _p_pass_adjoint(acc, spacing, axis)
        acc = acc + levels[j - 1]
    for _ in range(order):
        acc = _forward_diff_adjoint(acc, axis)
    return acc


def transform_decomposition(f, order, max_level):
    """All dyadic-scale coefficients in one sweep of the operator decomposition.

    Level 0 is the classical order-k difference (k forward-difference passes);
    each further level is one P-chain application at the previous scale, so the
    whole stack costs max_level*N*(order+1) + N*order flops.
    """
    if order < 1 or int(order) != order:
        raise InvalidOrder(f"decomposition path requires integer order >= 1, got {order}")
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise ShapeMismatch("transform_decomposition expects a 1-D signal")
    levels = _decompose_axis(f, int(order), max_level, axis=-1)
    return CoefficientStack(levels=levels, order=order, weights=level_weights(order, max_level))


# ---------------------------------------------------------------------------
# Fourier path

def filter_values(order, scale, length):
    """Closed-form DFT of the order/scale stencil as a plain complex array.

    values_xi = (exp(i 2 pi xi scale / N) - 1)**(order+1) / (exp(i 2 pi xi / N) - 1)
    with the removable singularity at xi = 0 set to its analytic limit 0.
    Fractional orders use the principal complex power and the result is
    conjugate-symmetrized so that real inputs give real coefficients.
    """
    if order <= 0:
        raise InvalidOrder(f"filter order must be positive, got {order}")
    if scale < 1 or int(scale) != scale:
        raise InvalidOrder(f"filter scale must be a positive integer, got {scale}")
    if length < 2:
        raise InvalidOrder(f"filter length must be >= 2, got {length}")
    xi = np.arange(length)
    unit = np.exp(2j * np.pi * xi / length)
    values = np.zeros(length, dtype=complex)
    values[1:] = (unit[1:] ** scale - 1.0) ** (order + 1.0) / (unit[1:] - 1.0)
    if float(order) != int(order):
        reflected = np.conj(np.roll(values[::-1], 1))
        values = 0.5 * (values + reflected)
        values[0] = 0.0
    return values


def filter_spectrum(order, scale, length):
    """Closed-form stencil spectrum with metadata (fractional orders allowed)."""
    return FilterSpectrum(order=float(order), scale=int(scale), length=int(length),
                          values=filter_values(order, scale, length))


def transform_fourier(f, order, max_level):
    """Coefficients at every dyadic scale via one forward FFT and one filter
    multiply + inverse FFT per level."""
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise ShapeMismatch("transform_fourier expects a 1-D signal")
    n = f.size
    if float(order) == int(order) and (2 ** max_level) * (int(order) + 1) > n:
        raise StencilTooLong(
            f"largest stencil support {(2 ** max_level) * (int(order) + 1)} exceeds length {n}"
        )
    spec = np.fft.fft(f)
    flops.add(_fft_cost(n))
    levels = []
    for j in range(max_level + 1):
        filt = filter_values(order, 2 ** j, n)
        levels.append(np.fft.ifft(spec * filt).real)
        flops.add(n + _fft_cost(n))
    return CoefficientStack(levels=levels, order=float(order), weights=level_weights(order, max_level))


def adjoint_transform(stack, order, max_level, length, path="fourier"):
    """Adjoint of the stacked multiscale transform: sum_j Phi_j^T c_j (unweighted).

    ``path`` selects the realization; both are exact adjoints of their forward
    counterparts and agree to machine precision for integer orders.
    """
    levels = stack.levels if isinstance(stack, CoefficientStack) else list(stack)
    if len(levels) != max_level + 1:
        raise ShapeMismatch(f"expected {max_level + 1} levels, got {len(levels)}")
    for c in levels:
        if np.ndim(c) != 1 or np.shape(c)[0] != length:
            raise ShapeMismatch("coefficient level shapes inconsistent with signal length")
    if path == "decomp":
        if float(order) != int(order):
            raise InvalidOrder("decomposition path requires integer order")
        return _adjoint_axis(levels, int(order), max_level, axis=-1)
    if path != "fourier":
        raise ValueError(f"unknown transform path {path!r}")
    acc = np.zeros(length, dtype=complex)
    for j, c in enumerate(levels):
        filt = filter_values(order, 2 ** j, length)
        acc += np.fft.fft(np.asarray(c, dtype=float)) * np.conj(filt)
    return np.fft.ifft(acc).real


# ---------------------------------------------------------------------------
# 2-D extension: the 1-D transform applied along each row and each column

def transform_2d(img, order, max_level, path="fourier"):
    """Row- and column-direction coefficient planes per level.

    levels[j][..., 0] transforms along rows (axis 1), levels[j][..., 1] along
    columns (axis 0); the cost is about twice the 1-D cost per direction count.
    """
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ShapeMismatch("transform_2d expects a 2-D image")
    rows, cols = img.shape
    support = (2 ** max_level) * (int(math.ceil(order)) + 1)
    if float(order) == int(order) and (support > rows or support > cols):
        raise StencilTooLong(f"largest stencil support {support} exceeds image side {min(rows, cols)}")
    levels = []
    if path == "decomp":
        if float(order) != int(order):
            raise InvalidOrder("decomposition path requires integer order")
        by_row = _decompose_axis(img, int(order), max_level, axis=1)
        by_col = _decompose_axis(img, int(order), max_level, axis=0)
        for j in range(max_level + 1):
            levels.append(np.stack([by_row[j], by_col[j]], axis=-1))
    elif path == "fourier":
        spec_r = np.fft.fft(img, axis=1)
        spec_c = np.fft.fft(img, axis=0)
        flops.add(rows * _fft_cost(cols) + cols * _fft_cost(rows))
        for j in range(max_level + 1):
            fr = filter_values(order, 2 ** j, cols)
            fc = filter_values(order, 2 ** j, rows)
            plane_r = np.fft.ifft(spec_r * fr[None, :], axis=1).real
            plane_c = np.fft.ifft(spec_c * fc[:, None], axis=0).real
            flops.add(rows * (cols + _fft_cost(cols)) + cols * (rows + _fft_cost(rows)))
            levels.append(np.stack([plane_r, plane_c], axis=-1))
    else:
        raise ValueError(f"unknown transform path {path!r}")
    return CoefficientStack(levels=levels, order=float(order), weights=level_weights(order, max_level))


def adjoint_transform_2d(stack, order, max_level, shape, path="fourier"):
    """Adjoint of transform_2d: sums the row- and column-direction adjoints."""
    levels = stack.levels if isinstance(stack, CoefficientStack) else list(stack)
    rows, cols = shape
    if len(levels) != max_level + 1 or any(np.shape(c) != (rows, cols, 2) for c in levels):
        raise ShapeMismatch("coefficient plane shapes inconsistent with image shape")
    if path == "decomp":
        acc_r = _adjoint_axis([c[..., 0] for c in levels], int(order), max_level, axis=1)
        acc_c = _adjoint_axis([c[..., 1] for c in levels], int(order), max_level, axis=0)
        return acc_r + acc_c
    if path != "fourier":
        raise ValueError(f"unknown transform path {path!r}")
    acc_r = np.zeros((rows, cols), dtype=complex)
    acc_c = np.zeros((rows, cols), dtype=complex)
    for j, c in enumerate(levels):
        fr = filter_values(order, 2 ** j, cols)
        fc = filter_values(order, 2 ** j, rows)
        acc_r += np.fft.fft(c[..., 0], axis=1) * np.conj(fr)[None, :]
        acc_c += np.fft.fft(c[..., 1], axis=0) * np.conj(fc)[:, None]
    return np.fft.ifft(acc_r, axis=1).real + np.fft.ifft(acc_c, axis=0).real
