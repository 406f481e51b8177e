"""Daubechies filters and the translation-invariant frame transform."""

import math

import numpy as np
import pytest

from mhotv import (daubechies_filters, frame_multipliers, ti_wavelet_adjoint,
                   ti_wavelet_adjoint_2d, ti_wavelet_transform, ti_wavelet_transform_2d,
                   transform_fourier, wavelet_level_weights)
from mhotv.errors import ShapeMismatch, UnsupportedOrder

SQRT2 = math.sqrt(2.0)


def brute_force_planes(f, moments, levels):
    """All-shift inner products against explicitly assembled frame elements.

    The effective level-j analysis filter is built by full (non-circular)
    convolution of the upsampled cascade filters, wrapped periodically, and
    each coefficient is then a dense O(N) inner product per shift.
    """
    filt = daubechies_filters(moments)
    h = SQRT2 * filt.lowpass
    g = SQRT2 * filt.highpass

    def upsample(w, step):
        out = np.zeros((len(w) - 1) * step + 1)
        out[::step] = w
        return out

    n = len(f)
    planes = []
    lowpass_chain = np.array([1.0])
    for j in range(levels):
        effective = np.convolve(lowpass_chain, upsample(g, 2 ** j))
        wrapped = np.zeros(n)
        for i, v in enumerate(effective):
            wrapped[i % n] += v
        plane = np.array([np.dot(f, np.roll(wrapped, shift)) for shift in range(n)])
        planes.append(plane)
        lowpass_chain = np.convolve(lowpass_chain, upsample(h, 2 ** j))
    return planes


class TestDaubechiesFilters:
    def test_haar_exact(self):
        filt = daubechies_filters(1)
        assert np.allclose(filt.lowpass, [1 / SQRT2, 1 / SQRT2])
        assert np.allclose(filt.highpass, [1 / SQRT2, -1 / SQRT2])

    @pytest.mark.parametrize("moments", [1, 2, 3])
    def test_invariants(self, moments):
        filt = daubechies_filters(moments)
        h, g = filt.lowpass, filt.highpass
        taps = 2 * moments
        assert h.size == g.size == taps
        assert abs(h.sum() - SQRT2) < 1e-10
        for m in range(moments):
            target = 1.0 if m == 0 else 0.0
            assert abs(np.dot(h[: taps - 2 * m], h[2 * m:]) - target) < 1e-10
        assert np.allclose(g, [(-1.0) ** i * h[taps - 1 - i] for i in range(taps)])
        for p in range(moments):
            assert abs(np.dot(g, np.arange(taps, dtype=float) ** p)) < 1e-8

    def test_unsupported(self):
        with pytest.raises(UnsupportedOrder):
            daubechies_filters(4)


class TestTiTransform:
    def test_constant_zero(self):
        for moments in (1, 2, 3):
            stack = ti_wavelet_transform(np.full(32, 4.2), moments, 2)
            for plane in stack.planes:
                assert np.abs(plane).max() < 1e-10

    def test_haar_level0_is_first_difference(self):
        f = np.random.default_rng(0).standard_normal(16)
        stack = ti_wavelet_transform(f, 1, 1)
        diffs = f - np.roll(f, -1)  # f_t - f_{t+1}
        assert np.abs(stack.planes[0] - diffs).max() < 1e-12

    def test_matches_brute_force_shifts(self):
        f = np.random.default_rng(1).standard_normal(64)
        stack = ti_wavelet_transform(f, 2, 3)
        reference = brute_force_planes(f, 2, 3)
        for plane, ref in zip(stack.planes, reference):
            assert np.abs(plane - ref).max() < 1e-10

    def test_shift_covariance(self):
        f = np.random.default_rng(2).standard_normal(48)
        shift = 11
        lhs = ti_wavelet_transform(np.roll(f, shift), 2, 3)
        rhs = ti_wavelet_transform(f, 2, 3)
        for a, b in zip(lhs.planes, rhs.planes):
            assert np.abs(a - np.roll(b, shift)).max() < 1e-12

    def test_haar_matches_order1_multiscale(self):
        f = np.random.default_rng(3).standard_normal(32)
        frame = ti_wavelet_transform(f, 1, 3)
        diff = transform_fourier(f, 1, 2)
        for j in range(3):
            ratio_err = min(np.abs(frame.planes[j] - diff.levels[j]).max(),
                            np.abs(frame.planes[j] + diff.levels[j]).max())
            assert ratio_err < 1e-10

    @pytest.mark.parametrize("moments", [1, 2, 3])
    def test_polynomial_annihilation_interior(self, moments):
        n, levels = 128, 2
        x = np.arange(n, dtype=float)
        for degree in range(moments):
            stack = ti_wavelet_transform(x ** degree, moments, levels)
            for j, plane in enumerate(stack.planes):
                support = (2 * moments - 1) * 2 ** j + 1
                interior = plane[: n - (support + 2 ** j * 2 * moments)]
                assert np.abs(interior).max() < 1e-6 * max(np.abs(plane).max(), 1.0)

    def test_multipliers_match_cascade(self):
        f = np.random.default_rng(4).standard_normal(40)
        stack = ti_wavelet_transform(f, 3, 2)
        spec = np.fft.fft(f)
        for mult, plane in zip(frame_multipliers(3, 2, 40), stack.planes):
            assert np.abs(np.fft.ifft(spec * mult).real - plane).max() < 1e-10


class TestTiAdjoint:
    def test_zero_stack(self):
        out = ti_wavelet_adjoint([np.zeros(16)] * 2, 2, 2, 16)
        assert np.abs(out).max() == 0

    def test_dot_product_identity(self):
        rng = np.random.default_rng(5)
        f = rng.standard_normal(96)
        planes = [rng.standard_normal(96) for _ in range(3)]
        stack = ti_wavelet_transform(f, 2, 3)
        lhs = sum(np.dot(a, b) for a, b in zip(stack.planes, planes))
        rhs = np.dot(f, ti_wavelet_adjoint(planes, 2, 3, 96))
        assert abs(lhs - rhs) < 1e-8 * max(abs(lhs), 1.0)

    def test_single_haar_level_dense_transpose(self):
        n = 8
        dense = np.zeros((n, n))
        basis = np.eye(n)
        for col in range(n):
            dense[:, col] = ti_wavelet_transform(basis[col], 1, 1).planes[0]
        c = np.random.default_rng(6).standard_normal(n)
        assert np.abs(ti_wavelet_adjoint([c], 1, 1, n) - dense.T @ c).max() < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            ti_wavelet_adjoint([np.zeros(8)], 1, 2, 8)


class TestWavelet2d:
    def test_row_column_planes(self):
        rng = np.random.default_rng(7)
        img = rng.standard_normal((24, 32))
        stack = ti_wavelet_transform_2d(img, 2, 2)
        for j, plane in enumerate(stack.planes):
            for r in range(24):
                ref = ti_wavelet_transform(img[r], 2, 2).planes[j]
                assert np.abs(plane[r, :, 0] - ref).max() < 1e-10

    def test_adjoint_identity(self):
        rng = np.random.default_rng(8)
        img = rng.standard_normal((16, 24))
        stack = ti_wavelet_transform_2d(img, 1, 2)
        c = [rng.standard_normal((16, 24, 2)) for _ in range(2)]
        lhs = sum(np.sum(a * b) for a, b in zip(stack.planes, c))
        rhs = np.sum(img * ti_wavelet_adjoint_2d(c, 1, 2, (16, 24)))
        assert abs(lhs - rhs) < 1e-8 * max(abs(lhs), 1.0)


class TestWaveletWeights:
    def test_examples(self):
        assert wavelet_level_weights(1, 1) == [1.0]
        assert np.allclose(wavelet_level_weights(2, 2), [0.25, 0.125])

    @pytest.mark.parametrize("moments", [1, 2, 3])
    def test_monotone_decreasing(self, moments):
        weights = wavelet_level_weights(moments, 4)
        assert all(a > b for a, b in zip(weights, weights[1:]))
