"""Spectral core: transforms, convolution, and their defining identities."""

import numpy as np
import pytest

from mhotv import circular_convolve, dft, idft
from mhotv.errors import LengthMismatch, NonSymmetricSpectrum


def brute_force_dft(f):
    """O(N^2) evaluation of the defining sum, independent of the fast path."""
    f = np.asarray(f, dtype=complex)
    n = f.size
    out = np.zeros(n, dtype=complex)
    for xi in range(n):
        for m in range(n):
            out[xi] += f[m] * np.exp(-2j * np.pi * m * xi / n)
    return out


def brute_force_convolve(f, g):
    """O(N^2) evaluation of the periodic convolution sum."""
    n = len(f)
    out = np.zeros(n)
    for m in range(n):
        for k in range(n):
            out[m] += f[k] * g[(m - k) % n]
    return out


class TestDft:
    def test_impulse_flat_spectrum(self):
        assert np.allclose(dft([1.0, 0.0, 0.0, 0.0]), np.ones(4))

    def test_constant_dc_only(self):
        c = 0.7
        spec = dft(np.full(8, c))
        assert abs(spec[0] - 8 * c) < 1e-12
        assert np.abs(spec[1:]).max() < 1e-12

    def test_matches_brute_force(self):
        f = np.random.default_rng(11).standard_normal(16)
        assert np.abs(dft(f) - brute_force_dft(f)).max() < 1e-10

    def test_linearity(self):
        rng = np.random.default_rng(3)
        f, g = rng.standard_normal(32), rng.standard_normal(32)
        a, b = 1.7, -0.3
        assert np.allclose(dft(a * f + b * g), a * dft(f) + b * dft(g))

    def test_parseval(self):
        for seed in range(5):
            f = np.random.default_rng(seed).standard_normal(33)
            lhs = np.linalg.norm(dft(f)) ** 2
            rhs = 33 * np.linalg.norm(f) ** 2
            assert abs(lhs - rhs) <= 1e-10 * max(rhs, 1.0)


class TestIdft:
    def test_round_trip(self):
        f = np.random.default_rng(0).standard_normal(64)
        assert np.abs(idft(dft(f)) - f).max() < 1e-12 * np.abs(f).max()

    def test_all_ones_gives_impulse(self):
        out = idft(np.ones(4))
        assert np.allclose(out, [1.0, 0.0, 0.0, 0.0])

    def test_asymmetric_raises_for_real_output(self):
        spectrum = np.zeros(8, dtype=complex)
        spectrum[1] = 1.0  # no conjugate partner at index 7
        with pytest.raises(NonSymmetricSpectrum):
            idft(spectrum)

    def test_complex_output_allowed(self):
        spectrum = np.zeros(8, dtype=complex)
        spectrum[1] = 1.0
        out = idft(spectrum, real_output=False)
        assert np.iscomplexobj(out)


class TestCircularConvolve:
    def test_impulse_is_identity(self):
        f = np.random.default_rng(1).standard_normal(12)
        delta = np.zeros(12)
        delta[0] = 1.0
        assert np.abs(circular_convolve(f, delta) - f).max() < 1e-12

    def test_hand_summation(self):
        # (f*g)_m = sum_n f_n g_{(m-n) mod 4} evaluated by hand:
        # m=0: 1*1 + 4*(-1) = -3; m=1: -1+2 = 1; m=2: -2+3 = 1; m=3: -3+4 = 1
        f = np.array([1.0, 2.0, 3.0, 4.0])
        g = np.array([1.0, -1.0, 0.0, 0.0])
        expected = np.array([-3.0, 1.0, 1.0, 1.0])
        assert np.allclose(circular_convolve(f, g, method="direct"), expected)
        assert np.allclose(circular_convolve(f, g), expected)
        assert np.allclose(brute_force_convolve(f, g), expected)

    def test_fast_equals_direct(self):
        rng = np.random.default_rng(7)
        f, g = rng.standard_normal(128), rng.standard_normal(128)
        fast = circular_convolve(f, g)
        direct = circular_convolve(f, g, method="direct")
        assert np.abs(fast - direct).max() < 1e-10 * np.abs(direct).max()
        assert np.abs(fast - brute_force_convolve(f, g)).max() < 1e-9

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            circular_convolve(np.ones(4), np.ones(5))

    def test_convolution_theorem(self):
        rng = np.random.default_rng(2)
        f, g = rng.standard_normal(40), rng.standard_normal(40)
        lhs = dft(circular_convolve(f, g))
        rhs = dft(f) * dft(g)
        assert np.abs(lhs - rhs).max() < 1e-10 * np.abs(rhs).max()

    def test_commutative_associative(self):
        rng = np.random.default_rng(4)
        f, g, h = (rng.standard_normal(24) for _ in range(3))
        scale = np.abs(circular_convolve(circular_convolve(f, g), h)).max()
        assert np.abs(circular_convolve(f, g) - circular_convolve(g, f)).max() < 1e-10 * scale
        lhs = circular_convolve(circular_convolve(f, g), h)
        rhs = circular_convolve(f, circular_convolve(g, h))
        assert np.abs(lhs - rhs).max() < 1e-10 * scale
