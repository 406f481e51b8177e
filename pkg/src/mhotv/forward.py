"""Linear forward models and classical reconstruction baselines.

Operators carry an explicit adjoint (stored transposes for matrix-backed
ones), a parallel-beam Radon matrix is assembled from exact ray/pixel
intersection lengths, and filtered backprojection plus CGLS serve as the
unregularized baselines.
"""

import math
import time

import numpy as np
import scipy.sparse as sparse

from .errors import DimensionMismatch, GeometryMismatch
from .reporting import SolverReport


class LinearOperator:
    """Linear map with explicit apply/adjoint callables.

    ``shape`` is (rows, cols) acting on flat vectors.  Matrix-backed operators
    should be built with ``from_matrix`` so the adjoint is the stored exact
    transpose.
    """

    def __init__(self, shape, apply_fn, adjoint_fn, descriptor="operator", normal_matrix=None):
        self.shape = tuple(shape)
        self._apply = apply_fn
        self._adjoint = adjoint_fn
        self.descriptor = descriptor
        # optional dense A^T A, used by solvers for exact quadratic sub-steps
        self.normal_matrix = normal_matrix

    def apply(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.shape[1]:
            raise DimensionMismatch(f"{self.descriptor}: expected input of size {self.shape[1]}, got {x.size}")
        return self._apply(x)

    def adjoint(self, y):
        y = np.asarray(y, dtype=float).ravel()
        if y.size != self.shape[0]:
            raise DimensionMismatch(f"{self.descriptor}: expected adjoint input of size {self.shape[0]}, got {y.size}")
        return self._adjoint(y)

    def normal_diag_mean(self):
        """Mean diagonal entry of A^T A, for preconditioning heuristics."""
        if self.normal_matrix is not None:
            return float(np.trace(self.normal_matrix)) / self.shape[1]
        mat = getattr(self, "matrix", None)
        if mat is not None:
            if sparse.issparse(mat):
                return float(np.sum(mat.multiply(mat))) / self.shape[1]
            return float(np.sum(mat * mat)) / self.shape[1]
        probe = np.random.default_rng(0).standard_normal(self.shape[1])
        probe /= np.linalg.norm(probe)
        return float(np.linalg.norm(self.apply(probe)) ** 2)

    @classmethod
    def from_matrix(cls, mat, descriptor="matrix", precompute_normal=False):
        if sparse.issparse(mat):
            mat = mat.tocsr()
            mat_t = mat.T.tocsr()
            normal = None
        else:
            mat = np.asarray(mat, dtype=float)
            mat_t = np.ascontiguousarray(mat.T)
            normal = mat_t @ mat if precompute_normal else None
        op = cls(mat.shape, lambda x: mat @ x, lambda y: mat_t @ y,
                 descriptor=descriptor, normal_matrix=normal)
        op.matrix = mat
        return op


def identity_operator(n):
    eye = lambda x: np.asarray(x, dtype=float).copy()
    return LinearOperator((n, n), eye, eye, descriptor="identity")


def random_sensing(rows, cols, density, seed, identity=False):
    """Sparse sensing matrix: Bernoulli(density) support, U[0,1] values.

    Deterministic per seed.  ``identity=True`` is a test hook returning the
    exact identity (requires rows == cols).
    """
    if identity:
        if rows != cols:
            raise DimensionMismatch("identity sensing requires rows == cols")
        op = LinearOperator.from_matrix(sparse.identity(rows, format="csr"),
                                        descriptor=f"identity-sensing({rows})")
        return op
    if not 0 < density <= 1:
        raise DimensionMismatch(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    mask = rng.random((rows, cols)) < density
    values = rng.random((rows, cols))
    mat = sparse.csr_matrix(np.where(mask, values, 0.0))
    return LinearOperator.from_matrix(mat, descriptor=f"random-sensing({rows}x{cols},d={density},seed={seed})")


def gaussian_sensing(rows, cols, seed, precompute_normal=True):
    """Dense sensing matrix with i.i.d. standard normal entries."""
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((rows, cols))
    return LinearOperator.from_matrix(mat, descriptor=f"gaussian-sensing({rows}x{cols},seed={seed})",
                                      precompute_normal=precompute_normal)


# ---------------------------------------------------------------------------
# parallel-beam tomography

class SinogramGeometry:
    """Parallel-beam acquisition description over a square pixel grid.

    The image spans [-n_pix/2, n_pix/2]^2 with unit pixels; detector offsets
    are centered at zero with spacing ``det_spacing``.
    """

    def __init__(self, n_pix, angles, n_det=None, det_spacing=1.0):
        angles = np.asarray(angles, dtype=float)
        if angles.ndim != 1 or angles.size < 1:
            raise GeometryMismatch("angles must be a non-empty 1-D array")
        if np.any(np.diff(angles) <= 0):
            raise GeometryMismatch("angles must be strictly increasing")
        if angles[0] < 0 or angles[-1] >= math.pi:
            raise GeometryMismatch("angles must lie in [0, pi)")
        if n_det is None:
            n_det = int(math.ceil(math.sqrt(2.0) * n_pix))
        if n_det < n_pix:
            raise GeometryMismatch(f"n_det {n_det} must be >= n_pix {n_pix}")
        self.n_pix = int(n_pix)
        self.angles = angles
        self.n_det = int(n_det)
        self.det_spacing = float(det_spacing)

    @classmethod
    def equispaced(cls, n_pix, n_angles, n_det=None, det_spacing=1.0):
        """n_angles angles equally distributed across the full 180-degree range."""
        angles = np.arange(n_angles) * math.pi / n_angles
        return cls(n_pix, angles, n_det=n_det, det_spacing=det_spacing)

    @property
    def offsets(self):
        return (np.arange(self.n_det) - (self.n_det - 1) / 2.0) * self.det_spacing

    def to_dict(self):
        return {"n_pix": self.n_pix, "n_det": self.n_det,
                "det_spacing": self.det_spacing, "angles": self.angles.tolist()}


def _trace_ray(t, theta, half):
    """Exact intersection lengths of the line {x cos(t) + y sin(t) = t} with
    the unit pixels of the square [-half, half]^2 (Siddon-style).

    Returns (flat pixel indices, lengths) with flat index row*n + col and
    row <-> y, col <-> x.
    """
    omega = np.array([math.cos(theta), math.sin(theta)])
    perp = np.array([-omega[1], omega[0]])
    base = t * omega
    # clip the parameter range to the square: base + s*perp inside [-half, half]^2
    s_lo, s_hi = -np.inf, np.inf
    for dim in range(2):
        d = perp[dim]
        if abs(d) < 1e-15:
            if abs(base[dim]) >= half:
                return np.empty(0, dtype=np.int64), np.empty(0)
            continue
        a = (-half - base[dim]) / d
        b = (half - base[dim]) / d
        s_lo = max(s_lo, min(a, b))
        s_hi = min(s_hi, max(a, b))
    if not s_lo < s_hi:
        return np.empty(0, dtype=np.int64), np.empty(0)
    crossings = [np.array([s_lo, s_hi])]
    grid = np.arange(-half, half + 1)
    for dim, d in enumerate(perp):
        if abs(d) > 1e-15:
            s = (grid - base[dim]) / d
            crossings.append(s[(s > s_lo) & (s < s_hi)])
    s_all = np.unique(np.concatenate(crossings))
    lengths = np.diff(s_all)
    mids = base[None, :] + 0.5 * (s_all[:-1] + s_all[1:])[:, None] * perp[None, :]
    cols = np.clip(np.floor(mids[:, 0] + half).astype(np.int64), 0, int(2 * half) - 1)
    rows = np.clip(np.floor(mids[:, 1] + half).astype(np.int64), 0, int(2 * half) - 1)
    keep = lengths > 1e-12
    n = int(2 * half)
    return (rows[keep] * n + cols[keep]), lengths[keep]


def radon_operator(geom):
    """Sparse discretized Radon transform for the given geometry.

    Row (a * n_det + d) holds the chord lengths of the angle-a, offset-d ray
    through each pixel; the adjoint (stored transpose) is unfiltered
    backprojection.
    """
    half = geom.n_pix / 2.0
    rows_idx, cols_idx, vals = [], [], []
    offsets = geom.offsets
    for a, theta in enumerate(geom.angles):
        for d, t in enumerate(offsets):
            pix, lengths = _trace_ray(t, theta, half)
            if pix.size:
                rows_idx.append(np.full(pix.size, a * geom.n_det + d, dtype=np.int64))
                cols_idx.append(pix)
                vals.append(lengths)
    m = geom.n_det * len(geom.angles)
    n = geom.n_pix * geom.n_pix
    mat = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows_idx), np.concatenate(cols_idx))),
        shape=(m, n),
    )
    op = LinearOperator.from_matrix(mat, descriptor=f"radon({geom.n_pix}px,{len(geom.angles)}ang)")
    op.geometry = geom
    return op


def sinogram_to_vector(sino):
    """(n_det, n_angles) sinogram -> flat measurement vector (angle-major)."""
    return np.asarray(sino, dtype=float).T.ravel()


def vector_to_sinogram(vec, geom):
    return np.asarray(vec, dtype=float).reshape(len(geom.angles), geom.n_det).T


def _ramp_kernel(n, spacing):
    """Spatial-domain Ram-Lak kernel on [0, n) with wraparound indexing."""
    kernel = np.zeros(n)
    kernel[0] = 1.0 / (4.0 * spacing ** 2)
    odd = np.arange(1, n // 2 + 1, 2)
    kernel[odd] = -1.0 / (math.pi * odd * spacing) ** 2
    kernel[-odd] = kernel[odd]
    return kernel


def filtered_backprojection(sino, geom, apodization="none"):
    """Classical FBP: ramp-filter each projection in Fourier space, then
    backproject with pi/n_angles weighting.

    ``apodization`` is "none" (plain Ram-Lak) or "hann".
    """
    sino = np.asarray(sino, dtype=float)
    if sino.shape != (geom.n_det, len(geom.angles)):
        raise GeometryMismatch(f"sinogram shape {sino.shape} does not match geometry "
                               f"({geom.n_det}, {len(geom.angles)})")
    pad = 1
    while pad < 2 * geom.n_det:
        pad *= 2
    ramp = np.fft.fft(_ramp_kernel(pad, geom.det_spacing)).real
    if apodization == "hann":
        freq = np.fft.fftfreq(pad)
        ramp = ramp * 0.5 * (1.0 + np.cos(2.0 * math.pi * freq))
    elif apodization != "none":
        raise ValueError(f"unknown apodization {apodization!r}")
    padded = np.zeros((pad, sino.shape[1]))
    padded[: geom.n_det] = sino
    filtered = np.fft.ifft(np.fft.fft(padded, axis=0) * ramp[:, None], axis=0).real
    filtered = filtered[: geom.n_det] * geom.det_spacing

    n = geom.n_pix
    centers = np.arange(n) - n / 2.0 + 0.5
    xs, ys = np.meshgrid(centers, centers)
    img = np.zeros((n, n))
    offsets = geom.offsets
    for a, theta in enumerate(geom.angles):
        t = xs * math.cos(theta) + ys * math.sin(theta)
        img += np.interp(t, offsets, filtered[:, a], left=0.0, right=0.0)
    return img * (math.pi / len(geom.angles))


def cgls(operator, b, max_iter=100, tol=1e-8, x0=None):
    """Conjugate gradient on the least-squares normal equations.

    Stops when the normal-equation residual ||A^T (A x - b)|| falls below
    tol * ||A^T b|| or at max_iter; non-convergence is flagged in the report,
    not raised.
    """
    b = np.asarray(b, dtype=float).ravel()
    if b.size != operator.shape[0]:
        raise DimensionMismatch(f"rhs size {b.size} does not match operator rows {operator.shape[0]}")
    start = time.perf_counter()
    x = np.zeros(operator.shape[1]) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = b - operator.apply(x)
    s = operator.adjoint(r)
    p = s.copy()
    gamma = float(s @ s)
    s0_norm = math.sqrt(float(operator.adjoint(b) @ operator.adjoint(b)))
    resid_trace = [float(np.linalg.norm(r))]
    converged = False
    iterations = 0
    for it in range(max_iter):
        q = operator.apply(p)
        qq = float(q @ q)
        if qq == 0.0:
            break
        alpha = gamma / qq
        x += alpha * p
        r -= alpha * q
        s = operator.adjoint(r)
        gamma_new = float(s @ s)
        iterations = it + 1
        resid_trace.append(float(np.linalg.norm(r)))
        if math.sqrt(gamma_new) <= tol * max(s0_norm, 1e-300):
            converged = True
            break
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    bnorm = np.linalg.norm(b)
    report = SolverReport(
        objective=[v ** 2 for v in resid_trace[1:]],
        primal_residual=resid_trace[1:],
        rel_data_error=float(resid_trace[-1] / bnorm) if bnorm > 0 else 0.0,
        iterations=iterations,
        wall_time=time.perf_counter() - start,
        converged=converged,
        descriptor=f"cgls({operator.descriptor})",
    )
    return x, report


def adjoint_check(operator, trials=10, seed=1234):
    """Max normalized deviation |<Ax, y> - <x, A^T y>| over random probes."""
    rng = np.random.default_rng(seed)
    # crude spectral-norm estimate for the normalization
    v = rng.standard_normal(operator.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(5):
        w = operator.adjoint(operator.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
    norm_est = math.sqrt(max(np.linalg.norm(operator.adjoint(operator.apply(v))), 1e-300))
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(operator.shape[1])
        y = rng.standard_normal(operator.shape[0])
        lhs = float(operator.apply(x) @ y)
        rhs = float(x @ operator.adjoint(y))
        denom = np.linalg.norm(x) * np.linalg.norm(y) * max(norm_est, 1e-300)
        worst = max(worst, abs(lhs - rhs) / denom)
    return worst
