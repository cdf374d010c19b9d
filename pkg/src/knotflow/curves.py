"""Closed curves sampled on a uniform grid of R/Z and their geometry.

Curves are stored as ``N x d`` arrays of samples at ``x_j = j / N``.  All
derivatives are spectral: the samples are read as a trigonometric
polynomial, which is the natural accuracy class for the smooth curves the
energy and flow act on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd

import numpy as np

from .errors import EmbeddednessError, RegularityError

REGULARITY_TOL = 1e-12
CHORD_TOL = 1e-12
ARC_FRACTION = 0.05


def wavenumbers(n: int) -> np.ndarray:
    """Integer Fourier modes in numpy FFT order."""
    return np.fft.fftfreq(n, d=1.0 / n)


def spectral_derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Derivative of periodic samples along axis 0 (period 1)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if order == 0:
        return values.copy()
    k = wavenumbers(n)
    mult = (2j * np.pi * k) ** order
    if order % 2 == 1:
        mult[n // 2] = 0.0
    mult = mult.reshape((n,) + (1,) * (values.ndim - 1))
    return np.fft.ifft(np.fft.fft(values, axis=0) * mult, axis=0).real


def periodic_antiderivative(values: np.ndarray) -> np.ndarray:
    """Zero-mean-free antiderivative of the oscillating part, zero at x=0.

    Returns ``P`` with ``P' = f - mean(f)`` and ``P(0) = 0``.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    k = wavenumbers(n)
    coef = np.fft.fft(values, axis=0)
    mult = np.zeros(n, dtype=complex)
    nz = k != 0
    mult[nz] = 1.0 / (2j * np.pi * k[nz])
    mult[n // 2] = 0.0
    mult = mult.reshape((n,) + (1,) * (values.ndim - 1))
    p = np.fft.ifft(coef * mult, axis=0).real
    return p - p[0]


def trig_eval(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at ``x``.

    The Nyquist mode is split symmetrically so real data stays real.
    Works along axis 0 of ``values``; returns shape ``x.shape + values.shape[1:]``.
    """
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    n = values.shape[0]
    k = wavenumbers(n)
    coef = np.fft.fft(values, axis=0) / n
    flat = coef.reshape(n, -1)
    xs = x.reshape(-1)
    # half-range sum: f = c0 + 2 Re sum_{0<k<N/2} c_k e^{2 pi i k x} + c_{N/2} cos(pi N x)
    kp = k[1 : n // 2]
    phase = np.exp(2j * np.pi * np.outer(xs, kp))
    out = np.empty((xs.size, flat.shape[1]))
    for c in range(flat.shape[1]):
        pos = (phase * flat[1 : n // 2, c]).sum(axis=1)
        nyq = flat[n // 2, c].real * np.cos(np.pi * n * xs)
        out[:, c] = flat[0, c].real + 2.0 * pos.real + nyq
    return out.reshape(x.shape + values.shape[1:])


@dataclass(frozen=True)
class GeometryCache:
    derivative: np.ndarray
    second_derivative: np.ndarray
    speed: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    length: float
    arclength: np.ndarray


class ClosedCurve:
    """Uniformly sampled closed curve in R^d (no duplicated endpoint)."""

    def __init__(self, samples):
        pts = np.array(samples, dtype=float)
        if pts.ndim != 2:
            raise ValueError("samples must be an (N, d) array")
        n, d = pts.shape
        if d < 2:
            raise ValueError("ambient dimension must be at least 2")
        if n < 16 or n % 2:
            raise ValueError(f"sample count must be even and >= 16, got {n}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("curve samples must be finite")
        pts.setflags(write=False)
        self._samples = pts

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def N(self) -> int:
        return self._samples.shape[0]

    @property
    def d(self) -> int:
        return self._samples.shape[1]

    @property
    def params(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    @cached_property
    def geometry(self) -> GeometryCache:
        return geometry(self)

    @property
    def length(self) -> float:
        return self.geometry.length

    def scaled(self, c: float) -> "ClosedCurve":
        return ClosedCurve(c * self._samples)

    def transformed(self, rotation=None, shift=None) -> "ClosedCurve":
        pts = self._samples
        if rotation is not None:
            pts = pts @ np.asarray(rotation, dtype=float).T
        if shift is not None:
            pts = pts + np.asarray(shift, dtype=float)
        return ClosedCurve(pts)

    def __repr__(self) -> str:
        return f"ClosedCurve(N={self.N}, d={self.d})"


def differentiate(curve: ClosedCurve, order: int = 1) -> np.ndarray:
    """``order``-th parameter derivative at the samples."""
    if order < 0 or order > curve.N // 4:
        raise ValueError(f"derivative order {order} outside [0, N/4]")
    return spectral_derivative(curve.samples, order)


def geometry(curve: ClosedCurve) -> GeometryCache:
    """Tangent, curvature vector, length and cumulative arc length."""
    d1 = spectral_derivative(curve.samples, 1)
    d2 = spectral_derivative(curve.samples, 2)
    speed = np.linalg.norm(d1, axis=1)
    if speed.min() <= REGULARITY_TOL * speed.max():
        raise RegularityError(
            f"curve is not regular: min speed {speed.min():.3e}, max {speed.max():.3e}"
        )
    tau = d1 / speed[:, None]
    tang = np.sum(d2 * tau, axis=1)
    kappa = (d2 - tang[:, None] * tau) / (speed**2)[:, None]
    length = float(speed.mean())
    s = length * curve.params + periodic_antiderivative(speed)
    return GeometryCache(d1, d2, speed, tau, kappa, length, s)


def arclength_at(curve: ClosedCurve, x) -> np.ndarray:
    """Cumulative arc length s(x) from x=0, for arbitrary real ``x``."""
    g = curve.geometry
    x = np.asarray(x, dtype=float)
    periodic = g.arclength - g.length * curve.params
    return g.length * x + trig_eval(periodic, np.mod(x, 1.0))


def intrinsic_distance(curve: ClosedCurve, x, y) -> np.ndarray:
    """Length of the shorter arc between parameters ``x`` and ``y``."""
    L = curve.length
    a = np.mod(arclength_at(curve, y) - arclength_at(curve, x), L)
    return np.minimum(a, L - a)


def arc_offsets(curve: ClosedCurve) -> np.ndarray:
    """Matrix of arc lengths ``(s_j - s_i) mod L`` for all sample pairs."""
    g = curve.geometry
    return np.mod(g.arclength[None, :] - g.arclength[:, None], g.length)


def pair_distances(curve: ClosedCurve) -> tuple[np.ndarray, np.ndarray]:
    """Chord and intrinsic distance for all sample pairs (diagonal zero)."""
    pts = curve.samples
    diff = pts[None, :, :] - pts[:, None, :]
    chord = np.sqrt(np.sum(diff * diff, axis=2))
    a = arc_offsets(curve)
    arc = np.minimum(a, curve.length - a)
    np.fill_diagonal(arc, 0.0)
    return chord, arc


def check_embedded(curve: ClosedCurve, chord=None, arc=None) -> None:
    if chord is None:
        chord, arc = pair_distances(curve)
    L = curve.length
    bad = (chord < CHORD_TOL * L) & (arc > ARC_FRACTION * L)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise EmbeddednessError(
            f"samples {i} and {j} coincide (chord {chord[i, j]:.3e}, arc {arc[i, j]:.3e})"
        )


def bilipschitz_constant(curve: ClosedCurve) -> float:
    """max over sample pairs of intrinsic distance / chord (>= 1)."""
    chord, arc = pair_distances(curve)
    check_embedded(curve, chord, arc)
    off = ~np.eye(curve.N, dtype=bool)
    return float(np.max(arc[off] / chord[off]))


def reparameterize_arclength(curve: ClosedCurve, tol: float = 1e-14, maxiter: int = 50) -> ClosedCurve:
    """Same image, resampled at equal arc-length spacing (constant speed L).

    Inverts s(x) = L u_j by Newton iteration on the spectral arc-length
    function and samples the trigonometric interpolant at the roots.  The
    point at x = 0 is kept fixed.
    """
    g = curve.geometry
    L = g.length
    target = L * curve.params
    x = np.interp(target, np.append(g.arclength, L), np.append(curve.params, 1.0))
    periodic = g.arclength - L * curve.params
    for _ in range(maxiter):
        s = L * x + trig_eval(periodic, x)
        v = trig_eval(g.speed, x)
        dx = (s - target) / v
        x = x - dx
        if np.max(np.abs(dx)) < tol:
            break
    return ClosedCurve(trig_eval(curve.samples, x))


def is_arclength(curve: ClosedCurve, rtol: float = 1e-8) -> bool:
    g = curve.geometry
    return bool(np.max(np.abs(g.speed - g.length)) <= rtol * g.length)


def _check_n(N: int) -> None:
    if N < 16 or N % 2:
        raise ValueError(f"N must be even and >= 16, got {N}")


def circle(r: float = 1.0, N: int = 128, dim: int = 3, center=None) -> ClosedCurve:
    if r <= 0:
        raise ValueError("radius must be positive")
    if dim < 2:
        raise ValueError("dim must be >= 2")
    _check_n(N)
    th = 2 * np.pi * np.arange(N) / N
    pts = np.zeros((N, dim))
    pts[:, 0] = r * np.cos(th)
    pts[:, 1] = r * np.sin(th)
    if center is not None:
        pts += np.asarray(center, dtype=float)
    return ClosedCurve(pts)


def torus_knot(p: int = 2, q: int = 3, R: float = 2.0, r: float = 1.0, N: int = 256) -> ClosedCurve:
    """(p, q) torus knot on the torus with radii R > r > 0; (2, 3) is the trefoil."""
    if int(p) != p or int(q) != q or p < 1 or q < 1:
        raise ValueError("p and q must be positive integers")
    if gcd(int(p), int(q)) != 1:
        raise ValueError(f"gcd(p, q) must be 1, got p={p}, q={q}")
    if not (R > r > 0):
        raise ValueError("torus knot requires R > r > 0")
    _check_n(N)
    th = 2 * np.pi * np.arange(N) / N
    rad = R + r * np.cos(q * th)
    pts = np.column_stack([rad * np.cos(p * th), rad * np.sin(p * th), r * np.sin(q * th)])
    return ClosedCurve(pts)


def fourier_perturbed_circle(
    seed: int = 0, amplitude: float = 0.05, band: int = 5, N: int = 128, r: float = 1.0
) -> ClosedCurve:
    """Unit circle in R^3 with random radial and out-of-plane modes 2..band.

    Each perturbation profile is normalised to unit max (on a fixed fine grid,
    so the curve does not depend on N) before scaling by ``amplitude``.
    """
    if amplitude < 0 or amplitude >= 0.5:
        raise ValueError("amplitude must lie in [0, 0.5)")
    if band < 2:
        raise ValueError("band must be >= 2")
    _check_n(N)
    if band >= N // 4:
        raise ValueError("band must stay below N/4")
    rng = np.random.default_rng(seed)
    x = np.arange(N) / N
    ks = np.arange(2, band + 1)

    fine = np.arange(4096) / 4096

    def profile():
        a = rng.standard_normal((2, ks.size)) / ks
        ev = lambda t: a[0] @ np.cos(2 * np.pi * np.outer(ks, t)) + a[1] @ np.sin(2 * np.pi * np.outer(ks, t))
        return ev(x) / np.max(np.abs(ev(fine)))

    rho = 1.0 + amplitude * profile()
    z = amplitude * profile()
    th = 2 * np.pi * x
    pts = r * np.column_stack([rho * np.cos(th), rho * np.sin(th), z])
    return ClosedCurve(pts)


_GENERATORS = {
    "circle": circle,
    "torus_knot": torus_knot,
    "fourier_perturbed_circle": fourier_perturbed_circle,
}


def generate(kind: str, params: dict | None = None, N: int = 128) -> ClosedCurve:
    """Build an initial curve by name: circle, torus_knot, fourier_perturbed_circle."""
    try:
        fn = _GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown curve kind {kind!r}; choose from {sorted(_GENERATORS)}") from None
    return fn(N=N, **(params or {}))
