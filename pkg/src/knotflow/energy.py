"""O'Hara energy E^alpha, length, and the combined objective E^alpha + lambda L."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta

from .curves import ClosedCurve, arc_offsets, check_embedded
from .errors import EmbeddednessError

HUGE_ENERGY = 1e300


@dataclass(frozen=True)
class EnergyParams:
    alpha: float = 2.5
    lam: float = 0.0
    exclusion: int = 0
    local_correction: bool = True

    def __post_init__(self):
        if not 2 < self.alpha < 3:
            raise ValueError(f"alpha must lie strictly inside (2, 3), got {self.alpha}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError("lambda must be finite and non-negative")
        if self.exclusion < 0:
            raise ValueError("exclusion half-width must be >= 0")

    @property
    def m_alpha(self) -> float:
        return m_alpha(self.alpha)


def _log_x_over_sin(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.3
    xs = x[small] ** 2
    out[small] = xs * (1 / 6 + xs * (1 / 180 + xs * (1 / 2835 + xs * (1 / 37800 + xs / 467775))))
    out[~small] = np.log(x[~small] / np.sin(x[~small]))
    return out


@lru_cache(maxsize=None)
def m_alpha(alpha: float) -> float:
    """E^alpha of the round circle of unit length.

    m = 2 int_0^{1/2} [(pi / sin(pi u))^alpha - u^{-alpha}] du, integrated as
    u^{2-alpha} times the smooth factor [(pi u / sin pi u)^alpha - 1] / u^2.
    """
    if not 2 < alpha < 3:
        raise ValueError("alpha must lie in (2, 3)")

    def smooth(u):
        if u == 0.0:
            return alpha * np.pi**2 / 6
        return float(np.expm1(alpha * _log_x_over_sin(np.array([np.pi * u]))[0]) / u**2)

    val, _ = quad(smooth, 0.0, 0.5, weight="alg", wvar=(2.0 - alpha, 0.0), epsabs=0, epsrel=2e-14, limit=200)
    return 2.0 * val


def _band_weight(alpha: float, exclusion: int) -> float:
    """h-free factor of the near-diagonal correction for an |w|^{2-alpha} singularity.

    For f(w) ~ c |w|^{beta}, the punctured trapezoid sum satisfies
    h sum_{j != 0} f(jh) = int f + 2 zeta(-beta) c h^{1+beta} + O(h^{3+beta});
    excluded offsets 1..m are replaced by the same model.
    """
    beta = 2.0 - alpha
    band = 2.0 * sum(j**beta for j in range(1, exclusion + 1))
    return band - 2.0 * float(zeta(-beta))


def _cyclic_band(n: int, m: int) -> np.ndarray:
    idx = np.arange(n)
    off = np.abs(idx[None, :] - idx[:, None])
    off = np.minimum(off, n - off)
    return off <= m


def ohara_energy(curve: ClosedCurve, params: EnergyParams, on_degenerate: str = "raise") -> float:
    """E^alpha(curve) by corrected trapezoid quadrature over sample pairs.

    The double integral is split as the unit-length circle value L^{2-alpha} m_alpha
    plus the integral of 1/|chord|^alpha - 1/|circle chord|^alpha, where the
    circle chord (L/pi) sin(pi a/L) has the same arc offset a.  That second
    integrand is periodic and smooth off the diagonal, with an
    (alpha/24)(|kappa|^2 - (2 pi/L)^2)|w|^{2-alpha} singularity handled by a
    zeta-function end correction.  ``on_degenerate='huge'`` returns a huge
    finite value with a warning instead of raising for self-intersecting input.
    """
    alpha = params.alpha
    g = curve.geometry
    n = curve.N
    h = 1.0 / n
    L = g.length
    pts = curve.samples
    diff = pts[None, :, :] - pts[:, None, :]
    chord = np.sqrt(np.sum(diff * diff, axis=2))
    a = arc_offsets(curve)
    arc = np.minimum(a, L - a)
    np.fill_diagonal(arc, 0.0)
    try:
        check_embedded(curve, chord, arc)
    except EmbeddednessError:
        if on_degenerate == "huge":
            warnings.warn("self-intersecting curve: returning huge energy", RuntimeWarning, stacklevel=2)
            return HUGE_ENERGY
        raise
    mask = _cyclic_band(n, params.exclusion if params.local_correction else 0)
    circ = (L / np.pi) * np.abs(np.sin(np.pi * a / L))
    with np.errstate(divide="ignore", invalid="ignore"):
        F = chord ** (-alpha) - circ ** (-alpha)
    F[mask] = 0.0
    if not np.all(np.isfinite(F)):
        if on_degenerate == "huge":
            warnings.warn("coincident samples: returning huge energy", RuntimeWarning, stacklevel=2)
            return HUGE_ENERGY
        raise EmbeddednessError("coincident off-diagonal samples")
    v = g.speed
    inner = h * np.sum(F * v[None, :], axis=1)
    if params.local_correction:
        k2 = np.sum(g.curvature**2, axis=1)
        phi0 = (alpha / 24.0) * (k2 - (2 * np.pi / L) ** 2) * v ** (3.0 - alpha)
        inner += phi0 * h ** (3.0 - alpha) * _band_weight(alpha, params.exclusion)
    return float(h * np.sum(v * inner) + L ** (2.0 - alpha) * m_alpha(alpha))


def length(curve: ClosedCurve) -> float:
    return curve.length


def total_energy(curve: ClosedCurve, params: EnergyParams, on_degenerate: str = "raise") -> float:
    """E^alpha + lambda * L."""
    e = ohara_energy(curve, params, on_degenerate=on_degenerate)
    return e + params.lam * curve.length


def circle_energy(r: float, params: EnergyParams) -> float:
    """Closed-form total energy of a round circle of radius r."""
    L = 2 * np.pi * r
    return L ** (2 - params.alpha) * params.m_alpha + params.lam * L


def critical_circle_radius(params: EnergyParams) -> float:
    """Radius minimising (2 pi r)^{2-alpha} m_alpha + 2 pi lambda r over circles."""
    if params.lam <= 0:
        raise ValueError("critical radius needs lambda > 0")
    a = params.alpha
    return ((a - 2) * (2 * np.pi) ** (1 - a) * params.m_alpha / params.lam) ** (1 / (a - 1))


def length_lower_bound(params: EnergyParams, E0: float) -> float:
    """(m_alpha / E0)^{1/(alpha-2)}: lower bound on the length of any curve with E^alpha <= E0."""
    m = params.m_alpha
    if E0 < m * (1 - 1e-9):
        raise ValueError(f"energy {E0} below the circle minimum {m}: inconsistent evaluation")
    return (m / E0) ** (1.0 / (params.alpha - 2.0))
