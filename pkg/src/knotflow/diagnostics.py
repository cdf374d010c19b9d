"""Run-time checks of the flow: higher energies, coercivity, dissipation, Lojasiewicz fit, GNS."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .curves import ClosedCurve, fourier_perturbed_circle, reparameterize_arclength, spectral_derivative, trig_eval
from .energy import EnergyParams, ohara_energy
from .errors import InsufficientTailError
from .fractional import gagliardo_seminorm, sobolev_norm


@dataclass
class DiagnosticsRecord:
    step: int
    t: float
    dt: float
    energy_alpha: float
    length: float
    total_energy: float
    residual: float
    E0: float
    E1: float
    E2: float
    coercivity: float
    bilipschitz: float
    dissipation: float
    min_speed: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list:
        return [getattr(self, c) for c in self.columns()]


def arclength_derivative(values: np.ndarray, curve: ClosedCurve) -> np.ndarray:
    """d/ds = (1/|gamma'|) d/dx, spectrally."""
    v = curve.geometry.speed
    d = spectral_derivative(values, 1)
    return d / (v[:, None] if d.ndim == 2 else v)


def higher_energy(curve: ClosedCurve, k: int) -> float:
    """int |d_s^k kappa|^2 ds."""
    if not 0 <= k <= 4:
        raise ValueError("k must lie in 0..4")
    f = curve.geometry.curvature
    for _ in range(k):
        f = arclength_derivative(f, curve)
    v = curve.geometry.speed
    return float(np.mean(np.sum(f * f, axis=1) * v))


def tangent_seminorm_sq(curve: ClosedCurve, alpha: float) -> float:
    """|tau|^2_{W^{(alpha-1)/2,2}} over R/LZ for the arc-length parameterisation."""
    c = reparameterize_arclength(curve)
    L = c.length
    s = (alpha - 1.0) / 2.0
    return L ** (2.0 - alpha) * gagliardo_seminorm(c.geometry.tangent, s, 2.0) ** 2


def coercivity_ratio(curve: ClosedCurve, alpha: float, energy: float | None = None) -> float:
    """|gamma'|^2_{W^{(alpha-1)/2,2}} / E^alpha(gamma), both scaling like L^{2-alpha}."""
    if energy is None:
        energy = ohara_energy(curve, EnergyParams(alpha))
    return tangent_seminorm_sq(curve, alpha) / energy


def dissipation_residual(times, energies, velocity_sq) -> np.ndarray:
    """|dE/dt + int |V|^2 |gamma'| dx| per step from consecutive accepted states.

    ``velocity_sq[n]`` is the squared weighted L^2 norm of V at state n.
    """
    t = np.asarray(times, dtype=float)
    E = np.asarray(energies, dtype=float)
    w = np.asarray(velocity_sq, dtype=float)
    if t.size < 2:
        return np.zeros(0)
    return np.abs(np.diff(E) / np.diff(t) + w[:-1])


@dataclass(frozen=True)
class LojasiewiczFit:
    theta: float
    r2: float
    slope: float
    samples: int


def lojasiewicz_monitor(energies, residuals, E_inf: float | None = None, min_samples: int = 20,
                        rel_floor: float = 1e-11) -> LojasiewiczFit:
    """Fit log ||V|| = (1 - theta) log |E - E_inf| + c over the tail of a run.

    E_inf defaults to the final energy.  Points with |E - E_inf| below
    ``rel_floor * |E_inf|`` are dropped as quadrature noise.
    """
    E = np.asarray(energies, dtype=float)
    V = np.asarray(residuals, dtype=float)
    if E_inf is None:
        E_inf = float(E[-1])
    gap = np.abs(E - E_inf)
    keep = (gap > rel_floor * max(abs(E_inf), 1e-300)) & (V > 0)
    x, y = np.log(gap[keep]), np.log(V[keep])
    if x.size < min_samples:
        raise InsufficientTailError(f"only {x.size} usable tail samples (need {min_samples})")
    slope, icpt = np.polyfit(x, y, 1)
    pred = slope * x + icpt
    ss_res = np.sum((y - pred) ** 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LojasiewiczFit(1.0 - slope, float(r2), float(slope), int(x.size))


def gns_check(f, s1: float, s2: float, s3: float, semi: bool = True) -> float:
    """||f||_{s2} / (||f||_{s3}^theta ||f||_{s1}^{1-theta}), theta = (s2-s1)/(s3-s1), p = q = 2."""
    if not s1 <= s2 <= s3 or s3 == s1:
        raise ValueError("need s1 <= s2 <= s3 with s1 < s3")
    theta = (s2 - s1) / (s3 - s1)
    n1 = sobolev_norm(f, s1, semi)
    n2 = sobolev_norm(f, s2, semi)
    n3 = sobolev_norm(f, s3, semi)
    return n2 / (n3**theta * n1 ** (1 - theta))


def image_deviation(reference: ClosedCurve, moved: ClosedCurve, newton_steps: int = 6) -> float:
    """max over samples of ``moved`` of the distance to the image of ``reference``."""
    ref = reference.samples
    d1 = spectral_derivative(ref, 1)
    d2 = spectral_derivative(ref, 2)
    fine = np.arange(8 * reference.N) / (8 * reference.N)
    dense = trig_eval(ref, fine)
    p = moved.samples
    dist = np.sum((p[:, None, :] - dense[None, :, :]) ** 2, axis=2)
    x = fine[np.argmin(dist, axis=1)]
    for _ in range(newton_steps):
        g = trig_eval(ref, x) - p
        t1 = trig_eval(d1, x)
        t2 = trig_eval(d2, x)
        grad = np.sum(g * t1, axis=1)
        hess = np.sum(t1 * t1, axis=1) + np.sum(g * t2, axis=1)
        x = x - grad / hess
    return float(np.max(np.linalg.norm(trig_eval(ref, x) - p, axis=1)))


# --- pinned constants -------------------------------------------------------

def pinned_path() -> Path:
    return Path(str(resources.files("knotflow") / "data" / "pinned.json"))


def load_pinned(path: str | Path | None = None) -> dict:
    with open(path or pinned_path()) as fh:
        return json.load(fh)


def pinned_coercivity(alpha: float, pinned: dict | None = None) -> float:
    pinned = pinned or load_pinned()
    return float(pinned["coercivity_C"][f"{alpha:.2f}"])


def stress_corpus(count: int = 100, N: int = 128, offset: int = 0) -> list[ClosedCurve]:
    """Deterministic family of perturbed circles for constant pinning and checks."""
    amps = (0.05, 0.1, 0.2, 0.3)
    out = []
    for i in range(count):
        seed = 1000 + offset + i
        amp = amps[i % len(amps)]
        band = 3 + (i // len(amps)) % 6
        out.append(fourier_perturbed_circle(seed, amp, band, N))
    return out


def gns_corpus(count: int = 1000, seed: int = 20240611, modes: int = 64, n: int = 256) -> list[np.ndarray]:
    """Random periodic fields with coefficients ~ N(0, 1)/k, k = 1..modes, sampled at n points."""
    rng = np.random.default_rng(seed)
    x = np.arange(n) / n
    k = np.arange(1, modes + 1)
    cos, sin = np.cos(2 * np.pi * np.outer(x, k)), np.sin(2 * np.pi * np.outer(x, k))
    out = []
    for _ in range(count):
        a = rng.standard_normal(modes) / k
        b = rng.standard_normal(modes) / k
        out.append(cos @ a + sin @ b)
    return out
