"""Self-check suite behind ``knotflow validate``: laws the implementation must obey."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .curves import ClosedCurve, circle, fourier_perturbed_circle, spectral_derivative, torus_knot, trig_eval
from .diagnostics import coercivity_ratio, gns_check, higher_energy, load_pinned
from .energy import EnergyParams, m_alpha, ohara_energy
from .fractional import (
    HeatKernelParams,
    apply_Q,
    duhamel_solve,
    heat_kernel,
    heat_kernel_mass,
    heat_semigroup_apply,
    q_symbol,
    q_symbol_limit,
    smoothing_gain,
)
from .gradient import first_variation_check, gradient_direct, project_normal, tilde_H, weighted_l2


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _le(name: str, measured: float, tol: float, note: str = "") -> Check:
    return Check(name, float(measured), float(tol), bool(np.isfinite(measured) and measured <= tol), note)


def _near(name: str, measured: float, target: float, tol: float, note: str = "") -> Check:
    ok = bool(np.isfinite(measured) and abs(measured - target) <= tol)
    return Check(name, float(measured), float(tol), ok, note or f"target {target:g}")


# --- oracles used by several checks ------------------------------------------

def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def symbol_deviation_slope(alpha: float, ks=range(8, 65)) -> float:
    """Log-log slope of |q(k)/(2 pi k)^{alpha+1} - c| against k."""
    ks = np.array(list(ks), dtype=float)
    c = q_symbol_limit(alpha)
    dev = [abs(q_symbol(int(k), alpha) / (2 * np.pi * k) ** (alpha + 1) - c) for k in ks]
    return loglog_slope(ks, dev)


def q_direct(f: np.ndarray, x: float, alpha: float, w0: float = 0.02) -> float:
    """Physical-space p.v. quadrature of Q^alpha f at the point x.

    Q f(x) = 2 int_0^{1/2} [f(x+w) + f(x-w) - 2 f(x) - w^2 f''(x)] w^{-alpha-2} dw,
    with the bracket replaced by its Taylor series for w < w0 to avoid
    cancellation.  ``f`` is a band-limited sample vector.
    """
    derivs = [float(trig_eval(spectral_derivative(f, m) if m else f, np.array([x]))[0]) for m in range(0, 13, 2)]
    fact = [1.0, 2.0, 24.0, 720.0, 40320.0, 3628800.0, 479001600.0]

    def bracket(w):
        if w < w0:
            return 2.0 * sum(derivs[m] * w ** (2 * m) / fact[m] for m in range(2, 7))
        v = trig_eval(f, np.array([x + w, x - w]))
        return float(v[0] + v[1] - 2.0 * derivs[0] - w * w * derivs[1])

    g = lambda w: bracket(w) / w**4 if w > 0 else 2.0 * derivs[2] / 24.0
    val, _ = quad(g, 0.0, 0.5, weight="alg", wvar=(2.0 - alpha, 0.0), epsabs=0, epsrel=1e-12, limit=400)
    return 2.0 * val


def manufactured_duhamel(steps: int, s: float = 1.5, a: float = 0.3, T: float = 1.0, n: int = 64) -> float:
    """Relative error of duhamel_solve against u = cos(3t) sin(2 pi x) + e^{t} cos(4 pi x)."""
    x = np.arange(n) / n
    s1, c2 = np.sin(2 * np.pi * x), np.cos(4 * np.pi * x)
    l1, l2 = a * (2 * np.pi) ** s, a * (4 * np.pi) ** s
    exact = lambda t: np.cos(3 * t) * s1 + np.exp(t) * c2
    forcing = lambda t: (-3 * np.sin(3 * t) + l1 * np.cos(3 * t)) * s1 + (1 + l2) * np.exp(t) * c2
    _, traj = duhamel_solve(exact(0.0), forcing, a, s, T, steps, keep=False)
    ref = exact(T)
    return float(np.max(np.abs(traj[-1] - ref)) / np.max(np.abs(ref)))


def smoothing_slope(s: float = 1.5, beta: float = 3.0, n: int = 4096) -> float:
    """Log-log slope of the semigroup smoothing gain against t, where the optimal mode is resolved."""
    ts = np.logspace(-5.3, -3.0, 12)
    return loglog_slope(ts, [smoothing_gain(n, s, t, 0.0, beta) for t in ts])


def random_direction(curve: ClosedCurve, rng: np.random.Generator, modes: int = 6) -> np.ndarray:
    x = curve.params
    k = np.arange(1, modes + 1)
    out = np.zeros_like(curve.samples)
    for j in range(curve.d):
        a, b = rng.standard_normal((2, modes)) / k**2
        out[:, j] = np.cos(2 * np.pi * np.outer(x, k)) @ a + np.sin(2 * np.pi * np.outer(x, k)) @ b
    return out


def decomposition_error(curve: ClosedCurve, alpha: float) -> float:
    H = gradient_direct(curve, alpha).values
    T = tilde_H(curve, alpha).total
    P = project_normal(T, curve.geometry.tangent)
    return weighted_l2(H - P, curve) / weighted_l2(H, curve)


# --- the suite ------------------------------------------------------------

def _pinned_checks(pinned: dict) -> list[Check]:
    out = []
    for key, val in pinned["m_alpha"].items():
        a = float(key)
        out.append(_le(f"pinned m_alpha[{key}]", abs(m_alpha(a) - val) / abs(val), 1e-12, "fixture vs quadrature"))
    for key, vals in pinned["q_symbol"].items():
        a = float(key)
        err = max(abs(q_symbol(k, a) - v) / abs(v) for k, v in enumerate(vals, start=1))
        out.append(_le(f"pinned q_symbol[{key}]", err, 1e-9, "fixture vs quadrature, k = 1..8"))
    return out


def _heat_checks() -> list[Check]:
    out = []
    p = HeatKernelParams(1.5, 0.1)
    out.append(_le("heat kernel mass", abs(heat_kernel_mass(p) - 1.0), 1e-8, "s=1.5, t=0.1"))
    s, t = 1.5, 0.3
    x = np.linspace(-2.0, 2.0, 41)
    lhs = heat_kernel(x, HeatKernelParams(s, t))
    rhs = t ** (-1 / s) * heat_kernel(x * t ** (-1 / s), HeatKernelParams(s, 1.0, cutoff=45.0))
    out.append(_le("heat kernel scaling", np.max(np.abs(lhs - rhs)), 1e-10, "G_t(x) = t^{-1/s} G_1(x t^{-1/s})"))
    t = 0.05
    gauss = np.exp(-(x**2) / (4 * t)) / np.sqrt(4 * np.pi * t)
    out.append(_le("heat kernel s=2 Gaussian", np.max(np.abs(heat_kernel(x, HeatKernelParams(2.0, t)) - gauss)), 1e-10))
    f = np.cos(2 * np.pi * np.arange(128) / 128) + 0.3 * np.sin(6 * np.pi * np.arange(128) / 128)
    two = heat_semigroup_apply(heat_semigroup_apply(f, 1.5, 0.01), 1.5, 0.02)
    out.append(_le("semigroup law", np.max(np.abs(two - heat_semigroup_apply(f, 1.5, 0.03))), 1e-12))
    sl = smoothing_slope()
    out.append(_near("smoothing exponent", sl, -2.0, 0.05 * 2.0, "slope vs -beta/s, s=1.5, beta=3"))
    return out


def _duhamel_checks() -> list[Check]:
    err = manufactured_duhamel(256)
    e = [manufactured_duhamel(n) for n in (4, 8, 16)]
    order = float(np.min(np.log2(np.array(e[:-1]) / np.array(e[1:]))))
    return [
        _le("duhamel manufactured error", err, 1e-8, "256 steps"),
        Check("duhamel temporal order", order, 2.0, order >= 2.0, "min observed order, steps 4/8/16"),
    ]


def _symbol_checks() -> list[Check]:
    out = []
    for a in (2.2, 2.5, 2.8):
        sl = symbol_deviation_slope(a)
        out.append(_near(f"symbol asymptotics alpha={a}", sl, 1.0 - a, 0.2, f"deviation slope vs {1 - a:g}"))
    n = 64
    x = np.arange(n) / n
    f = np.cos(2 * np.pi * 3 * x) + 0.5 * np.sin(2 * np.pi * 5 * x)
    Qf = apply_Q(f, 2.5)
    err = max(abs(q_direct(f, xi, 2.5) - trig_eval(Qf, np.array([xi]))[0]) for xi in (0.0, 0.3125))
    out.append(_le("apply_Q vs p.v. quadrature", err / np.max(np.abs(Qf)), 1e-6, "alpha=2.5, modes 3 and 5"))
    return out


def _energy_checks() -> list[Check]:
    out = []
    p = EnergyParams(2.5)
    out.append(_le("circle energy = m_alpha", abs(ohara_energy(circle(1 / (2 * np.pi), 128), p) / p.m_alpha - 1), 1e-10))
    c = torus_knot(2, 3, N=256)
    e = ohara_energy(c, p)
    worst = max(abs(ohara_energy(c.scaled(k), p) - k ** (2 - p.alpha) * e) / e for k in (0.5, 2.0))
    out.append(_le("energy scaling law", worst, 1e-6, "trefoil, c in {0.5, 2}"))
    return out


def _gradient_checks() -> list[Check]:
    rng = np.random.default_rng(7)
    c = fourier_perturbed_circle(3, 0.1, 4, 128)
    err = max(first_variation_check(c, random_direction(c, rng), 2.5) for _ in range(3))
    return [
        _le("first variation", err, 1e-4, "3 directions, N=128"),
        _le("decomposition identity", decomposition_error(torus_knot(2, 3, N=256), 2.5), 1e-3, "trefoil, N=256"),
    ]


def _diagnostic_checks(pinned: dict) -> list[Check]:
    c = circle(1.0, 128)
    r = coercivity_ratio(c, 2.5)
    x = np.arange(256) / 256
    g = gns_check(np.sin(2 * np.pi * 5 * x), *pinned.get("gns_orders", (0.5, 1.0, 2.0)))
    return [
        _le("coercivity circle <= pinned C", r, pinned["coercivity_C"]["2.50"]),
        _near("GNS single mode", g, 1.0, 1e-12),
        _le("higher energy on circle", abs(higher_energy(circle(2.0, 128), 1) / (2 * np.pi / 8.0) - 1), 1e-8, "r=2, k=1"),
    ]


def run_validation(fixtures: str | Path | None = None) -> list[Check]:
    pinned = load_pinned(fixtures)
    checks: list[Check] = []
    checks += _pinned_checks(pinned)
    checks += _heat_checks()
    checks += _duhamel_checks()
    checks += _symbol_checks()
    checks += _energy_checks()
    checks += _gradient_checks()
    checks += _diagnostic_checks(pinned)
    return checks


def format_table(checks: list[Check]) -> str:
    w = max(len(c.name) for c in checks)
    lines = [f"{'check':<{w}}  {'result':<6}  {'measured':>12}  {'tolerance':>10}  note"]
    for c in checks:
        lines.append(f"{c.name:<{w}}  {'PASS' if c.passed else 'FAIL':<6}  {c.measured:>12.4e}  {c.tolerance:>10.1e}  {c.note}")
    return "\n".join(lines)
