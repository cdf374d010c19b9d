"""Time integration of d/dt gamma = -H^alpha(gamma) + lambda kappa."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .curves import ClosedCurve, bilipschitz_constant, reparameterize_arclength, wavenumbers
from .diagnostics import DiagnosticsRecord, coercivity_ratio, higher_energy, image_deviation
from .energy import EnergyParams, ohara_energy
from .errors import EmbeddednessError, RegularityError, StepCollapse
from .fractional import apply_multiplier, q_symbols
from .gradient import flow_velocity, weighted_l2

log = logging.getLogger(__name__)

ENERGY_SLACK = 1e-10
GROWTH_AFTER = 5
GROWTH = 1.2

CRITICAL_POINT = "CriticalPoint"
TIME_LIMIT = "TimeLimit"
STEP_COLLAPSE = "StepCollapse"
STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class FlowConfig:
    params: EnergyParams = field(default_factory=EnergyParams)
    integrator: str = "imex"
    dt0: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 1.0
    reparam_interval: int = 10
    tol: float = 1e-6
    t_max: float = 1e3
    max_steps: int = 100_000
    frame_stride: int = 10
    dealias: bool = True
    diagnostics_stride: int = 1

    def __post_init__(self):
        if self.integrator not in ("imex", "explicit"):
            raise ValueError("integrator must be 'imex' or 'explicit'")
        if not 0 < self.dt_min <= self.dt0 <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt0 <= dt_max")
        if self.reparam_interval < 1:
            raise ValueError("reparam_interval must be >= 1")
        if self.frame_stride < 1 or self.diagnostics_stride < 1:
            raise ValueError("strides must be >= 1")


@dataclass
class FlowState:
    curve: ClosedCurve
    t: float
    dt: float
    energy: float
    velocity: np.ndarray
    residual: float
    step: int = 0
    reparam_count: int = 0
    streak: int = 0
    rejections: int = 0


def _safe_energy(curve_samples: np.ndarray, params: EnergyParams) -> tuple[float, ClosedCurve | None]:
    try:
        c = ClosedCurve(curve_samples)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            e = ohara_energy(c, params, on_degenerate="huge")
        return e + params.lam * c.length, c
    except (ValueError, RegularityError, EmbeddednessError):
        return np.inf, None


def initial_state(curve: ClosedCurve, config: FlowConfig) -> FlowState:
    p = config.params
    e = ohara_energy(curve, p) + p.lam * curve.length
    V = flow_velocity(curve, p).values
    return FlowState(curve, 0.0, config.dt0, e, V, weighted_l2(V, curve))


def _advance(state: FlowState, new_curve: ClosedCurve, energy: float, dt: float, config: FlowConfig) -> FlowState:
    V = flow_velocity(new_curve, config.params).values
    streak = state.streak + 1
    next_dt = dt
    if streak >= GROWTH_AFTER:
        next_dt = min(dt * GROWTH, config.dt_max)
        streak = 0
    return FlowState(
        new_curve,
        state.t + dt,
        next_dt,
        energy,
        V,
        weighted_l2(V, new_curve),
        state.step + 1,
        state.reparam_count,
        streak,
        state.rejections,
    )


def _accept(state: FlowState, proposal, config: FlowConfig) -> FlowState:
    """Halve dt until the proposal does not raise the energy; ``proposal(dt)`` gives samples."""
    dt = state.dt
    while True:
        if dt < config.dt_min:
            raise StepCollapse(f"step size {dt:.3e} fell below dt_min at step {state.step}", state.step, state.t)
        e, c = _safe_energy(proposal(dt), config.params)
        if c is not None and e <= state.energy + ENERGY_SLACK * abs(state.energy):
            return _advance(state, c, e, dt, config)
        state = replace(state, rejections=state.rejections + 1, streak=0)
        dt *= 0.5


def step_explicit(state: FlowState, config: FlowConfig) -> FlowState:
    """Heun (RK2) step with energy-based step rejection."""
    p = config.params
    g0 = state.curve.samples
    k1 = state.velocity

    def proposal(dt):
        mid = g0 + dt * k1
        try:
            k2 = flow_velocity(ClosedCurve(mid), p).values
        except (ValueError, RegularityError, EmbeddednessError):
            return np.full_like(g0, np.nan)
        return g0 + 0.5 * dt * (k1 + k2)

    return _accept(state, proposal, config)


def imex_coefficient(curve: ClosedCurve, alpha: float) -> float:
    """alpha * mean(|gamma'|^{-(alpha+1)}): frozen coefficient of the implicit Q term."""
    return float(alpha * np.mean(curve.geometry.speed ** (-(alpha + 1.0))))


def step_imex(state: FlowState, config: FlowConfig) -> FlowState:
    """(1 + dt a q_k) (g^{n+1} - g^n)^_k = dt V^n_k: Q leading term implicit, F + lambda kappa explicit."""
    p = config.params
    g0 = state.curve.samples
    q = q_symbols(state.curve.N, p.alpha)
    a_bar = imex_coefficient(state.curve, p.alpha)
    V = state.velocity

    def proposal(dt):
        return g0 + dt * apply_multiplier(V, 1.0 / (1.0 + dt * a_bar * q))

    return _accept(state, proposal, config)


def dealias(curve: ClosedCurve) -> ClosedCurve:
    """Zero the top third of Fourier modes (|k| > N/3)."""
    n = curve.N
    keep = (np.abs(wavenumbers(n)) <= n // 3).astype(float)
    return ClosedCurve(apply_multiplier(curve.samples, keep))


def regauge(state: FlowState, config: FlowConfig) -> tuple[FlowState, float]:
    """Arc-length reparameterisation (+ de-aliasing); returns the image deviation too."""
    c = reparameterize_arclength(state.curve)
    if config.dealias:
        c = dealias(c)
    dev = image_deviation(state.curve, c)
    p = config.params
    e = ohara_energy(c, p) + p.lam * c.length
    V = flow_velocity(c, p).values
    new = replace(state, curve=c, energy=e, velocity=V, residual=weighted_l2(V, c),
                  reparam_count=state.reparam_count + 1)
    return new, dev


@dataclass
class FlowResult:
    frames: list
    diagnostics: list
    termination: str
    final: FlowState
    gauge_deviation: list = field(default_factory=list)
    message: str = ""


def _record(state: FlowState, config: FlowConfig, prev: FlowState | None, full: bool, last: DiagnosticsRecord | None) -> DiagnosticsRecord:
    p = config.params
    c = state.curve
    ea = state.energy - p.lam * c.length
    diss = float("nan")
    if prev is not None and state.t > prev.t:
        diss = abs((state.energy - prev.energy) / (state.t - prev.t) + prev.residual**2)
    if full or last is None:
        e_k = [higher_energy(c, k) for k in range(3)]
        coer = coercivity_ratio(c, p.alpha, energy=ea)
        bil = bilipschitz_constant(c)
    else:
        e_k = [last.E0, last.E1, last.E2]
        coer, bil = last.coercivity, last.bilipschitz
    return DiagnosticsRecord(
        state.step, state.t, state.dt, ea, c.length, state.energy, state.residual,
        e_k[0], e_k[1], e_k[2], coer, bil, diss, float(c.geometry.speed.min()),
    )


def run_flow(initial: ClosedCurve, config: FlowConfig, callback=None) -> FlowResult:
    """Integrate until the residual drops below ``config.tol`` or a limit is hit.

    Every ``reparam_interval`` accepted steps the curve is regauged to arc
    length and de-aliased.  Diagnostics are recorded after every accepted step.
    """
    stepper = step_imex if config.integrator == "imex" else step_explicit
    state = initial_state(initial, config)
    if not _is_uniform(initial):
        state, _ = regauge(state, config)
    frames = [(state.t, state.curve.samples.copy(), state.residual)]
    diags = [_record(state, config, None, True, None)]
    gauge = []
    termination, message = None, ""
    while termination is None:
        if state.residual < config.tol:
            termination = CRITICAL_POINT
            break
        if state.t >= config.t_max:
            termination = TIME_LIMIT
            break
        if state.step >= config.max_steps:
            termination = STEP_LIMIT
            break
        prev = state
        try:
            state = stepper(state, config)
        except StepCollapse as exc:
            termination, message = STEP_COLLAPSE, str(exc)
            break
        full = state.step % config.diagnostics_stride == 0
        diags.append(_record(state, config, prev, full, diags[-1]))
        if state.step % config.reparam_interval == 0:
            state, dev = regauge(state, config)
            gauge.append(dev)
        if state.step % config.frame_stride == 0:
            frames.append((state.t, state.curve.samples.copy(), state.residual))
        if callback is not None:
            callback(state, diags[-1])
    if frames[-1][0] != state.t:
        frames.append((state.t, state.curve.samples.copy(), state.residual))
    log.info("flow ended: %s after %d steps, t=%.4g, residual=%.3e", termination, state.step, state.t, state.residual)
    return FlowResult(frames, diags, termination, state, gauge, message)


def _is_uniform(curve: ClosedCurve) -> bool:
    g = curve.geometry
    return bool(np.max(np.abs(g.speed - g.length)) <= 1e-10 * g.length)


def spectral_radius(curve: ClosedCurve, params: EnergyParams, iters: int = 40, seed: int = 0) -> float:
    """Largest |eigenvalue| of the linearised velocity map, by power iteration on finite differences."""
    rng = np.random.default_rng(seed)
    V0 = flow_velocity(curve, params).values
    v = rng.standard_normal(curve.samples.shape)
    v /= np.linalg.norm(v)
    eps = 1e-7 * curve.length
    rho = 0.0
    for _ in range(iters):
        Jv = (flow_velocity(ClosedCurve(curve.samples + eps * v), params).values - V0) / eps
        rho = abs(float(np.sum(Jv * v)))
        nrm = np.linalg.norm(Jv)
        if nrm == 0:
            break
        v = Jv / nrm
    return rho


def explicit_stability_limit(curve: ClosedCurve, params: EnergyParams, iters: int = 40, seed: int = 0) -> float:
    """Largest stable Heun step, 2 / rho(J): RK2 is stable on [-2, 0] of the real axis."""
    return 2.0 / spectral_radius(curve, params, iters, seed)
