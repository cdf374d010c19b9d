from __future__ import annotations

import numpy as np
import pytest

from knotflow.curves import circle, fourier_perturbed_circle, reparameterize_arclength
from knotflow.energy import EnergyParams, critical_circle_radius
from knotflow.flow import (
    CRITICAL_POINT,
    STEP_COLLAPSE,
    STEP_LIMIT,
    TIME_LIMIT,
    FlowConfig,
    dealias,
    explicit_stability_limit,
    initial_state,
    run_flow,
    step_explicit,
    step_imex,
)
from knotflow.validation import loglog_slope

P = EnergyParams(2.5, 0.1)


def _radial_spread(samples):
    r = np.linalg.norm(samples - samples.mean(axis=0), axis=1)
    return (r.max() - r.min()) / r.mean()


@pytest.mark.parametrize("integrator,dt0", [("imex", 1e-2), ("explicit", 1e-3)])
def test_circle_stays_round_and_energy_decreases(integrator, dt0):
    r0 = 1.5 * critical_circle_radius(P)
    cfg = FlowConfig(P, integrator=integrator, dt0=dt0, max_steps=25, dt_max=50.0)
    res = run_flow(circle(r0, 64), cfg)
    assert res.termination == STEP_LIMIT
    e = np.array([d.total_energy for d in res.diagnostics])
    assert np.all(np.diff(e) <= 1e-10 * np.abs(e[:-1]))
    assert e[-1] < e[0]
    for _, pts, _ in res.frames:
        assert _radial_spread(pts) < 1e-10
    # circles above the critical radius shrink towards it
    assert res.final.curve.length < 2 * np.pi * r0


def test_gauge_changes_only_the_parameterisation():
    c = fourier_perturbed_circle(3, 0.1, 4, 128)
    res = run_flow(c, FlowConfig(P, dt0=1e-3, max_steps=30, reparam_interval=5, dt_max=50.0))
    assert len(res.gauge_deviation) >= 6
    assert max(res.gauge_deviation) <= 1e-8 * res.final.curve.length


def test_dealias_keeps_low_modes():
    c = fourier_perturbed_circle(3, 0.1, 4, 64)
    assert np.allclose(dealias(c).samples, c.samples, atol=1e-14)


def test_terminations():
    c = circle(2.0, 32)
    assert run_flow(c, FlowConfig(P, max_steps=3)).termination == STEP_LIMIT
    assert run_flow(c, FlowConfig(P, dt0=0.5, dt_max=0.5, t_max=1.0)).termination == TIME_LIMIT
    res = run_flow(circle(critical_circle_radius(P), 32), FlowConfig(P, tol=1e-6))
    assert res.termination == CRITICAL_POINT and res.final.step == 0
    # a step floor that the energy test can never satisfy
    res = run_flow(fourier_perturbed_circle(1, 0.2, 6, 64), FlowConfig(P, integrator="explicit", dt0=1.0, dt_min=1.0, dt_max=1.0))
    assert res.termination == STEP_COLLAPSE and "dt_min" in res.message


def test_config_validation():
    for bad in ({"integrator": "rk4"}, {"dt0": 0.0}, {"dt_min": 1.0, "dt0": 0.1}, {"dt0": 2.0},
                {"reparam_interval": 0}, {"frame_stride": 0}):
        with pytest.raises(ValueError):
            FlowConfig(P, **bad)


def test_explicit_limit_scales_like_order_alpha_plus_one():
    # pairwise ratios are noisy near the Nyquist mode; fit over four resolutions
    ns = [32, 64, 128, 256]
    lims = [explicit_stability_limit(fourier_perturbed_circle(2, 0.05, 4, n, r=1.0), P) for n in ns]
    exponent = -loglog_slope(ns, lims)
    assert exponent == pytest.approx(P.alpha + 1, rel=0.1)


@pytest.mark.slow
def test_imex_stable_far_beyond_explicit_limit_at_512():
    c = fourier_perturbed_circle(2, 0.05, 4, 512, r=1.0)
    lim = explicit_stability_limit(c, P)
    dt = 100 * lim
    res = run_flow(c, FlowConfig(P, dt0=dt, dt_max=dt, dt_min=1e-3 * dt, max_steps=5))
    assert res.termination == STEP_LIMIT
    assert res.final.rejections == 0
    e = np.array([d.total_energy for d in res.diagnostics])
    assert np.all(np.diff(e) < 0)


def _fixed_steps(curve, stepper, dt, n):
    cfg = FlowConfig(P, dt0=dt, dt_max=dt, dt_min=dt)
    s = initial_state(curve, cfg)
    for _ in range(n):
        s = stepper(s, cfg)
    return s.curve.samples


def test_imex_first_order_against_explicit_reference():
    c = reparameterize_arclength(fourier_perturbed_circle(5, 0.1, 3, 32, r=2.0))
    T = 0.02
    lim = explicit_stability_limit(c, P)
    m = int(np.ceil(T / (0.5 * lim)))
    ref = _fixed_steps(c, step_explicit, T / m, m)
    dts, errs = [], []
    for n in (16, 32, 64):
        errs.append(np.max(np.abs(_fixed_steps(c, step_imex, T / n, n) - ref)))
        dts.append(T / n)
    assert loglog_slope(dts, errs) == pytest.approx(1.0, abs=0.2)
