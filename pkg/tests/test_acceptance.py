"""Acceptance criteria 1-12; each test prints one PASS/FAIL line in the summary."""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

import conftest
from knotflow.curves import ClosedCurve, bilipschitz_constant, fourier_perturbed_circle, torus_knot
from knotflow.diagnostics import coercivity_ratio, gns_check, gns_corpus, load_pinned, stress_corpus
from knotflow.energy import EnergyParams, critical_circle_radius, length_lower_bound, ohara_energy
from knotflow.flow import CRITICAL_POINT, FlowConfig, explicit_stability_limit, initial_state, run_flow, step_explicit
from knotflow.fractional import (
    HeatKernelParams,
    apply_Q,
    heat_kernel,
    heat_kernel_mass,
    heat_semigroup_apply,
)
from knotflow.gradient import first_variation_check
from knotflow.io import read_config
from knotflow.validation import (
    decomposition_error,
    loglog_slope,
    manufactured_duhamel,
    q_direct,
    random_direction,
    smoothing_slope,
    symbol_deviation_slope,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
ALPHAS = (2.2, 2.5, 2.8)


def report(n: int, ok: bool, measured: str, tol: str) -> None:
    conftest.ACCEPTANCE_LINES.append(f"CRITERION {n:2d} {'PASS' if ok else 'FAIL'}: measured {measured}; tol {tol}")
    assert ok, f"criterion {n}: measured {measured}; tol {tol}"


def test_criterion_01_scaling_law():
    t0 = time.perf_counter()
    worst = 0.0
    curves = (torus_knot(2, 3, N=256), fourier_perturbed_circle(7, 0.2, 5, 256))
    for alpha in ALPHAS:
        p = EnergyParams(alpha)
        for c in curves:
            e = ohara_energy(c, p)
            for k in (0.5, 2.0):
                worst = max(worst, abs(ohara_energy(c.scaled(k), p) - k ** (2 - alpha) * e) / e)
    dt = time.perf_counter() - t0
    report(1, worst <= 1e-6 and dt < 10, f"max rel err {worst:.2e} in {dt:.1f}s", "1e-6, < 10 s")


def test_criterion_02_first_variation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    c = torus_knot(2, 3, N=256)
    errs = [first_variation_check(c, random_direction(c, rng), 2.5) for _ in range(20)]
    dt = time.perf_counter() - t0
    report(2, max(errs) <= 1e-4 and dt < 60, f"max rel err {max(errs):.2e} over 20 directions in {dt:.1f}s",
           "1e-4, < 60 s")


def test_criterion_03_decomposition():
    dec = decomposition_error(torus_knot(2, 3, N=512), 2.5)
    x = np.arange(128) / 128
    f = np.cos(2 * np.pi * 3 * x) + 0.5 * np.sin(2 * np.pi * 5 * x) + 0.2 * np.cos(2 * np.pi * 11 * x + 1)
    Qf = apply_Q(f, 2.5)
    q_err = max(abs(Qf[j] - q_direct(f, x[j], 2.5)) for j in range(0, 128, 9)) / np.max(np.abs(Qf))
    report(3, dec <= 1e-3 and q_err <= 1e-6, f"decomposition {dec:.2e}, apply_Q vs p.v. {q_err:.2e}",
           "1e-3 and 1e-6")


def test_criterion_04_heat_kernel_laws():
    mass = max(abs(heat_kernel_mass(HeatKernelParams(s, t)) - 1) for s, t in ((1.5, 0.1), (1.2, 0.05), (1.8, 1.0)))
    s, t = 1.5, 0.3
    x = np.linspace(-2, 2, 41)
    scale = np.max(np.abs(heat_kernel(x, HeatKernelParams(s, t))
                          - t ** (-1 / s) * heat_kernel(x * t ** (-1 / s), HeatKernelParams(s, 1.0, cutoff=45.0))))
    xg = np.linspace(-1, 1, 41)
    gauss = np.max(np.abs(heat_kernel(xg, HeatKernelParams(2.0, 0.05)) - np.exp(-xg**2 / 0.2) / np.sqrt(0.2 * np.pi)))
    u = np.arange(128) / 128
    f = np.sin(2 * np.pi * u) + 0.2 * np.cos(2 * np.pi * 7 * u)
    semi = np.max(np.abs(heat_semigroup_apply(heat_semigroup_apply(f, 1.7, 0.01), 1.7, 0.02)
                         - heat_semigroup_apply(f, 1.7, 0.03)))
    slope = smoothing_slope(1.5, 3.0)
    slope_err = abs(slope / -2.0 - 1)
    ok = mass <= 1e-8 and scale <= 1e-10 and gauss <= 1e-10 and semi <= 1e-12 and slope_err <= 0.05
    report(4, ok, f"mass {mass:.1e}, scaling {scale:.1e}, gaussian {gauss:.1e}, semigroup {semi:.1e}, "
                  f"smoothing slope {slope:.4f} (rel {slope_err:.1e})", "1e-8, 1e-10, 1e-10, 1e-12, 5% of -2")


def test_criterion_05_duhamel():
    err = manufactured_duhamel(256)
    e = np.array([manufactured_duhamel(n) for n in (4, 8, 16, 32)])
    order = float(np.min(np.log2(e[:-1] / e[1:])))
    report(5, err <= 1e-8 and order >= 2, f"error {err:.2e} at 256 steps, min order {order:.2f}", "1e-8, order >= 2")


def test_criterion_06_symbol_asymptotics():
    slopes = {a: symbol_deviation_slope(a) for a in ALPHAS}
    ok = all(abs(s + 1) <= 0.2 for s in slopes.values())
    txt = ", ".join(f"alpha={a}: {s:.3f}" for a, s in slopes.items())
    report(6, ok, f"log-log slopes {txt} (true rate 1-alpha)", "-1 +/- 0.2")


def _flow(name: str):
    cfg = read_config(CONFIGS / name)
    t0 = time.perf_counter()
    bil, lengths = [], []

    def watch(state, rec):
        bil.append(bilipschitz_constant(state.curve))
        lengths.append(state.curve.length)

    init = cfg.initial_curve(CONFIGS)
    res = run_flow(init, cfg.flow_config(), callback=watch)
    return cfg, init, res, time.perf_counter() - t0, bil, lengths


def _max_energy_rise(res) -> float:
    e = np.array([d.total_energy for d in res.diagnostics])
    return float(np.max(np.diff(e) / np.abs(e[:-1])))


def test_criterion_07_critical_circle():
    cfg, _, res, dt, _, _ = _flow("circle.json")
    rstar = critical_circle_radius(cfg.energy_params())
    r = res.final.curve.length / (2 * np.pi)
    rise = _max_energy_rise(res)
    ok = (res.termination == CRITICAL_POINT and res.final.residual < 1e-6 and abs(r / rstar - 1) <= 0.01
          and rise <= 1e-10 and dt < 300)
    report(7, ok, f"{res.termination} after {res.final.step} steps, residual {res.final.residual:.2e}, "
                  f"r/r* - 1 = {r / rstar - 1:.2e}, max rel energy rise {rise:.1e}, {dt:.0f}s",
           "residual < 1e-6, 1%, rise <= 1e-10 (acceptance slack), < 300 s")


def test_criterion_08_minimizer_stability():
    cfg, _, res, dt, _, _ = _flow("perturbed.json")
    rstar = critical_circle_radius(cfg.energy_params())
    pts = res.final.curve.samples
    rad = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
    dev = float(np.max(np.abs(rad - rstar))) / rstar
    rise = _max_energy_rise(res)
    ok = res.termination == CRITICAL_POINT and dev < 1e-3 and rise <= 1e-10
    report(8, ok, f"{res.termination} after {res.final.step} steps, max radial deviation {dev:.2e} r*, "
                  f"max rel energy rise {rise:.1e}, {dt:.0f}s", "1e-3 r*, rise <= 1e-10")


def test_criterion_09_trefoil():
    cfg, init, res, dt, bil, lengths = _flow("trefoil.json")
    p = cfg.energy_params()
    e0 = ohara_energy(init, p) + p.lam * init.length
    bound = length_lower_bound(p, e0)
    bl = max([bilipschitz_constant(init)] + bil)
    e1 = [d.E1 for d in res.diagnostics]
    e2 = [d.E2 for d in res.diagnostics]
    # "bounded": never more than 10x the initial value
    grow = max(max(e1) / e1[0], max(e2) / e2[0])
    coer = max(d.coercivity for d in res.diagnostics) / load_pinned()["coercivity_C"]["2.50"]
    ok = (res.termination == CRITICAL_POINT and res.final.residual < 1e-3 and bl < 50 and min(lengths) >= bound
          and grow <= 10 and coer <= 1.05 and dt < 1800)
    report(9, ok, f"{res.termination} after {res.final.step} steps, residual {res.final.residual:.2e}, "
                  f"max bi-Lipschitz {bl:.2f}, min L {min(lengths):.3f} >= {bound:.3f}, "
                  f"E1/E2 growth x{grow:.2f}, coercivity/C {coer:.3f}, {dt:.0f}s",
           "residual < 1e-3, bi-Lipschitz < 50, L >= bound, E^k <= 10 E^k(0), coercivity <= 1.05 C, < 1800 s")


def test_criterion_10_coercivity():
    pinned = load_pinned()
    corpus = stress_corpus(100)
    worst, margins = 0.0, []
    for a in ALPHAS:
        C = pinned["coercivity_C"][f"{a:.2f}"]
        m = max(coercivity_ratio(c, a) for c in corpus)
        margins.append(f"alpha={a}: {m:.4f} <= {C}")
        worst = max(worst, m / C)
    c = corpus[17]
    r = coercivity_ratio(c, 2.5)
    inv = max(abs(coercivity_ratio(c.scaled(k), 2.5) / r - 1) for k in (0.25, 3.0, 40.0))
    report(10, worst <= 1 and inv <= 1e-8, f"corpus max {'; '.join(margins)}, scale invariance {inv:.1e}",
           "pinned C_impl, 1e-8")


def _one_step_residual(curve: ClosedCurve, p: EnergyParams, dt: float) -> float:
    cfg = FlowConfig(p, integrator="explicit", dt0=dt, dt_min=dt, dt_max=dt)
    s0 = initial_state(curve, cfg)
    s1 = step_explicit(s0, cfg)
    return abs((s1.energy - s0.energy) / dt + s0.residual**2)


def test_criterion_11_dissipation():
    p = EnergyParams(2.5, 0.1)
    c = fourier_perturbed_circle(7, 0.05, 4, 64, r=2.64)
    lim = explicit_stability_limit(c, p)
    dts = lim * np.array([0.5, 0.25, 0.125, 0.0625])
    res = [_one_step_residual(c, p, dt) for dt in dts]
    slope = loglog_slope(dts, res)
    report(11, abs(slope - 1) <= 0.2, f"log-log slope {slope:.3f} (explicit RK2, N=64, dt/limit 1/2..1/16)",
           "1 +/- 0.2")


def test_criterion_12_gns():
    pinned = load_pinned()
    orders = pinned["gns_orders"]
    x = np.arange(256) / 256
    single = max(abs(gns_check(np.cos(2 * np.pi * k * x + 0.4), *orders) - 1) for k in range(1, 65))
    cmax = max(gns_check(f, *orders) for f in gns_corpus(1000, pinned["gns_seed"]))
    report(12, single <= 1e-12 and cmax <= pinned["gns_C"],
           f"single-mode |ratio - 1| {single:.1e}, corpus max {cmax:.4f} <= {pinned['gns_C']}", "1e-12, pinned C_impl")
