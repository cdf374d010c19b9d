from __future__ import annotations

import numpy as np
import pytest

from knotflow.curves import ClosedCurve, circle, fourier_perturbed_circle, reparameterize_arclength, torus_knot
from knotflow.diagnostics import (
    DiagnosticsRecord,
    coercivity_ratio,
    dissipation_residual,
    gns_check,
    higher_energy,
    image_deviation,
    load_pinned,
    lojasiewicz_monitor,
    pinned_coercivity,
    stress_corpus,
)
from knotflow.energy import m_alpha
from knotflow.errors import InsufficientTailError


@pytest.mark.parametrize("k", [0, 1, 2])
def test_higher_energies_on_circles(k):
    r = 1.7
    # |d_s^k kappa| = r^{-1-k} on a circle of radius r
    assert higher_energy(circle(r, 64), k) == pytest.approx(2 * np.pi * r ** (-1 - 2 * k), rel=1e-10)
    with pytest.raises(ValueError):
        higher_energy(circle(r, 64), 5)


def test_higher_energy_parameterisation_free():
    c = torus_knot(2, 3, N=256)
    a = reparameterize_arclength(c)
    for k in range(3):
        assert higher_energy(a, k) == pytest.approx(higher_energy(c, k), rel=1e-8)


def test_coercivity_circle_value_and_invariances():
    c = fourier_perturbed_circle(9, 0.2, 5, 128)
    r = coercivity_ratio(c, 2.5)
    for k in (0.1, 7.0):
        assert coercivity_ratio(c.scaled(k), 2.5) == pytest.approx(r, rel=1e-8)
    shifted = ClosedCurve(np.roll(c.samples, 17, axis=0))
    assert coercivity_ratio(shifted, 2.5) == pytest.approx(r, rel=1e-8)
    assert coercivity_ratio(fourier_perturbed_circle(9, 0.2, 5, 256), 2.5) == pytest.approx(r, rel=1e-5)


def test_coercivity_below_pinned_on_corpus_slice():
    C = pinned_coercivity(2.5)
    assert all(coercivity_ratio(c, 2.5) <= C for c in stress_corpus(12))
    assert coercivity_ratio(circle(1.0, 128), 2.5) <= C


def test_pinned_file_contents():
    p = load_pinned()
    for key, val in p["m_alpha"].items():
        assert val == pytest.approx(m_alpha(float(key)), rel=1e-13)
    assert p["gns_C"] >= p["gns_corpus_max"]
    for key in ("2.20", "2.50", "2.80"):
        assert p["coercivity_C"][key] >= p["coercivity_corpus_max"][key]


def test_gns_single_mode_and_homogeneity():
    x = np.arange(256) / 256
    for k in (1, 5, 40):
        f = np.cos(2 * np.pi * k * x + 0.3)
        assert gns_check(f, 0.5, 1.0, 2.0) == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(0)
    g = rng.standard_normal(256)
    r = gns_check(g, 0.5, 1.0, 2.0)
    assert r <= 1.0 + 1e-12
    assert gns_check(3.7 * g, 0.5, 1.0, 2.0) == pytest.approx(r, rel=1e-12)
    with pytest.raises(ValueError):
        gns_check(g, 1.0, 0.5, 2.0)


def test_lojasiewicz_synthetic_exponent():
    # exponential decay: E - E_inf = e^{-2ct}, ||V|| = e^{-ct}  =>  theta = 1/2
    t = np.linspace(0, 10, 60)
    E = 1.0 + np.exp(-2 * t)
    V = 3.0 * np.exp(-t)
    fit = lojasiewicz_monitor(E, V, E_inf=1.0)
    assert fit.theta == pytest.approx(0.5, abs=1e-8)
    assert fit.r2 == pytest.approx(1.0)
    with pytest.raises(InsufficientTailError):
        lojasiewicz_monitor(E[:5], V[:5], E_inf=1.0)


def test_dissipation_residual_exact_for_linear_energy():
    t = np.array([0.0, 0.1, 0.3])
    E = np.array([5.0, 4.8, 4.4])
    assert np.allclose(dissipation_residual(t, E, [2.0, 2.0, 2.0]), 0.0)
    assert dissipation_residual([0.0], [1.0], [1.0]).size == 0


def test_image_deviation():
    c = torus_knot(2, 3, N=128)
    assert image_deviation(c, reparameterize_arclength(c)) < 1e-9
    assert image_deviation(c, c.scaled(1.01)) > 1e-3


def test_record_columns_roundtrip():
    cols = DiagnosticsRecord.columns()
    rec = DiagnosticsRecord(*range(len(cols)))
    assert rec.row() == list(range(len(cols)))
    assert cols[:3] == ["step", "t", "dt"]
