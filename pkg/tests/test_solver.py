"""Contraction solver, reference integrator, conservation, gluing."""

import math

import numpy as np
import pytest

from gkdvlab.solver import (
    NonlinearityG,
    SolverConfig,
    aux_smoothness,
    critical_exponent,
    critical_sobolev,
    energy,
    free_smallness,
    glued_solve,
    mass,
    picard_solve,
    reference_solve,
)
from gkdvlab.spacetime import free_evolution
from gkdvlab.spectral import Grid1D, SpectralField, gaussian_profile, random_band_limited

GRID = Grid1D(64.0, 256)
G5 = NonlinearityG(alpha=5.0, mu=1.0)


def _sup_l2(a, b, grid):
    return float(np.max(np.sqrt(np.sum(np.abs(a - b) ** 2, axis=1) * grid.dxi)))


def test_critical_exponents():
    assert critical_exponent(5.0) == 2.0
    assert critical_exponent(7.0) == 3.0
    assert critical_sobolev(5.0) == 0.0
    assert aux_smoothness(5.0) == 0.5
    with pytest.raises(ValueError):
        aux_smoothness(100.0)


def test_free_flow_recovered_when_uncoupled():
    # band-limited datum: the unpaired Nyquist mode is empty, so the
    # mu = 0 dynamics is the free flow to round-off in both solvers
    f = random_band_limited(GRID, decay=1.0, band=GRID.size // 4, seed=3)
    u0 = SpectralField(GRID, 0.3 * f.coeffs, True)
    G0 = NonlinearityG(alpha=5.0, mu=0.0)
    cfg = SolverConfig(grid=GRID, samples_per_unit=32)
    res = picard_solve(u0, G0, cfg)
    assert res.converged
    free = free_evolution(u0, cfg.times())
    assert _sup_l2(res.trace.coeffs, free.coeffs, GRID) < 1e-13
    ref = reference_solve(u0, G0, cfg)
    assert _sup_l2(ref.coeffs, free.coeffs, GRID) < 1e-12


def test_zero_datum():
    u0 = SpectralField(GRID, np.zeros(GRID.size, dtype=complex), True)
    res = picard_solve(u0, G5, SolverConfig(grid=GRID, samples_per_unit=16))
    assert res.converged
    assert res.epsilon == 0.0
    assert np.all(res.trace.coeffs == 0.0)


def test_smallness_gate_declines_large_data():
    u0 = gaussian_profile(GRID, 5.0)
    res = picard_solve(u0, G5, SolverConfig(grid=GRID, samples_per_unit=16))
    assert not res.converged
    assert res.iterations == 0
    assert "gate" in res.reason
    assert res.epsilon > res.delta


def test_contraction_on_small_gaussian():
    u0 = gaussian_profile(GRID, 0.05)
    cfg = SolverConfig(grid=GRID)
    res = picard_solve(u0, G5, cfg)
    assert res.converged
    assert res.contraction_factors
    assert max(res.contraction_factors) <= 0.5
    assert res.diagnostics["mass_drift"] < 1e-8
    assert res.diagnostics["energy_drift"] < 1e-6
    assert not res.diagnostics["boundary_tainted"]


def test_first_update_is_exactly_quintic_in_amplitude():
    # the flux is 5-homogeneous and every other operation linear, so the
    # first Picard update scales as amplitude^5 exactly
    cfg = SolverConfig(grid=GRID, samples_per_unit=32)
    dists = []
    for amp in (0.02, 0.04):
        res = picard_solve(gaussian_profile(GRID, amp), G5, cfg)
        dists.append(res.update_distances[0])
    assert dists[1] / dists[0] == pytest.approx(2.0 ** 5, rel=1e-9)


def test_picard_matches_reference():
    u0 = gaussian_profile(GRID, 0.05)
    cfg = SolverConfig(grid=GRID)
    pic = picard_solve(u0, G5, cfg)
    ref = reference_solve(u0, G5, cfg)
    assert _sup_l2(pic.trace.coeffs, ref.coeffs, GRID) < 1e-6


def test_reference_self_convergence_is_fourth_order():
    # step sizes small enough that h * xi_max^3 is order one; coarser steps
    # sit in a pre-asymptotic regime where the oscillatory error constant
    # is not yet settled
    u0 = gaussian_profile(GRID, 0.4)
    base = dict(grid=GRID, samples_per_unit=4, t_end=1.0)
    c1 = reference_solve(u0, G5, SolverConfig(**base, reference_dt=1 / 64)).coeffs
    c2 = reference_solve(u0, G5, SolverConfig(**base, reference_dt=1 / 128)).coeffs
    c3 = reference_solve(u0, G5, SolverConfig(**base, reference_dt=1 / 256)).coeffs
    e12 = _sup_l2(c1, c2, GRID)
    e23 = _sup_l2(c2, c3, GRID)
    assert 11.0 < e12 / e23 < 22.0


def test_rejects_complex_data():
    c = np.zeros(GRID.size, dtype=complex)
    c[GRID.size // 2 + 3] = 1.0
    with pytest.raises(ValueError):
        picard_solve(SpectralField(GRID, c), G5, SolverConfig(grid=GRID))


def test_alpha_range_guard():
    u0 = gaussian_profile(GRID, 0.02)
    cfg = SolverConfig(grid=GRID, samples_per_unit=16)
    with pytest.raises(ValueError):
        picard_solve(u0, NonlinearityG(alpha=4.0, mu=1.0), cfg)
    cfg_x = SolverConfig(grid=GRID, samples_per_unit=16, exploratory=True)
    with pytest.warns(UserWarning):
        res = picard_solve(u0, NonlinearityG(alpha=4.0, mu=1.0), cfg_x)
    assert res.converged
    # far outside even the exploratory window
    with pytest.raises(ValueError):
        picard_solve(u0, NonlinearityG(alpha=2.0, mu=1.0), cfg_x)


def test_free_smallness_monotone_in_amplitude():
    cfg = SolverConfig(grid=GRID, samples_per_unit=16)
    eps1 = free_smallness(gaussian_profile(GRID, 0.05), G5, cfg)
    eps2 = free_smallness(gaussian_profile(GRID, 0.10), G5, cfg)
    assert eps2 == pytest.approx(2.0 * eps1, rel=1e-12)  # norms are 1-homogeneous


def test_glued_matches_single_shot():
    u0 = gaussian_profile(GRID, 0.05)
    cfg = SolverConfig(grid=GRID)
    single = picard_solve(u0, G5, cfg)
    glued = glued_solve(u0, G5, cfg, segment_length=0.25, store_stride=1)
    assert glued.converged
    assert len(glued.segments) == 4
    np.testing.assert_array_equal(glued.trace.times, single.trace.times)
    assert _sup_l2(glued.trace.coeffs, single.trace.coeffs, GRID) < 1e-7


def test_glued_trace_is_strictly_increasing_and_strided():
    u0 = gaussian_profile(GRID, 0.05)
    cfg = SolverConfig(grid=GRID, t_end=2.0)
    glued = glued_solve(u0, G5, cfg, segment_length=1.0, store_stride=4)
    assert np.all(np.diff(glued.trace.times) > 0)
    assert glued.trace.times[0] == 0.0
    assert glued.trace.times[-1] == 2.0
    for seg in glued.segments:
        assert seg["mass_drift"] < 1e-8


def test_mass_energy_closed_forms():
    # unit-width gaussian a exp(-x^2/2): mass = a^2 sqrt(pi),
    # energy = a^2 sqrt(pi)/4 + (mu/6) a^6 sqrt(pi/3)
    grid = Grid1D(64.0, 512)
    a = 0.7
    u = gaussian_profile(grid, a)
    assert mass(u) == pytest.approx(a ** 2 * math.sqrt(math.pi), rel=1e-10)
    for mu in (1.0, -1.0):
        G = NonlinearityG(alpha=5.0, mu=mu)
        expect = (a ** 2 * math.sqrt(math.pi) / 4.0
                  + (mu / 6.0) * a ** 6 * math.sqrt(math.pi / 3.0))
        assert energy(u, G, pad=3) == pytest.approx(expect, rel=1e-10)
