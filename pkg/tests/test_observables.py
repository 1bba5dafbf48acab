import math

import numpy as np
import pytest

from coldpa.errors import DomainError, GridMismatchError
from coldpa.grids import MomentumSpectrum, build_uniform, gaussian
from coldpa.observables import (ThermalYield, bound_fraction,
                                continuum_fraction, detect_hole,
                                find_momentum_peaks, level_populations,
                                momentum_at_radius, project_levels,
                                radius_from_momentum, thermal_yield,
                                _smooth_density)
from coldpa.potentials import reference_system
from coldpa.spectrum import solve_levels
from coldpa.units import kb_hartree

MU, DE, A, RE = 2000.0, 0.01, 0.8, 4.0


def _morse(r):
    x = np.exp(-A * (np.asarray(r, dtype=float) - RE))
    return DE * (x * x - 2.0 * x)


_morse.asymptote = 0.0


@pytest.fixture(scope="module")
def well():
    grid = build_uniform(1.5, 30.0, 256, MU)
    return grid, solve_levels(_morse, grid)


# --- level projections -----------------------------------------------------------

def test_projection_recovers_coefficients(well):
    grid, levels = well
    amp = 0.6 * levels.state(0) + 0.8j * levels.state(3)
    c = project_levels(grid, amp, levels)
    assert c[0] == pytest.approx(0.6, abs=1e-10)
    assert c[3] == pytest.approx(0.8j, abs=1e-10)
    others = np.delete(c, [0, 3])
    assert np.max(np.abs(others)) < 1e-10
    pops = level_populations(grid, amp, levels)
    assert pops[0] == pytest.approx(0.36, abs=1e-10)
    assert pops[3] == pytest.approx(0.64, abs=1e-10)


def test_projection_rejects_foreign_grid(well):
    grid, levels = well
    other = build_uniform(1.5, 30.0, 255, MU)
    with pytest.raises(GridMismatchError):
        project_levels(other, np.zeros(other.n), levels)


def test_bound_and_continuum_fractions(well):
    grid, levels = well
    n_bound = levels.bound().n_levels
    mix = (math.sqrt(0.7) * levels.state(1)
           + math.sqrt(0.3) * levels.state(n_bound + 4))
    assert bound_fraction(grid, mix, levels) == pytest.approx(0.7, abs=1e-9)
    assert continuum_fraction(grid, mix, levels) == pytest.approx(0.3,
                                                                  abs=1e-9)
    assert continuum_fraction(grid, levels.state(0), levels) == pytest.approx(
        0.0, abs=1e-10)


# --- momentum peaks ---------------------------------------------------------------

def _three_humps(noise=0.0, seed=None):
    k = np.linspace(-20.0, 20.0, 2001)
    amp = (0.9 * np.exp(-((k + 12.0) / 0.7) ** 2)
           + 0.6 * np.exp(-((k + 5.0) / 0.5) ** 2)
           + 0.3 * np.exp(-((k - 3.0) / 0.4) ** 2)
           + 0.05 * np.exp(-((k - 0.3) / 0.8) ** 2))
    if noise:
        amp = amp + noise * np.random.default_rng(seed).standard_normal(k.size)
    return MomentumSpectrum(k=k, amp=amp.astype(complex), dk=float(k[1] - k[0]))


def test_peaks_found_and_ordered_noiseless():
    spec = _three_humps()
    peaks = find_momentum_peaks(spec)
    assert [round(p.k, 1) for p in peaks] == [-12.0, -5.0, 3.0, 0.3]
    assert all(a.height > b.height for a, b in zip(peaks, peaks[1:]))
    # the k cutoff drops the slow hump near zero
    fast = find_momentum_peaks(spec, k_min=2.0)
    assert [round(p.k, 1) for p in fast] == [-12.0, -5.0, 3.0]


def test_peaks_with_noise_floor():
    spec = _three_humps(noise=1e-4, seed=5)
    peaks = find_momentum_peaks(spec, k_min=2.0, max_peaks=3)
    got = sorted(p.k for p in peaks)
    np.testing.assert_allclose(got, [-12.0, -5.0, 3.0], atol=2 * spec.dk)


def test_peak_indices_point_into_spectrum():
    spec = _three_humps()
    for p in find_momentum_peaks(spec):
        assert spec.k[p.index] == p.k
        assert abs(spec.amp[p.index]) ** 2 == p.height


# --- gap-momentum inversion ---------------------------------------------------------

@pytest.fixture(scope="module")
def analog():
    return reference_system()


def test_momentum_radius_round_trip(analog):
    k = float(momentum_at_radius(analog, 50.0))
    assert k > 0
    assert radius_from_momentum(analog, k) == pytest.approx(50.0, abs=1e-6)
    # sign of k is irrelevant for the inversion
    assert radius_from_momentum(analog, -k) == pytest.approx(50.0, abs=1e-6)


def test_momentum_at_radius_vectorized(analog):
    r = np.array([40.0, 60.0, 90.0])
    k = momentum_at_radius(analog, r)
    assert k.shape == (3,)
    assert np.all(np.diff(k) > 0)       # gap grows outward past the crossing


def test_momentum_inversion_domain_errors(analog):
    with pytest.raises(DomainError):
        momentum_at_radius(analog, 20.0)        # inside the crossing
    with pytest.raises(DomainError):
        radius_from_momentum(analog, 20.0)      # above the asymptotic gap


# --- thermal chain ------------------------------------------------------------------

def test_thermal_yield_identities():
    base = thermal_yield(1e-4, 1.1e-4, 3e-9, 121135.9, 1e15, 1e8)
    assert isinstance(base, ThermalYield)
    kt = kb_hartree * 1.1e-4
    assert base.zp == pytest.approx(1e-4 * kt / 3e-9, rel=1e-12)
    z = (2.0 * math.pi * 121135.9 * kt) ** 1.5 * 1e15 / (2.0 * math.pi) ** 3
    assert base.z_translational == pytest.approx(z, rel=1e-12)
    assert base.p_thermal == pytest.approx(base.zp / z, rel=1e-12)
    assert base.n_molecules == pytest.approx(
        0.5 * (1e8) ** 2 * base.p_thermal * 0.75, rel=1e-12)

    # scaling behavior
    assert thermal_yield(2e-4, 1.1e-4, 3e-9, 121135.9, 1e15, 1e8).zp \
        == pytest.approx(2 * base.zp, rel=1e-12)
    assert thermal_yield(1e-4, 1.1e-4, 6e-9, 121135.9, 1e15, 1e8).zp \
        == pytest.approx(base.zp / 2, rel=1e-12)
    assert thermal_yield(1e-4, 1.1e-4, 3e-9, 121135.9, 2e15, 1e8).p_thermal \
        == pytest.approx(base.p_thermal / 2, rel=1e-12)
    assert thermal_yield(1e-4, 1.1e-4, 3e-9, 121135.9, 1e15, 2e8).n_molecules \
        == pytest.approx(4 * base.n_molecules, rel=1e-12)
    full_spin = thermal_yield(1e-4, 1.1e-4, 3e-9, 121135.9, 1e15, 1e8,
                              spin_factor=1.0)
    assert full_spin.n_molecules == pytest.approx(base.n_molecules / 0.75,
                                                  rel=1e-12)


def test_thermal_yield_validation():
    with pytest.raises(DomainError):
        thermal_yield(-1e-4, 1e-4, 3e-9, 1e5, 1e15, 1e8)
    with pytest.raises(DomainError):
        thermal_yield(1e-4, 0.0, 3e-9, 1e5, 1e15, 1e8)
    with pytest.raises(DomainError):
        thermal_yield(1e-4, 1e-4, 0.0, 1e5, 1e15, 1e8)
    with pytest.raises(DomainError):
        thermal_yield(1e-4, 1e-4, 3e-9, 1e5, -1e15, 1e8)


# --- depletion hole ------------------------------------------------------------------

def test_smoothing_preserves_constants():
    grid = build_uniform(2.0, 200.0, 256, 121135.9)
    sm = _smooth_density(grid, np.ones(grid.n), 2.0)
    np.testing.assert_allclose(sm, 1.0, atol=1e-12)


def test_hole_detected_in_notched_packet():
    grid = build_uniform(2.0, 200.0, 512, 121135.9)
    before = gaussian(grid, 100.0, 15.0)
    notch = np.sqrt(1.0 - 0.8 * np.exp(-(((grid.r - 80.0) / 5.0) ** 2)))
    rep = detect_hole(grid, before, before * notch, threshold=0.5)
    assert rep.r_lo < 80.0 < rep.r_hi
    assert rep.r_deepest == pytest.approx(80.0, abs=1.0)
    assert 0.6 < rep.depth < 0.85            # smoothing dilutes the raw 0.8
    assert 3.0 < rep.width < 10.0


def test_hole_requires_depletion():
    grid = build_uniform(2.0, 200.0, 256, 121135.9)
    before = gaussian(grid, 100.0, 15.0)
    with pytest.raises(DomainError):
        detect_hole(grid, before, before, threshold=0.5)
    with pytest.raises(DomainError):
        detect_hole(grid, before, before, threshold=1.5)
