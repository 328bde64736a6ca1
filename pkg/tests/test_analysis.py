"""Arrival statistics, curve comparison, and the final mass ledger."""

import numpy as np
import pytest

from spindetect import (
    ArrivalStats,
    IntervalSensitivity,
    arrival_stats,
    build_conditional_potential,
    compare_curves,
    free_evolved_packet,
    mass_accounting,
    propagate_conditional,
)
from spindetect.errors import ConfigurationError, NumericsError

from helpers import internal_grid, make_units, slow_packet


def test_flat_density_moments():
    t = np.linspace(0.0, 1.0, 2001)
    stats = arrival_stats(t, np.ones_like(t))
    assert stats.total_detection_probability == pytest.approx(1.0, rel=1e-12)
    assert stats.mean == pytest.approx(0.5, rel=1e-12)
    assert stats.std == pytest.approx(1.0 / np.sqrt(12.0), rel=1e-6)
    assert stats.window == (0.0, 1.0)


def test_gaussian_peak_moments():
    t = np.linspace(0.0, 4.0, 4001)
    sigma, center, mass = 0.1, 2.0, 0.4
    w = mass * np.exp(-0.5 * ((t - center) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    stats = arrival_stats(t, w)
    assert stats.total_detection_probability == pytest.approx(mass, rel=1e-9)
    assert stats.mean == pytest.approx(center, abs=1e-9)
    assert stats.std == pytest.approx(sigma, rel=1e-6)
    assert stats.mode == pytest.approx(center, abs=1e-3)
    d = stats.as_dict()
    assert d["mean_arrival_s"] == stats.mean
    assert d["window_s"] == [0.0, 4.0]


def test_window_restricts_the_mass():
    t = np.linspace(0.0, 4.0, 8001)
    sigma, center = 0.1, 2.0
    w = 0.4 * np.exp(-0.5 * ((t - center) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    half = arrival_stats(t, w, window=(1.5, 2.0))
    assert half.total_detection_probability == pytest.approx(0.2, rel=1e-3)
    # mean of the left half-Gaussian sits sigma*sqrt(2/pi) below the center
    assert half.mean == pytest.approx(center - sigma * np.sqrt(2.0 / np.pi), rel=1e-3)
    assert half.window == (1.5, 2.0)


def test_empty_density_has_undefined_moments():
    t = np.linspace(0.0, 1.0, 101)
    stats = arrival_stats(t, np.zeros_like(t))
    assert stats.total_detection_probability == 0.0
    assert stats.mean is None and stats.std is None and stats.mode is None


def test_negative_density_policy():
    t = np.linspace(0.0, 1.0, 101)
    w = np.exp(-0.5 * ((t - 0.5) / 0.05) ** 2)
    mild = w.copy()
    mild[0] = -1e-8
    stats = arrival_stats(t, mild)
    assert stats.total_detection_probability > 0.0
    bad = w.copy()
    bad[0] = -1e-3
    with pytest.raises(ConfigurationError, match="negative entries"):
        arrival_stats(t, bad)


def test_arrival_stats_input_validation():
    t = np.linspace(0.0, 1.0, 11)
    w = np.ones_like(t)
    with pytest.raises(ConfigurationError, match="matching"):
        arrival_stats(t, w[:-1])
    with pytest.raises(ConfigurationError, match="increasing"):
        arrival_stats(t[::-1], w)
    with pytest.raises(ConfigurationError, match="positive length"):
        arrival_stats(t, w, window=(0.5, 0.5))
    with pytest.raises(ConfigurationError, match="fewer than two"):
        arrival_stats(t, w, window=(0.42, 0.48))


def test_arrival_stats_record_guards():
    with pytest.raises(NumericsError, match="outside"):
        ArrivalStats(total_detection_probability=1.5, mean=0.0, std=0.0,
                     mode=0.0, window=(0.0, 1.0))
    with pytest.raises(NumericsError, match="finite"):
        ArrivalStats(total_detection_probability=0.5, mean=None, std=0.1,
                     mode=0.2, window=(0.0, 1.0))


def test_identical_curves_compare_to_zero():
    t = np.linspace(0.0, 1.0, 301)
    w = np.sin(np.pi * t) ** 2
    cmp = compare_curves(t, w, t, w)
    assert cmp.linf == 0.0 and cmp.l2 == 0.0
    assert cmp.linf_relative == 0.0 and cmp.l2_relative == 0.0
    # the peak is read off the resampled polyline, which undershoots the
    # true maximum by the chord error
    assert cmp.peak == pytest.approx(1.0, rel=1e-4)
    assert cmp.window == (0.0, 1.0)


def test_shifted_curve_distance_and_symmetry():
    sigma, delta = 0.1, 0.01
    ta = np.linspace(0.0, 2.0, 2001)
    tb = np.linspace(0.0, 2.0, 1501)   # different sampling on purpose
    a = np.exp(-0.5 * ((ta - 1.0) / sigma) ** 2)
    b = np.exp(-0.5 * ((tb - 1.0 - delta) / sigma) ** 2)
    ab = compare_curves(ta, a, tb, b)
    ba = compare_curves(tb, b, ta, a)
    assert ab.linf == ba.linf and ab.l2 == ba.l2
    # small shift: L_inf ~ delta * max|slope| = delta * exp(-1/2)/sigma
    assert ab.linf_relative == pytest.approx(delta * np.exp(-0.5) / sigma, rel=0.05)
    assert 0.0 < ab.l2_relative < ab.linf_relative


def test_compare_window_and_failure_modes():
    ta = np.linspace(0.0, 1.0, 101)
    tb = np.linspace(0.5, 1.5, 101)
    cmp = compare_curves(ta, np.ones_like(ta), tb, np.ones_like(tb),
                         window=(0.6, 0.9), n_resample=64)
    assert cmp.window == (0.6, 0.9)
    assert cmp.n_nodes == 64
    assert cmp.linf == 0.0
    with pytest.raises(ConfigurationError, match="no overlapping"):
        compare_curves(ta, np.ones_like(ta), ta + 5.0, np.ones_like(ta))
    with pytest.raises(ConfigurationError, match="at least 2"):
        compare_curves(ta, np.ones_like(ta), tb, np.ones_like(tb), n_resample=1)
    with pytest.raises(ConfigurationError, match="increasing"):
        compare_curves(ta[::-1], np.ones_like(ta), tb, np.ones_like(tb))


@pytest.fixture(scope="module")
def short_absorbing_run():
    u = make_units()
    packet = slow_packet()
    grid = internal_grid(-60.0, 60.0, 0.1)
    pot = build_conditional_potential(
        0.3 * u.reference_frequency, 0.0,
        IntervalSensitivity(10.0 * u.length_unit, start=-5.0 * u.length_unit), grid)
    psi0 = free_evolved_packet(packet, 0.0, grid)
    return propagate_conditional(psi0, pot, (0.0, 1.0 * u.time_unit),
                                 0.01 * u.time_unit, mass=packet.mass)


def test_mass_accounting_matches_run_ledger(short_absorbing_run):
    traj = short_absorbing_run
    split = mass_accounting(traj)
    assert set(split) == set(traj.mass_split)
    for key, value in traj.mass_split.items():
        assert split[key] == pytest.approx(value, abs=1e-9)
    assert sum(split.values()) == pytest.approx(1.0, abs=1e-7)
    # the packet is still draining, so the run reports a residual warning
    assert any("residual mass" in w for w in traj.warnings)


def test_mass_accounting_region_override(short_absorbing_run):
    traj = short_absorbing_run
    u = make_units()
    wide = mass_accounting(traj, region=(-30.0 * u.length_unit,
                                         30.0 * u.length_unit))
    base = mass_accounting(traj)
    assert wide["residual_in_region"] > base["residual_in_region"]
    assert wide["reflected"] < base["reflected"]
    assert sum(wide.values()) == pytest.approx(1.0, abs=1e-7)


def test_mass_accounting_rejects_tampered_field(short_absorbing_run):
    traj = short_absorbing_run
    original = traj.final_field.copy()
    try:
        traj.final_field *= 1.05
        with pytest.raises(NumericsError, match="mass ledger"):
            mass_accounting(traj)
    finally:
        traj.final_field[:] = original
