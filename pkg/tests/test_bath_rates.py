"""Bath spectra, memory kernel, decay rate / level shift, 3D rate maps.

The sharp-cutoff numbers are checked against values frozen in helpers.py
and against the defining formulas evaluated inline, so the library cannot
drift without a test noticing.
"""

import numpy as np
import pytest

from spindetect import (
    DetectorGeometry,
    DirectionalCoupling,
    DirectionalSpectrum3D,
    GeneralBath,
    HalfLineSensitivity,
    RateMap,
    RectangularBath,
    SpinRegion3D,
    ball_region,
    correlation_kernel,
    decay_rate_and_shift,
    markov_summary,
    modified_frequencies,
    rate_map_3d,
    scaled_ensemble,
)
from spindetect.bath import _kernel_quadrature
from spindetect.errors import ConfigurationError

from helpers import (
    COUPLING,
    CUTOFF_RATIO,
    DECAY_RATE_REF,
    LEVEL_SHIFT_REF,
    MODES,
    RECURRENCE_REF,
    RESONANCE,
    CORRELATION_TIME_REF,
    make_bath,
)

CUTOFF = CUTOFF_RATIO * RESONANCE


# ---------------------------------------------------------------------------
# spectra and discrete ladder


def test_rectangular_density_profile():
    bath = make_bath()
    w = np.array([-1.0, 0.0, 0.3 * CUTOFF, CUTOFF, 1.01 * CUTOFF])
    f = bath.density(w)
    assert f[0] == 0.0 and f[1] == 0.0 and f[-1] == 0.0
    assert f[2] == pytest.approx(2.0 * np.pi * COUPLING**2 * 0.3, rel=1e-14)
    assert f[3] == pytest.approx(2.0 * np.pi * COUPLING**2, rel=1e-14)


def test_mode_ladder_and_couplings():
    bath = make_bath()
    w = bath.mode_frequencies()
    assert w.shape == (MODES,)
    np.testing.assert_allclose(w, CUTOFF * np.arange(1, MODES + 1) / MODES,
                               rtol=1e-15)
    g = bath.mode_couplings()
    # purely imaginary with |g_l|^2 = G^2 omega_l / N
    assert np.all(g.real == 0.0)
    np.testing.assert_allclose(np.abs(g) ** 2, COUPLING**2 * w / MODES,
                               rtol=1e-14)


def test_recurrence_time_frozen_value():
    bath = make_bath()
    assert bath.recurrence_time() == pytest.approx(RECURRENCE_REF, rel=1e-14)
    assert bath.recurrence_time() == pytest.approx(
        2.0 * np.pi * MODES / CUTOFF, rel=1e-15)


def test_continuum_bath_has_no_ladder():
    bath = RectangularBath(coupling=COUPLING, cutoff=CUTOFF, modes=None)
    with pytest.raises(ConfigurationError):
        bath.mode_frequencies()
    with pytest.raises(ConfigurationError):
        bath.recurrence_time()


# ---------------------------------------------------------------------------
# correlation kernel


def test_kernel_at_zero_delay():
    bath = make_bath()
    # kappa(0) = (1/2pi) integral of the density = G^2 omega_M / 2
    k0 = correlation_kernel(bath, RESONANCE, 0.0)
    assert k0 == pytest.approx(COUPLING**2 * CUTOFF / 2.0, rel=1e-12)


def test_kernel_closed_form_matches_quadrature():
    bath = make_bath()
    tau = np.array([1e-12, 1e-10, 5e-10, 3e-9, 2e-8, 1e-7])
    closed = correlation_kernel(bath, RESONANCE, tau)
    quad = _kernel_quadrature(bath, RESONANCE, tau)
    np.testing.assert_allclose(closed, quad, rtol=1e-8,
                               atol=1e-10 * abs(closed[0]))


def test_kernel_series_continuous_at_switch():
    bath = make_bath()
    # the small-x series hands over to the closed form near x = 1e-4
    x_switch = 1e-4 / CUTOFF
    below = correlation_kernel(bath, RESONANCE, 0.999e0 * x_switch)
    above = correlation_kernel(bath, RESONANCE, 1.001e0 * x_switch)
    assert abs(below - above) < 1e-7 * abs(below)


def test_kernel_rejects_negative_delay():
    with pytest.raises(ConfigurationError):
        correlation_kernel(make_bath(), RESONANCE, -1.0e-9)


# ---------------------------------------------------------------------------
# decay rate and level shift


def test_closed_form_rates_frozen_values():
    res = decay_rate_and_shift(make_bath(), RESONANCE)
    assert res.method == "closed_form"
    assert res.decay_rate == pytest.approx(DECAY_RATE_REF, rel=1e-12)
    assert res.level_shift == pytest.approx(LEVEL_SHIFT_REF, rel=1e-12)
    # and against the defining formulas, evaluated inline
    a_inline = 2.0 * np.pi * COUPLING**2 * RESONANCE / CUTOFF
    d_inline = 2.0 * COUPLING**2 * (
        (RESONANCE / CUTOFF) * np.log(RESONANCE / (CUTOFF - RESONANCE)) - 1.0)
    assert res.decay_rate == pytest.approx(a_inline, rel=1e-14)
    assert res.level_shift == pytest.approx(d_inline, rel=1e-14)


def test_quadrature_route_agrees_with_closed_form():
    res = decay_rate_and_shift(make_bath(), RESONANCE)
    scale = max(abs(res.decay_rate), abs(res.level_shift))
    assert res.quadrature_decay_rate is not None
    assert abs(res.quadrature_decay_rate - res.decay_rate) < 1e-6 * scale
    assert abs(res.quadrature_level_shift - res.level_shift) < 1e-6 * scale


def test_zero_coupling_rates():
    res = decay_rate_and_shift(make_bath(coupling=0.0), RESONANCE)
    assert res.decay_rate == 0.0 and res.level_shift == 0.0


def test_resonance_above_cutoff_rejected():
    with pytest.raises(ConfigurationError):
        decay_rate_and_shift(make_bath(), 1.2 * CUTOFF)


def test_generic_bath_gaussian_bump():
    """Smooth bump spectrum f = omega a^2 exp(-(omega-1)^2/s^2): A equals
    f at the resonance; the shift oracle -a^2 s/sqrt(pi) follows from the
    principal value (the even part of f drops, the linear part survives)."""
    s = 0.05
    amp = 0.7

    def coupling(w):
        w = np.asarray(w, dtype=float)
        return amp * np.exp(-((w - 1.0) ** 2) / (2.0 * s**2))

    bath = GeneralBath(dispersion=1.0, coupling=coupling, cutoff=3.0)
    # density = omega |Gamma|^2 / c with c = 1
    f_res = float(bath.density(np.array([1.0]))[0])
    assert f_res == pytest.approx(amp**2, rel=1e-12)
    res = decay_rate_and_shift(bath, 1.0)
    assert res.method == "tau_quadrature"
    assert res.decay_rate == pytest.approx(f_res, rel=1e-5)
    shift_ref = -(amp**2) * s * np.sqrt(np.pi) / np.pi
    assert res.level_shift == pytest.approx(shift_ref, rel=2e-3)


def test_markov_summary_correlation_time():
    ms = markov_summary(make_bath(), RESONANCE)
    # pinned output of the 1% suffix-envelope scan (regression guard)
    assert ms.correlation_time == pytest.approx(CORRELATION_TIME_REF, rel=1e-12)
    # physical sanity: tens of resonance periods, envelope well decayed
    assert 20.0 / RESONANCE < ms.correlation_time < 100.0 / RESONANCE
    assert 0.0 < ms.ratio_at_50_periods < 0.02


# ---------------------------------------------------------------------------
# multi-spin effective resonances and 3D maps


def test_modified_frequencies_pairwise_lowering():
    chi = HalfLineSensitivity()
    ex = np.array([[0.0, 1.0], [0.0, 0.0]])
    geo = DetectorGeometry(resonances=(10.0, 20.0), sensitivity=chi, exchange=ex)
    np.testing.assert_allclose(modified_frequencies(geo), [9.0, 19.0])
    # driving a resonance to zero is rejected
    ex_bad = np.array([[0.0, 10.0], [0.0, 0.0]])
    geo_bad = DetectorGeometry(resonances=(10.0, 20.0), sensitivity=chi,
                               exchange=ex_bad)
    with pytest.raises(ConfigurationError):
        modified_frequencies(geo_bad)


def _ball_geometry(multiplicity=3, radius=2.0, resonance=1.0):
    region = SpinRegion3D(sensitivity=ball_region(np.zeros(3), radius),
                          multiplicity=multiplicity, position=(0.0, 0.0, 0.0))
    return DetectorGeometry(resonances=(resonance,), regions_3d=(region,))


def test_rate_map_isotropic_analytic():
    geo = _ball_geometry()
    gamma0 = 0.4
    c = 2.0
    spec = DirectionalSpectrum3D(dispersion=c,
                                 couplings=(DirectionalCoupling(gamma0, 5.0),))
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [3.0, 0.0, 0.0]])
    rm = rate_map_3d(geo, spec, pts, include_shift=False)
    # stimulated rate omega^3 |Gamma|^2 / (pi c^3) per spin, times multiplicity
    expected = 3.0 * gamma0**2 / (np.pi * c**3)
    assert rm.decay_rate[0] == pytest.approx(expected, rel=1e-12)
    assert rm.decay_rate[1] == pytest.approx(expected, rel=1e-12)
    assert rm.decay_rate[2] == 0.0   # outside the ball, no spontaneous floor
    np.testing.assert_array_equal(rm.level_shift, 0.0)


def test_rate_map_level_shift_analytic():
    geo = _ball_geometry(multiplicity=1)
    gamma0, c, cutoff, w0 = 0.4, 2.0, 5.0, 1.0
    spec = DirectionalSpectrum3D(dispersion=c,
                                 couplings=(DirectionalCoupling(gamma0, cutoff),))
    rm = rate_map_3d(geo, spec, np.zeros((1, 3)), include_shift=True)
    # -(C/pi) PV int_0^M w^3/(w - w0) dw with C = |Gamma|^2/(pi c^3)
    big_m = cutoff
    pv = (big_m**3 / 3.0 + w0 * big_m**2 / 2.0 + w0**2 * big_m
          + w0**3 * np.log((big_m - w0) / w0))
    expected = -(gamma0**2 / (np.pi * c**3)) * pv / np.pi
    assert rm.level_shift[0] == pytest.approx(expected, rel=1e-9)


def test_rate_map_spontaneous_floor():
    geo = _ball_geometry(multiplicity=2)
    spec = DirectionalSpectrum3D(
        dispersion=1.0,
        couplings=(DirectionalCoupling(1.0, 5.0),),
        spontaneous=(DirectionalCoupling(0.05, 5.0),))
    rm = rate_map_3d(geo, spec, np.array([[10.0, 0.0, 0.0]]),
                     include_shift=False)
    # outside the ball only the position-independent channel contributes
    expected = 2.0 * 0.05**2 / np.pi
    assert rm.decay_rate[0] == pytest.approx(expected, rel=1e-12)


def test_rate_map_rejects_strong_spontaneous():
    geo = _ball_geometry()
    spec = DirectionalSpectrum3D(
        dispersion=1.0,
        couplings=(DirectionalCoupling(1.0, 5.0),),
        spontaneous=(DirectionalCoupling(0.5, 5.0),))
    with pytest.raises(ConfigurationError):
        rate_map_3d(geo, spec, np.zeros((1, 3)))


def test_scaled_ensemble_square_root_invariance():
    geo = _ball_geometry()
    spec = DirectionalSpectrum3D(
        dispersion=1.5,
        couplings=(DirectionalCoupling(0.3 + 0.1j, 5.0),),
        spontaneous=(DirectionalCoupling(0.002, 5.0),))
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [4.0, 0.0, 0.0]])
    base = rate_map_3d(geo, spec, pts)
    quad = scaled_ensemble(geo, spec, pts, ensemble_size=4,
                           scaling_exponent=0.5)
    np.testing.assert_allclose(quad.decay_rate, base.decay_rate, rtol=1e-13)
    np.testing.assert_allclose(quad.level_shift, base.level_shift, rtol=1e-13)


def test_scaled_ensemble_linear_exponent_suppresses():
    geo = _ball_geometry()
    spec = DirectionalSpectrum3D(
        dispersion=1.5,
        couplings=(DirectionalCoupling(0.3, 5.0),),
        spontaneous=(DirectionalCoupling(0.002, 5.0),))
    pts = np.zeros((1, 3))
    base = rate_map_3d(geo, spec, pts)
    lin = scaled_ensemble(geo, spec, pts, ensemble_size=100,
                          scaling_exponent=1.0)
    # every channel scales by N^(1-2p) = 1/N
    assert lin.decay_rate[0] == pytest.approx(base.decay_rate[0] / 100.0,
                                              rel=1e-10)


def test_rate_map_validation():
    with pytest.raises(ConfigurationError):
        RateMap(points=np.zeros((2, 3)), decay_rate=np.array([1.0, -0.5]),
                level_shift=np.zeros(2))
    with pytest.raises(ConfigurationError):
        RateMap(points=np.zeros((2, 3)), decay_rate=np.zeros(3),
                level_shift=np.zeros(3))
