import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from oamscatter.beams import (
    BeamMode,
    ParaxialWarning,
    beam_width,
    gouy_phase,
    lg_mode_cylindrical,
    lg_mode_spherical,
    transverse_norm,
    vector_potential_amplitude,
)
from oamscatter.errors import PhysicsDomainError

pytestmark = pytest.mark.usefixtures("no_paraxial_warning")


def unit_mode(p=0, ell=0):
    # w0 = 1, z_R = 1
    return BeamMode(p, ell, math.pi, 1.0)


def test_beam_width_examples():
    m = unit_mode()
    assert m.waist == pytest.approx(1.0)
    assert beam_width(m, 0.0) == pytest.approx(1.0)
    assert beam_width(m, 1.0) == pytest.approx(math.sqrt(2))
    assert beam_width(m, 2.0) == pytest.approx(math.sqrt(5))


def test_paraxial_guard_warns():
    with warnings.catch_warnings():
        warnings.simplefilter("error", ParaxialWarning)
        BeamMode(0, 1, 1.0, 100.0)
        with pytest.raises(ParaxialWarning):
            BeamMode(0, 1, 10.0, 100.0)


def test_mode_rejects_bad_fields():
    with pytest.raises(PhysicsDomainError):
        BeamMode(-1, 0, 1.0, 100.0)
    with pytest.raises(PhysicsDomainError):
        BeamMode(0, 0, 0.0, 100.0)
    with pytest.raises(PhysicsDomainError):
        BeamMode(0, 0, 1.0, -1.0)


def test_from_waist_round_trip():
    m = BeamMode.from_waist(1, 2, 300.0, 50.0)
    assert m.waist == pytest.approx(300.0, rel=1e-15)
    assert m.rayleigh_range == pytest.approx(math.pi * 300.0**2 / 50.0)
    assert m.flipped().ell == -2 and m.with_p(3).p == 3


def test_gouy_examples():
    assert gouy_phase(0, 0, 5.0, 5.0) == pytest.approx(math.pi / 4)
    assert gouy_phase(3, -2, 0.0, 7.0) == 0.0
    assert gouy_phase(1, -2, 1e30, 1.0) == pytest.approx(5 * math.pi / 2)


@given(st.integers(0, 5), st.integers(-6, 6), st.floats(-1e4, 1e4), st.floats(1e-2, 1e4))
def test_gouy_parity(p, ell, z, z_r):
    assert gouy_phase(p, ell, z, z_r) == gouy_phase(p, -ell, z, z_r)


def test_signed_gouy_breaks_parity():
    assert gouy_phase(0, 1, 1.0, 1.0, signed=True) != gouy_phase(0, -1, 1.0, 1.0, signed=True)


def test_lg_examples():
    w0 = 7.0
    m = BeamMode.from_waist(0, 0, w0, 0.1)
    assert lg_mode_cylindrical(m, 0.0, 0.0, 1.3) == pytest.approx(math.sqrt(2 / math.pi) / w0)
    m1 = BeamMode.from_waist(0, 1, w0, 0.1)
    assert lg_mode_cylindrical(m1, 0.0, 3.0, 0.4) == 0.0
    m23 = BeamMode.from_waist(2, 3, w0, 0.1)
    val, _ = integrate.quad(lambda r: abs(lg_mode_cylindrical(m23, r, 0.0, 0.0)) ** 2 * r, 0, np.inf)
    assert 2 * math.pi * val == pytest.approx(1.0, abs=1e-10)


def _lg_oracle(p, ell, w0, z_r, k, rho, z, phi):
    # direct evaluation of the textbook LG formula with scipy's Laguerre polynomials
    w = w0 * math.sqrt(1 + (z / z_r) ** 2)
    al = abs(ell)
    c = math.sqrt(2 * math.factorial(p) / (math.pi * math.factorial(p + al)))
    amp = c / w * (rho * math.sqrt(2) / w) ** al * math.exp(-(rho**2) / w**2) * special.eval_genlaguerre(p, al, 2 * rho**2 / w**2)
    phase = ell * phi + k * rho**2 * z / (2 * (z**2 + z_r**2)) - (2 * p + al + 1) * math.atan(z / z_r)
    return amp * cmath.exp(1j * phase)


@pytest.mark.parametrize("p,ell", [(0, 0), (1, -1), (2, 3), (3, 2)])
def test_lg_matches_direct_formula(p, ell):
    m = BeamMode.from_waist(p, ell, 5.0, 0.5)
    for rho, z, phi in [(0.3, 0.0, 0.1), (4.0, 20.0, 2.0), (9.0, -150.0, -1.0)]:
        got = lg_mode_cylindrical(m, rho, z, phi)
        want = _lg_oracle(p, ell, m.waist, m.rayleigh_range, m.wavenumber, rho, z, phi)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("p", range(4))
@pytest.mark.parametrize("ell", range(-3, 4))
def test_transverse_normalization(p, ell):
    m = BeamMode.from_waist(p, ell, 3.0, 0.2)
    for z in (0.0, m.rayleigh_range / 2, m.rayleigh_range):
        assert abs(transverse_norm(m, z) - 1.0) < 1e-10


def test_transverse_norm_against_scipy():
    m = BeamMode.from_waist(3, -3, 2.0, 0.1)
    z = m.rayleigh_range / 2
    val, _ = integrate.quad(lambda r: abs(lg_mode_cylindrical(m, r, z, 0.0)) ** 2 * r, 0, np.inf, epsabs=1e-14)
    assert 2 * math.pi * val == pytest.approx(transverse_norm(m, z), abs=1e-10)


@settings(max_examples=50)
@given(
    st.integers(0, 3), st.integers(0, 4), st.floats(0, 20), st.floats(-500, 500), st.floats(-math.pi, math.pi)
)
def test_mode_conjugation(p, ell, rho, z, phi):
    plus = BeamMode.from_waist(p, ell, 5.0, 0.5)
    minus = plus.flipped()
    assert abs(lg_mode_cylindrical(minus, rho, z, phi) - lg_mode_cylindrical(plus, rho, z, -phi)) <= 1e-14


@pytest.mark.parametrize("ell,ell2", [(1, -1), (0, 2), (2, 3)])
def test_winding_orthogonality(ell, ell2):
    a = BeamMode.from_waist(1, ell, 2.0, 0.1)
    b = BeamMode.from_waist(1, ell2, 2.0, 0.1)

    def f(phi, rho):
        return (np.conj(lg_mode_cylindrical(a, rho, 0.3, phi)) * lg_mode_cylindrical(b, rho, 0.3, phi)).real * rho

    val, _ = integrate.dblquad(f, 0, 20, 0, 2 * math.pi, epsabs=1e-12)
    assert abs(val) < 1e-10


def test_spherical_examples():
    m = BeamMode.from_waist(1, 2, 4.0, 0.2)
    assert lg_mode_spherical(m, 3.0, 0.0, 0.5) == 0.0
    # theta = pi/2 is the focal plane
    assert lg_mode_spherical(m, 2.5, math.pi / 2, 0.7) == pytest.approx(lg_mode_cylindrical(m, 2.5, 0.0, 0.7), rel=1e-14)
    # |sin theta| keeps the profile well defined below the focal plane
    r, th = 3.0, 2.4
    want = lg_mode_cylindrical(m, r * abs(math.sin(th)), r * math.cos(th), 0.2)
    assert lg_mode_spherical(m, r, th, 0.2) == pytest.approx(want, rel=1e-14)


def test_vector_potential_examples():
    w0 = 4.0
    m = BeamMode.from_waist(0, 0, w0, 0.5)
    assert vector_potential_amplitude(m, 0.0, 0.0, 0.0) == pytest.approx(math.sqrt(2 / math.pi) / w0)
    z, k, z_r = 30.0, m.wavenumber, m.rayleigh_range
    fwd = vector_potential_amplitude(m, z, 0.0, 0.0)
    bwd = vector_potential_amplitude(m, z, math.pi, 0.0)
    want = 2 * k * z - 2 * math.atan(z / z_r)
    diff = cmath.phase(fwd / bwd)
    assert math.remainder(diff - want, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)


def test_gaussian_limit():
    w0 = 1e6
    m = BeamMode.from_waist(0, 0, w0, 1.0)
    for rho, z in [(10.0, 0.0), (1e3, 5.0), (0.0, 1e4)]:
        ratio = lg_mode_cylindrical(m, rho, z, 0.0) / (math.sqrt(2 / math.pi) / w0)
        bound = 2 * (rho / w0) ** 2 + 2 * abs(z) / m.rayleigh_range
        assert abs(ratio - 1) <= bound + 1e-15
