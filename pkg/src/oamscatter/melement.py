"""Photon-hydrogen matrix elements <f| ... |i> for plane-wave and LG photons.

Coordinates: the incoming photon travels along +z. The outgoing photon
direction is +z rotated by the scattering angle about +y, i.e.
k_f = k_f (sin T, 0, cos T).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .beams import BeamMode, lg_mode_scaled, lg_normalization
from .errors import PhysicsDomainError
from .quad import QuadratureSpec, QuadResult, integrate_2d_after_phi, integrate_3d
from .specfun import (
    HydrogenState,
    _theta_part,
    assoc_laguerre,
    angular_moment,
    hydrogen_radial,
    radial_moment,
    spherical_harmonic,
)

# 1/alpha, speed of light in atomic units (CODATA 2018)
SPEED_OF_LIGHT = 137.035999084
UNDERFLOW_DECADES = -120.0


class Method(str, Enum):
    PLANE_WAVE = "plane_wave"
    GENERAL_QUADRATURE = "general_quadrature"
    FORWARD_QUADRATURE = "forward_quadrature"
    LEADING_ORDER = "leading_order"
    CLOSED_FORM = "closed_form"


@dataclass
class AmplitudeResult:
    value: complex
    error_estimate: float
    method: Method
    rescale_power: int = 0
    converged: bool = True
    history: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.error_estimate) and self.error_estimate >= 0):
            raise ValueError("error_estimate must be finite and non-negative")

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


@dataclass(frozen=True)
class ScatteringChannel:
    beam_in: BeamMode
    beam_out: BeamMode
    atom_in: HydrogenState
    atom_out: HydrogenState
    theta_scatter: float = 0.0
    elastic: bool = True
    polarization_overlap: float = 1.0
    q_convention: str = "exact"

    def __post_init__(self):
        if not 0.0 <= self.theta_scatter <= math.pi:
            raise PhysicsDomainError(f"scattering angle must lie in [0, pi], got {self.theta_scatter}")
        if not -1.0 <= self.polarization_overlap <= 1.0:
            raise PhysicsDomainError("polarization overlap must lie in [-1, 1]")
        if self.q_convention not in ("exact", "small_angle"):
            raise PhysicsDomainError(f"unknown q convention {self.q_convention!r}")
        if self.elastic:
            if self.atom_in.energy != self.atom_out.energy:
                raise PhysicsDomainError("elastic channel requires equal atomic energies (N_in == N_out)")
            if self.beam_in.wavelength != self.beam_out.wavelength:
                raise PhysicsDomainError("elastic channel requires equal photon wavelengths")

    @classmethod
    def build(cls, beam_in, atom_in, atom_out, beam_out=None, **kw) -> "ScatteringChannel":
        """Channel with beam_out defaulting to the OAM flip of beam_in.

        For inelastic channels the default outgoing wavelength follows from
        energy conservation, omega_f = omega_i - (E_f - E_i).
        """
        if beam_out is None:
            beam_out = beam_in.flipped()
            if not kw.get("elastic", True):
                k_f = beam_in.wavenumber - (atom_out.energy - atom_in.energy) / SPEED_OF_LIGHT
                if k_f <= 0:
                    raise PhysicsDomainError("photon energy below the transition energy")
                lam = 2 * math.pi / k_f
                beam_out = BeamMode(beam_out.p, beam_out.ell, lam, math.pi * beam_in.waist**2 / lam)
        return cls(beam_in, beam_out, atom_in, atom_out, **kw)

    @property
    def k_in(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.beam_in.wavenumber])

    @property
    def k_out(self) -> np.ndarray:
        k = self.beam_in.wavenumber if self.elastic else self.beam_out.wavenumber
        t = self.theta_scatter
        return np.array([k * math.sin(t), 0.0, k * math.cos(t)])

    @property
    def momentum_transfer(self) -> np.ndarray:
        q = self.k_in - self.k_out
        if self.q_convention == "small_angle":
            norm = np.linalg.norm(q)
            if norm == 0.0:
                return q
            return q / norm * (self.beam_in.wavenumber * math.sin(self.theta_scatter))
        return q

    @property
    def is_flip(self) -> bool:
        return self.beam_out.ell == -self.beam_in.ell


def azimuthal_selection(ell_in: int, ell_out: int, m_in: int, m_out: int) -> int:
    """Net azimuthal winding of the forward integrand; the transition needs 0."""
    return ell_in - ell_out + m_in - m_out


def _pair_scale(a: HydrogenState, b: HydrogenState) -> float:
    # decay length of R_a R_b ~ exp(-r/n_a - r/n_b)
    return 1.0 / (1.0 / a.n + 1.0 / b.n)


def _finish(res: QuadResult, method: Method, scale: float = 1.0, rescale_power: int = 0) -> AmplitudeResult:
    if not res.converged:
        warnings.warn(f"{method.value}: quadrature did not converge (error {res.error:.3e})", RuntimeWarning, stacklevel=3)
    return AmplitudeResult(
        res.value * scale, res.error * abs(scale), method, rescale_power, res.converged, [h * abs(scale) for h in res.history]
    )


def plane_wave_M(q, atom_in: HydrogenState, atom_out: HydrogenState, spec: QuadratureSpec | None = None) -> AmplitudeResult:
    """<f| exp(i q.r) |i> for a momentum-transfer 3-vector q (bohr^-1)."""
    q = np.asarray(q, dtype=float).reshape(3)
    spec = (spec or QuadratureSpec()).with_scale(_pair_scale(atom_in, atom_out))
    fi, ff = atom_in, atom_out

    if q[0] == 0.0 and q[1] == 0.0:
        qz = q[2]
        if qz != 0.0 and spec.radial_rule == "laguerre":
            spec = replace(spec, radial_rule="legendre")

        def integrand(r, theta):
            x = np.cos(theta)
            rad = hydrogen_radial(ff.n, ff.l, r) * hydrogen_radial(fi.n, fi.l, r)
            ang = _theta_part(ff.l, ff.m, x) * _theta_part(fi.l, fi.m, x)
            return rad * ang * np.exp(1j * qz * r * x)

        res = integrate_2d_after_phi(integrand, fi.m == ff.m, spec)
        return _finish(res, Method.PLANE_WAVE)

    if spec.radial_rule == "laguerre":
        spec = replace(spec, radial_rule="legendre")

    def integrand3(r, theta, phi):
        st = np.sin(theta)
        qr = r * (q[0] * st * np.cos(phi) + q[1] * st * np.sin(phi) + q[2] * np.cos(theta))
        psi_f = hydrogen_radial(ff.n, ff.l, r) * spherical_harmonic(ff.l, ff.m, theta, phi)
        psi_i = hydrogen_radial(fi.n, fi.l, r) * spherical_harmonic(fi.l, fi.m, theta, phi)
        return np.conj(psi_f) * np.exp(1j * qr) * psi_i

    return _finish(integrate_3d(integrand3, spec), Method.PLANE_WAVE)


def dipole_series_term(q: float, n: int, atom_in: HydrogenState, atom_out: HydrogenState) -> complex:
    """q^n <f| (r cos theta)^n |i>, one term of the small-q expansion."""
    if q < 0:
        raise ValueError("q must be non-negative")
    if n < 0:
        raise ValueError("n must be non-negative")
    if atom_in.m != atom_out.m:
        return 0j
    # polynomial in r times exp(-r/n_i - r/n_f): exact with enough Laguerre nodes
    order = (atom_in.n + atom_out.n + n) // 2 + 4
    spec = QuadratureSpec(initial_orders=(order, order + n // 2 + atom_in.l + atom_out.l + 2, 1), max_doublings=1)
    spec = spec.with_scale(_pair_scale(atom_in, atom_out))
    fi, ff = atom_in, atom_out

    def integrand(r, theta):
        x = np.cos(theta)
        rad = hydrogen_radial(ff.n, ff.l, r) * hydrogen_radial(fi.n, fi.l, r)
        return rad * _theta_part(ff.l, ff.m, x) * _theta_part(fi.l, fi.m, x) * (r * x) ** n

    res = integrate_2d_after_phi(integrand, True, spec)
    return complex(q**n * res.value.real)


def compton_M(channel: ScatteringChannel, spec: QuadratureSpec | None = None) -> AmplitudeResult:
    """Polarization overlap times <f| exp(i q.r) |i>; beam profiles are ignored."""
    if channel.polarization_overlap == 0.0:
        return AmplitudeResult(0j, 0.0, Method.PLANE_WAVE)
    res = plane_wave_M(channel.momentum_transfer, channel.atom_in, channel.atom_out, spec)
    res.value *= channel.polarization_overlap
    res.error_estimate *= abs(channel.polarization_overlap)
    return res


def _underflow_guard(ell: int, atom: HydrogenState, waist: float) -> bool:
    return abs(ell) * math.log10(atom.characteristic_radius / waist) < UNDERFLOW_DECADES


def _rotated_angles(theta, phi, big_theta: float):
    st, ct = np.sin(theta), np.cos(theta)
    sT, cT = math.sin(big_theta), math.cos(big_theta)
    xr = st * np.cos(phi) * cT - ct * sT
    yr = st * np.sin(phi)
    zr = st * np.cos(phi) * sT + ct * cT
    return np.arccos(np.clip(zr, -1.0, 1.0)), np.arctan2(yr, xr)


def twisted_M_general(
    channel: ScatteringChannel, spec: QuadratureSpec | None = None, signed_gouy: bool = False
) -> AmplitudeResult:
    """Twisted-photon matrix element at arbitrary scattering angle.

    Evaluates int phi_f^* u_out^*(r') e^{i q.r} u_in(r) phi_i d^3r with r'
    the position in the frame of the outgoing beam. At zero angle the
    azimuthal integral is done analytically. ``signed_gouy`` swaps |ell|
    for ell in both Gouy phases (falsification only).
    """
    b_in, b_out = channel.beam_in, channel.beam_out
    a_in, a_out = channel.atom_in, channel.atom_out
    q = channel.momentum_transfer
    big_theta = channel.theta_scatter
    power = abs(b_in.ell) + abs(b_out.ell) + 2
    guard = _underflow_guard(max(abs(b_in.ell), abs(b_out.ell)), max(a_in, a_out, key=lambda s: s.n), b_in.waist)
    # lg_mode_scaled carries w0^(|ell|+1) per beam; bring the outgoing one onto the incoming waist
    w_ratio = (b_in.waist / b_out.waist) ** (abs(b_out.ell) + 1)
    spec = (spec or QuadratureSpec()).with_scale(_pair_scale(a_in, a_out))

    if big_theta == 0.0:
        qz = float(q[2])
        winding = azimuthal_selection(b_in.ell, b_out.ell, a_in.m, a_out.m)
        if qz != 0.0 and spec.radial_rule == "laguerre":
            spec = replace(spec, radial_rule="legendre")

        def integrand(r, theta):
            x = np.cos(theta)
            rho = r * np.abs(np.sin(theta))
            z = r * x
            u_in = lg_mode_scaled(b_in, rho, z, 0.0, signed_gouy)
            u_out = lg_mode_scaled(b_out, rho, z, 0.0, signed_gouy)
            rad = hydrogen_radial(a_out.n, a_out.l, r) * hydrogen_radial(a_in.n, a_in.l, r)
            ang = _theta_part(a_out.l, a_out.m, x) * _theta_part(a_in.l, a_in.m, x)
            return rad * ang * np.conj(u_out) * u_in * np.exp(1j * qz * z) * w_ratio

        res = integrate_2d_after_phi(integrand, winding == 0, spec)
    else:
        if spec.radial_rule == "laguerre":
            spec = replace(spec, radial_rule="legendre")

        def integrand(r, theta, phi):
            st, ct = np.sin(theta), np.cos(theta)
            qr = r * (q[0] * st * np.cos(phi) + q[1] * st * np.sin(phi) + q[2] * ct)
            th_r, ph_r = _rotated_angles(theta, phi, big_theta)
            u_in = lg_mode_scaled(b_in, r * np.abs(st), r * ct, phi, signed_gouy)
            u_out = lg_mode_scaled(b_out, r * np.abs(np.sin(th_r)), r * np.cos(th_r), ph_r, signed_gouy)
            psi_f = hydrogen_radial(a_out.n, a_out.l, r) * spherical_harmonic(a_out.l, a_out.m, theta, phi)
            psi_i = hydrogen_radial(a_in.n, a_in.l, r) * spherical_harmonic(a_in.l, a_in.m, theta, phi)
            return np.conj(psi_f) * np.conj(u_out) * np.exp(1j * qr) * u_in * psi_i * w_ratio

        res = integrate_3d(integrand, spec)

    if guard:
        return _finish(res, Method.GENERAL_QUADRATURE, 1.0, power)
    return _finish(res, Method.GENERAL_QUADRATURE, b_in.waist ** (-power))


def _check_flip(beam: BeamMode, atom_in: HydrogenState, atom_out: HydrogenState) -> None:
    if atom_in.n != atom_out.n:
        raise PhysicsDomainError("forward flip requires N_in == N_out")
    if atom_in.n < abs(beam.ell) + 1:
        raise PhysicsDomainError(f"forward flip requires N >= |ell| + 1 = {abs(beam.ell) + 1}, got N = {atom_in.n}")


def _flip_allowed(beam: BeamMode, atom_in: HydrogenState, atom_out: HydrogenState) -> bool:
    return (
        azimuthal_selection(beam.ell, -beam.ell, atom_in.m, atom_out.m) == 0
        and atom_in.l + atom_out.l >= 2 * abs(beam.ell)
    )


def twisted_M_forward_flip(
    beam: BeamMode, atom_in: HydrogenState, atom_out: HydrogenState, spec: QuadratureSpec | None = None
) -> AmplitudeResult:
    """Elastic forward element for ell -> -ell with equal p and N.

    Gouy and curvature phases cancel and q = 0, leaving the squared LG
    envelope. Forbidden channels return an exact zero without quadrature.
    """
    _check_flip(beam, atom_in, atom_out)
    al = abs(beam.ell)
    power = 2 * (al + 1)
    guard = _underflow_guard(beam.ell, atom_in, beam.waist)
    if not _flip_allowed(beam, atom_in, atom_out):
        return AmplitudeResult(0j, 0.0, Method.FORWARD_QUADRATURE, power if guard else 0)

    spec = (spec or QuadratureSpec()).with_scale(atom_in.n / 2.0)
    w0, z_r = beam.waist, beam.rayleigh_range
    c2 = lg_normalization(beam.p, beam.ell) ** 2

    def integrand(r, theta):
        x = np.cos(theta)
        z = r * x
        shrink2 = 1.0 / (1.0 + (z / z_r) ** 2)  # (w0 / w(z))^2
        t = 2.0 * (r * np.sin(theta)) ** 2 * shrink2 / w0**2
        env = c2 * shrink2 * (2.0 * (r * np.sin(theta)) ** 2 * shrink2) ** al * np.exp(-t)
        env = env * assoc_laguerre(beam.p, al, t) ** 2
        rad = hydrogen_radial(atom_out.n, atom_out.l, r) * hydrogen_radial(atom_in.n, atom_in.l, r)
        ang = _theta_part(atom_out.l, atom_out.m, x) * _theta_part(atom_in.l, atom_in.m, x)
        return (rad * ang * env).astype(complex)

    res = integrate_2d_after_phi(integrand, True, spec)
    if guard:
        return _finish(res, Method.FORWARD_QUADRATURE, 1.0, power)
    return _finish(res, Method.FORWARD_QUADRATURE, w0 ** (-power))


def flip_prefactor(p: int, ell: int) -> float:
    """(2 p! / pi (p+|ell|)!) 2^|ell| binom(p+|ell|, p)^2."""
    al = abs(ell)
    return 2.0 * math.factorial(p) / (math.pi * math.factorial(p + al)) * 2**al * math.comb(p + al, p) ** 2


def leading_order_M(beam: BeamMode, atom_in: HydrogenState, atom_out: HydrogenState) -> AmplitudeResult:
    """Lowest order in a/w0: prefactor * <r^2|ell|> / w0^(2|ell|+2) * <sin^2|ell| e^{2 i ell phi}>.

    The angular factor is taken between the channel's actual M states.
    """
    _check_flip(beam, atom_in, atom_out)
    al = abs(beam.ell)
    power = 2 * (al + 1)
    guard = _underflow_guard(beam.ell, atom_in, beam.waist)
    if not _flip_allowed(beam, atom_in, atom_out):
        return AmplitudeResult(0j, 0.0, Method.LEADING_ORDER, power if guard else 0)
    n = atom_in.n
    scaled = (
        flip_prefactor(beam.p, beam.ell)
        * radial_moment(n, atom_in.l, atom_out.l, 2 * al)
        * angular_moment(atom_in.l, atom_in.m, atom_out.l, atom_out.m, 2 * al, 2 * beam.ell)
    )
    if guard:
        return AmplitudeResult(complex(scaled), 0.0, Method.LEADING_ORDER, power)
    return AmplitudeResult(complex(scaled / beam.waist**power), 0.0, Method.LEADING_ORDER)


def closed_form_flip_M(beam: BeamMode, n: int, convention: str = "m_zero") -> AmplitudeResult:
    """Small-atom flip element for L_i = L_f = |ell|.

    ``convention="m_zero"`` factorizes <rho^2|ell|> with M = 0 angular
    functions, the usual small-atom factorization. ``"transition"`` uses the
    states actually connected by the flip, M_i = -ell and M_f = +ell, and
    therefore coincides with :func:`leading_order_M` for that channel.
    """
    al = abs(beam.ell)
    if n < al + 1:
        raise PhysicsDomainError(f"closed form requires N >= |ell| + 1, got N={n}, ell={beam.ell}")
    if convention == "m_zero":
        ang = angular_moment(al, 0, al, 0, 2 * al, 0)
    elif convention == "transition":
        ang = angular_moment(al, -beam.ell, al, beam.ell, 2 * al, 2 * beam.ell)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    power = 2 * (al + 1)
    scaled = flip_prefactor(beam.p, beam.ell) * radial_moment(n, al, al, 2 * al) * ang
    if _underflow_guard(beam.ell, HydrogenState(n, al, 0), beam.waist):
        return AmplitudeResult(complex(scaled), 0.0, Method.CLOSED_FORM, power)
    return AmplitudeResult(complex(scaled / beam.waist**power), 0.0, Method.CLOSED_FORM)


def gos(q: float, atom_in: HydrogenState, atom_out: HydrogenState, spec: QuadratureSpec | None = None) -> float:
    """Generalized oscillator strength (E_f - E_i) |M|^2 / q^2 with q along z."""
    if not q > 0:
        raise ValueError("generalized oscillator strength needs q > 0")
    de = atom_out.energy - atom_in.energy
    if de == 0.0:
        return 0.0
    m = plane_wave_M([0.0, 0.0, q], atom_in, atom_out, spec)
    return de * abs(m.value) ** 2 / q**2
