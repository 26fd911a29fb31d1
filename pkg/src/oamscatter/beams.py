"""Paraxial Laguerre-Gaussian modes in cylindrical and spherical coordinates."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PhysicsDomainError
from .specfun import assoc_laguerre


class ParaxialWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BeamMode:
    """LG mode (p, ell) with wavelength and Rayleigh range in bohr."""

    p: int
    ell: int
    wavelength: float
    rayleigh_range: float

    def __post_init__(self):
        if self.p < 0:
            raise PhysicsDomainError(f"radial index p must be >= 0, got {self.p}")
        if not (self.wavelength > 0 and self.rayleigh_range > 0):
            raise PhysicsDomainError("wavelength and rayleigh_range must be positive")
        if not self.paraxial:
            warnings.warn(
                f"wavelength {self.wavelength:g} is not << rayleigh range {self.rayleigh_range:g}",
                ParaxialWarning,
                stacklevel=3,
            )

    @classmethod
    def from_waist(cls, p: int, ell: int, waist: float, wavelength: float) -> "BeamMode":
        return cls(p, ell, wavelength, math.pi * waist**2 / wavelength)

    @property
    def waist(self) -> float:
        return math.sqrt(self.wavelength * self.rayleigh_range / math.pi)

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def paraxial(self) -> bool:
        return self.wavelength < self.rayleigh_range / 10.0

    def flipped(self) -> "BeamMode":
        """Same mode with the winding number reversed."""
        return BeamMode(self.p, -self.ell, self.wavelength, self.rayleigh_range)

    def with_p(self, p: int) -> "BeamMode":
        return BeamMode(p, self.ell, self.wavelength, self.rayleigh_range)


def beam_width(mode: BeamMode, z):
    return mode.waist * np.sqrt(1.0 + (np.asarray(z, dtype=float) / mode.rayleigh_range) ** 2)


def gouy_phase(p: int, ell: int, z, z_r: float, signed: bool = False):
    """(2p + |ell| + 1) arctan(z / z_R).

    ``signed=True`` replaces |ell| by ell; this is a deliberately wrong
    variant kept for falsification checks.
    """
    if z_r <= 0:
        raise PhysicsDomainError("z_R must be positive")
    winding = ell if signed else abs(ell)
    return (2 * p + winding + 1) * np.arctan(np.asarray(z, dtype=float) / z_r)


def lg_normalization(p: int, ell: int) -> float:
    return math.sqrt(2.0 * math.exp(math.lgamma(p + 1) - math.lgamma(p + abs(ell) + 1)) / math.pi)


def lg_mode_scaled(mode: BeamMode, rho, z, phi, signed_gouy: bool = False):
    """u_{p,ell} * w0^(|ell|+1): dimensionless and free of the (1/w0)^|ell| underflow."""
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    phi = np.asarray(phi, dtype=float)
    al = abs(mode.ell)
    z_r = mode.rayleigh_range
    w = beam_width(mode, z)
    shrink = mode.waist / w
    t = 2.0 * rho**2 / w**2
    amp = (
        lg_normalization(mode.p, mode.ell)
        * shrink
        * (rho * math.sqrt(2.0) * shrink) ** al
        * np.exp(-rho**2 / w**2)
        * assoc_laguerre(mode.p, al, t)
    )
    phase = (
        mode.ell * phi
        + mode.wavenumber * rho**2 * z / (2.0 * (z**2 + z_r**2))
        - gouy_phase(mode.p, mode.ell, z, z_r, signed=signed_gouy)
    )
    return amp * np.exp(1j * phase)


def lg_mode_cylindrical(mode: BeamMode, rho, z, phi, signed_gouy: bool = False):
    """u_{p,ell}(rho, z, phi) in bohr^-1."""
    return lg_mode_scaled(mode, rho, z, phi, signed_gouy) / mode.waist ** (abs(mode.ell) + 1)


def lg_mode_spherical(mode: BeamMode, r, theta, phi, signed_gouy: bool = False):
    """u_{p,ell} at spherical coordinates, with rho = r|sin(theta)|, z = r cos(theta)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return lg_mode_cylindrical(mode, r * np.abs(np.sin(theta)), r * np.cos(theta), phi, signed_gouy)


def vector_potential_amplitude(mode: BeamMode, r, theta, phi, signed_gouy: bool = False):
    """Scalar amplitude u e^{ikz}; the polarization vector is handled as an overlap factor."""
    z = np.asarray(r, dtype=float) * np.cos(np.asarray(theta, dtype=float))
    return lg_mode_spherical(mode, r, theta, phi, signed_gouy) * np.exp(1j * mode.wavenumber * z)


def transverse_norm(mode: BeamMode, z: float = 0.0, order: int = 64) -> float:
    """int |u|^2 rho drho dphi at fixed z, evaluated from the mode function.

    The phi integral gives 2 pi. With t = 2 rho^2 / w(z)^2 the radial
    integrand is polynomial times e^{-t}, so Gauss-Laguerre is exact.
    """
    from .specfun import _laguerre_rule

    t, wts = _laguerre_rule(order)
    w = float(beam_width(mode, z))
    rho = w * np.sqrt(t / 2.0)
    dens = np.abs(lg_mode_cylindrical(mode, rho, z, 0.0)) ** 2
    return float(2.0 * math.pi * w**2 / 4.0 * np.sum(wts * np.exp(t) * dens))
