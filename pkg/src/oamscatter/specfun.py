"""Special functions and hydrogen bound states in atomic units.

Spherical harmonics follow the Condon-Shortley phase convention. Radial
functions are positive near the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_laguerre, roots_legendre

from .errors import PhysicsDomainError


@dataclass(frozen=True)
class HydrogenState:
    """Bound hydrogen state |N, L, M>."""

    n: int
    l: int
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise PhysicsDomainError(f"N must be >= 1, got {self.n}")
        if not 0 <= self.l <= self.n - 1:
            raise PhysicsDomainError(f"L must satisfy 0 <= L <= N-1, got N={self.n}, L={self.l}")
        if abs(self.m) > self.l:
            raise PhysicsDomainError(f"|M| must be <= L, got L={self.l}, M={self.m}")

    @property
    def energy(self) -> float:
        return -0.5 / self.n**2

    @property
    def characteristic_radius(self) -> float:
        """Target size a ~ N^2 bohr."""
        return float(self.n**2)


def assoc_laguerre(p: int, alpha: int, x):
    """Generalized Laguerre polynomial L_p^alpha(x) by upward recurrence in p."""
    if p < 0 or alpha < 0:
        raise ValueError("p and alpha must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def _assoc_legendre(l: int, m: int, x):
    """P_l^m(x) for 0 <= m <= l, including the Condon-Shortley factor (-1)^m."""
    x = np.asarray(x, dtype=float)
    somx2 = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.ones_like(x)
    fact = 1.0
    for _ in range(m):
        pmm = -pmm * fact * somx2
        fact += 2.0
    if l == m:
        return pmm
    pmmp1 = x * (2 * m + 1) * pmm
    if l == m + 1:
        return pmmp1
    for ll in range(m + 2, l + 1):
        pmm, pmmp1 = pmmp1, ((2 * ll - 1) * x * pmmp1 - (ll + m - 1) * pmm) / (ll - m)
    return pmmp1


def _theta_part(l: int, m: int, x):
    """Normalized polar factor of Y_lm as a function of x = cos(theta)."""
    am = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - am + 1) - math.lgamma(l + am + 1)))
    val = norm * _assoc_legendre(l, am, x)
    if m < 0 and am % 2:
        val = -val
    return val


def spherical_harmonic(l: int, m: int, theta, phi):
    """Y_lm(theta, phi), Condon-Shortley convention, unit norm on the sphere."""
    if abs(m) > l or l < 0:
        raise PhysicsDomainError(f"invalid (L, M) = ({l}, {m})")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return _theta_part(l, m, np.cos(theta)) * np.exp(1j * m * phi)


def _radial_norm(n: int, l: int) -> float:
    return math.sqrt((2.0 / n) ** 3 * math.exp(math.lgamma(n - l) - math.lgamma(n + l + 1)) / (2 * n))


def hydrogen_radial(n: int, l: int, r):
    """R_nl(r) in bohr^-3/2, normalized so that int R^2 r^2 dr = 1."""
    if n < 1 or not 0 <= l < n:
        raise PhysicsDomainError(f"invalid (N, L) = ({n}, {l})")
    r = np.asarray(r, dtype=float)
    rho = 2.0 * r / n
    val = _radial_norm(n, l) * np.exp(-r / n) * rho**l * assoc_laguerre(n - l - 1, 2 * l + 1, rho)
    return val if np.ndim(val) else float(val)


def hydrogen_wavefunction(state: HydrogenState, r, theta, phi):
    return hydrogen_radial(state.n, state.l, r) * spherical_harmonic(state.l, state.m, theta, phi)


@lru_cache(maxsize=None)
def _laguerre_rule(n: int):
    return roots_laguerre(n)


@lru_cache(maxsize=None)
def _legendre_rule(n: int):
    return roots_legendre(n)


def radial_moment(n: int, l_i: int, l_f: int, power: int) -> float:
    """int_0^inf R_{n,l_f} r^power R_{n,l_i} r^2 dr, exact by Gauss-Laguerre.

    With r = (n/2) s the integrand is a polynomial in s times e^{-s}.
    """
    if power < 0:
        raise ValueError("power must be non-negative")
    for l in (l_i, l_f):
        if not 0 <= l < n:
            raise PhysicsDomainError(f"invalid (N, L) = ({n}, {l})")
    degree = (n - 1 - l_i) + (n - 1 - l_f) + l_i + l_f + power + 2
    order = degree // 2 + 2
    s, w = _laguerre_rule(order)
    scale = n / 2.0
    r = scale * s
    # e^{-2r/n} = e^{-s} is carried by the weights.
    fi = _radial_norm(n, l_i) * (2 * r / n) ** l_i * assoc_laguerre(n - l_i - 1, 2 * l_i + 1, 2 * r / n)
    ff = _radial_norm(n, l_f) * (2 * r / n) ** l_f * assoc_laguerre(n - l_f - 1, 2 * l_f + 1, 2 * r / n)
    return float(scale * np.sum(w * ff * fi * r ** (power + 2)))


def angular_moment(l_i: int, m_i: int, l_f: int, m_f: int, sin_power: int, winding: int) -> float:
    """int Y_{l_f m_f}^* sin^k(theta) e^{i w phi} Y_{l_i m_i} dOmega.

    The phi integral is done analytically and is zero unless
    winding == m_f - m_i; the remaining integral over cos(theta) uses
    Gauss-Legendre, which is exact when the integrand is a polynomial.
    """
    if abs(m_i) > l_i or abs(m_f) > l_f:
        raise PhysicsDomainError("invalid (L, M) pair in angular_moment")
    if winding != m_f - m_i:
        return 0.0
    order = l_i + l_f + sin_power + 2
    if (abs(m_i) + abs(m_f) + sin_power) % 2:
        # odd powers of sin(theta) are not polynomial in cos(theta)
        order = max(order, 200)
    x, w = _legendre_rule(order)
    integrand = _theta_part(l_f, m_f, x) * (1.0 - x * x) ** (sin_power / 2) * _theta_part(l_i, m_i, x)
    return float(2.0 * math.pi * np.sum(w * integrand))


def circular_moment(n: int, power: int) -> float:
    """Closed form <r^power> for the circular state L = N-1."""
    return (n / 2.0) ** power * math.exp(math.lgamma(2 * n + 1 + power) - math.lgamma(2 * n + 1))
