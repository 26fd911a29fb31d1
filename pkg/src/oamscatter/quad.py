"""Deterministic nested quadrature over (r, theta, phi).

The polar variable is x = cos(theta) on [-1, 1] with Gauss-Legendre nodes,
the azimuth uses the periodic trapezoid rule, and the radial variable uses
either scaled Gauss-Laguerre (integrands with pure exponential decay) or
Gauss-Legendre mapped onto [0, R_cut]. All orders are doubled until
successive estimates agree. Radial nodes are processed in fixed-size
chunks whose partial sums are added in index order, so results do not
depend on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_laguerre, roots_legendre

_EPS = np.finfo(float).eps
_CHUNK = 16


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_floor: float = 1e-30
    max_doublings: int = 12
    min_doublings: int = 1
    radial_scale: float | None = None
    initial_orders: tuple[int, int, int] = (32, 32, 16)
    radial_rule: str = "laguerre"
    radial_cutoff: float | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_doublings < 1 or self.min_doublings < 1:
            raise ValueError("max_doublings and min_doublings must be >= 1")
        if self.radial_scale is not None and not self.radial_scale > 0:
            raise ValueError("radial_scale must be positive")
        if self.radial_rule not in ("laguerre", "legendre"):
            raise ValueError(f"unknown radial rule {self.radial_rule!r}")

    def with_scale(self, scale: float) -> "QuadratureSpec":
        """Fill in the radial scale if the caller did not pin one."""
        return self if self.radial_scale is not None else replace(self, radial_scale=scale)


@dataclass
class QuadResult:
    value: complex
    error: float
    converged: bool
    history: list[float] = field(default_factory=list)
    orders: tuple[int, ...] = ()

    def __iter__(self):
        # allows ``value, err = integrate_3d(...)``
        yield self.value
        yield self.error


@lru_cache(maxsize=None)
def _laguerre(n: int):
    s, w = roots_laguerre(n)
    with np.errstate(divide="ignore"):
        # w e^{s} without overflow; underflowed weights stay zero
        ws = np.exp(np.log(w) + s)
    return s, ws


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    return roots_legendre(n)


def _radial_rule(spec: QuadratureSpec, n: int):
    scale = spec.radial_scale if spec.radial_scale is not None else 1.0
    if spec.radial_rule == "laguerre":
        s, ws = _laguerre(n)
        r = scale * s
        return r, scale * ws * r**2
    cutoff = spec.radial_cutoff if spec.radial_cutoff is not None else 40.0 * scale
    x, w = gauss_legendre(n)
    r = 0.5 * cutoff * (x + 1.0)
    return r, 0.5 * cutoff * w * r**2


def _polar_rule(n: int):
    x, w = gauss_legendre(n)
    return np.arccos(x), w


def _azimuth_rule(n: int):
    return 2.0 * math.pi * np.arange(n) / n, np.full(n, 2.0 * math.pi / n)


def _evaluate(integrand, spec, orders):
    r, wr = _radial_rule(spec, orders[0])
    th, wt = _polar_rule(orders[1])
    if len(orders) == 3:
        ph, wp = _azimuth_rule(orders[2])
        ang_w = wt[:, None] * wp[None, :]
    else:
        ph = None
        ang_w = wt

    def chunk(start):
        sl = slice(start, start + _CHUNK)
        rr, ww = r[sl], wr[sl]
        if ph is None:
            f = integrand(rr[:, None], th[None, :])
            prod = ww[:, None] * ang_w[None, :] * f
        else:
            f = integrand(rr[:, None, None], th[None, :, None], ph[None, None, :])
            prod = ww[:, None, None] * ang_w[None, :, :] * f
        return complex(np.sum(prod)), float(np.sum(np.abs(prod)))

    starts = range(0, len(r), _CHUNK)
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(s) for s in starts]
    total = 0j
    mag = 0.0
    for v, a in parts:
        total += v
        mag += a
    return total, mag


def _refine(integrand, spec: QuadratureSpec, orders: tuple[int, ...]) -> QuadResult:
    value, mag = _evaluate(integrand, spec, orders)
    history: list[float] = []
    converged = False
    for level in range(1, spec.max_doublings + 1):
        orders = tuple(2 * o for o in orders)
        new, mag = _evaluate(integrand, spec, orders)
        err = abs(new - value)
        history.append(err)
        value = new
        tol = max(spec.rel_tol * abs(value), spec.abs_floor, 1e3 * _EPS * mag)
        if level >= spec.min_doublings and err <= tol:
            converged = True
            break
    if abs(value) < spec.abs_floor:
        value = 0j
    return QuadResult(complex(value), float(history[-1]), converged, history, orders)


def integrate_3d(integrand: Callable, spec: QuadratureSpec = QuadratureSpec()) -> QuadResult:
    """Integrate f(r, theta, phi) r^2 sin(theta) dr dtheta dphi over all space.

    ``integrand`` receives broadcastable arrays and must not include the
    volume element.
    """
    return _refine(integrand, spec, tuple(spec.initial_orders))


def integrate_2d_after_phi(integrand: Callable, winding_ok: bool, spec: QuadratureSpec = QuadratureSpec()) -> QuadResult:
    """2 pi * int f(r, theta) r^2 sin(theta) dr dtheta.

    For integrands whose azimuthal dependence has already been reduced to
    a Kronecker delta; when the delta vanishes nothing is evaluated.
    """
    if not winding_ok:
        return QuadResult(0j, 0.0, True, [], ())
    res = _refine(integrand, spec, tuple(spec.initial_orders[:2]))
    res.value *= 2.0 * math.pi
    res.error *= 2.0 * math.pi
    res.history = [2.0 * math.pi * e for e in res.history]
    return res
