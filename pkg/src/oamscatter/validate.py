"""Self-check suite: every library invariant as a named pass/fail check.

The report is plain text with no timings or addresses, so two runs of
the same build produce identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import melement as me
from .beams import BeamMode, gouy_phase, lg_mode_cylindrical, transverse_norm
from .quad import QuadratureSpec, gauss_legendre, integrate_2d_after_phi, integrate_3d
from .scan import SweepSpec, dumps_record, fit_power_law, run_matrix_element, run_sweep
from .specfun import (
    HydrogenState,
    _theta_part,
    angular_moment,
    assoc_laguerre,
    circular_moment,
    hydrogen_radial,
    radial_moment,
)

PROFILES = {
    "default": QuadratureSpec(rel_tol=1e-10),
    "tight": QuadratureSpec(rel_tol=1e-13),
}

# wavelength used wherever a beam is specified by its waist
LAMBDA = 50.0


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _states(n_max: int):
    return [HydrogenState(n, l, m) for n in range(1, n_max + 1) for l in range(n) for m in range(-l, l + 1)]


def check_orthonormality(spec, mutate):
    worst = 0.0
    states = _states(4)
    for i, a in enumerate(states):
        for b in states[i:]:
            def f(r, theta, a=a, b=b):
                x = np.cos(theta)
                return (
                    hydrogen_radial(b.n, b.l, r) * hydrogen_radial(a.n, a.l, r) * _theta_part(b.l, b.m, x) * _theta_part(a.l, a.m, x)
                ).astype(complex)

            s = replace(spec, radial_scale=1.0 / (1.0 / a.n + 1.0 / b.n))
            val = integrate_2d_after_phi(f, a.m == b.m, s).value
            worst = max(worst, abs(val - (1.0 if a == b else 0.0)))
    return worst < 1e-10, f"max deviation {worst:.2e} over {len(states)} states"


def check_laguerre_zero(spec, mutate):
    bad = [(p, a) for p in range(11) for a in range(11) if assoc_laguerre(p, a, 0.0) != math.comb(p + a, p)]
    return not bad, f"{121 - len(bad)}/121 exact"


def check_radial_norm(spec, mutate):
    worst = max(abs(radial_moment(n, l, l, 0) - 1.0) for n in range(1, 7) for l in range(n))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def check_phi_selection(spec, mutate):
    vals = [
        angular_moment(li, mi, lf, mf, 2, w)
        for li in range(4)
        for mi in range(-li, li + 1)
        for lf in range(4)
        for mf in range(-lf, lf + 1)
        for w in range(-4, 5)
        if w != mf - mi
    ]
    return all(v == 0.0 for v in vals), f"{len(vals)} off-selection moments exactly zero"


def check_circular_scaling(spec, mutate):
    worst = 0.0
    for n in range(2, 7):
        got = math.log(radial_moment(n + 1, n, n, 2 * n) / radial_moment(n, n - 1, n - 1, 2 * (n - 1)))
        want = math.log(circular_moment(n + 1, 2 * n) / circular_moment(n, 2 * (n - 1)))
        worst = max(worst, abs(got - want))
    return worst < 1e-8, f"max log-ratio deviation {worst:.2e}"


def check_lg_norm(spec, mutate):
    worst = 0.0
    for p in range(4):
        for ell in range(-3, 4):
            mode = BeamMode.from_waist(p, ell, 100.0, LAMBDA)
            for z in (0.0, mode.rayleigh_range / 2, mode.rayleigh_range):
                worst = max(worst, abs(transverse_norm(mode, z) - 1.0))
    return worst < 1e-10, f"max deviation {worst:.2e}"


def check_gouy_parity(spec, mutate):
    z = np.linspace(-50.0, 50.0, 11)
    ok = all(
        np.array_equal(gouy_phase(p, ell, z, 7.0, signed=mutate), gouy_phase(p, -ell, z, 7.0, signed=mutate))
        for p in range(4)
        for ell in range(1, 4)
    )
    return ok, "phase even in ell" if ok else "phase depends on the sign of ell"


def check_mode_conjugation(spec, mutate):
    rho, z, phi = np.meshgrid(np.linspace(0, 30, 7), np.linspace(-40, 40, 5), np.linspace(0, 6, 5), indexing="ij")
    worst = 0.0
    for p in range(3):
        for ell in range(1, 4):
            m_pos = BeamMode.from_waist(p, ell, 10.0, 1.0)
            a = lg_mode_cylindrical(m_pos.flipped(), rho, z, phi, mutate)
            b = lg_mode_cylindrical(m_pos, rho, z, -phi, mutate)
            worst = max(worst, float(np.max(np.abs(a - b))) * m_pos.waist)
    return worst < 1e-14, f"max |u(-ell, phi) - u(ell, -phi)| w0 = {worst:.2e}"


def check_winding_orthogonality(spec, mutate):
    from .specfun import _laguerre_rule

    t, wts = _laguerre_rule(64)
    phi = 2 * math.pi * np.arange(64) / 64
    worst = 0.0
    for ell in range(-3, 4):
        for ell2 in range(-3, 4):
            if ell == ell2:
                continue
            m1 = BeamMode.from_waist(1, ell, 10.0, 1.0)
            m2 = BeamMode.from_waist(1, ell2, 10.0, 1.0)
            rho = m1.waist * np.sqrt(t / 2)
            prod = np.conj(lg_mode_cylindrical(m1, rho[:, None], 0.0, phi[None, :])) * lg_mode_cylindrical(m2, rho[:, None], 0.0, phi[None, :])
            val = np.sum((wts * np.exp(t))[:, None] * prod) * (2 * math.pi / 64) * m1.waist**2 / 4
            worst = max(worst, abs(val))
    return worst < 1e-12, f"max overlap {worst:.2e}"


def check_gaussian_mode_limit(spec, mutate):
    w0 = 1e6
    mode = BeamMode.from_waist(0, 0, w0, 1.0)
    worst = 0.0
    for rho in (0.0, 1.0, 10.0, 100.0):
        for z in (-10.0, 0.0, 10.0):
            u = lg_mode_cylindrical(mode, rho, z, 0.3, mutate)
            dev = abs(u * w0 / math.sqrt(2 / math.pi) - 1.0)
            bound = rho**2 / w0**2 + abs(z) / mode.rayleigh_range + 1e-15
            worst = max(worst, dev / bound)
    return worst < 2.0, f"max deviation / (rho^2/w0^2 + |z|/z_R) = {worst:.3f}"


def check_dipole_oracle(spec, mutate):
    got = me.dipole_series_term(1.0, 1, HydrogenState(1, 0, 0), HydrogenState(2, 1, 0)).real
    want = 128 * math.sqrt(2) / 243
    return abs(got - want) < 1e-8, f"<1s|z|2p0> = {got:.12f}"


def check_gos_limit(spec, mutate):
    got = me.gos(1e-4, HydrogenState(1, 0, 0), HydrogenState(2, 1, 0), spec)
    return abs(got - 0.208095) < 1e-5, f"GOS(q->0) = {got:.8f}"


def check_selection_rule(spec, mutate):
    beam = BeamMode.from_waist(0, 1, 100.0, LAMBDA)
    bad = []
    for mi in (-1, 0, 1):
        for mf in (-1, 0, 1):
            a, b = HydrogenState(2, 1, mi), HydrogenState(2, 1, mf)
            flip = abs(me.twisted_M_forward_flip(beam, a, b, spec).value)
            gen = abs(me.twisted_M_general(me.ScatteringChannel(beam, beam.flipped(), a, b), spec, mutate).value)
            allowed = mf - mi == 2
            if allowed != (flip > 0) or (not allowed and gen != 0.0):
                bad.append((mi, mf))
    return not bad, "9/9 pairs obey M_f - M_i = 2 ell" if not bad else f"violations {bad}"


def check_asymptotic_agreement(spec, mutate):
    a, b = HydrogenState(2, 1, -1), HydrogenState(2, 1, 1)
    diffs = []
    for w0 in (1e2, 1e3, 1e4):
        beam = BeamMode.from_waist(0, 1, w0, LAMBDA)
        quad = me.twisted_M_forward_flip(beam, a, b, spec).value
        lo = me.leading_order_M(beam, a, b).value
        diffs.append(abs(quad - lo) / abs(lo))
    order = -fit_power_law(zip((1e2, 1e3, 1e4), diffs)).slope
    # asymptotic order is exactly 2, approached from below by the a^4/w0^4 term
    return order >= 1.95 and diffs[0] > diffs[1] > diffs[2], f"rel diffs {diffs[0]:.3e} {diffs[1]:.3e} {diffs[2]:.3e}, order {order:.4f}"


def check_waist_scaling(spec, mutate):
    cases = [(1, HydrogenState(2, 1, -1), HydrogenState(2, 1, 1)), (2, HydrogenState(3, 2, -2), HydrogenState(3, 2, 2))]
    grid = (1e3, 1e4, 1e5)
    details, ok = [], True
    for ell, a, b in cases:
        vals = [abs(me.twisted_M_forward_flip(BeamMode.from_waist(0, ell, w, LAMBDA), a, b, spec).value) for w in grid]
        slope = fit_power_law(zip(grid, vals)).slope
        ok &= abs(slope + 2 * (ell + 1)) < 1e-3
        details.append(f"ell={ell} slope {slope:.6f}")
    return ok, ", ".join(details)


def gouy_falsifier_channel() -> me.ScatteringChannel:
    """Forward channel with p_out = p_in + ell and odd atomic parity (L 1 -> 2)."""
    beam = BeamMode.from_waist(0, 1, 20.0, 2.0)
    return me.ScatteringChannel(beam, beam.flipped().with_p(1), HydrogenState(3, 1, -1), HydrogenState(3, 2, 1))


def check_gouy_falsifier(spec, mutate):
    ch = gouy_falsifier_channel()
    ref = abs(me.twisted_M_general(ch, spec).value)
    got = abs(me.twisted_M_general(ch, spec, signed_gouy=mutate).value)
    return ref > 0 and got >= 1e-10 * ref, f"|M| = {got:.3e} (|ell| Gouy: {ref:.3e})"


def check_mirror_symmetry(spec, mutate):
    worst = 0.0
    for ell, n, li, lf in ((1, 2, 1, 1), (2, 3, 2, 2), (1, 3, 1, 2)):
        beam = BeamMode.from_waist(0, ell, 100.0, LAMBDA)
        mi = -ell if li >= ell else 0
        a, b = HydrogenState(n, li, mi), HydrogenState(n, lf, mi + 2 * ell)
        am, bm = HydrogenState(n, li, -mi), HydrogenState(n, lf, -mi - 2 * ell)
        m1 = abs(me.twisted_M_general(me.ScatteringChannel(beam, beam.flipped().with_p(1), a, b), spec, mutate).value)
        m2 = abs(me.twisted_M_general(me.ScatteringChannel(beam.flipped(), beam.with_p(1), am, bm), spec, mutate).value)
        worst = max(worst, abs(m1 - m2) / max(m1, m2))
    return worst < 1e-12, f"max relative asymmetry {worst:.2e}"


def check_angular_restriction(spec, mutate):
    beam = BeamMode.from_waist(0, 2, 100.0, LAMBDA)
    vals = [
        me.twisted_M_forward_flip(beam, HydrogenState(3, 1, mi), HydrogenState(3, 1, mf), spec).value
        for mi in (-1, 0, 1)
        for mf in (-1, 0, 1)
    ]
    return all(v == 0 for v in vals), "ell=2, L_i=L_f=1: all 9 elements exactly zero"


def check_plane_wave_reduction(spec, mutate):
    w0 = 1e4
    beam = BeamMode.from_waist(0, 0, w0, LAMBDA)
    s1 = HydrogenState(1, 0, 0)
    worst = 0.0
    for deg in (0.0, 30.0):
        ch = me.ScatteringChannel(beam, beam, s1, s1, theta_scatter=math.radians(deg))
        tw = me.twisted_M_general(ch, spec, mutate).value * math.pi * w0**2 / 2
        pw = me.plane_wave_M(ch.momentum_transfer, s1, s1, spec).value
        worst = max(worst, abs(tw - pw))
    fwd = me.twisted_M_forward_flip(beam, s1, s1, spec).value * math.pi * w0**2 / 2
    worst = max(worst, abs(fwd - 1.0))
    return worst < 1e-6, f"max |M pi w0^2/2 - M_plane| = {worst:.2e}"


def check_general_matches_forward(spec, mutate):
    tight = replace(spec, rel_tol=min(spec.rel_tol, 1e-12))
    worst = 0.0
    for ell, a, b in ((1, HydrogenState(2, 1, -1), HydrogenState(2, 1, 1)), (0, HydrogenState(1, 0, 0), HydrogenState(1, 0, 0))):
        beam = BeamMode.from_waist(0, ell, 100.0, LAMBDA)
        f = me.twisted_M_forward_flip(beam, a, b, tight).value
        g = me.twisted_M_general(me.ScatteringChannel(beam, beam.flipped(), a, b), tight, mutate).value
        worst = max(worst, abs(f - g) / abs(f))
    return worst < 1e-10, f"max relative difference {worst:.2e}"


def _suite_integrands():
    def norm1s(r, th, ph):
        return np.abs(hydrogen_radial(1, 0, r)) ** 2 / (4 * math.pi) + 0j

    def dip(r, th, ph):
        return hydrogen_radial(1, 0, r) * hydrogen_radial(2, 1, r) * r * np.cos(th) ** 2 * math.sqrt(3) / (4 * math.pi) + 0j

    def vortex(r, th, ph):
        return np.exp(-r) * np.sin(th) ** 2 * np.exp(1j * np.cos(th) * r) + 0j

    return {"norm_1s": norm1s, "dipole_1s_2p": dip, "oscillatory": vortex}


def check_determinism(spec, mutate):
    same = True
    for f in _suite_integrands().values():
        a = integrate_3d(f, replace(spec, radial_scale=0.5, workers=1)).value
        b = integrate_3d(f, replace(spec, radial_scale=0.5, workers=4)).value
        same &= a == b
    return same, "bit-identical across runs and worker counts" if same else "results differ"


def check_monotone_errors(spec, mutate):
    eps = np.finfo(float).eps
    bad = []
    for name, f in _suite_integrands().items():
        res = integrate_3d(f, replace(spec, radial_scale=0.5, min_doublings=2))
        h = res.history
        if not (len(h) >= 2 and h[-1] <= max(h[-2], 1e3 * eps * abs(res.value))):
            bad.append(name)
    return not bad, "final error estimates non-increasing" if not bad else f"non-monotone: {bad}"


def check_polynomial_exactness(spec, mutate):
    worst = 0.0
    for n in (4, 8, 16):
        x, w = gauss_legendre(n)
        for k in range(2 * n):
            exact = 0.0 if k % 2 else 2.0 / (k + 1)
            worst = max(worst, abs(float(np.sum(w * x**k)) - exact))
    return worst < 1e-14, f"max error {worst:.2e}"


def check_scale_robustness(spec, mutate):
    worst = 0.0
    cases = [
        (BeamMode.from_waist(0, 1, 100.0, LAMBDA), HydrogenState(2, 1, -1), HydrogenState(2, 1, 1)),
        (BeamMode.from_waist(0, 0, 1e4, LAMBDA), HydrogenState(1, 0, 0), HydrogenState(1, 0, 0)),
        (BeamMode.from_waist(1, 2, 300.0, LAMBDA), HydrogenState(3, 2, -2), HydrogenState(3, 2, 2)),
    ]
    for beam, a, b in cases:
        base = me.twisted_M_forward_flip(beam, a, b, spec).value
        for f in (0.8, 1.2):
            s = replace(spec, radial_scale=f * a.n / 2)
            worst = max(worst, abs(me.twisted_M_forward_flip(beam, a, b, s).value - base) / abs(base))
    return worst < spec.rel_tol, f"max relative change {worst:.2e}"


def _example_config():
    return {
        "beam": {"p": 0, "ell": 1, "wavelength_au": LAMBDA, "waist_au": 100.0},
        "atom_in": {"n": 2, "l": 1, "m": -1},
        "atom_out": {"n": 2, "l": 1, "m": 1},
        "scattering": {"mode": "forward_flip", "theta_deg": 0.0},
    }


def check_output_determinism(spec, mutate):
    a = dumps_record(run_matrix_element(_example_config(), mutate)[1])
    b = dumps_record(run_matrix_element(_example_config(), mutate)[1])
    return a == b, "identical JSON records" if a == b else "records differ"


def check_echo_completeness(spec, mutate):
    rec = run_matrix_element(_example_config(), mutate)[1]["inputs"]
    cfg = _example_config()
    missing = [
        f"{section}.{key}"
        for section in ("beam", "atom_in", "atom_out", "scattering")
        for key in cfg[section]
        if key not in rec[section]
    ]
    for key in ("rayleigh_range_au", "waist_au", "wavelength_au"):
        if key not in rec["beam_out"]:
            missing.append(f"beam_out.{key}")
    return not missing, "all inputs echoed" if not missing else f"missing {missing}"


def check_sweep_single(spec, mutate):
    cfg = _example_config()
    template = {**cfg, "beam": {k: v for k, v in cfg["beam"].items() if k != "waist_au"}}
    row = run_sweep(SweepSpec("waist", (100.0,), template), signed_gouy=mutate)[0]
    res = run_matrix_element(cfg, mutate)[0]
    same = row["re_M"] == res.value.real and row["im_M"] == res.value.imag
    return same, "one-point sweep equals element" if same else "sweep and element disagree"


CHECKS: list[tuple[str, Callable]] = [
    ("specfun.orthonormality", check_orthonormality),
    ("specfun.laguerre_at_zero", check_laguerre_zero),
    ("specfun.radial_normalization", check_radial_norm),
    ("specfun.phi_selection", check_phi_selection),
    ("specfun.circular_scaling", check_circular_scaling),
    ("beams.transverse_normalization", check_lg_norm),
    ("beams.gouy_parity", check_gouy_parity),
    ("beams.mode_conjugation", check_mode_conjugation),
    ("beams.winding_orthogonality", check_winding_orthogonality),
    ("beams.gaussian_limit", check_gaussian_mode_limit),
    ("melement.dipole_oracle", check_dipole_oracle),
    ("melement.gos_dipole_limit", check_gos_limit),
    ("melement.selection_rule", check_selection_rule),
    ("melement.asymptotic_agreement", check_asymptotic_agreement),
    ("melement.waist_scaling", check_waist_scaling),
    ("melement.gouy_parity_falsifier", check_gouy_falsifier),
    ("melement.mirror_symmetry", check_mirror_symmetry),
    ("melement.angular_restriction", check_angular_restriction),
    ("melement.plane_wave_reduction", check_plane_wave_reduction),
    ("melement.general_matches_forward", check_general_matches_forward),
    ("quad.determinism", check_determinism),
    ("quad.monotone_errors", check_monotone_errors),
    ("quad.polynomial_exactness", check_polynomial_exactness),
    ("quad.scale_robustness", check_scale_robustness),
    ("scan.output_determinism", check_output_determinism),
    ("scan.echo_completeness", check_echo_completeness),
    ("scan.sweep_single_consistency", check_sweep_single),
]


def validate_suite(profile: str = "default", mutate_gouy: bool = False) -> tuple[bool, list[Check]]:
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
    spec = PROFILES[profile]
    results = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn(spec, mutate_gouy)
        except Exception as err:  # a crashing check is a failing check
            passed, detail = False, f"{type(err).__name__}: {err}"
        results.append(Check(name, bool(passed), detail))
    return all(c.passed for c in results), results


def format_report(results: list[Check], profile: str, mutate_gouy: bool) -> str:
    lines = [f"validate profile={profile} mutate_gouy={str(mutate_gouy).lower()}"]
    for c in results:
        lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    failed = [c.name for c in results if not c.passed]
    lines.append("RESULT: all checks passed" if not failed else f"RESULT: {len(failed)} failed: {', '.join(failed)}")
    return "\n".join(lines) + "\n"
