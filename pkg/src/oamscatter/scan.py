"""Run configurations, single-channel evaluation, sweeps and power-law fits."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .beams import BeamMode
from .errors import ConfigError, PhysicsDomainError
from .melement import (
    AmplitudeResult,
    ScatteringChannel,
    compton_M,
    leading_order_M,
    twisted_M_forward_flip,
    twisted_M_general,
)
from .quad import QuadratureSpec
from .specfun import HydrogenState

AXES = ("waist", "rayleigh_range", "wavelength", "ell", "p", "N")
CSV_COLUMNS = (
    "axis_name",
    "axis_value",
    "re_M",
    "im_M",
    "abs_M",
    "err_est",
    "closed_form_abs_M",
    "rel_diff",
    "rescale_power",
    "error",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BeamConfig(_Strict):
    p: int = Field(ge=0)
    ell: int
    wavelength_au: float = Field(gt=0)
    rayleigh_range_au: Optional[float] = Field(default=None, gt=0)
    waist_au: Optional[float] = Field(default=None, gt=0)


class AtomConfig(_Strict):
    n: int
    l: int
    m: int


class ScatteringConfig(_Strict):
    mode: Literal["plane", "general", "forward_flip"]
    theta_deg: float = Field(default=0.0, ge=0.0, le=180.0)
    elastic: bool = True
    polarization_overlap: float = Field(default=1.0, ge=-1.0, le=1.0)
    q_convention: Literal["exact", "small_angle"] = "exact"


class QuadratureConfig(_Strict):
    rel_tol: float = Field(default=1e-8, gt=0)
    max_doublings: int = Field(default=12, ge=1)


class RunConfig(_Strict):
    beam: BeamConfig
    beam_out: Optional[BeamConfig] = None
    atom_in: AtomConfig
    atom_out: AtomConfig
    scattering: ScatteringConfig
    quadrature: QuadratureConfig = QuadratureConfig()


def _format_validation(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_config(doc: dict | str) -> RunConfig:
    """Validate a JSON config (dict or text); schema problems raise ConfigError."""
    try:
        if isinstance(doc, str):
            return RunConfig.model_validate_json(doc)
        return RunConfig.model_validate(doc)
    except ValidationError as err:
        raise ConfigError(_format_validation(err)) from None


def _beam(cfg: BeamConfig, where: str) -> BeamMode:
    if (cfg.rayleigh_range_au is None) == (cfg.waist_au is None):
        raise ConfigError(f"{where}: give exactly one of rayleigh_range_au, waist_au")
    if cfg.waist_au is not None:
        return BeamMode.from_waist(cfg.p, cfg.ell, cfg.waist_au, cfg.wavelength_au)
    return BeamMode(cfg.p, cfg.ell, cfg.wavelength_au, cfg.rayleigh_range_au)


def build_channel(cfg: RunConfig) -> ScatteringChannel:
    beam_in = _beam(cfg.beam, "beam")
    beam_out = _beam(cfg.beam_out, "beam_out") if cfg.beam_out is not None else None
    atom_in = HydrogenState(cfg.atom_in.n, cfg.atom_in.l, cfg.atom_in.m)
    atom_out = HydrogenState(cfg.atom_out.n, cfg.atom_out.l, cfg.atom_out.m)
    sc = cfg.scattering
    return ScatteringChannel.build(
        beam_in,
        atom_in,
        atom_out,
        beam_out,
        theta_scatter=math.radians(sc.theta_deg),
        elastic=sc.elastic,
        polarization_overlap=sc.polarization_overlap,
        q_convention=sc.q_convention,
    )


def _quad_spec(cfg: RunConfig) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=cfg.quadrature.rel_tol, max_doublings=cfg.quadrature.max_doublings)


def _is_forward_flip(ch: ScatteringChannel) -> bool:
    return (
        ch.theta_scatter == 0.0
        and ch.elastic
        and ch.is_flip
        and ch.beam_out.p == ch.beam_in.p
        and ch.beam_out.rayleigh_range == ch.beam_in.rayleigh_range
        and ch.atom_in.n == ch.atom_out.n
    )


def evaluate(cfg: RunConfig, signed_gouy: bool = False) -> tuple[ScatteringChannel, AmplitudeResult]:
    """Dispatch a validated config to the matching matrix element."""
    ch = build_channel(cfg)
    spec = _quad_spec(cfg)
    mode = cfg.scattering.mode
    if mode == "plane":
        return ch, compton_M(ch, spec)
    if mode == "forward_flip":
        if not _is_forward_flip(ch):
            raise ConfigError(
                "scattering.mode: forward_flip needs theta_deg = 0, elastic, beam_out = flip of beam and equal N"
            )
        res = twisted_M_forward_flip(ch.beam_in, ch.atom_in, ch.atom_out, spec)
    else:
        res = twisted_M_general(ch, spec, signed_gouy=signed_gouy)
    res.value *= ch.polarization_overlap
    res.error_estimate *= abs(ch.polarization_overlap)
    return ch, res


def _beam_echo(b: BeamMode) -> dict:
    return {
        "p": b.p,
        "ell": b.ell,
        "wavelength_au": b.wavelength,
        "rayleigh_range_au": b.rayleigh_range,
        "waist_au": b.waist,
        "wavenumber_au": b.wavenumber,
    }


def _atom_echo(a: HydrogenState) -> dict:
    return {"n": a.n, "l": a.l, "m": a.m, "energy_hartree": a.energy}


def echo_inputs(cfg: RunConfig, ch: ScatteringChannel, signed_gouy: bool = False) -> dict:
    sc = cfg.scattering
    return {
        "beam": _beam_echo(ch.beam_in),
        "beam_out": _beam_echo(ch.beam_out),
        "atom_in": _atom_echo(ch.atom_in),
        "atom_out": _atom_echo(ch.atom_out),
        "scattering": {
            "mode": sc.mode,
            "theta_deg": sc.theta_deg,
            "elastic": sc.elastic,
            "polarization_overlap": sc.polarization_overlap,
            "q_convention": sc.q_convention,
            "momentum_transfer_au": [float(x) for x in ch.momentum_transfer],
            "signed_gouy": signed_gouy,
        },
        "quadrature": {"rel_tol": cfg.quadrature.rel_tol, "max_doublings": cfg.quadrature.max_doublings},
    }


def result_record(res: AmplitudeResult) -> dict:
    return {
        "re": res.value.real,
        "im": res.value.imag,
        "abs": abs(res.value),
        "error": res.error_estimate,
        "method": res.method.value,
        "rescale_power": res.rescale_power,
        "converged": res.converged,
    }


def run_matrix_element(doc: dict | str, signed_gouy: bool = False) -> tuple[AmplitudeResult, dict]:
    """Evaluate one channel; returns the result and its JSON-ready record."""
    cfg = parse_config(doc)
    ch, res = evaluate(cfg, signed_gouy)
    return res, {"inputs": echo_inputs(cfg, ch, signed_gouy), "result": result_record(res)}


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


# --- sweeps ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple[float, ...]
    template: dict

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis: must be one of {', '.join(AXES)}")
        if not self.grid:
            raise ConfigError("grid: needs at least one value")
        diffs = np.diff(np.asarray(self.grid, dtype=float))
        if len(self.grid) >= 2 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("grid: values must be strictly monotone")
        if self.axis in ("ell", "p", "N") and any(float(v) != int(v) for v in self.grid):
            raise ConfigError(f"grid: axis {self.axis} takes integer values")
        present = _axis_present(self.template, self.axis)
        if present:
            raise ConfigError(f"{present}: swept axis must be absent from the template")


def _axis_present(template: dict, axis: str) -> str | None:
    beams = [k for k in ("beam", "beam_out") if isinstance(template.get(k), dict)]
    key = {"waist": "waist_au", "rayleigh_range": "rayleigh_range_au", "wavelength": "wavelength_au", "ell": "ell", "p": "p"}
    if axis in key:
        # waist and rayleigh range are alternative spellings of one quantity
        names = ("waist_au", "rayleigh_range_au") if axis in ("waist", "rayleigh_range") else (key[axis],)
        for b in beams:
            for name in names:
                if name in template[b]:
                    return f"{b}.{name}"
        return None
    for a in ("atom_in", "atom_out"):
        if isinstance(template.get(a), dict) and "n" in template[a]:
            return f"{a}.n"
    return None


def _apply_axis(template: dict, axis: str, value) -> dict:
    doc = json.loads(json.dumps(template))
    beams = [k for k in ("beam", "beam_out") if isinstance(doc.get(k), dict)]
    if axis == "N":
        for a in ("atom_in", "atom_out"):
            doc.setdefault(a, {})["n"] = int(value)
        return doc
    key = {"waist": "waist_au", "rayleigh_range": "rayleigh_range_au", "wavelength": "wavelength_au", "ell": "ell", "p": "p"}[axis]
    for b in beams:
        doc[b][key] = int(value) if axis in ("ell", "p") else float(value)
        if axis == "ell" and b == "beam_out":
            doc[b][key] = -int(value)
    return doc


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def sweep_point(spec: SweepSpec, value, signed_gouy: bool = False) -> dict:
    row = dict.fromkeys(CSV_COLUMNS)
    row["axis_name"] = spec.axis
    row["axis_value"] = int(value) if spec.axis in ("ell", "p", "N") else float(value)
    try:
        cfg = parse_config(_apply_axis(spec.template, spec.axis, value))
        ch, res = evaluate(cfg, signed_gouy)
    except (ConfigError, PhysicsDomainError) as err:
        row["error"] = f"{type(err).__name__}: {err}"
        return row
    row.update(re_M=res.value.real, im_M=res.value.imag, abs_M=abs(res.value), err_est=res.error_estimate)
    row["rescale_power"] = res.rescale_power
    if _is_forward_flip(ch) and cfg.scattering.mode != "plane":
        lo = leading_order_M(ch.beam_in, ch.atom_in, ch.atom_out)
        if lo.value != 0 and lo.rescale_power == res.rescale_power:
            lo_val = lo.value * ch.polarization_overlap
            row["closed_form_abs_M"] = abs(lo_val)
            row["rel_diff"] = abs(res.value - lo_val) / abs(lo_val)
    return row


def run_sweep(spec: SweepSpec, workers: int = 1, signed_gouy: bool = False) -> list[dict]:
    """One row per grid point, in grid order regardless of worker count."""
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda v: sweep_point(spec, v, signed_gouy), spec.grid))
    return [sweep_point(spec, v, signed_gouy) for v in spec.grid]


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([row[c] if isinstance(row[c], str) else _fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


# --- fits -----------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    max_residual: float


def fit_power_law(points) -> FitResult:
    """Least-squares line through (log x, log y); the slope is the exponent."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if any(not (x > 0 and y > 0) for x, y in pts):
        raise ValueError("power-law fit needs strictly positive x and y")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    dx, dy = lx - lx.mean(), ly - ly.mean()
    slope = float(np.dot(dx, dy) / np.dot(dx, dx))
    intercept = float(ly.mean() - slope * lx.mean())
    if len(pts) == 2:
        # two points are interpolated exactly
        return FitResult(slope, intercept, 0.0)
    resid = dy - slope * dx
    return FitResult(slope, intercept, float(np.max(np.abs(resid))))


def read_sweep_csv(text: str) -> list[tuple[float, float]]:
    """(axis_value, abs_M) pairs from a sweep CSV, skipping failed rows."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"axis_value", "abs_M"} <= set(reader.fieldnames):
        raise ConfigError("csv: expected columns axis_value and abs_M")
    pts = []
    for row in reader:
        if row.get("error"):
            continue
        pts.append((float(row["axis_value"]), float(row["abs_M"])))
    return pts
