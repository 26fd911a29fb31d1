import csv
import io
import json
import math

import pytest
from hypothesis import given, strategies as st

from configs import flip_config, gaussian_config, template
from oamscatter.errors import ConfigError, PhysicsDomainError
from oamscatter.scan import (
    CSV_COLUMNS,
    SweepSpec,
    dumps_record,
    fit_power_law,
    parse_config,
    read_sweep_csv,
    rows_to_csv,
    run_matrix_element,
    run_sweep,
)


def _without_n(doc):
    for a in ("atom_in", "atom_out"):
        doc[a].pop("n")
    return doc


def test_forbidden_flip_record():
    res, rec = run_matrix_element(flip_config(mi=0, mf=0))
    assert res.value == 0
    assert (rec["result"]["re"], rec["result"]["im"]) == (0.0, 0.0)
    assert rec["result"]["method"] == "forward_quadrature"


def test_gaussian_record():
    res, rec = run_matrix_element(gaussian_config())
    assert rec["result"]["abs"] == pytest.approx(2 / (math.pi * 1e8), rel=1e-6)


def test_physics_violation():
    with pytest.raises(PhysicsDomainError):
        run_matrix_element(flip_config(li=2, lf=2))


def test_schema_errors_name_the_field():
    doc = flip_config()
    doc["beam"]["wavelength_au"] = -1
    with pytest.raises(ConfigError, match=r"beam\.wavelength_au"):
        parse_config(doc)
    doc = flip_config()
    doc["scattering"]["colour"] = "red"
    with pytest.raises(ConfigError, match=r"scattering\.colour"):
        parse_config(doc)
    doc = flip_config()
    del doc["atom_in"]
    with pytest.raises(ConfigError, match="atom_in"):
        parse_config(doc)


def test_beam_needs_exactly_one_size():
    doc = flip_config()
    doc["beam"]["rayleigh_range_au"] = 10.0
    with pytest.raises(ConfigError, match="exactly one"):
        run_matrix_element(doc)


def test_forward_flip_mode_rejects_non_flip():
    doc = flip_config()
    doc["scattering"]["theta_deg"] = 10.0
    with pytest.raises(ConfigError, match="forward_flip"):
        run_matrix_element(doc)


def test_echo_completeness():
    _, rec = run_matrix_element(flip_config())
    inp = rec["inputs"]
    for b in ("beam", "beam_out"):
        assert set(inp[b]) >= {"p", "ell", "wavelength_au", "rayleigh_range_au", "waist_au"}
    assert set(inp["scattering"]) >= {"mode", "theta_deg", "elastic", "polarization_overlap", "q_convention", "signed_gouy"}
    assert set(inp["quadrature"]) == {"rel_tol", "max_doublings"}
    assert inp["beam_out"]["ell"] == -1


def test_record_determinism():
    a = dumps_record(run_matrix_element(flip_config())[1])
    b = dumps_record(run_matrix_element(json.dumps(flip_config()))[1])
    assert a == b


def test_waist_sweep_closed_form_ratios():
    spec = SweepSpec("waist", (100.0, 200.0, 400.0), template(flip_config(), "waist_au"))
    rows = run_sweep(spec)
    cf = [r["closed_form_abs_M"] for r in rows]
    assert cf[1] / cf[0] == pytest.approx(2**-4, rel=1e-14)
    assert cf[2] / cf[1] == pytest.approx(2**-4, rel=1e-14)
    rd = [r["rel_diff"] for r in rows]
    assert rd[0] > rd[1] > rd[2]


def test_sweep_grid_validation():
    t = template(flip_config(), "waist_au")
    with pytest.raises(ConfigError, match="grid"):
        SweepSpec("waist", (), t)
    with pytest.raises(ConfigError, match="monotone"):
        SweepSpec("waist", (100.0, 100.0), t)
    with pytest.raises(ConfigError, match="integer"):
        SweepSpec("ell", (1, 1.5), t)
    with pytest.raises(ConfigError, match="axis"):
        SweepSpec("colour", (1.0, 2.0), t)
    with pytest.raises(ConfigError, match=r"beam\.waist_au"):
        SweepSpec("waist", (1.0, 2.0), flip_config())


def test_sweep_point_failures_are_recorded():
    spec = SweepSpec("N", (1, 2, 3), _without_n(flip_config()))
    rows = run_sweep(spec)
    assert rows[0]["error"].startswith("PhysicsDomainError")
    assert rows[1]["error"] is None and rows[1]["abs_M"] > 0


def test_sweep_single_consistency():
    res, _ = run_matrix_element(flip_config(w0=250.0))
    (row,) = run_sweep(SweepSpec("waist", (250.0,), template(flip_config(), "waist_au")))
    assert complex(row["re_M"], row["im_M"]) == res.value


def test_csv_format_and_parallel_determinism():
    spec = SweepSpec("waist", (300.0, 200.0, 100.0), template(flip_config(), "waist_au"))
    serial = rows_to_csv(run_sweep(spec))
    parallel = rows_to_csv(run_sweep(spec, workers=3))
    assert serial == parallel
    assert "\r" not in serial and serial.endswith("\n")
    rows = list(csv.reader(io.StringIO(serial)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [float(r[1]) for r in rows[1:]] == [300.0, 200.0, 100.0]
    # 17 significant digits round-trip doubles exactly
    ref = run_sweep(spec)[0]["abs_M"]
    assert float(rows[1][4]) == ref


def test_read_sweep_csv_skips_errors():
    spec = SweepSpec("N", (1, 2, 3), _without_n(flip_config()))
    pts = read_sweep_csv(rows_to_csv(run_sweep(spec)))
    assert [p[0] for p in pts] == [2.0, 3.0]
    with pytest.raises(ConfigError):
        read_sweep_csv("a,b\n1,2\n")


def test_fit_examples():
    fit = fit_power_law([(x, x**3) for x in (1.0, 2.0, 5.0, 10.0)])
    assert fit.slope == pytest.approx(3.0, abs=1e-12)
    assert fit.max_residual < 1e-12
    two = fit_power_law([(1.0, 2.0), (3.0, 7.0)])
    assert two.max_residual == 0.0
    assert two.slope == pytest.approx(math.log(3.5) / math.log(3))
    with pytest.raises(ValueError):
        fit_power_law([(1.0, 0.0), (2.0, 1.0)])


@given(st.floats(-6, 6), st.floats(0.1, 10), st.lists(st.floats(0.1, 1e3), min_size=3, max_size=8, unique=True))
def test_fit_recovers_exponents(k, c, xs):
    if max(xs) / min(xs) < 1.5:
        return
    fit = fit_power_law([(x, c * x**k) for x in xs])
    assert fit.slope == pytest.approx(k, abs=1e-8)
    assert fit.max_residual >= 0


def test_waist_sweep_slope():
    spec = SweepSpec("waist", (1e3, 1e4, 1e5), template(flip_config(), "waist_au"))
    fit = fit_power_law([(r["axis_value"], r["abs_M"]) for r in run_sweep(spec)])
    assert fit.slope == pytest.approx(-4.0, abs=1e-3)
