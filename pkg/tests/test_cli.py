import json
import math

import pytest

from configs import falsifier_config, flip_config, gaussian_config, template
from oamscatter.cli import main


@pytest.fixture
def write(tmp_path):
    def _write(name, doc):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)

    return _write


def test_element(write, tmp_path, capsys):
    out = tmp_path / "out.json"
    assert main(["element", write("c.json", gaussian_config()), "-o", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["result"]["abs"] == pytest.approx(2 / (math.pi * 1e8), rel=1e-6)
    assert main(["element", write("c.json", gaussian_config())]) == 0
    assert json.loads(capsys.readouterr().out) == rec


def test_element_exit_codes(write, capsys):
    assert main(["element", write("bad.json", flip_config(li=2, lf=2))]) == 3
    doc = flip_config()
    doc["atom_in"]["n"] = "two"
    assert main(["element", write("bad.json", doc)]) == 2
    assert "atom_in.n" in capsys.readouterr().err
    assert main(["element", write("bad.json", "{not json")]) == 2
    assert main(["element", "/nonexistent/config.json"]) == 2


def test_sweep_and_fit(write, tmp_path):
    cfg = write("t.json", template(flip_config(), "waist_au"))
    csv_path = tmp_path / "s.csv"
    assert main(["sweep", cfg, "--axis", "waist", "--grid", "1e3,1e4,1e5", "--workers", "2", "-o", str(csv_path)]) == 0
    fit_path = tmp_path / "fit.json"
    assert main(["fit", str(csv_path), "-o", str(fit_path)]) == 0
    assert json.loads(fit_path.read_text())["slope"] == pytest.approx(-4.0, abs=1e-3)


def test_sweep_empty_grid(write):
    cfg = write("t.json", template(flip_config(), "waist_au"))
    assert main(["sweep", cfg, "--axis", "waist", "--grid", ""]) == 2
    assert main(["sweep", cfg, "--axis", "waist", "--grid", "1,x"]) == 2


def test_mutate_gouy_flag(write, capsys):
    cfg = write("f.json", falsifier_config())
    main(["element", cfg])
    good = json.loads(capsys.readouterr().out)
    main(["element", cfg, "--mutate-gouy"])
    bad = json.loads(capsys.readouterr().out)
    assert bad["inputs"]["scattering"]["signed_gouy"] is True
    assert bad["result"]["abs"] < 1e-10 * good["result"]["abs"]


def test_validate(tmp_path):
    out = tmp_path / "report.txt"
    assert main(["validate", "-o", str(out)]) == 0
    text = out.read_text()
    assert "FAIL" not in text
    assert main(["validate", "--mutate-gouy", "-o", str(out)]) == 1
    assert "FAIL" in out.read_text() and "gouy" in out.read_text().lower()
