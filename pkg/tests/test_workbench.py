import copy
import json

import numpy as np
import pytest

from gqm.cli import main, preset_names, preset_text
from gqm.config import load_config, validate_config
from gqm.exceptions import ConfigError
from gqm.report import AnalysisReport, emit_report, read_report, run_analysis

QUBIT_Z = {
    "model": {"kind": "qubit", "initial_state": {"type": "qubit", "label": "+"}},
    "histories": {"times": [1.0], "families": [{"basis": "z"}]},
    "analysis": {"criterion": "medium", "epsilon": 1e-8},
}


def preset(name):
    return json.loads(preset_text(name))


def strip_timing(text):
    doc = json.loads(text)
    doc.pop("timing")
    return json.dumps(doc)


def test_minimal_qubit_config():
    cfg = load_config(json.dumps(QUBIT_Z))
    assert cfg.kind == "qubit" and cfg.formulation == "operator"


def test_epsilon_zero_is_a_violation():
    doc = copy.deepcopy(QUBIT_Z)
    doc["analysis"]["epsilon"] = 0
    with pytest.raises(ConfigError) as err:
        load_config(json.dumps(doc))
    assert ("analysis.epsilon", "must be > 0") in err.value.violations
    assert "analysis.epsilon must be > 0" in str(err.value).replace(": ", " ")


def test_parse_error_has_position():
    with pytest.raises(ConfigError) as err:
        load_config('{"model": {"kind": "qubit",}')
    assert "line 1, column" in str(err.value)


def test_unknown_kind_and_multiple_violations():
    doc = {"model": {"kind": "photon"}, "analysis": {"criterion": "strong", "epsilon": -1}}
    with pytest.raises(ConfigError) as err:
        validate_config(doc)
    paths = {p for p, _ in err.value.violations}
    assert {"model.kind", "analysis.criterion", "analysis.epsilon"} <= paths


def test_dimension_mismatch():
    doc = copy.deepcopy(QUBIT_Z)
    doc["model"]["initial_state"] = {"type": "ket", "ket": [1, 0, 0]}
    with pytest.raises(ConfigError) as err:
        validate_config(doc)
    assert err.value.violations[0][0] == "model.initial_state.ket"


def test_lattice_balanced_hop_config():
    cfg = load_config(preset_text("lattice-hop-2"))
    report = run_analysis(cfg)
    np.testing.assert_allclose(report.entries, np.diag([0.5, 0.5]), atol=1e-15)


def test_run_xz_not_decoherent():
    report = run_analysis(load_config(preset_text("qubit-xz")))
    assert not report.decoherent
    assert report.verdict["max_violation"] == pytest.approx(0.25, abs=1e-12)
    assert report.probabilities is None
    assert report.axioms["pass"]


def test_run_xz_final_z():
    doc = preset("qubit-xz")
    doc["histories"]["coarse_graining"] = {"keep_slots": [1]}
    report = run_analysis(validate_config(doc))
    assert report.decoherent
    assert report.labels == [(0,), (1,)]
    assert [p for _, p in report.probabilities] == pytest.approx([1.0, 0.0], abs=1e-12)
    assert report.n_fine_histories == 4


def test_run_trivial():
    report = run_analysis(load_config(preset_text("qubit-trivial")))
    np.testing.assert_allclose(report.entries, [[1.0]], atol=1e-14)
    assert [p for _, p in report.probabilities] == pytest.approx([1.0])


def test_spin_pair_config():
    doc = {
        "model": {
            "kind": "spin-pair",
            "hamiltonian": {"type": "heisenberg", "coupling": 0.7, "field": 0.2},
            "initial_state": {"type": "basis", "index": 1},
        },
        "histories": {"times": [0.5, 1.3], "families": [{"basis": "z", "spin": 0}, {"basis": "bell"}]},
        "analysis": {"criterion": "weak", "epsilon": 1e-8},
    }
    report = run_analysis(validate_config(doc))
    assert report.axioms["pass"]
    assert len(report.labels) == 8


def test_lattice_operator_formulation_matches_pathsum():
    doc = preset("lattice-ring-4")
    a = run_analysis(validate_config(doc))
    doc["analysis"]["formulation"] = "operator"
    b = run_analysis(validate_config(doc))
    np.testing.assert_allclose(a.entries, b.entries, atol=1e-12)


def test_predicate_partition_config():
    doc = preset("lattice-ring-4")
    doc["paths"]["partition"] = {"kind": "hop-count"}
    report = run_analysis(validate_config(doc))
    assert report.axioms["pass"]
    doc["analysis"]["formulation"] = "operator"
    with pytest.raises(ConfigError):
        validate_config(doc)


def test_json_roundtrip(tmp_path):
    report = run_analysis(load_config(preset_text("qubit-xz")))
    path = tmp_path / "r.json"
    text = emit_report(report, "json", path)
    again = read_report(path)
    assert again.to_json() == text
    assert again.labels == report.labels
    np.testing.assert_array_equal(again.entries, report.entries)
    assert again.to_dict() == report.to_dict()


def test_csv_rows_and_footer():
    report = run_analysis(load_config(json.dumps(QUBIT_Z)))
    lines = report.to_csv().splitlines()
    assert lines[0] == "row,col,re,im"
    entry_rows = lines[1:lines.index("")]
    assert len(entry_rows) == 4
    assert "p,0,0.5" in lines and "p,1,0.5" in lines
    assert "decoherent,true" in lines


def test_emit_unwritable(tmp_path):
    report = run_analysis(load_config(json.dumps(QUBIT_Z)))
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report(report, "json", blocker / "sub" / "r.json")


def test_report_from_dict_shapes():
    report = run_analysis(load_config(preset_text("lattice-ring-4")))
    back = AnalysisReport.from_dict(json.loads(report.to_json()))
    assert back.entries.shape == (4, 4)


@pytest.mark.parametrize("name", ["qubit-xz", "qubit-trivial", "lattice-hop-2", "lattice-ring-4"])
def test_presets_pass_axioms_and_match_fixtures(name):
    doc = preset(name)
    report = run_analysis(validate_config(doc))
    assert report.axioms["pass"]
    expect = doc["expect"]
    assert report.decoherent == expect["decoherent"]
    if "max_violation" in expect:
        assert report.verdict["max_violation"] == pytest.approx(expect["max_violation"], abs=1e-12)
    if "probabilities" in expect:
        got = [[list(lab), p] for lab, p in report.probabilities]
        for (lab, p), (elab, ep) in zip(got, expect["probabilities"]):
            assert [str(x) for x in lab] == [str(x) for x in elab]
            assert p == pytest.approx(ep, abs=1e-12)


def test_presets_listed():
    assert preset_names() == ["lattice-hop-2", "lattice-ring-4", "qubit-trivial", "qubit-xz"]


# CLI ---------------------------------------------------------------------

def test_cli_exit_codes(tmp_path, capsys):
    assert main(["analyze", "qubit-xz", "--out", str(tmp_path / "a.json")]) == 2
    assert main(["analyze", "qubit-trivial", "--out", str(tmp_path / "b.json")]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["analyze", str(bad)]) == 1
    assert main(["analyze", "qubit-xz", "--epsilon", "0"]) == 1
    with pytest.raises(SystemExit) as err:
        main(["analyze"])
    assert err.value.code == 1


def test_cli_overrides(tmp_path):
    out = tmp_path / "r.json"
    assert main(["analyze", "qubit-xz", "--criterion", "lp", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"]["criterion"] == "linear-positivity"
    assert main(["analyze", "qubit-xz", "--epsilon", "0.3", "--out", str(out)]) == 0


def test_cli_stdout_csv(capsys):
    assert main(["analyze", "lattice-hop-2", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("row,col,re,im\n")
    assert "p,0,0.5" in out


def test_cli_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GQM_OUTPUT_DIR", str(tmp_path))
    assert main(["analyze", "lattice-hop-2"]) == 0
    assert (tmp_path / "lattice-hop-2-report.json").exists()


def test_cli_validate(tmp_path, capsys):
    assert main(["validate", "qubit-xz"]) == 0
    doc = dict(QUBIT_Z, analysis={"epsilon": 0})
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    assert main(["validate", str(p)]) == 1
    assert "analysis.epsilon: must be > 0" in capsys.readouterr().err


def test_cli_list_and_oracle(capsys):
    assert main(["list-models"]) == 0
    assert "lattice-ring-4" in capsys.readouterr().out
    assert main(["oracle", "lattice-ring-4"]) == 0
    out = capsys.readouterr().out
    assert float(out.split("=")[1]) <= 1e-9
    assert main(["oracle", "qubit-xz"]) == 1


def test_cli_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["analyze", "lattice-ring-4", "--out", str(a)])
    main(["analyze", "lattice-ring-4", "--out", str(b)])
    assert strip_timing(a.read_text()) == strip_timing(b.read_text())
