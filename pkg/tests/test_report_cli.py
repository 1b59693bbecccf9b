import json

import pytest

from sphere_jacobi.errors import ConfigError
from sphere_jacobi.report_cli import (
    DEFAULT_SEED,
    PLUMBING,
    SCHEMA_VERSION,
    RunConfig,
    VerificationReport,
    build_config,
    list_catalog,
    main,
    parse_config_file,
    run_suite,
    write_atomic,
)
from sphere_jacobi.tolerances import PRESETS, ToleranceProfile


def statuses(report, prefix=""):
    return {r.check_id: r.status for r in report.records if r.check_id.startswith(prefix)}


def test_harmonic_identity_analytic_all_pass():
    report = run_suite(RunConfig("harmonic", object="identity-s3", method="analytic"))
    assert report.all_passed and report.summary["failed"] == 0 and report.summary["skipped"] == 0
    eigen = [r for r in report.records if "/eigen/" in r.check_id]
    assert len(eigen) == 4 and all(r.value <= 1e-8 and r.threshold == 1e-8 for r in eigen)


def test_constant_map_is_skipped_degenerate():
    report = run_suite(RunConfig("harmonic", object="constant-s3-s2"))
    eigen = [r for r in report.records if "/eigen/" in r.check_id]
    assert all(r.status == "skipped" and "DegenerateInputError" in r.note for r in eigen)
    rank = next(r for r in report.records if r.check_id.endswith("/rank"))
    assert rank.value == 0 and rank.status == "pass"
    assert report.all_passed


def test_hopf_analytic_reports_capability_per_check():
    report = run_suite(RunConfig("harmonic", object="hopf", method="analytic"))
    skipped = [r for r in report.records if r.status == "skipped"]
    assert skipped and all("CapabilityError" in r.note for r in skipped)
    assert any(r.status == "pass" for r in report.records)


def test_minimal_clifford_all_pass():
    report = run_suite(RunConfig("minimal", object="clifford-torus"))
    assert report.all_passed
    by_id = {r.check_id: r for r in report.records}
    assert by_id["minimal/clifford-torus/rank"].value == 4
    assert by_id["minimal/clifford-torus/lambda1"].value == pytest.approx(-4.0, rel=0.02)


def test_summary_counts_and_anchors():
    report = run_suite(RunConfig("minimal", object="small-circle-0.6"))
    s = report.summary
    assert s["total"] == len(report.records) == s["passed"] + s["failed"] + s["skipped"]
    assert all(r.anchor for r in report.records)


def test_report_round_trip_and_determinism(tmp_path):
    cfg = RunConfig("variation", object="identity-s3", seed=7)
    a, b = run_suite(cfg), run_suite(cfg)
    da, db = a.to_dict(), b.to_dict()
    da.pop("timing"), db.pop("timing")
    assert da == db
    assert a.environment["seed"] == 7 and a.schema_version == SCHEMA_VERSION
    back = VerificationReport.from_dict(json.loads(a.to_json()))
    assert back.to_dict() == a.to_dict()


def test_list_catalog_entries():
    rows = {r["name"]: r for r in list_catalog()}
    assert rows["hopf"]["setting"] == "harmonic" and rows["hopf"]["m"] == 3 and rows["hopf"]["target"] == "S^2"
    assert rows["levicivita-ts5"]["setting"] == "yang-mills" and rows["levicivita-ts5"]["m"] == 5
    assert rows["levicivita-ts5"]["rank"] == 5
    assert rows["clifford-torus"]["m"] == 2 and rows["clifford-torus"]["n"] == 3
    assert [r["name"] for r in list_catalog()] == list(rows)


@pytest.mark.parametrize("kwargs", [
    {"suite": "nonsense"},
    {"suite": "harmonic", "object": "no-such-object"},
    {"suite": "harmonic", "object": "clifford-torus"},
    {"suite": "bochner", "object": "hopf"},
    {"suite": "harmonic", "method": "spectral"},
    {"suite": "harmonic", "level": 0},
    {"suite": "harmonic", "profile": "unknown"},
    {"suite": "harmonic", "seed": -1},
])
def test_invalid_configs_are_rejected(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# sample\nobject = identity-s4\nlevel = 1\nmethod = analytic\nseed = 0x10\n")
    values = parse_config_file(path)
    assert values == {"object": "identity-s4", "level": 1, "method": "analytic", "seed": 16}
    cfg = build_config("harmonic", values, {"level": 2, "object": None})
    assert cfg.level == 2 and cfg.object == "identity-s4" and cfg.seed == 16


@pytest.mark.parametrize("text", ["bogus = 1\n", "no equals sign\n", "level = two\n"])
def test_bad_config_files(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        parse_config_file(path)


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "nested" / "report.json"
    assert main(["harmonic", "--object", "identity-s3", "--method", "analytic", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["environment"]["seed"] == DEFAULT_SEED
    assert data["summary"]["failed"] == 0
    assert main(["harmonic", "--object", "missing"]) == 2
    assert main(["harmonic", "--level", "notanint"]) == 2
    assert main(["harmonic", "--config", str(tmp_path / "absent.cfg")]) == 2
    assert main(["list"]) == 0
    assert "clifford-torus" in capsys.readouterr().out


def test_cli_reports_failures(monkeypatch, tmp_path):
    monkeypatch.setitem(PRESETS, "impossible", ToleranceProfile(analytic_tol=0.0, fd_tol=0.0))
    assert main(["harmonic", "--object", "hopf", "--profile", "impossible"]) == 1


def test_write_atomic_replaces_file(tmp_path):
    target = tmp_path / "r.json"
    target.write_text("old")
    write_atomic(target, "new")
    assert target.read_text() == "new"
    assert [p.name for p in tmp_path.iterdir()] == ["r.json"]


def test_plumbing_marker_for_missing_capability():
    report = run_suite(RunConfig("minimal", object="wavy-circle-0.3", method="analytic"))
    assert [r.anchor for r in report.records] == [PLUMBING]
    assert report.records[0].status == "skipped"
