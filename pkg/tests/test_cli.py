import json

import pytest

from grwcert.certify import RunConfig, run_certify
from grwcert.cli import main
from grwcert.grw import catalog_get, catalog_names
from grwcert.report import render_json, render_text
from grwcert.schema import SpecFileError, chart_input_to_dict, load_chart_input

FRW_DUST_SPEC = {
    "schema": 1,
    "name": "frw-dust-file",
    "dimension": 4,
    "signature": "lorentzian",
    "coordinates": ["t", "x", "y", "z"],
    "parameters": {},
    "metric": {"1,1": "-1", "2,2": "t^(4/3)", "3,3": "t^(4/3)",
               "4,4": "t^(4/3)"},
    "velocity_field": ["-1", "0", "0", "0"],
    "domain": {"ranges": {"t": [1, 2], "x": [-1, 1], "y": [-1, 1],
                          "z": [-1, 1]}, "exclusions": []},
    "basepoint": [1, 0, 0, 0],
}


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "frw-dust.json"
    path.write_text(json.dumps(FRW_DUST_SPEC))
    return path


class TestSchema:
    def test_valid_spec_loads(self):
        spec = load_chart_input(dict(FRW_DUST_SPEC))
        assert spec.dimension == 4
        assert spec.velocity_field == ["-1", "0", "0", "0"]

    def test_missing_dimension_names_field(self):
        bad = {k: v for k, v in FRW_DUST_SPEC.items() if k != "dimension"}
        with pytest.raises(SpecFileError) as err:
            load_chart_input(bad)
        assert err.value.path == "dimension"

    def test_missing_range_names_coordinate(self):
        bad = json.loads(json.dumps(FRW_DUST_SPEC))
        del bad["domain"]["ranges"]["z"]
        with pytest.raises(SpecFileError) as err:
            load_chart_input(bad)
        assert err.value.path == "domain.ranges.z"

    def test_lower_triangle_metric_key(self):
        bad = json.loads(json.dumps(FRW_DUST_SPEC))
        bad["metric"]["2,1"] = "0"
        with pytest.raises(SpecFileError) as err:
            load_chart_input(bad)
        assert "metric.2,1" == err.value.path

    def test_bad_schema_version(self):
        bad = dict(FRW_DUST_SPEC, schema=99)
        with pytest.raises(SpecFileError) as err:
            load_chart_input(bad)
        assert err.value.path == "schema"

    def test_velocity_length_checked(self):
        bad = dict(FRW_DUST_SPEC, velocity_field=["-1", "0"])
        with pytest.raises(SpecFileError):
            load_chart_input(bad)

    def test_round_trip_through_dict(self):
        spec = load_chart_input(dict(FRW_DUST_SPEC))
        again = load_chart_input(chart_input_to_dict(spec))
        assert again.metric == {k: str(v) for k, v in
                                FRW_DUST_SPEC["metric"].items()}


class TestRunCertify:
    def test_spec_file_pass(self, spec_file):
        report = run_certify(spec_file, RunConfig(points=6, seed=1))
        assert report.verdict == "pass"
        assert report.find("u-closed").ok
        assert report.find("div-weyl").ok
        # no declared warp, so the converse suite is skipped
        assert report.find("fiber-einstein").status == "skipped"

    def test_missing_velocity_marks_not_evaluable(self, tmp_path):
        spec = {k: v for k, v in FRW_DUST_SPEC.items()
                if k != "velocity_field"}
        report = run_certify(spec, RunConfig(points=4, seed=1))
        rec = report.find("u-closed")
        assert rec.status == "skipped"
        assert "not evaluable" in rec.skipped_reason
        # eigen route still runs and the electric check still evaluates
        assert report.find("fluid-decompose").ok
        assert report.find("weyl-electric").max_residual is not None

    def test_check_selection(self, spec_file):
        report = run_certify(spec_file,
                             RunConfig(points=4, checks=("sanity", "ladder")))
        assert report.find("bianchi-first").status == "pass"
        assert report.find("u-closed").status == "skipped"
        assert report.find("u-closed").skipped_reason == "not selected"
        assert report.find("gamma-comoving").status == "pass"

    def test_unknown_group_rejected(self, spec_file):
        with pytest.raises(ValueError):
            run_certify(spec_file, RunConfig(checks=("nonsense",)))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            RunConfig(points=0)
        with pytest.raises(ValueError):
            RunConfig(hypothesis_tol=0.0)
        with pytest.raises(ValueError):
            RunConfig(workers=0)


class TestReports:
    def test_json_is_stable(self, spec_file):
        config = RunConfig(points=5, seed=2)
        one = render_json(run_certify(spec_file, config))
        two = render_json(run_certify(spec_file, config))
        assert one == two

    def test_json_identical_across_worker_counts(self, spec_file):
        serial = render_json(run_certify(
            spec_file, RunConfig(points=10, seed=3, workers=1)))
        threaded = render_json(run_certify(
            spec_file, RunConfig(points=10, seed=3, workers=8)))
        assert serial == threaded

    def test_text_contains_divweyl_anchor(self, spec_file):
        text = render_text(run_certify(spec_file, RunConfig(points=4)))
        assert "∇_m C_{jkl}^m = 0" in text

    def test_skipped_reason_in_json(self, spec_file):
        report = run_certify(spec_file, RunConfig(points=4))
        payload = json.loads(render_json(report))
        skipped = [c for c in payload["checks"] if c["status"] == "skipped"]
        assert skipped and all(c["skipped_reason"] for c in skipped)

    def test_every_catalog_report_serializes(self):
        for name in catalog_names():
            report = run_certify(catalog_get(name).chart,
                                 RunConfig(points=3, seed=4))
            json.loads(render_json(report))

    def test_emit_report_both_formats(self, spec_file, tmp_path):
        from grwcert.report import emit_report
        report = run_certify(spec_file, RunConfig(points=4))
        json_path = emit_report(report, "json", tmp_path / "r.json")
        text_path = emit_report(report, "text", tmp_path / "r.txt")
        assert json.loads(json_path.read_text())["metric"] == "frw-dust-file"
        assert "verdict" in text_path.read_text()
        with pytest.raises(ValueError):
            emit_report(report, "yaml", tmp_path / "r.yaml")


class TestCliCommands:
    def test_certify_exit_zero_and_json(self, spec_file, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["certify", str(spec_file), "--points", "5",
                     "--json", str(out)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "verdict PASS" in stdout
        payload = json.loads(out.read_text())
        assert payload["verdict"] == "pass"
        assert payload["schema"] == 1

    def test_certify_failure_exit_one(self, tmp_path):
        spec = json.loads(json.dumps(FRW_DUST_SPEC))
        spec["name"] = "broken"
        spec["metric"]["2,2"] = "t^(4/3)+0.2*x^2"   # spoils the fluid form
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(spec))
        assert main(["certify", str(path), "--points", "4",
                     "--quiet"]) == 1

    def test_schema_error_exit_two(self, tmp_path, capsys):
        path = tmp_path / "nodim.json"
        spec = {k: v for k, v in FRW_DUST_SPEC.items() if k != "dimension"}
        path.write_text(json.dumps(spec))
        assert main(["certify", str(path)]) == 2
        assert "dimension" in capsys.readouterr().err

    def test_malformed_json_exit_two(self, tmp_path):
        path = tmp_path / "garbage.json"
        path.write_text("{not json")
        assert main(["certify", str(path)]) == 2

    def test_catalog_list(self, capsys):
        assert main(["catalog", "list"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out == catalog_names()

    def test_catalog_run_positive(self, capsys):
        code = main(["catalog", "run", "frw-dust", "--points", "5",
                     "--quiet"])
        assert code == 0
        assert "match expectations" in capsys.readouterr().out

    def test_catalog_run_negative_control_matches(self, capsys):
        code = main(["catalog", "run", "kasner-negative", "--points", "4",
                     "--quiet"])
        assert code == 0

    def test_catalog_unknown_name(self, capsys):
        assert main(["catalog", "run", "schwarzschild"]) == 2

    def test_ladder_subcommand(self, spec_file, capsys):
        assert main(["ladder", str(spec_file), "--points", "4",
                     "--quiet"]) == 0

    def test_tol_flag_applies(self, spec_file):
        # an absurdly tight tolerance flips the verdict
        assert main(["certify", str(spec_file), "--points", "4",
                     "--tol", "1e-30", "--quiet"]) == 1
