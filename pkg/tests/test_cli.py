import json
import math

import pytest
import yaml

from pettykit import ConfigError, UnknownName, __version__
from pettykit.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, _parser, list_suites, main
from pettykit.config import CONFIG_SCHEMA, load_config, parse_config
from pettykit.suites import SUITES, get_suite, resolve_body, run_suite


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data) if not isinstance(data, str) else data)
    return str(path)


def test_ten_suites_listed(capsys):
    assert main(["list"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert len(SUITES) == 10
    for name in SUITES:
        assert name in out
    assert list_suites().count("tolerances:") == 10


def test_each_suite_has_one_runner():
    runners = [s.runner for s in SUITES.values()]
    assert len(set(runners)) == len(runners)
    with pytest.raises(UnknownName):
        get_suite("nope")


def test_help_mentions_seed_and_tolerance(capsys):
    with pytest.raises(SystemExit):
        main(["run", "--help"])
    out = capsys.readouterr().out
    assert "--seed" in out and "--tol" in out and "--samples-scale" in out


def test_petty_classical_square_report(tmp_path):
    cfg = write(tmp_path, "c.yaml", {"suite": "petty-classical", "seed": 0, "body": "square",
                                     "params": {"n_random": 0, "product_polygons": 3}})
    out = tmp_path / "report.json"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_PASS
    rep = json.loads(out.read_text())
    square = rep["cases"][0]
    assert square["values"]["polar_projection_volume"] == pytest.approx(0.5)
    assert square["values"]["ball_value"] == pytest.approx(math.pi**2 / 16)
    assert square["verdict"] == "pass"
    assert rep["passed"] and rep["toolkit_version"] == __version__ and rep["seed"] == 0
    assert rep["config"]["tolerances"]["exact"] == 1e-9
    assert len(square["inputs_digest"]) == 16


def test_lemma_convexity_small_run(tmp_path):
    cfg = write(tmp_path, "c.yaml", {"suite": "lemma-convexity", "seed": 1,
                                     "params": {"dims": [2], "n_instances": 3, "n_points": 41, "joint_instances": 2}})
    out = tmp_path / "r.json"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_PASS
    rep = json.loads(out.read_text())
    exact = [c for c in rep["cases"] if not c["name"].startswith("p_sum")]
    assert all(c["values"]["max_violation"] <= 1e-9 for c in exact)


def test_malformed_body_exits_2_without_report(tmp_path):
    body = tmp_path / "bad.json"
    body.write_text('{"dim": 2, "vertices": [[0, 0], [1')
    cfg = write(tmp_path, "c.yaml", {"suite": "petty-classical", "seed": 0, "body": {"file": "bad.json"}})
    out = tmp_path / "r.json"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()


@pytest.mark.parametrize("data", [
    {"suite": "unknown", "seed": 0},
    {"suite": "oracle-vp"},
    {"suite": "oracle-vp", "seed": 0, "bogus": 1},
    {"suite": "oracle-vp", "seed": 0, "params": {"n_pairz": 2}},
    {"suite": "oracle-vp", "seed": 0, "tolerances": {"relative": -1}},
    {"suite": "oracle-vp", "seed": 0, "mc": {"inner": 10}},
    {"suite": "petty-lpq", "seed": 0, "measure": {"kind": "generalized_cauchy", "beta": 1.0}, "params": {"n_samples": 64}},
    {"suite": "petty-lpq", "seed": 0, "body": "cube", "params": {"n_samples": 64}},
])
def test_config_errors_exit_2(tmp_path, data):
    cfg = write(tmp_path, "c.yaml", data)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "r.json")]) == EXIT_USAGE
    assert not (tmp_path / "r.json").exists()


def test_unreadable_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == EXIT_USAGE
    bad = write(tmp_path, "bad.yaml", "suite: [unclosed")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_inequality_failure_exits_1(tmp_path):
    # demanding that the 64-gon reach the bound exactly cannot pass
    cfg = write(tmp_path, "c.yaml", {"suite": "petty-classical", "seed": 0, "tolerances": {"reference_fraction": 1.0},
                                     "params": {"n_random": 0, "product_polygons": 1}})
    out = tmp_path / "r.json"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_FAIL
    rep = json.loads(out.read_text())
    assert not rep["passed"] and rep["n_failed"] == 1


def test_seed_override_and_mc_block(tmp_path):
    cfg = write(tmp_path, "c.yaml", {"suite": "steiner-step", "mc": {"seed": 3, "n_samples": 512},
                                     "body": "triangle", "measure": {"kind": "gaussian"},
                                     "params": {"qs": ["q_unit"], "p_values": [1.0]}, "tolerances": {"relative_stderr": 1.0}})
    parsed = load_config(cfg)
    assert parsed.seed == 3 and parsed.params["n_samples"] == 512
    out = tmp_path / "r.json"
    assert main(["run", "--config", cfg, "--seed", "5", "--out", str(out), "--samples-scale", "2"]) == EXIT_PASS
    rep = json.loads(out.read_text())
    assert rep["seed"] == 5 and rep["config"]["params"]["n_samples"] == 1024


def test_reports_are_reproducible(tmp_path):
    cfg = write(tmp_path, "c.yaml", {"suite": "fiber-profile", "seed": 2,
                                     "params": {"n_instances": 2, "n_samples": 1024, "n_points": 9}})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["run", "--config", cfg, "--out", str(a), "--csv-dir", str(tmp_path / "csv")])
    main(["run", "--config", cfg, "--out", str(b)])
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["cases"] == rb["cases"]
    csvs = list((tmp_path / "csv").iterdir())
    assert csvs
    lines = csvs[0].read_text().splitlines()
    assert len(lines) > 2 and "," in lines[0]


def test_flow_profile_csv(tmp_path):
    out = tmp_path / "r.json"
    cfg = write(tmp_path, "c.yaml", {"suite": "shadow-invariants", "seed": 0, "csv_dir": str(tmp_path / "csv"),
                                     "params": {"dims": [2], "n_instances": 2}})
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_PASS
    text = (tmp_path / "csv" / "shadow-invariants-flow.csv").read_text().splitlines()
    assert len(text) > 2


def test_suite_flag_and_tol_override(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--suite", "oracle-vp", "--out", str(out), "--tol", "relative=1e-2"]) == EXIT_PASS
    assert json.loads(out.read_text())["config"]["tolerances"]["relative"] == 1e-2


def test_schema_is_published_and_strict():
    assert CONFIG_SCHEMA["additionalProperties"] is False
    assert set(CONFIG_SCHEMA["properties"]["suite"]["enum"]) == set(SUITES)
    with pytest.raises(ConfigError):
        parse_config({"suite": "oracle-vp", "seed": 0, "density": {}})


def test_run_suite_rejects_unknown_tolerance():
    with pytest.raises(ConfigError):
        run_suite("oracle-vp", tolerances={"absolute": 1.0})


def test_resolve_body_forms(tmp_path):
    assert resolve_body("square").volume == pytest.approx(4.0)
    assert resolve_body({"name": "regular_polygon", "params": {"k": 4}}).volume == pytest.approx(2.0)
    assert resolve_body({"vertices": [[0, 0], [1, 0], [0, 1]]}).volume == pytest.approx(0.5)
    (tmp_path / "b.json").write_text('{"dim": 2, "vertices": [[0, 0], [2, 0], [0, 2]]}')
    assert resolve_body({"file": "b.json"}, str(tmp_path)).volume == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        resolve_body({"shape": "square"})


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        _parser().parse_args([])


def test_published_schema_in_sync():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1]
    assert json.loads((root / "configs" / "schema.json").read_text()) == json.loads(json.dumps(CONFIG_SCHEMA))


@pytest.mark.parametrize("name", ["petty-classical", "steiner-step", "lemma-convexity", "empirical-petty", "shadow-invariants"])
def test_example_configs_validate(name):
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1]
    cfg = load_config(str(root / "configs" / f"{name}.yaml"))
    assert cfg.suite == name
