import hashlib
import json

import pytest
import yaml

from xyergodic.cli import EXIT_CONFIG, main
from xyergodic.config import OUTPUT_ENV, ConfigError, ExperimentConfig, parse_geometry
from xyergodic.runner import run

SMALL_FINITE = {
    "geometry": "chain 6",
    "a_over_J": [0.6, 2.0],
    "beta_grid": {"count": 41},
    "time_sampling": {"n_samples": 40},
}
VERDICT_KEYS = {
    "geometry", "quantity", "bond", "headline", "a_over_J", "gamma", "beta_init", "long_time_value",
    "std_error", "verdict", "crossing_beta_tilde", "band", "match_tolerance", "n_crossings",
}


def _contents(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


@pytest.mark.parametrize("data", [{"a_over_J": [0.6, 2.0], "beta_grid": {"count": 41}}, SMALL_FINITE])
def test_runs_are_byte_identical(tmp_path, data):
    cfg = ExperimentConfig.from_mapping(data)
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    a, b = _contents(tmp_path / "a"), _contents(tmp_path / "b")
    assert a == b and len(a) > 5


def test_manifest_references_every_file(tmp_path):
    ds = run(ExperimentConfig.from_mapping(SMALL_FINITE), tmp_path)
    manifest = json.loads((tmp_path / "chain6_manifest.json").read_text())
    others = {p.name for p in tmp_path.iterdir()} - {"chain6_manifest.json"}
    assert set(manifest["files"]) == others
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((tmp_path / name).read_bytes()).hexdigest() == digest
    assert manifest["seed"] == 20110516
    assert manifest["lattice"]["n_sites"] == 6
    assert len(ds.files) == len(others) + 1


def test_verdict_json_schema(tmp_path):
    run(ExperimentConfig.from_mapping(SMALL_FINITE), tmp_path)
    rows = json.loads((tmp_path / "chain6_verdicts.json").read_text())
    assert len(rows) == 5 * 2
    for r in rows:
        assert set(r) == VERDICT_KEYS
        assert r["verdict"] in {"Ergodic", "Nonergodic", "StronglyNonergodic"}
        assert r["band"] == [2.0, 200.0]
        assert (r["crossing_beta_tilde"] is None) == (r["verdict"] == "StronglyNonergodic")


def test_csv_layout(tmp_path):
    run(ExperimentConfig.from_mapping(SMALL_FINITE), tmp_path)
    lines = (tmp_path / "chain6_equilibrium_t_xx__bond.csv").read_text().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    assert "# geometry: chain6" in meta
    assert body[0] == "beta_tilde,value,err_estimate"
    assert len(body) == 42
    const = (tmp_path / "chain6_constants_e_n__bond.csv").read_text()
    assert "# seed: 20110516" in const and "# n_samples: 40" in const


@pytest.mark.parametrize(
    "data,path",
    [
        ({"gamma": 0}, "gamma"),
        ({"J": "big"}, "J"),
        ({"a_over_J": [0.2, "x"]}, "a_over_J[1]"),
        ({"beta_grid": {"count": 4}}, "beta_grid.count"),
        ({"time_sampling": {"n_samples": 1}}, "time_sampling.n_samples"),
        ({"quadrature": {"rel_tol": -1}}, "quadrature.rel_tol"),
        ({"geometry": "hexagon 3"}, "geometry"),
        ({"geometry": "torus 2x4"}, "geometry"),
        ({"colour": "red"}, "colour"),
    ],
)
def test_config_errors_name_the_field(data, path):
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_mapping(data)
    assert err.value.path == path


def test_dotted_override_and_unknown_key():
    cfg = ExperimentConfig.from_mapping({}, {"time_sampling.seed": 5, "gamma": 0.3})
    assert cfg.sampling.seed == 5 and cfg.gamma == 0.3
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({}, {"time_sampling.speed": 5})


def test_geometry_parsing():
    assert parse_geometry("infinite-chain").is_infinite
    assert parse_geometry("ladder 2x4").lattice.n_sites == 8
    assert parse_geometry("torus:3x4").label == "torus3x4"
    with pytest.raises(ConfigError):
        parse_geometry("chain 16")


def test_output_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert ExperimentConfig.from_mapping({"output_dir": "elsewhere"}).output_dir == tmp_path / "env"


def test_cli_infinite_chain(tmp_path, capsys):
    rc = main(["infinite-chain", "--fields", "0.6", "2", "--set", "beta_grid.count=41", "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "t_xx" in out and "Nonergodic" in out
    assert (tmp_path / "infinite_chain_manifest.json").exists()


def test_cli_yaml_config_and_classify(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump(SMALL_FINITE))
    assert main(["finite", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
    capsys.readouterr()
    curve = tmp_path / "out" / "chain6_equilibrium_t_xx__bond.csv"
    assert main(["classify", "--curve", str(curve), "--value", "-0.5"]) == 0
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["verdict"] in {"Ergodic", "Nonergodic"}


def test_cli_config_error_exit_code(capsys):
    assert main(["infinite-chain", "--gamma", "0"]) == EXIT_CONFIG
    assert "gamma" in capsys.readouterr().err
    assert main(["finite", "--geometry", "infinite-chain"]) == EXIT_CONFIG


def test_cli_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--quantity", "m_z", "--a-tilde", "0.6", "--count", "16", "-o", str(out)]) == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "beta_tilde,value,err_estimate" and len(rows) == 17
