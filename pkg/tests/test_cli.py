import io
import json
import os

import numpy as np
import pytest

from begoe import cli
from begoe.cli import ConfigError, figure_configs, main, parse_config, run, run_many
from begoe.series import read_csv

MINIMAL = {"N": 4, "m": 10, "k": 2, "lambda": 0.5, "members": 100, "seed": 42, "observables": ["density"]}
SMALL = {"N": 3, "m": 4, "k": 2, "members": 4, "seed": 7}


def test_minimal_config_is_valid():
    cfg = parse_config(MINIMAL)
    assert cfg.spec.dim == 286 and cfg.spec.lam == 0.5
    assert cfg.observables == ["density"]
    assert cfg.effective()["bins"] == 50


@pytest.mark.parametrize("override, field", [
    ({"k": 11}, "k"),
    ({"members": 0}, "members"),
    ({"lambda": -1.0}, "lambda"),
    ({"bins": 5}, "bins"),
    ({"N": 2.5}, "N"),
    ({"range": [1.0, -1.0]}, "range"),
])
def test_range_violations_name_the_field(override, field):
    with pytest.raises(ConfigError, match=field):
        parse_config({**MINIMAL, **override})


def test_bound_is_reported():
    with pytest.raises(ConfigError, match="upper bound 10"):
        parse_config({**MINIMAL, "k": 12})


def test_unknown_keys_are_listed():
    with pytest.raises(ConfigError, match="colour, sigma"):
        parse_config({**MINIMAL, "sigma": 1, "colour": "red"})


def test_empty_or_bad_observables():
    with pytest.raises(ConfigError, match="non-empty"):
        parse_config({**MINIMAL, "observables": []})
    with pytest.raises(ConfigError, match="spectrum"):
        parse_config({**MINIMAL, "observables": ["spectrum"]})


def test_capacity_error_names_n_and_m():
    with pytest.raises(ConfigError, match=r"N=40, p=30"):
        parse_config({**MINIMAL, "N": 40, "m": 30})


def test_flags_override_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(MINIMAL))
    cfg = parse_config(str(path), {"seed": 3, "k": None})
    assert cfg.spec.seed == 3 and cfg.spec.k == 2


def test_effective_config_round_trips():
    cfg = parse_config({**SMALL, "observables": ["zeta"], "variant": "cs"})
    again = parse_config(cfg.effective())
    assert again.effective() == cfg.effective()
    assert again.spec == cfg.spec


def test_basis_and_qparam_output():
    buf = io.StringIO()
    cli.write_basis(2, 2, buf)
    rows = [r for r in buf.getvalue().splitlines() if not r.startswith("#")]
    assert rows == ["index,n1,n2", "0,2,0", "1,1,1", "2,0,2"]
    buf = io.StringIO()
    cli.write_qparam(4, 10, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "N,m,k,q" and len(lines) == 11
    assert float(lines[-1].split(",")[-1]) == pytest.approx(1 / 286**2)


def test_run_writes_files_and_manifest(tmp_path):
    cfg = parse_config({**SMALL, "observables": ["density", "ldos", "npc", "lh", "zeta", "qparam", "entropy",
                                                 "survival"], "out_dir": str(tmp_path)})
    written = run(cfg)
    names = sorted(os.path.basename(p) for p in written)
    assert "manifest.json" in names and len(names) == 9
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["version"] and manifest["seed_derivation"] and "wall_time_s" in manifest
    assert manifest["configs"][0] == cfg.effective()
    header, cols = read_csv(tmp_path / "density_N3_m4_k2.csv")
    assert header["config"] == cfg.effective()
    assert parse_config(header["config"]).spec == cfg.spec
    assert "theory" in cols and len(cols["value"]) == 50


def test_outputs_are_byte_reproducible(tmp_path):
    cfg = parse_config({**SMALL, "observables": ["density", "npc", "entropy"], "out_dir": str(tmp_path)})
    first = {p: open(p, "rb").read() for p in run(cfg) if not p.endswith("manifest.json")}
    second = run(cfg)
    for p, blob in first.items():
        assert p in second
        assert open(p, "rb").read() == blob


def test_json_format(tmp_path):
    cfg = parse_config({**SMALL, "observables": ["zeta"], "format": "json", "out_dir": str(tmp_path)})
    path = [p for p in run(cfg) if "zeta" in p][0]
    payload = json.loads(open(path).read())
    assert payload["header"]["config"]["format"] == "json"
    assert len(payload["columns"]["value"]) == 4


def test_partial_outputs_removed_on_failure(tmp_path, monkeypatch):
    good = parse_config({**SMALL, "observables": ["zeta"], "out_dir": str(tmp_path)})
    bad = parse_config({**SMALL, "k": 3, "observables": ["zeta"], "out_dir": str(tmp_path)})
    real = cli.compute

    def flaky(cfg):
        if cfg.spec.k == 3:
            raise RuntimeError("boom")
        return real(cfg)

    monkeypatch.setattr(cli, "compute", flaky)
    with pytest.raises(RuntimeError):
        run_many([good, bad], str(tmp_path))
    assert os.listdir(tmp_path) == []


def test_figure_recipes():
    fig1 = figure_configs(1, {})
    assert len(fig1) == 9 and [c.spec.k for c in fig1] == list(range(2, 11))
    assert all(c.observables == ["density"] and c.spec.members == 100 for c in fig1)
    fig7 = figure_configs(7, {"members": 10})
    assert len(fig7) == 27
    for k in range(1, 10):
        assert sorted(c.spec.variant for c in fig7 if c.spec.k == k) == ["cs", "k_cs", "plain"]
    assert all(not c.spec.include_h1 and c.spec.members == 10 for c in fig7)
    with pytest.raises(ConfigError):
        figure_configs(9, {})


def test_figure7_files(tmp_path):
    base = {"members": 3, "out_dir": str(tmp_path)}
    configs = [c for c in figure_configs(7, base) if c.spec.k in (1, 2)]
    written = run_many(configs, str(tmp_path))
    files = [os.path.basename(p) for p in written if "transport" in p]
    assert len(files) == 6
    header, cols = read_csv(os.path.join(tmp_path, files[0]))
    assert np.sum(cols["value"]) == pytest.approx(1.0)


def test_main_subcommands(tmp_path, capsys):
    assert main(["qparam", "--N", "2", "--m", "3"]) == 0
    assert capsys.readouterr().out.startswith("N,m,k,q")
    assert main(["basis", "--N", "2", "--m", "9"]) == 0
    assert capsys.readouterr().out.count("\n") == 3 + 1 + 10
    assert main(["zeta", "--N", "3", "--m", "4", "--k", "2", "--members", "3", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "zeta_N3_m4_k2.csv").exists()
    assert main(["transport", "--N", "2", "--m", "4", "--k", "2", "--members", "3", "--no-h1",
                 "--variant", "cs", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "transport_endpoints_N2_m4_k2_cs.csv").exists()
    assert main(["density", "--N", "3", "--m", "4", "--k", "9", "--out-dir", str(tmp_path)]) == 2
    assert "upper bound" in capsys.readouterr().err
