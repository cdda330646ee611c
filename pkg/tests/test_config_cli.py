"""Config documents, flag plumbing, artifacts, and exit codes."""
import json

import numpy as np
import pytest

from nvreadout import ConfigError, GridSpec, parse_config, serialize_config
from nvreadout.cli import COMMANDS, dispatch, main
from nvreadout.config import DEFAULT_CONFIG_ENV, KNOWN_KEYS, config_items


def test_empty_document_gives_the_documented_defaults():
    config = parse_config("")
    assert config.params.d_gs == 2870.0
    assert config.params.q == 4.945
    assert config.params.a_gs == -2.166
    assert config.rates.k_singlet == pytest.approx(1.0 / 250.0)
    assert config.field.scalar == 500.0
    assert config.output_format == "csv"
    assert config.spins == (1.0,)


def test_round_trip_is_identity():
    for text in (
        "",
        "field = 0:1000:1\nspins = 1,1.5\nisotope = 15\na_gs = 3.5",
        "odmr_frequency_grid = 1000:1010:0.25\noutput_path = runs/x.csv",
        "k_rad = 0.1\ndetection_efficiency = 0.01\nelectron_branch = -1",
    ):
        config = parse_config(text)
        assert parse_config(serialize_config(config)) == config


def test_isotope_selects_base_constants_with_overrides():
    config = parse_config("isotope = 15\na_gs = 3.5")
    assert config.params.nuclear_spin == 0.5
    assert config.params.q == 0.0
    assert config.params.a_gs == 3.5


def test_unknown_key_reports_line_and_key():
    with pytest.raises(ConfigError) as err:
        parse_config("field = 500\n\nbogus = 3\n")
    assert err.value.key == "bogus"
    assert err.value.line == 3
    assert "unknown key" in str(err.value)


def test_malformed_line_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config("# fine\nfield 500\n")
    assert err.value.line == 2


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("field = 500\nfield = 501\n")
    assert err.value.key == "field"
    assert err.value.line == 2


def test_out_of_range_value_names_the_key():
    with pytest.raises(ConfigError) as err:
        parse_config("q = -1")
    assert err.value.key == "q"
    assert "q" in str(err.value)
    with pytest.raises(ConfigError) as err:
        parse_config("shots = 0")
    assert err.value.key == "shots"
    with pytest.raises(ConfigError) as err:
        parse_config("isotope = 13")
    assert err.value.key == "isotope"
    with pytest.raises(ConfigError) as err:
        parse_config("spins = 0.3")
    assert err.value.key == "spins"
    with pytest.raises(ConfigError) as err:
        parse_config("odmr_frequency_grid = 10:5:1")
    assert err.value.key == "odmr_frequency_grid"


def test_grid_spec_point_counts():
    assert len(GridSpec(0.0, 1000.0, 1.0).values()) == 1001
    assert len(GridSpec(2.0, 8.0, 0.01).values()) == 601
    grid = GridSpec(400.0, 600.0, 0.5).values()
    assert grid[0] == 400.0 and grid[-1] == 600.0
    assert GridSpec(5.0, 5.0).values().tolist() == [5.0]
    with pytest.raises(ValueError):
        GridSpec(10.0, 5.0, 1.0)
    with pytest.raises(ValueError):
        GridSpec(0.0, 5.0, 0.0)


def test_config_items_cover_every_key():
    items = config_items(parse_config(""))
    assert [name for name, _ in items] == list(KNOWN_KEYS)


def run_cli(tmp_path, monkeypatch, *argv) -> int:
    monkeypatch.chdir(tmp_path)
    return main(list(argv))


def test_cli_enhancement_prints_closed_form(tmp_path, monkeypatch, capsys):
    assert run_cli(tmp_path, monkeypatch, "enhancement", "--spins", "1") == 0
    assert capsys.readouterr().out.strip() == "1.7320508"


def test_cli_levels_row_and_column_count(tmp_path, monkeypatch, capsys):
    assert run_cli(tmp_path, monkeypatch, "levels", "--field", "0:1000:1") == 0
    lines = (tmp_path / "levels.csv").read_text().splitlines()
    header = [line for line in lines if line.startswith("#")]
    data = [line for line in lines if not line.startswith("#")]
    assert len(header) == 1 + len(KNOWN_KEYS)  # banner + full effective config
    assert data[0].split(",")[0] == "field_G"
    assert len(data) == 1 + 1001
    assert all(len(row.split(",")) == 10 for row in data)


def test_cli_artifacts_are_byte_identical(tmp_path, monkeypatch, capsys):
    args = ("transient", "--field", "507", "--trace-duration-ns", "600")
    assert run_cli(tmp_path, monkeypatch, *args, "--output-path", "a.csv") == 0
    assert run_cli(tmp_path, monkeypatch, *args, "--output-path", "b.csv") == 0
    a = (tmp_path / "a.csv").read_bytes()
    b = (tmp_path / "b.csv").read_bytes()
    assert a.replace(b"a.csv", b"") == b.replace(b"b.csv", b"")


def test_cli_flags_win_over_config_file(tmp_path, monkeypatch, capsys):
    config = tmp_path / "run.conf"
    config.write_text("field = 20\nesr_frequency_grid = 1300:1440:1\n")
    code = run_cli(tmp_path, monkeypatch, "esr-excited",
                   "--config", str(config), "--field", "40")
    assert code == 0
    content = (tmp_path / "esr-excited.csv").read_text()
    assert "# field = 40" in content
    assert "# esr_frequency_grid = 1300:1440:1" in content


def test_cli_env_var_provides_the_default_config(tmp_path, monkeypatch, capsys):
    config = tmp_path / "env.conf"
    config.write_text("spins = 0.5\n")
    monkeypatch.setenv(DEFAULT_CONFIG_ENV, str(config))
    assert run_cli(tmp_path, monkeypatch, "enhancement") == 0
    assert capsys.readouterr().out.strip() == "1.4142136"


def test_cli_json_mirror(tmp_path, monkeypatch, capsys):
    code = run_cli(tmp_path, monkeypatch, "enhancement",
                   "--spins", "1 1", "--output-format", "json")
    assert code == 0
    document = json.loads((tmp_path / "enhancement.json").read_text())
    assert set(document) == {"command", "config", "columns", "rows"}
    assert document["command"] == "enhancement"
    assert document["columns"] == ["spin", "cumulative_enhancement"]
    assert document["rows"][-1][1] == pytest.approx(np.sqrt(5.0))
    assert document["config"]["spins"] == "1 1"


def test_cli_csv_values_use_nine_significant_digits(tmp_path, monkeypatch, capsys):
    assert run_cli(tmp_path, monkeypatch, "enhancement", "--spins", "1") == 0
    data = [line for line in (tmp_path / "enhancement.csv").read_text().splitlines()
            if not line.startswith("#")]
    assert data[1].split(",")[1] == f"{np.sqrt(3.0):.9g}"


def test_cli_error_exit_codes(tmp_path, monkeypatch, capsys):
    assert run_cli(tmp_path, monkeypatch, "snr", "--q", "-1") == 2
    assert "q" in capsys.readouterr().err
    assert run_cli(tmp_path, monkeypatch, "transient", "--field", "1:10:1") == 2
    assert "single field" in capsys.readouterr().err
    bad = tmp_path / "bad.conf"
    bad.write_text("nope = 1\n")
    assert run_cli(tmp_path, monkeypatch, "snr", "--config", str(bad)) == 2
    err = capsys.readouterr().err
    assert "line 1" in err and "nope" in err
    assert run_cli(tmp_path, monkeypatch, "snr", "--config", str(tmp_path / "missing")) == 1
    assert run_cli(tmp_path, monkeypatch, "nonsense") == 2
    code = run_cli(tmp_path, monkeypatch, "enhancement",
                   "--output-path", "no/such/dir/x.csv")
    assert code == 1


def test_dispatch_rejects_unknown_command(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert dispatch("resonate", parse_config("")) == 2
    assert "unknown command" in capsys.readouterr().err
    assert set(COMMANDS) == {
        "levels", "lac", "transient", "snr", "rabi", "odmr", "endor",
        "esr-excited", "enhancement", "snr-vs-field",
    }


def test_cli_summary_formats(tmp_path, monkeypatch, capsys):
    assert run_cli(tmp_path, monkeypatch, "snr", "--trace-duration-ns", "1500") == 0
    out = capsys.readouterr().out
    assert out.startswith("max SNR ratio = ")
    assert "at t_p = " in out
