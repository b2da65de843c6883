import json

import pytest

from morsebubble import cli
from morsebubble.cli import COLUMNS, ConfigError, RunConfig, config_from_summary, emit_csv, parse_config


MINIMAL = """
[run]
subcommand = annulus-spectrum
[params]
eta = 0.1
deltas = 1e-4, 1e-6
beta = 0.5
"""


def test_minimal_config():
    cfg = parse_config(MINIMAL)
    assert isinstance(cfg, RunConfig)
    assert cfg.deltas == (1e-4, 1e-6) and cfg.eta == 0.1


def test_beta_out_of_range_names_parameter():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("beta = 0.5", "beta = 1.5"))
    msg = str(exc.value)
    assert "beta" in msg and "(0, 1)" in msg


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "eta = 0.2\n")


def test_unknown_key_and_section_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "colour = red\n[extra]\nx = 1\n")
    assert len(exc.value.errors) == 2


def test_all_violations_reported():
    bad = MINIMAL.replace("beta = 0.5", "beta = 2").replace("eta = 0.1", "eta = 0.1\nmu = 0.1")
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert len(exc.value.errors) == 2


def test_delta_cross_check():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL.replace("1e-4, 1e-6", "0.5"))
    assert "deltas" in str(exc.value)


def test_format_round_trip():
    cfg = parse_config(MINIMAL)
    assert parse_config(cli.format_config(cfg)) == cfg


def test_empty_table_header_only(tmp_path):
    p = tmp_path / "t.csv"
    emit_csv([], p, COLUMNS["annulus-spectrum"])
    assert p.read_text() == "eta,delta,beta,variant,lambda1_analytic,lambda1_numeric,rel_err\n"


def test_annulus_spectrum_end_to_end(tmp_path):
    cfgp = tmp_path / "c.ini"
    cfgp.write_text(MINIMAL)
    out = tmp_path / "o"
    assert cli.main(["annulus-spectrum", "--config", str(cfgp), "--out", str(out), "--seed", "7"]) == 0
    csv1 = (out / "annulus_spectrum.csv").read_text()
    assert csv1.splitlines()[0] == ",".join(COLUMNS["annulus-spectrum"])
    summary = json.loads((out / "annulus_spectrum_summary.json").read_text())
    assert summary["passed"] is True
    assert config_from_summary(summary) == replace_cfg(parse_config(MINIMAL), out=str(out), seed=7)
    # byte-identical reruns
    assert cli.main(["annulus-spectrum", "--config", str(cfgp), "--out", str(out), "--seed", "7"]) == 0
    assert (out / "annulus_spectrum.csv").read_text() == csv1


def replace_cfg(cfg, **kw):
    from dataclasses import replace

    return replace(cfg, **kw)


def test_bad_config_exit_code(tmp_path, capsys):
    cfgp = tmp_path / "c.ini"
    cfgp.write_text(MINIMAL.replace("beta = 0.5", "beta = 1.5"))
    assert cli.main(["annulus-spectrum", "--config", str(cfgp), "--out", str(tmp_path)]) == 2
    assert "beta" in capsys.readouterr().err


def test_failing_check_exit_code(tmp_path):
    # the neck-suite weight-uniformity check fails on the default ladder
    assert cli.main(["neck-suite", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("sub", ["lorentz", "series-check", "harmonic-split"])
def test_other_subcommands_run(tmp_path, sub):
    cfgp = tmp_path / "c.ini"
    cfgp.write_text("[params]\ninstances = 50\ntrials = 2\nlog_ratios = 4\n[grid]\nn_s = 256\nn_theta = 32\n")
    code = cli.main([sub, "--config", str(cfgp), "--out", str(tmp_path)])
    assert code in (0, 1)
    stem = sub.replace("-", "_")
    header = (tmp_path / f"{stem}.csv").read_text().splitlines()[0]
    assert header == ",".join(COLUMNS[sub])
