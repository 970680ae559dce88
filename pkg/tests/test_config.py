import pytest

from jangbench.config import SCHEMA, load_config, parse_config
from jangbench.errors import ConfigError

MINIMAL = """
[data]
kind = synthetic
b = 1
l = 3
"""


def test_minimal_defaults_materialized(tmp_path):
    cfg = parse_config(MINIMAL)
    assert cfg["grid"]["n"] == 2000
    assert cfg["barrier"]["tau0"] == 0.1
    assert cfg["continuation"]["vartheta"] == 1.0
    assert cfg["continuation"]["sigma0"] == 0.05
    echo = cfg.echo()
    for sec, keys in SCHEMA.items():
        assert f"[{sec}]" in echo
        for k in keys:
            assert f"\n{k} = " in echo
    p = cfg.write_echo(tmp_path)
    again = load_config(p)
    assert again.values == cfg.values


def test_family2_hypothesis_cited():
    text = "[data]\nb = 1\nl = 1\n[continuation]\nfamily = 2\n"
    with pytest.raises(ConfigError, match="1/2 ≤ b < \\(l\\+1\\)/2"):
        parse_config(text)


def test_family1_hypothesis():
    with pytest.raises(ConfigError, match="family 1"):
        parse_config("[data]\nb = 2.5\nl = 3\n[continuation]\nfamily = 1\n")


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate key 'b'"):
        parse_config("[data]\nb = 1\nb = 2\n")


def test_duplicate_section():
    with pytest.raises(ConfigError, match="duplicate section"):
        parse_config("[data]\nb = 1\n[data]\nl = 2\n")


def test_unknown_key_and_section():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("[data]\nbee = 1\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[nope]\nx = 1\n")


def test_syntax_error_line_number():
    with pytest.raises(ConfigError, match="line 4"):
        parse_config("[data]\nb = 1\n\nthis line has no equals sign\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("b = 1\n")


def test_bad_values():
    with pytest.raises(ConfigError, match="decimal real"):
        parse_config("[data]\nb = one\n")
    with pytest.raises(ConfigError, match="true or false"):
        parse_config("[solver]\nextend = yes\n")
    with pytest.raises(ConfigError, match="decreasing"):
        parse_config("[continuation]\ndelta_schedule = 1e-3, 1e-2\n")
    with pytest.raises(ConfigError):
        parse_config("[grid]\nn = 10\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "none.ini")


def test_relative_paths(tmp_path):
    (tmp_path / "c.ini").write_text("[output]\ndir = res\n")
    cfg = load_config(tmp_path / "c.ini")
    assert cfg.out_dir == tmp_path / "res"
