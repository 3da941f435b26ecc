import pytest

from spinsim.config import ConfigError, RunConfig, build_config, parse_cluster, parse_text


def write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return str(p)


def test_empty_config_gives_inp_defaults(tmp_path):
    cfg = build_config(write(tmp_path, ""))
    assert (cfg.I, cfg.S) == (4.5, 0.5)
    assert cfg.field_dir == (1.0, 1.0, 1.0)
    assert cfg.structure == "zincblende"
    assert cfg.as_dict() == build_config().as_dict()


def test_file_values_and_sources(tmp_path):
    cfg = build_config(write(tmp_path, "[lattice]\nfield = 1, 0, 0\nr_max = 8\n[adrf]\nj = 1.5\n"))
    assert cfg.field_dir == (1.0, 0.0, 0.0)
    assert cfg.r_max == 8.0 and cfg.j == 1.5
    assert cfg.source == {"field_dir": "file", "r_max": "file", "j": "file"}


def test_flag_overrides_file(tmp_path):
    path = write(tmp_path, "[adrf]\npolarization = 0.3\n")
    assert build_config(path).polarization == 0.3
    cfg = build_config(path, {"polarization": 0.7, "j": None})
    assert cfg.polarization == 0.7 and cfg.source["polarization"] == "flag"
    assert cfg.j == RunConfig().j


@pytest.mark.parametrize("text", ["[hte]\nj = -1\n", "[species]\nI = 1.3\n",
                                  "[adrf]\npolarization = 1.0\n", "[lattice]\nfield = 0,0,0\n",
                                  "[meanfield]\npumping = laser\n", "[hte]\norder = G3\n"])
def test_invalid_values(tmp_path, text):
    with pytest.raises(ConfigError):
        build_config(write(tmp_path, text))


def test_unknown_key_reports_line(tmp_path):
    with pytest.raises(ConfigError, match=r":4: unknown key 'colour'"):
        build_config(write(tmp_path, "[lattice]\nr_max = 6\n\ncolour = blue\n"))


def test_unknown_section_reports_line():
    with pytest.raises(ConfigError, match=r":3: unknown section"):
        parse_text("[lattice]\nr_max = 6\n[plotting]\ndpi = 3\n")


def test_malformed_value_reports_line():
    with pytest.raises(ConfigError, match=r":2: bad value for 'field'"):
        parse_text("[lattice]\nfield = 1, 1\n")


def test_unknown_override():
    with pytest.raises(ConfigError):
        build_config(None, {"colour": "blue"})


def test_cluster_parsing():
    assert parse_cluster("2x2") == (2, 2)
    assert parse_cluster("1X0") == (1, 0)
    for bad in ("2", "axb", "0x0"):
        with pytest.raises(ValueError):
            parse_cluster(bad)
