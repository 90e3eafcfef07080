import math

import pytest

from superband.config import SimConfig, load_config, with_overrides
from superband.errors import ConfigError


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_defaults():
    cfg = load_config(None)
    assert cfg == SimConfig()
    assert cfg.grid.n_points == 2**18
    assert cfg.state.kappa0 == pytest.approx(2 * math.pi)
    assert cfg.run.times == (1.0, 2.0, 3.0, 4.0)


def test_parse_all_sections(tmp_path):
    cfg = load_config(write(tmp_path, """
[grid]
x_min = -256
x_max = 256
n_points = 131072
[state]
alpha = 1.8
normalization = published
gamma = 0.5
[run]
times = 1, 2.5
seed = 11
initial_mode = born_sampled
flux_planes = 3.5, 2.0
[output]
formats = json
stride = 4
"""))
    assert cfg.grid.x_min == -256.0 and cfg.grid.n_points == 131072
    assert cfg.state.alpha == 1.8 and cfg.state.normalization == "published"
    assert cfg.state.gamma == 0.5
    assert cfg.run.times == (1.0, 2.5) and cfg.run.seed == 11
    assert cfg.run.flux_planes == (3.5, 2.0)
    assert cfg.output.formats == "json" and cfg.output.stride == 4


def test_empty_optional_is_none(tmp_path):
    cfg = load_config(write(tmp_path, "[state]\ngamma =\n[run]\nflux_planes =\n"))
    assert cfg.state.gamma is None and cfg.run.flux_planes is None


@pytest.mark.parametrize("text", [
    "[nope]\na = 1\n",
    "[grid]\nwidth = 3\n",
    "[grid]\nn_points = many\n",
    "[grid]\nx_min = 5\nx_max = -5\n",
    "[state]\ndelta_kappa = -1\n",
    "[state]\nnormalization = other\n",
    "[run]\ndt = 0.02\n",
    "[run]\nt_end = 60\n",
    "[run]\ninitial_mode = gridded\n",
    "[run]\nn_trajectories = 0\n",
    "[run]\nflux_window = 3, 2\n",
    "[output]\nformats = xml\n",
    "[output]\nstride = 0\n",
    "not an ini file",
])
def test_invalid_configs(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_overrides():
    cfg = with_overrides(load_config(None), out="x", seed=3, alpha=1.5, times="0.5,1",
                         formats="csv")
    assert cfg.output.directory == "x" and cfg.output.formats == "csv"
    assert cfg.run.seed == 3
    assert cfg.state.alpha == 1.5 and cfg.run.alphas == (1.5,)
    assert cfg.run.times == (0.5, 1.0)
    assert with_overrides(cfg, times="").run.times == ()
    with pytest.raises(ConfigError):
        with_overrides(cfg, times="1,x")


def test_hash_tracks_numerics_only():
    base = load_config(None)
    assert base.hash() == load_config(None).hash()
    assert len(base.hash()) == 16
    assert with_overrides(base, out="elsewhere", formats="json").hash() == base.hash()
    assert with_overrides(base, seed=1).hash() != base.hash()
    assert with_overrides(base, alpha=1.8).hash() != base.hash()


def test_inline_comments(tmp_path):
    cfg = load_config(write(tmp_path, "[state]\ngamma =   ; none\nalpha = 1.5 ; depth\n"))
    assert cfg.state.gamma is None and cfg.state.alpha == 1.5
