import pytest

from kshift.config import ConfigError, load_scenario, load_sweep, parse_text
from kshift.environment import ProfileKind
from kshift.evolution import Frame, InitialKind

BASE = """\
# comment line
x_min = -20   # trailing comment
x_max = 20
h = 0.1
profile = tanh
shift_speed = 0.5
chi = 0.2
nu = 1
mu = 1
b = 1
t_end = 2
"""


def write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_full_scenario(tmp_path):
    sc = load_scenario(write(tmp_path, BASE + "u0_support = -3, 3\nframe = comoving\ndt = auto\n"))
    sim = sc.sim
    assert sim.grid.n_nodes == 401 and sim.env.kind is ProfileKind.TANH
    assert sim.env.shift_speed == 0.5 and sim.u0_support == (-3.0, 3.0)
    assert sim.frame is Frame.COMOVING and sim.dt is None
    assert dict(sc.echo)["x_min"] == "-20"


@pytest.mark.parametrize("extra, line, fragment", [
    ("bogus\n", 12, "expected 'key = value'"),
    ("colour = red\n", 12, "unknown key"),
    ("chi = 0.3\n", 12, "duplicate key"),
    ("u0_support = 1\n", 12, "two numbers"),
    ("frame = sideways\n", 12, "one of"),
    ("t_end = nan\n", None, "t_end"),
])
def test_errors_carry_line_numbers(tmp_path, extra, line, fragment):
    # the replacement t_end line lands on line 11; everything else is appended as line 12
    text = BASE.replace("t_end = 2\n", extra) if extra.startswith("t_end") else BASE + extra
    with pytest.raises(ConfigError) as err:
        load_scenario(write(tmp_path, text))
    assert fragment in str(err.value)
    if line is not None:
        assert err.value.line == line and f":{line}:" in str(err.value)


def test_semantic_errors(tmp_path):
    with pytest.raises(ConfigError, match="missing required"):
        load_scenario(write(tmp_path, "x_min = 0\n"))
    with pytest.raises(ConfigError, match="chi"):
        load_scenario(write(tmp_path, BASE.replace("chi = 0.2", "chi = -1")))
    with pytest.raises(ConfigError, match="cannot read"):
        load_scenario(tmp_path / "nope.cfg")


def test_constant_and_bump_profiles(tmp_path):
    const = load_scenario(write(tmp_path, BASE.replace("profile = tanh", "profile = constant\nr_const = 2")))
    assert const.sim.env.kind is ProfileKind.CONSTANT and const.sim.env.r_plus == 2.0
    bump = load_scenario(write(tmp_path, BASE.replace("profile = tanh", "profile = bump\nwidth = 3")))
    assert bump.sim.env.kind is ProfileKind.BUMP and bump.sim.env.r_plus == -1.0


def test_sweep_axes_and_template(tmp_path):
    write(tmp_path, BASE, "base.cfg")
    spec = load_sweep(write(tmp_path, "template = base.cfg\nt_end = 1\nsweep.shift_speed = 1, 2\n"
                                      "sweep.u0_kind = compact_bump, right_half_line\n", "sw.cfg"))
    cells = list(spec.cells())
    assert spec.n_cells == 4 == len(cells)
    assert cells[1] == {"shift_speed": "1", "u0_kind": "right_half_line"}
    sc = spec.scenario(cells[3])
    assert sc.sim.t_end == 1.0 and sc.sim.env.shift_speed == 2.0
    assert sc.sim.u0_kind is InitialKind.RIGHT_HALF_LINE


def test_sweep_limits(tmp_path):
    with pytest.raises(ConfigError, match="max_cells"):
        load_sweep(write(tmp_path, BASE + "max_cells = 2\nsweep.nu = 1, 2, 3\n"))
    with pytest.raises(ConfigError, match="unknown sweep axis"):
        load_sweep(write(tmp_path, BASE + "sweep.colour = 1\n"))
    with pytest.raises(ConfigError, match="bad value"):
        load_sweep(write(tmp_path, BASE + "sweep.nu = 1, x\n"))
    assert load_sweep(write(tmp_path, BASE)).n_cells == 1


def test_parse_text_values():
    values, raw, axes = parse_text("nu = 2.5\n")
    assert values == {"nu": 2.5} and raw == {"nu": "2.5"} and axes == {}
