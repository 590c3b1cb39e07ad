import pytest

from diracsim.config import dump_config, load_config, parse_config
from diracsim.errors import ConfigError

MINIMAL = """
time.tau = 1/16
time.t_max = 1
"""


def test_minimal_config_defaults():
    config = parse_config(MINIMAL)
    assert config.grid.dimension == 1
    assert config.grid.M == [1024]
    assert config.field.components == 2
    assert config.time.scheme == "s4c"
    assert config.time.tau == 1 / 16
    assert config.potential.kind == "zero"
    assert config.build_grid().shape == (1024,)


def test_comments_and_fractions():
    config = parse_config(
        """
        # Klein step in atomic units
        grid.a = -20
        grid.b = 20
        grid.M = 2048   # h = 1/51.2
        time.tau = 1/3
        time.t_max = 1
        constants.c = 137.0359895
        """
    )
    assert config.time.tau == 1 / 3
    assert config.constants.c == 137.0359895
    assert config.build_constants().rest_energy == pytest.approx(137.0359895 ** 2)


def test_per_axis_values():
    config = parse_config(MINIMAL + "grid.dimension = 2\ngrid.a = -1, -2\ngrid.b = 1, 2\ngrid.M = 8\n")
    grid = config.build_grid()
    assert grid.shape == (8, 8)
    assert grid.spacing == (0.25, 0.5)


def test_odd_grid_size_names_the_line():
    with pytest.raises(ConfigError, match="even") as info:
        parse_config("time.tau = 1/16\ntime.t_max = 1\ngrid.M = 63\n")
    assert info.value.key == "grid.M"
    assert info.value.line == 3
    assert str(info.value).startswith("line 3: grid.M:")


@pytest.mark.parametrize(
    "text, key, message",
    [
        ("grid.foo = 1", "grid.foo", "unknown key"),
        ("time.scheme = rk4", "time.scheme", "unknown scheme"),
        ("potential.V_expr = cos(", "potential.V_expr", "expected"),
        ("grid.dimension = 4", "grid.dimension", "dimension"),
        ("field.components = 3", "field.components", "components"),
        ("time.tau = 0", "time.tau", "positive"),
    ],
)
def test_field_errors(text, key, message):
    source = "time.tau = 1/16\ntime.t_max = 1\n"
    if text.startswith("time.tau"):
        source = "time.t_max = 1\n"
    with pytest.raises(ConfigError, match=message) as info:
        parse_config(source + text + "\n")
    assert info.value.key == key


def test_missing_required_key():
    with pytest.raises(ConfigError, match="missing required key") as info:
        parse_config("time.t_max = 1\n")
    assert info.value.key == "time.tau"
    assert info.value.line is None


@pytest.mark.parametrize(
    "text, message",
    [
        ("time.tau 1/16", "section.key = value"),
        ("tau = 1/16", "dotted"),
        ("solver.tau = 1/16", "unknown section"),
        ("time.tau = 1/16\ntime.tau = 1/8", "duplicate key"),
    ],
)
def test_line_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config("time.t_max = 1\n" + text + "\n")


def test_tau_must_divide_the_interval():
    with pytest.raises(ConfigError) as info:
        parse_config("time.tau = 0.3\ntime.t_max = 1\n")
    assert info.value.key == "time.tau"


def test_two_components_do_not_reach_3d():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "grid.dimension = 3\ngrid.M = 8\n")
    assert info.value.key == "field.components"


def test_axis_value_count_must_match_dimension():
    with pytest.raises(ConfigError, match="expected 1 or 2 values"):
        parse_config(MINIMAL + "grid.dimension = 2\ngrid.a = -1, -2, -3\n")


def test_klein_packet_needs_1d():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "grid.dimension = 2\ngrid.M = 8\ninitial.kind = klein_packet\n")
    assert info.value.key == "initial.kind"


def test_potential_dimension_is_checked():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "potential.kind = honeycomb\n")
    assert info.value.key == "potential.kind"


def test_convergence_ladder_must_divide_observation_times():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "convergence.taus = 1/8, 0.3\n")
    assert info.value.key == "convergence.taus"
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "convergence.taus = 1/8\nconvergence.observe_times = 0.3\n")
    assert info.value.key == "convergence.taus"


def test_dump_round_trip():
    config = parse_config(
        MINIMAL
        + """
        grid.a = -8
        grid.b = 8
        grid.M = 128
        potential.kind = custom
        potential.V_expr = cos(x) * exp(-t)
        convergence.taus = 1/8, 1/16
        convergence.schemes = s2, s4c
        output.prefix = results/run
        """
    )
    assert parse_config(dump_config(config)) == config


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(MINIMAL)
    assert load_config(path).time.t_max == 1.0
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")
