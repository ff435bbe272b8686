"""RunConfig: INI round-trip, scenario presets, overrides, resolution."""

import dataclasses

import numpy as np
import pytest

from dirac1d.config import SCENARIOS, RunConfig
from dirac1d.disorder import MASS_STRENGTHS, POTENTIAL_STRENGTHS
from dirac1d.errors import ConfigError


def test_defaults():
    cfg = RunConfig()
    assert cfg.seed == 12345
    assert cfg.out == "runs"
    assert cfg.workers == 1
    assert cfg.plots is True
    assert cfg.grid_n is None and cfg.grid_extent is None
    assert cfg.scenario == "static"
    assert cfg.sigma is None and cfg.mass is None
    assert cfg.x_center == 0.0
    assert cfg.quad_window == 8.0 and cfg.quad_nodes == 4097
    assert cfg.order == "auto:1e-14"
    assert cfg.dt is None and cfg.a_target is None
    assert cfg.t_total == 0.4 and cfg.snapshots == 81
    assert cfg.kind == "potential" and cfg.strengths is None
    assert cfg.samples == 100
    assert cfg.t_star == pytest.approx(0.71064)
    assert cfg.mean_mass == 500.0 and cfg.mean_potential == 0.0
    assert cfg.series_points == 65
    assert cfg.disorder_sigma == 0.04


def test_ini_round_trip_defaults():
    # Optional fields render as empty strings and must come back as None.
    cfg = RunConfig()
    again = RunConfig.from_ini(cfg.to_ini(), is_text=True)
    assert again == cfg


def test_ini_round_trip_everything_set():
    # repr-rendered floats and complexes round-trip exactly.
    cfg = RunConfig(
        seed=777,
        out="elsewhere",
        workers=4,
        plots=False,
        grid_n=512,
        grid_extent=2.5,
        scenario="custom",
        sigma=0.07,
        k1=3.25,
        k2=-1.5,
        amp_upper=0.6 + 0.0j,
        amp_lower=0.0 - 0.8j,
        x_center=-0.125,
        mass=123.456,
        quad_window=6.0,
        quad_nodes=2049,
        order="fixed:23",
        dt=0.001,
        a_target=0.05,
        t_total=0.9,
        snapshots=33,
        kind="mass",
        strengths=(0.0, 1.0, 2.5, 7.0),
        samples=50,
        t_star=0.3,
        mean_mass=400.0,
        mean_potential=1.0,
        series_points=17,
        disorder_sigma=0.08,
    )
    again = RunConfig.from_ini(cfg.to_ini(), is_text=True)
    assert again == cfg


def test_from_ini_parses_value_forms():
    text = """
[run]
plots = off
workers = 3

[packet]
amp_upper = 0.6 + 0.8j
scenario = custom

[disorder]
strengths = 0, 1, 2.5,
"""
    cfg = RunConfig.from_ini(text, is_text=True)
    assert cfg.plots is False
    assert cfg.workers == 3
    assert cfg.amp_upper == 0.6 + 0.8j
    assert cfg.strengths == (0.0, 1.0, 2.5)
    # Untouched fields keep their defaults.
    assert cfg.seed == 12345


def test_from_ini_reads_files(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[run]\nseed = 9\n")
    assert RunConfig.from_ini(path).seed == 9
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.from_ini(tmp_path / "missing.ini")


def test_unknown_entries_rejected():
    with pytest.raises(ConfigError, match="unknown config entry"):
        RunConfig.from_ini("[run]\nbogus = 3\n", is_text=True)
    # A key filed under the wrong section is just as unknown.
    with pytest.raises(ConfigError, match="unknown config entry"):
        RunConfig.from_ini("[run]\nsigma = 0.1\n", is_text=True)
    with pytest.raises(ConfigError, match="unknown config entry"):
        RunConfig.from_ini("[misc]\nx = 1\n", is_text=True)


def test_bad_values_rejected():
    with pytest.raises(ConfigError, match="bad value"):
        RunConfig.from_ini("[run]\nseed = abc\n", is_text=True)
    with pytest.raises(ConfigError, match="bad value"):
        RunConfig.from_ini("[run]\nplots = maybe\n", is_text=True)
    with pytest.raises(ConfigError, match="malformed"):
        RunConfig.from_ini("seed = 1\n", is_text=True)


def test_apply_overrides():
    cfg = RunConfig()
    out = cfg.apply_overrides(seed=7, sigma=0.2)
    assert out is cfg
    assert cfg.seed == 7 and cfg.sigma == 0.2
    # None means "not given on the command line", so it never clobbers.
    cfg.apply_overrides(seed=None)
    assert cfg.seed == 7
    with pytest.raises(ConfigError, match="unknown config field"):
        cfg.apply_overrides(gridn=256)


def test_header_items():
    cfg = RunConfig(strengths=(0.0, 2.0), grid_n=None)
    items = dict(cfg.header_items())
    assert items["run.seed"] == "12345"
    assert items["run.plots"] == "true"
    assert items["grid.grid_n"] == ""
    assert items["disorder.strengths"] == "0.0,2.0"
    # One header entry per config field, section-qualified.
    assert len(items) == len(dataclasses.fields(RunConfig))
    assert all("." in key for key in items)


def test_scenario_presets_resolve():
    expected = {
        "static": (0.1, 0.0, 0.0, 30.0),
        "opposite": (0.1, 10.0, 10.0, 30.0),
        "parallel": (0.1, 10.0, -10.0, 50.0),
        "spreading": (0.04, 0.0, 0.0, 500.0),
    }
    assert set(SCENARIOS) == set(expected)
    r2 = 1.0 / np.sqrt(2.0)
    for name, (sigma, k1, k2, mass) in expected.items():
        spec, m = RunConfig(scenario=name).resolved_packet()
        assert spec.sigma == sigma
        assert spec.k1 == k1 and spec.k2 == k2
        assert m == mass
        assert abs(spec.Sigma0) ** 2 + abs(spec.X0) ** 2 == pytest.approx(1.0)
        if name == "spreading":
            assert spec.Sigma0 == 1.0 and spec.X0 == 0.0
        else:
            assert spec.Sigma0 == pytest.approx(r2)
            assert spec.X0 == pytest.approx(r2)


def test_explicit_fields_override_preset():
    cfg = RunConfig(scenario="static", sigma=0.2, mass=80.0, x_center=0.25)
    spec, mass = cfg.resolved_packet()
    assert spec.sigma == 0.2
    assert mass == 80.0
    assert spec.x_center == 0.25
    assert spec.k1 == 0.0  # untouched preset entry survives


def test_custom_scenario_requires_every_field():
    full = dict(sigma=0.1, k1=0.0, k2=0.0, amp_upper=3.0, amp_lower=4.0, mass=30.0)
    for missing in full:
        partial = {k: v for k, v in full.items() if k != missing}
        cfg = RunConfig(scenario="custom", **partial)
        with pytest.raises(ConfigError, match="custom requires"):
            cfg.resolved_packet()
    spec, mass = RunConfig(scenario="custom", **full).resolved_packet()
    # Amplitudes are rescaled onto the unit sphere, (3,4) -> (0.6, 0.8).
    assert spec.Sigma0 == pytest.approx(0.6)
    assert spec.X0 == pytest.approx(0.8)
    assert mass == 30.0


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError, match="unknown scenario"):
        RunConfig(scenario="wiggly").resolved_packet()


def test_resolved_grid():
    grid = RunConfig().resolved_grid()
    assert grid.n_points == 1024
    assert grid.extent == 1.0
    custom = RunConfig(grid_n=256, grid_extent=2.0).resolved_grid()
    assert custom.n_points == 256
    assert custom.d_x == pytest.approx(4.0 / 255)


def test_resolved_quadrature():
    quad = RunConfig().resolved_quadrature()
    assert quad.n_nodes == 4097
    assert quad.window == 8.0
    wider = RunConfig(quad_nodes=513, quad_window=10.0).resolved_quadrature()
    assert wider.n_nodes == 513 and wider.window == 10.0
    # Spec guards pass through: even node counts are a config error.
    with pytest.raises(ConfigError, match="odd node count"):
        RunConfig(quad_nodes=512).resolved_quadrature()


def test_resolved_strengths():
    assert RunConfig().resolved_strengths() == POTENTIAL_STRENGTHS
    assert RunConfig(kind="mass").resolved_strengths() == MASS_STRENGTHS
    explicit = RunConfig(kind="mass", strengths=(0.0, 3.0))
    assert explicit.resolved_strengths() == (0.0, 3.0)
