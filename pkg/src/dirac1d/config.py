"""Run configuration: defaults, scenario presets, INI round-trip.

A RunConfig carries every physics and bookkeeping knob of a CLI run.
It loads from an INI file (sections below), is overridden field-wise by
command-line flags, and is echoed verbatim into the header of every
output file so a result can be reproduced from its own header.

Scenario presets fill the packet and mass unless given explicitly:

    static     sigma=0.1, k1=k2=0,   equal amplitudes, m=30
    opposite   sigma=0.1, k1=k2=10,  equal amplitudes, m=30
    parallel   sigma=0.1, k1=+10, k2=-10, equal amplitudes, m=50
    spreading  sigma=0.04, k=0, upper-only, m=500 (disorder baseline)
    custom     every packet field must be set by hand
"""

import configparser
import io
from dataclasses import dataclass, fields

import numpy as np

from .disorder import MASS_STRENGTHS, POTENTIAL_STRENGTHS
from .errors import ConfigError
from .grid import GaussianSpec, Grid1D

_R2 = 1.0 / np.sqrt(2.0)

SCENARIOS = {
    "static": dict(sigma=0.1, k1=0.0, k2=0.0, amp_upper=_R2, amp_lower=_R2, mass=30.0),
    "opposite": dict(sigma=0.1, k1=10.0, k2=10.0, amp_upper=_R2, amp_lower=_R2, mass=30.0),
    "parallel": dict(sigma=0.1, k1=10.0, k2=-10.0, amp_upper=_R2, amp_lower=_R2, mass=50.0),
    "spreading": dict(sigma=0.04, k1=0.0, k2=0.0, amp_upper=1.0, amp_lower=0.0, mass=500.0),
}

# (section, field, type tag, default); "opt_*" fields may be None,
# meaning "use the scenario preset / per-command default".
_FIELDS = (
    ("run", "seed", "int", 12345),
    ("run", "out", "str", "runs"),
    ("run", "workers", "int", 1),
    ("run", "plots", "bool", True),
    ("grid", "grid_n", "opt_int", None),
    ("grid", "grid_extent", "opt_float", None),
    ("packet", "scenario", "str", "static"),
    ("packet", "sigma", "opt_float", None),
    ("packet", "k1", "opt_float", None),
    ("packet", "k2", "opt_float", None),
    ("packet", "amp_upper", "opt_complex", None),
    ("packet", "amp_lower", "opt_complex", None),
    ("packet", "x_center", "float", 0.0),
    ("packet", "mass", "opt_float", None),
    ("quadrature", "quad_window", "float", 8.0),
    ("quadrature", "quad_nodes", "int", 4097),
    ("evolution", "order", "str", "auto:1e-14"),
    ("evolution", "dt", "opt_float", None),
    ("evolution", "a_target", "opt_float", None),
    ("evolution", "t_total", "float", 0.4),
    ("evolution", "snapshots", "int", 81),
    ("disorder", "kind", "str", "potential"),
    ("disorder", "strengths", "opt_floats", None),
    ("disorder", "samples", "int", 100),
    ("disorder", "t_star", "float", 0.71064),
    ("disorder", "mean_mass", "float", 500.0),
    ("disorder", "mean_potential", "float", 0.0),
    ("disorder", "series_points", "int", 65),
    ("disorder", "disorder_sigma", "float", 0.04),
)


def _parse(tag, text):
    text = text.strip()
    if tag.startswith("opt_"):
        if text == "":
            return None
        tag = tag[4:]
    if tag == "int":
        return int(text)
    if tag == "float":
        return float(text)
    if tag == "complex":
        return complex(text.replace(" ", ""))
    if tag == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if tag == "floats":
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    return text  # str


def _render(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, (float, complex, int)):
        return repr(value)
    return str(value)


@dataclass
class RunConfig:
    seed: int = 12345
    out: str = "runs"
    workers: int = 1
    plots: bool = True
    grid_n: int = None
    grid_extent: float = None
    scenario: str = "static"
    sigma: float = None
    k1: float = None
    k2: float = None
    amp_upper: complex = None
    amp_lower: complex = None
    x_center: float = 0.0
    mass: float = None
    quad_window: float = 8.0
    quad_nodes: int = 4097
    order: str = "auto:1e-14"
    dt: float = None
    a_target: float = None
    t_total: float = 0.4
    snapshots: int = 81
    kind: str = "potential"
    strengths: tuple = None
    samples: int = 100
    t_star: float = 0.71064
    mean_mass: float = 500.0
    mean_potential: float = 0.0
    series_points: int = 65
    disorder_sigma: float = 0.04

    @staticmethod
    def from_ini(path_or_text, is_text: bool = False) -> "RunConfig":
        parser = configparser.ConfigParser()
        try:
            if is_text:
                parser.read_string(path_or_text)
            else:
                with open(path_or_text) as fh:
                    parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None

        known = {(s, f): t for s, f, t, _ in _FIELDS}
        cfg = RunConfig()
        for section in parser.sections():
            for key, raw in parser.items(section):
                tag = known.get((section, key))
                if tag is None:
                    raise ConfigError(f"unknown config entry [{section}] {key}")
                try:
                    setattr(cfg, key, _parse(tag, raw))
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{section}] {key}: {exc}") from None
        return cfg

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        for section, field, _tag, _default in _FIELDS:
            if not parser.has_section(section):
                parser.add_section(section)
            parser.set(section, field, _render(getattr(self, field)))
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def apply_overrides(self, **overrides) -> "RunConfig":
        valid = {f.name for f in fields(self)}
        for key, value in overrides.items():
            if key not in valid:
                raise ConfigError(f"unknown config field {key!r}")
            if value is not None:
                setattr(self, key, value)
        return self

    def header_items(self):
        """Ordered (section.field, rendered value) pairs for file headers."""
        return [
            (f"{section}.{field}", _render(getattr(self, field)))
            for section, field, _t, _d in _FIELDS
        ]

    # Resolution helpers: fill scenario presets / per-command defaults.

    def resolved_packet(self):
        """(GaussianSpec, mass) after applying the scenario preset."""
        if self.scenario not in SCENARIOS and self.scenario != "custom":
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; pick one of "
                f"{sorted(SCENARIOS)} or custom"
            )
        preset = dict(SCENARIOS.get(self.scenario, {}))
        merged = {}
        for name in ("sigma", "k1", "k2", "amp_upper", "amp_lower", "mass"):
            value = getattr(self, name)
            if value is None:
                value = preset.get(name)
            if value is None:
                raise ConfigError(f"scenario custom requires {name} to be set")
            merged[name] = value
        spec = GaussianSpec.normalized(
            sigma=merged["sigma"],
            k1=merged["k1"],
            k2=merged["k2"],
            Sigma0=complex(merged["amp_upper"]),
            X0=complex(merged["amp_lower"]),
            x_center=self.x_center,
        )
        return spec, float(merged["mass"])

    def resolved_grid(self) -> Grid1D:
        n = 1024 if self.grid_n is None else self.grid_n
        extent = 1.0 if self.grid_extent is None else self.grid_extent
        return Grid1D(n, extent)

    def resolved_quadrature(self):
        from .free import QuadratureSpec

        return QuadratureSpec(n_nodes=self.quad_nodes, window=self.quad_window)

    def resolved_strengths(self) -> tuple:
        if self.strengths is not None:
            return self.strengths
        if self.kind == "potential":
            return POTENTIAL_STRENGTHS
        return MASS_STRENGTHS
