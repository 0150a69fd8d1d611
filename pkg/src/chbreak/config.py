"""Run configuration: INI-style plain-text files, strictly validated.

Sections and keys (defaults in parentheses):

    [grid]          L, n
    [equation]      lambda (0.0)
    [initial_data]  kind = zero|constant|gaussian|gaussian_slope_seed|
                    snoidal|from_file, plus kind-specific parameters
    [control]       t_end, cfl (0.3), dt_max (0.05), dt_min (1e-9),
                    record_every (0.05), dealias (true),
                    slope_ceiling (1e3), fixed_dt (none),
                    refine_min_slope (false)
    [outputs]       directory (out), formats (csv,json)

Unknown sections or keys are rejected so config typos fail loudly
before any computation starts.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .elliptic import fit_traveling_wave, snoidal_profile
from .equation import EquationParams
from .spectral import GridField, PeriodicGrid
from .timestepper import StepControl


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


_KNOWN_KEYS = {
    "grid": {"l", "n"},
    "equation": {"lambda"},
    "initial_data": {"kind", "value", "amplitude", "width", "center",
                     "k", "period", "mean", "path"},
    "control": {"t_end", "cfl", "dt_max", "dt_min", "record_every",
                "dealias", "slope_ceiling", "fixed_dt", "refine_min_slope"},
    "outputs": {"directory", "formats"},
}

_KINDS = {"zero", "constant", "gaussian", "gaussian_slope_seed",
          "snoidal", "from_file"}


@dataclass
class RunConfig:
    """Validated run description, ready to build fields and controls."""

    grid_L: float
    grid_n: int
    lam: float
    kind: str
    data_params: dict
    control: StepControl
    out_dir: str = "out"
    formats: tuple = ("csv", "json")

    def make_grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.grid_L, self.grid_n)

    def make_params(self) -> EquationParams:
        return EquationParams(self.lam)

    def make_initial_field(self) -> GridField:
        return build_initial_field(self.make_grid(), self.kind, self.data_params)


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key '{key}'")
        return default
    raw = section[key]
    try:
        if conv is bool:
            low = raw.strip().lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}': {raw!r}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a config file; raises ConfigError on any defect."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(str(path))
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]")

    if "grid" not in parser:
        raise ConfigError("missing [grid] section")
    g = parser["grid"]
    L = _get(g, "l", float, required=True)
    n = _get(g, "n", int, required=True)

    lam = 0.0
    if "equation" in parser:
        lam = _get(parser["equation"], "lambda", float, default=0.0)

    if "initial_data" not in parser:
        raise ConfigError("missing [initial_data] section")
    d = parser["initial_data"]
    kind = _get(d, "kind", str, required=True)
    if kind not in _KINDS:
        raise ConfigError(f"unknown initial_data kind '{kind}'")
    data_params = {k: d[k] for k in d if k != "kind"}

    if "control" not in parser:
        raise ConfigError("missing [control] section")
    c = parser["control"]
    try:
        control = StepControl(
            t_end=_get(c, "t_end", float, required=True),
            cfl=_get(c, "cfl", float, default=0.3),
            dt_max=_get(c, "dt_max", float, default=0.05),
            dt_min=_get(c, "dt_min", float, default=1e-9),
            record_every=_get(c, "record_every", float, default=0.05),
            dealias=_get(c, "dealias", bool, default=True),
            slope_ceiling=_get(c, "slope_ceiling", float, default=1e3),
            fixed_dt=_get(c, "fixed_dt", float, default=None),
            refine_min_slope=_get(c, "refine_min_slope", bool, default=False),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid control parameters: {exc}") from exc

    out_dir, formats = "out", ("csv", "json")
    if "outputs" in parser:
        o = parser["outputs"]
        out_dir = _get(o, "directory", str, default="out")
        formats = tuple(
            f.strip() for f in _get(o, "formats", str, default="csv,json").split(","))
        for f in formats:
            if f not in ("csv", "json"):
                raise ConfigError(f"unknown output format '{f}'")

    try:
        PeriodicGrid(L, n)
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc

    cfg = RunConfig(grid_L=L, grid_n=n, lam=lam, kind=kind,
                    data_params=data_params, control=control,
                    out_dir=out_dir, formats=formats)
    _validate_data_params(cfg)
    return cfg


def _need(params: dict, key: str, conv=float):
    if key not in params:
        raise ConfigError(f"initial_data kind requires '{key}'")
    try:
        return conv(params[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}': {params[key]!r}") from exc


def _validate_data_params(cfg: RunConfig) -> None:
    build_initial_field(cfg.make_grid(), cfg.kind, cfg.data_params, dry_run=True)


def build_initial_field(grid: PeriodicGrid, kind: str, params: dict,
                        dry_run: bool = False) -> GridField | None:
    """Construct the initial field for a validated (kind, params) pair.

    With dry_run the parameters are checked (cheaply) without building
    profiles that need root-finding or file IO.
    """
    if kind == "zero":
        if dry_run:
            return None
        return GridField(grid, np.zeros(grid.n))
    if kind == "constant":
        value = _need(params, "value")
        if dry_run:
            return None
        return GridField(grid, np.full(grid.n, value))
    if kind in ("gaussian", "gaussian_slope_seed"):
        amp = _need(params, "amplitude")
        width = _need(params, "width") if "width" in params or kind == "gaussian_slope_seed" else 1.0
        center = float(params.get("center", 0.0))
        if width <= 0:
            raise ConfigError("width must be positive")
        if dry_run:
            return None
        return grid.sample(lambda x: amp * np.exp(-(((x - center) / width) ** 2)))
    if kind == "snoidal":
        k = _need(params, "k")
        period = float(params.get("period", grid.length))
        mean = float(params["mean"]) if "mean" in params else None
        if not (0 < k < 1):
            raise ConfigError("snoidal modulus k must lie in (0, 1)")
        if dry_run:
            return None
        wave = fit_traveling_wave(period, k, mean_level=mean)
        return snoidal_profile(wave, grid)
    if kind == "from_file":
        path = _need(params, "path", str)
        if dry_run:
            return None
        data = np.loadtxt(path, delimiter=",", comments="#")
        if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] != grid.n:
            raise ConfigError(
                f"snapshot file {path} does not match the {grid.n}-point grid")
        if not np.allclose(data[:, 0], grid.x, atol=1e-12 * max(1.0, grid.length)):
            raise ConfigError(f"snapshot file {path} sample points disagree with grid")
        return GridField(grid, data[:, 1])
    raise ConfigError(f"unknown initial_data kind '{kind}'")
