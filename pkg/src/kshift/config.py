"""Flat ``key = value`` scenario files.

One scenario per file; ``#`` starts a comment. Keys mirror the fields of
:class:`~kshift.evolution.SimConfig` plus a few analysis settings. Sweep files
use the same keys and add ``sweep.<key> = v1, v2, ...`` axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .chemo import ChemoParams, Grid
from .environment import EnvironmentProfile, ProfileKind
from .evolution import Frame, InitialKind, SimConfig

__all__ = ["ConfigError", "Scenario", "SweepSpec", "parse_text", "load_scenario", "load_sweep",
           "scenario_from_mapping", "KEYS"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _int(s):
    return int(s)


def _pair(s):
    parts = [p for p in s.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {s!r}")
    return (_float(parts[0]), _float(parts[1]))


def _choice(*options):
    def parse(s):
        s = s.strip().lower()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {s!r}")
        return s
    return parse


def _opt_float(s):
    return None if s.strip().lower() in ("", "none", "auto") else _float(s)


KEYS = {
    "x_min": _float,
    "x_max": _float,
    "h": _float,
    "n_nodes": _int,
    "profile": _choice("constant", "tanh", "bump"),
    "r_const": _float,
    "r_minus": _float,
    "r_plus": _float,
    "r_peak": _float,
    "width": _float,
    "center": _float,
    "shift_speed": _float,
    "chi": _float,
    "nu": _float,
    "mu": _float,
    "b": _float,
    "t_end": _float,
    "cfl_safety": _float,
    "dt": _opt_float,
    "snapshot_dt": _opt_float,
    "frame": _choice("lab", "comoving"),
    "check_every": _int,
    "u0_kind": _choice("compact_bump", "right_half_line", "constant"),
    "u0_amplitude": _float,
    "u0_support": _pair,
    "front_level": _opt_float,
    "persist_halfwidth": _float,
    "lambda_tol": _float,
    "output_stride": _int,
}

REQUIRED = ("x_min", "x_max", "profile", "chi", "nu", "mu", "b", "t_end")


def parse_text(text: str, path: str | None = None, allow_sweep: bool = False):
    """Parse ``key = value`` lines. Returns ``(values, raw, axes)``; ``raw`` keeps
    the original strings and ``axes`` the sweep lists (raw strings per value)."""
    values: dict[str, object] = {}
    raw: dict[str, str] = {}
    axes: dict[str, list[str]] = {}
    extra: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno, path)
        key, _, val = body.partition("=")
        key, val = key.strip().lower(), val.strip()
        if not key:
            raise ConfigError("empty key", lineno, path)
        if allow_sweep and key.startswith("sweep."):
            name = key[len("sweep."):]
            if name not in KEYS:
                raise ConfigError(f"unknown sweep axis {name!r}", lineno, path)
            items = [v.strip() for v in val.split(",") if v.strip()] if name != "u0_support" \
                else [v.strip() for v in val.split(";") if v.strip()]
            if not items:
                raise ConfigError(f"sweep axis {name!r} has no values", lineno, path)
            for item in items:
                try:
                    KEYS[name](item)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {name}: {exc}", lineno, path) from None
            axes[name] = items
            continue
        if allow_sweep and key in ("template", "max_cells"):
            extra[key] = (val, lineno)
            continue
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, path)
        try:
            values[key] = KEYS[key](val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno, path) from None
        raw[key] = val
    if allow_sweep:
        return values, raw, axes, extra
    return values, raw, axes


@dataclass(frozen=True)
class Scenario:
    sim: SimConfig
    front_level: float | None = None
    persist_halfwidth: float = 2.0
    lambda_tol: float = 1e-6
    output_stride: int = 1
    echo: tuple[tuple[str, str], ...] = ()

    def with_frame(self, frame: str | None) -> Scenario:
        if frame is None:
            return self
        return replace(self, sim=replace(self.sim, frame=Frame(frame)))


def scenario_from_mapping(values: dict, raw: dict | None = None, path: str | None = None) -> Scenario:
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}", None, path)
    try:
        if "h" in values and "n_nodes" in values:
            raise ValueError("give either h or n_nodes, not both")
        if "n_nodes" in values:
            grid = Grid(values["x_min"], values["x_max"], values["n_nodes"])
        else:
            grid = Grid.from_spacing(values["x_min"], values["x_max"], values.get("h", 0.1))

        kind = ProfileKind(values["profile"])
        common = dict(width=values.get("width", 1.0), center=values.get("center", 0.0),
                      shift_speed=values.get("shift_speed", 0.0))
        if kind is ProfileKind.CONSTANT:
            r = values.get("r_const", values.get("r_plus"))
            if r is None:
                raise ValueError("constant profile needs r_const")
            env = EnvironmentProfile.constant(r, shift_speed=common["shift_speed"])
        elif kind is ProfileKind.TANH:
            env = EnvironmentProfile.tanh(values.get("r_minus", -1.0), values.get("r_plus", 1.0), **common)
        else:
            env = EnvironmentProfile.bump(values.get("r_minus", -1.0), values.get("r_plus", -1.0),
                                          values.get("r_peak", 1.0), **common)

        params = ChemoParams(values["chi"], values["nu"], values["mu"], values["b"])
        sim = SimConfig(
            grid=grid,
            env=env,
            params=params,
            t_end=values["t_end"],
            cfl_safety=values.get("cfl_safety", 0.9),
            u0_kind=InitialKind(values.get("u0_kind", "compact_bump")),
            u0_amplitude=values.get("u0_amplitude", 1.0),
            u0_support=values.get("u0_support", (-5.0, 5.0)),
            frame=Frame(values.get("frame", "lab")),
            snapshot_dt=values.get("snapshot_dt"),
            dt=values.get("dt"),
            check_every=values.get("check_every", 100),
        )
        stride = values.get("output_stride", 1)
        if stride < 1:
            raise ValueError("output_stride must be >= 1")
        return Scenario(
            sim=sim,
            front_level=values.get("front_level"),
            persist_halfwidth=values.get("persist_halfwidth", 2.0),
            lambda_tol=values.get("lambda_tol", 1e-6),
            output_stride=stride,
            echo=tuple(sorted((raw or {}).items())),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), None, path) from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, str(path)) from None
    values, raw, _ = parse_text(text, str(path))
    return scenario_from_mapping(values, raw, str(path))


@dataclass(frozen=True)
class SweepSpec:
    base_values: dict
    base_raw: dict
    axes: dict  # name -> list of raw strings, in file order
    max_cells: int = 256

    def cells(self):
        """Cross product of the axes, first axis varying slowest."""
        names = list(self.axes)
        if not names:
            yield {}
            return
        import itertools

        for combo in itertools.product(*(self.axes[n] for n in names)):
            yield dict(zip(names, combo))

    @property
    def n_cells(self) -> int:
        n = 1
        for vals in self.axes.values():
            n *= len(vals)
        return n

    def scenario(self, overrides: dict) -> Scenario:
        values = dict(self.base_values)
        raw = dict(self.base_raw)
        for key, sval in overrides.items():
            values[key] = KEYS[key](sval)
            raw[key] = sval
        return scenario_from_mapping(values, raw)


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec: {exc}", None, str(path)) from None
    values, raw, axes, extra = parse_text(text, str(path), allow_sweep=True)
    if "template" in extra:
        tpath = (path.parent / extra["template"][0]).resolve()
        try:
            ttext = tpath.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read template: {exc}", extra["template"][1], str(path)) from None
        tvalues, traw, _ = parse_text(ttext, str(tpath))
        tvalues.update(values)
        traw.update(raw)
        values, raw = tvalues, traw
    max_cells = 256
    if "max_cells" in extra:
        try:
            max_cells = int(extra["max_cells"][0])
        except ValueError:
            raise ConfigError("max_cells must be an integer", extra["max_cells"][1], str(path)) from None
    spec = SweepSpec(values, raw, axes, max_cells)
    if spec.n_cells > max_cells:
        raise ConfigError(f"sweep has {spec.n_cells} cells, above max_cells = {max_cells}", None, str(path))
    # validate the template by building the first cell
    spec.scenario(next(spec.cells()))
    return spec
