"""JSON study configs and CSV/JSON writers.

CSV files follow RFC 4180 with LF line endings; floats are written with
17 significant digits so identical inputs give byte-identical output.
Undefined values are written as ``NaN``.
"""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .homogenizer import EffectiveProperties, PerturbationProfile, ProfileKind
from .materials import (
    CONSTANT_NAMES,
    Laminate,
    Layer,
    MaterialError,
    PhaseProperties,
    PlaneAssumption,
    biphase_from_ratios,
    make_isotropic_phase,
)

SWEEP_PARAMETERS = ("rho_C", "rho_alpha", "rho_beta", "rho_K", "rho_D", "zeta")
RATIO_KEYS = SWEEP_PARAMETERS + ("nu_a", "nu_b", "alpha_b", "beta_b")
LOAD_KEYS = ("direction", "B", "R", "S", "m", "n", "p", "L", "xi_alpha", "xi_beta")
ISOTROPIC_KEYS = ("E", "nu", "alpha", "beta", "K", "D")


class ConfigError(ValueError):
    """Invalid study configuration; the message names the offending key and line."""


# --------------------------------------------------------------------- formatting

def format_value(value: Any) -> str:
    if value is None:
        return "NaN"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "NaN" if math.isnan(value) else format(float(value), ".17g")
    return str(value)


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _nan_to_none(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_none(v) for v in obj]
    return obj


def write_json(path: Path | str, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_nan_to_none(payload), indent=2, sort_keys=True, default=_json_default)
    path.write_text(text + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------- tables

EFFECTIVE_COLUMNS = CONSTANT_NAMES + ("K12", "D12", "C2211")


def effective_row(eff: EffectiveProperties) -> list:
    return [getattr(eff, name) for name in EFFECTIVE_COLUMNS]


def write_effective_csv(path, results: dict[str, EffectiveProperties]) -> Path:
    return write_csv(path, ("method",) + EFFECTIVE_COLUMNS, ([m] + effective_row(e) for m, e in results.items()))


def write_profiles_csv(path, profiles: dict[ProfileKind, PerturbationProfile], samples: int = 513) -> Path:
    xi = np.linspace(0.0, 1.0, samples)
    # the last sample sits on the cell edge; evaluate it as the periodic image of xi = 0
    kinds = [k for k in ProfileKind if k in profiles]
    cols = [profiles[k](xi) for k in kinds]
    return write_csv(path, ["xi2"] + [k.value for k in kinds], zip(xi, *cols))


def write_macro_csv(path, macro, samples: int = 512) -> Path:
    ld = macro.load
    s = np.arange(samples) / samples
    x = s * ld.L

    def safe(fn):
        try:
            return fn(x)
        except ValueError:
            return np.full(samples, math.nan)

    return write_csv(path, ("x_over_L", "U_star", "Theta_star", "Upsilon_star"),
                     zip(s, safe(macro.U_star), safe(macro.Theta_star), safe(macro.Upsilon_star)))


def write_micro_csv(path, micro) -> Path:
    g = micro.grid
    return write_csv(path, ("x_over_L", "u", "theta", "eta", "sigma22", "q", "j"),
                     zip(g.x / g.L, micro.u, micro.theta, micro.eta, micro.sigma, micro.q, micro.j))


def write_upscaled_csv(path, micro, fields) -> Path:
    g = micro.grid
    return write_csv(path, ("x_over_L", "U", "Theta", "Upsilon"), zip(g.x / g.L, *fields))


# --------------------------------------------------------------------- configs

def _locate(text: str, key: str) -> str:
    """Line number of the first occurrence of ``"key"`` in the raw config."""
    if not text:
        return ""
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if not m:
        return ""
    return f" (line {text.count(chr(10), 0, m.start()) + 1})"


class _Ctx:
    def __init__(self, text: str = ""):
        self.text = text

    def fail(self, path: str, message: str) -> ConfigError:
        key = path.rsplit(".", 1)[-1].split("[")[0]
        return ConfigError(f"{path}{_locate(self.text, key)}: {message}")

    def number(self, obj: dict, key: str, path: str, default=None, positive=False) -> float:
        if key not in obj:
            if default is None:
                raise self.fail(f"{path}.{key}", "missing required number")
            return default
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise self.fail(f"{path}.{key}", f"expected a finite number, got {v!r}")
        if positive and not v > 0:
            raise self.fail(f"{path}.{key}", f"must be positive, got {v!r}")
        return float(v)

    def mapping(self, obj: Any, path: str) -> dict:
        if not isinstance(obj, dict):
            raise self.fail(path, f"expected an object, got {type(obj).__name__}")
        return obj

    def no_extra(self, obj: dict, allowed: Iterable[str], path: str) -> None:
        extra = sorted(set(obj) - set(allowed))
        if extra:
            raise self.fail(f"{path}.{extra[0]}", f"unknown key (allowed: {', '.join(allowed)})")


def _assumption(ctx: _Ctx, value, path: str) -> PlaneAssumption:
    try:
        return PlaneAssumption(value)
    except ValueError:
        raise ctx.fail(path, f"expected 'plane-stress' or 'plane-strain', got {value!r}") from None


def parse_laminate(data: dict, text: str = "", path: str = "laminate") -> Laminate:
    """Build a laminate from a descriptor or from a ``ratios`` block.

    Material admissibility failures propagate as :class:`MaterialError`.
    """
    ctx = _Ctx(text)
    data = ctx.mapping(data, path)
    assumption = _assumption(ctx, data.get("assumption", "plane-stress"), f"{path}.assumption")
    epsilon = ctx.number(data, "epsilon", path, default=1.0, positive=True)
    if "ratios" in data:
        ctx.no_extra(data, ("ratios", "assumption", "epsilon"), path)
        ratios = ctx.mapping(data["ratios"], f"{path}.ratios")
        ctx.no_extra(ratios, RATIO_KEYS, f"{path}.ratios")
        kwargs = {k: ctx.number(ratios, k, f"{path}.ratios") for k in ratios}
        return biphase_from_ratios(**kwargs, assumption=assumption, epsilon=epsilon)

    ctx.no_extra(data, ("layers", "assumption", "epsilon"), path)
    layers_raw = data.get("layers")
    if not isinstance(layers_raw, list) or not layers_raw:
        raise ctx.fail(f"{path}.layers", "expected a non-empty list of layers")
    layers = []
    for i, raw in enumerate(layers_raw):
        lp = f"{path}.layers[{i}]"
        raw = ctx.mapping(raw, lp)
        ctx.no_extra(raw, ("fraction", "phase"), lp)
        fraction = ctx.number(raw, "fraction", lp, positive=True)
        phase_raw = ctx.mapping(raw.get("phase"), f"{lp}.phase")
        if set(phase_raw) == {"isotropic"}:
            iso = ctx.mapping(phase_raw["isotropic"], f"{lp}.phase.isotropic")
            ctx.no_extra(iso, ISOTROPIC_KEYS, f"{lp}.phase.isotropic")
            vals = {k: ctx.number(iso, k, f"{lp}.phase.isotropic", default=d)
                    for k, d in zip(ISOTROPIC_KEYS, (None, None, 0.0, 0.0, 1.0, 1.0))}
            phase = make_isotropic_phase(**vals, assumption=assumption)
        elif set(phase_raw) == {"orthotropic"}:
            ortho = ctx.mapping(phase_raw["orthotropic"], f"{lp}.phase.orthotropic")
            ctx.no_extra(ortho, CONSTANT_NAMES, f"{lp}.phase.orthotropic")
            vals = {k: ctx.number(ortho, k, f"{lp}.phase.orthotropic") for k in CONSTANT_NAMES}
            phase = PhaseProperties(**vals)
        else:
            raise ctx.fail(f"{lp}.phase", "expected exactly one of 'isotropic' or 'orthotropic'")
        layers.append(Layer(phase, fraction))
    return Laminate(tuple(layers), epsilon, assumption)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    fixed: dict = field(default_factory=dict)
    assumption: PlaneAssumption = PlaneAssumption.PLANE_STRESS


@dataclass(frozen=True)
class CompareSpec:
    load: dict
    L_over_epsilon: int = 10
    nodes_per_layer: int = 64
    samples: int = 512


@dataclass
class StudyConfig:
    laminate_data: Optional[dict] = None
    sweep: Optional[SweepSpec] = None
    compare: Optional[CompareSpec] = None
    out: Optional[str] = None
    text: str = ""

    def laminate(self) -> Laminate:
        if self.laminate_data is None:
            raise ConfigError("laminate: missing required block")
        return parse_laminate(self.laminate_data, self.text)


def _grid_values(ctx: _Ctx, grid: dict, path: str) -> tuple[float, ...]:
    if "values" in grid:
        ctx.no_extra(grid, ("values",), path)
        raw = grid["values"]
        if not isinstance(raw, list) or not raw:
            raise ctx.fail(f"{path}.values", "expected a non-empty list of numbers")
        values = [ctx.number({"v": v}, "v", f"{path}.values[{i}]") for i, v in enumerate(raw)]
    else:
        ctx.no_extra(grid, ("start", "stop", "num", "spacing"), path)
        start = ctx.number(grid, "start", path, positive=True)
        stop = ctx.number(grid, "stop", path, positive=True)
        num = grid.get("num")
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ctx.fail(f"{path}.num", f"expected a positive integer, got {num!r}")
        spacing = grid.get("spacing", "log")
        if spacing == "log":
            values = np.geomspace(start, stop, num).tolist()
        elif spacing == "linear":
            values = np.linspace(start, stop, num).tolist()
        else:
            raise ctx.fail(f"{path}.spacing", f"expected 'log' or 'linear', got {spacing!r}")
    for i, v in enumerate(values):
        if not (math.isfinite(v) and v > 0):
            raise ctx.fail(f"{path}.values[{i}]", f"sweep values must be positive and finite, got {v!r}")
    return tuple(values)


def parse_config(data: dict, text: str = "") -> StudyConfig:
    ctx = _Ctx(text)
    data = ctx.mapping(data, "config")
    ctx.no_extra(data, ("laminate", "sweep", "compare", "out"), "config")
    cfg = StudyConfig(laminate_data=data.get("laminate"), text=text)
    if cfg.laminate_data is not None:
        ctx.mapping(cfg.laminate_data, "laminate")
    if "out" in data:
        if not isinstance(data["out"], str):
            raise ctx.fail("out", "expected a directory path string")
        cfg.out = data["out"]

    if "sweep" in data:
        sw = ctx.mapping(data["sweep"], "sweep")
        ctx.no_extra(sw, ("parameter", "grid", "fixed", "assumption"), "sweep")
        param = sw.get("parameter")
        if param not in SWEEP_PARAMETERS:
            raise ctx.fail("sweep.parameter", f"expected one of {', '.join(SWEEP_PARAMETERS)}, got {param!r}")
        values = _grid_values(ctx, ctx.mapping(sw.get("grid"), "sweep.grid"), "sweep.grid")
        fixed = ctx.mapping(sw.get("fixed", {}), "sweep.fixed")
        ctx.no_extra(fixed, RATIO_KEYS, "sweep.fixed")
        if param in fixed:
            raise ctx.fail(f"sweep.fixed.{param}", "the swept parameter cannot also be fixed")
        fixed = {k: ctx.number(fixed, k, "sweep.fixed") for k in fixed}
        assumption = _assumption(ctx, sw.get("assumption", "plane-stress"), "sweep.assumption")
        cfg.sweep = SweepSpec(param, values, fixed, assumption)

    if "compare" in data:
        cp = ctx.mapping(data["compare"], "compare")
        ctx.no_extra(cp, ("load", "L_over_epsilon", "nodes_per_layer", "samples"), "compare")
        load = ctx.mapping(cp.get("load", {}), "compare.load")
        ctx.no_extra(load, LOAD_KEYS, "compare.load")
        load = {k: ctx.number(load, k, "compare.load") for k in load}
        if load.get("direction", 2) != 2:
            raise ctx.fail("compare.load.direction", "heterogeneous comparison is limited to direction 2")
        ints = {}
        for key, default, lo in (("L_over_epsilon", 10, 2), ("nodes_per_layer", 64, 4), ("samples", 512, 2)):
            v = cp.get(key, default)
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                raise ctx.fail(f"compare.{key}", f"expected an integer >= {lo}, got {v!r}")
            ints[key] = v
        cfg.compare = CompareSpec(load, **ints)
    return cfg


def load_config(path: Path | str) -> StudyConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(data, text)


__all__ = [
    "ConfigError", "CompareSpec", "StudyConfig", "SweepSpec", "MaterialError",
    "load_config", "parse_config", "parse_laminate", "write_csv", "write_json",
]
