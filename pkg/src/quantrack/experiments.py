"""Experiment configuration: JSON documents describing plant, quantizer,
loop settings, controller design and Lissajous trajectory.

Example::

    {
      "plant": {"a": 10, "b": 1.7e7},
      "quantizer": {"delta": 1.0},
      "loop": {"dt": 1e-5, "t_end": 4.0, "record_stride": 10},
      "design": {"k0": 10, "k_resonant": 10, "k_first_order": 10,
                 "causality_pole_factor": 100},
      "trajectory": {"x0": 0, "y0": 0, "ax": 1, "ay": 1, "N": 30, "f": 1}
    }

``design`` may be replaced by ``controller`` with explicit per-axis
coefficients (ascending powers of s).  ``step_change`` is optional.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .lissajous import LissajousSpec, axis_references, plan_frequencies
from .pr_design import PRComposition, compose, synthesize_controller
from .quantization import UniformQuantizer
from .realization import realize
from .sim_loop import LoopConfig, apply_step_change
from .tf_algebra import RationalTransferFunction, tf

SCHEMA = {
    "plant": ({"a", "b"}, {"a", "b"}),
    "quantizer": ({"delta"}, {"delta"}),
    "loop": (
        {"dt", "t_end"},
        {"dt", "t_end", "record_stride", "artificial_quantization", "locate_events"},
    ),
    "design": (
        {"k0", "k_resonant", "k_first_order"},
        {"k0", "k_resonant", "k_first_order", "first_order_pole", "causality_pole_factor"},
    ),
    "controller": (set(), {"x", "y"}),
    "trajectory": ({"ax", "ay", "N", "f"}, {"x0", "y0", "ax", "ay", "N", "f", "axes"}),
    "step_change": ({"t_step"}, {"t_step", "new_center_x", "new_center_y"}),
}
REQUIRED = ("plant", "quantizer", "loop", "trajectory")
PRESETS = ("fig3_axis_x", "fig4_lissajous", "fig5_step", "ablation_fig1_loop", "printed_controllers")


def preset_names() -> tuple[str, ...]:
    return PRESETS


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("quantrack.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def _validate(doc: dict) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "config" in doc and "version" in doc:
        doc = doc["config"]  # a run manifest
    doc = copy.deepcopy(doc)
    unknown = set(doc) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    for name in REQUIRED:
        if name not in doc or not doc[name]:
            raise ConfigError(f"missing section: {name}")
    if ("design" in doc) == ("controller" in doc):
        raise ConfigError("exactly one of the sections 'design' or 'controller' is required")
    for name, body in doc.items():
        if not isinstance(body, dict):
            raise ConfigError(f"section {name!r} must be an object")
        required, allowed = SCHEMA[name]
        extra = set(body) - allowed
        if extra:
            raise ConfigError(f"unknown key(s) in {name}: {', '.join(sorted(extra))}")
        missing = required - set(body)
        if missing:
            raise ConfigError(f"missing key(s) in {name}: {', '.join(sorted(missing))}")
    return doc


@dataclass(frozen=True)
class AxisSetup:
    name: str
    plant: RationalTransferFunction
    controller: RationalTransferFunction
    target: RationalTransferFunction | None  # designed loop, None for explicit controllers
    loop: LoopConfig


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A validated experiment document."""

    doc: dict

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        cfg = cls(_validate(doc))
        cfg.build()  # re-validate every module-level invariant up front
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(doc)

    @classmethod
    def preset(cls, name: str) -> "ExperimentConfig":
        return cls.from_dict(load_preset(name))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.doc)

    def with_overrides(self, dt=None, t_end=None) -> "ExperimentConfig":
        doc = self.to_dict()
        if dt is not None:
            doc["loop"]["dt"] = float(dt)
        if t_end is not None:
            doc["loop"]["t_end"] = float(t_end)
        return ExperimentConfig.from_dict(doc)

    @property
    def lissajous(self) -> LissajousSpec:
        tr = {k: v for k, v in self.doc["trajectory"].items() if k != "axes"}
        return LissajousSpec(**tr)

    @property
    def axes(self) -> tuple[str, ...]:
        axes = tuple(self.doc["trajectory"].get("axes", ("x", "y")))
        if not axes or any(a not in ("x", "y") for a in axes) or len(set(axes)) != len(axes):
            raise ConfigError(f"trajectory.axes must be a non-empty subset of ['x', 'y'], got {axes}")
        return axes

    def build(self) -> dict[str, AxisSetup]:
        """Plant, controller and loop configuration for every configured axis."""
        try:
            return self._build()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def _build(self) -> dict[str, AxisSetup]:
        d = self.doc
        a, b = float(d["plant"]["a"]), float(d["plant"]["b"])
        plant = tf([b], [0.0, a, 1.0])
        plant_ss = realize(plant)
        quant = UniformQuantizer(float(d["quantizer"]["delta"]))
        spec = self.lissajous
        wx, wy, _ = plan_frequencies(spec)
        refs = dict(zip(("x", "y"), axis_references(spec)))
        omegas = {"x": wx, "y": wy}
        centers = {"x": spec.x0, "y": spec.y0}
        loop = d["loop"]
        out = {}
        for ax in self.axes:
            if "design" in d:
                des = d["design"]
                comp = PRComposition(
                    delta0=1,
                    k0=float(des["k0"]),
                    resonant_terms=((float(des["k_resonant"]), omegas[ax]),),
                    first_order_terms=((float(des["k_first_order"]), float(des.get("first_order_pole", a))),),
                )
                target = compose(comp)
                ctrl = synthesize_controller(target, plant, float(des.get("causality_pole_factor", 100.0)))
            else:
                coeffs = d["controller"].get(ax)
                if coeffs is None:
                    raise ConfigError(f"controller section has no entry for axis {ax!r}")
                if set(coeffs) != {"num", "den"}:
                    raise ConfigError(f"controller.{ax} needs exactly 'num' and 'den'")
                target = None
                ctrl = tf(coeffs["num"], coeffs["den"])
            cfg = LoopConfig(
                controller=realize(ctrl),
                plant=plant_ss,
                quantizer=quant,
                reference=refs[ax],
                dt=float(loop["dt"]),
                t_end=float(loop["t_end"]),
                record_stride=int(loop.get("record_stride", 10)),
                artificial_quantization=bool(loop.get("artificial_quantization", True)),
                locate_events=bool(loop.get("locate_events", True)),
            )
            if "step_change" in d:
                sc = d["step_change"]
                new_c = sc.get(f"new_center_{ax}", centers[ax])
                cfg = apply_step_change(cfg, float(sc["t_step"]), float(new_c))
            out[ax] = AxisSetup(ax, plant, ctrl, target, cfg)
        return out
