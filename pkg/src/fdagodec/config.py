"""JSON experiment configuration.

Files use degrees for angles, meters for ranges and dB for powers; the
in-memory objects use radians.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .decomposition import SolverParams
from .interference import BarrageJammer, GmmBurstParams, Scene
from .radar import RadarConfig, Target

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "scene_to_dict",
    "scene_from_dict",
    "config_to_dict",
    "config_from_dict",
    "load_config",
]

EXPERIMENTS = ("spectrum", "pseudo-peak", "convergence", "rmse", "success")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    scene: Scene
    solver: SolverParams = field(default_factory=SolverParams)
    experiment: str = "success"
    sweep: tuple[float, ...] = ()  # target SNRs, dB
    jammer_angles: tuple[float, ...] = ()  # rad; each replaces the scene's first jammer angle
    trials: int = 100
    output_dir: str = "out"
    angle_thresh: float = 1e-2
    angle_unit: str = "rad"
    range_thresh: float = 10.0
    nfft: int = 512
    baseline_rank: int = 2
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sweep", tuple(float(s) for s in self.sweep))
        object.__setattr__(self, "jammer_angles", tuple(float(a) for a in self.jammer_angles))
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.experiment in ("rmse", "success") and not self.sweep:
            raise ConfigError(f"{self.experiment} experiments need a nonempty sweep")
        if self.jammer_angles and not self.scene.jammers:
            raise ConfigError("jammer_angles given but the scene has no jammer")
        if self.angle_unit not in ("deg", "rad"):
            raise ConfigError("angle_unit must be 'deg' or 'rad'")
        if self.angle_thresh <= 0 or self.range_thresh <= 0:
            raise ConfigError("thresholds must be positive")
        if self.nfft < max(self.scene.cfg.M, self.scene.cfg.N):
            raise ConfigError("nfft smaller than the array")
        if not self.scene.targets:
            raise ConfigError("scene needs at least one target")


def _fields(cls, data: dict, where: str) -> dict:
    names = {f.name for f in dataclasses.fields(cls)}
    extra = set(data) - names
    if extra:
        raise ConfigError(f"unknown field(s) in {where}: {sorted(extra)}")
    return data


def scene_to_dict(scene: Scene) -> dict:
    return {
        "cfg": dataclasses.asdict(scene.cfg),
        "targets": [
            {"theta": float(np.rad2deg(t.theta)), "range": t.range,
             "velocity": t.velocity, "power_db": t.power_db}
            for t in scene.targets
        ],
        "jammers": [
            {"theta_j": float(np.rad2deg(j.theta_j)), "inr_db": j.inr_db} for j in scene.jammers
        ],
        "burst": None if scene.burst is None else dataclasses.asdict(scene.burst),
        "noise_power": scene.noise_power,
        "seed": scene.seed,
    }


def scene_from_dict(data: dict) -> Scene:
    try:
        data = _fields(Scene, dict(data), "scene")
        cfg = RadarConfig(**_fields(RadarConfig, data.get("cfg", {}), "scene.cfg"))
        targets = []
        for t in data.get("targets", []):
            t = dict(_fields(Target, t, "scene.targets"))
            t["theta"] = float(np.deg2rad(t["theta"]))
            targets.append(Target(**t))
        jammers = []
        for j in data.get("jammers", []):
            j = dict(_fields(BarrageJammer, j, "scene.jammers"))
            j["theta_j"] = float(np.deg2rad(j["theta_j"]))
            jammers.append(BarrageJammer(**j))
        burst = data.get("burst")
        if burst is not None:
            burst = GmmBurstParams(**_fields(GmmBurstParams, burst, "scene.burst"))
        return Scene(cfg, tuple(targets), tuple(jammers), burst,
                     float(data.get("noise_power", 1.0)), int(data.get("seed", 0)))
    except ConfigError:
        raise
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"invalid scene: {exc}") from exc


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {
        "experiment": cfg.experiment,
        "scene": scene_to_dict(cfg.scene),
        "solver": dataclasses.asdict(cfg.solver),
        "sweep": list(cfg.sweep),
        "jammer_angles": [float(np.rad2deg(a)) for a in cfg.jammer_angles],
        "trials": cfg.trials,
        "output_dir": cfg.output_dir,
        "angle_thresh": cfg.angle_thresh,
        "angle_unit": cfg.angle_unit,
        "range_thresh": cfg.range_thresh,
        "nfft": cfg.nfft,
        "baseline_rank": cfg.baseline_rank,
    }
    if cfg.notes:
        out["notes"] = cfg.notes
    return out


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(_fields(ExperimentConfig, data, "config"))
    if "scene" not in data:
        raise ConfigError("config needs a scene")
    try:
        data["scene"] = scene_from_dict(data["scene"])
        data["solver"] = SolverParams(**_fields(SolverParams, data.get("solver", {}), "solver"))
        data["jammer_angles"] = [float(np.deg2rad(a)) for a in data.get("jammer_angles", [])]
        return ExperimentConfig(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(data)
