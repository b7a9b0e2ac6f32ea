"""Experiment configuration: a strict YAML/JSON schema.

Energies and the Cauchy scale are in units of the hopping amplitude (1);
times are in inverse hopping units. Unknown keys are errors.
"""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import disorder
from .lattice import DEFAULT_MAX_SITES, choose_pieces_per_axis

EXPERIMENTS = (
    "ids", "dos-fourier", "dos-invert", "level-stats", "wegner-minami",
    "superposition", "eesd", "appendix-bound",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; ``errors`` holds itemized messages."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.errors))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class DeltaCfg(_Strict):
    kind: Literal["delta"]
    c: float = 0.0


class UniformCfg(_Strict):
    kind: Literal["uniform"]
    a: float = -1.0
    b: float = 1.0


class BernoulliCfg(_Strict):
    kind: Literal["bernoulli"]
    p: float = 0.5
    v1: float = 1.0
    v2: float = -1.0


class GaussianCfg(_Strict):
    kind: Literal["gaussian"]
    mean: float = 0.0
    sd: float = 1.0


Mu2Cfg = Annotated[Union[DeltaCfg, UniformCfg, BernoulliCfg, GaussianCfg],
                   Field(discriminator="kind")]


class Grid(_Strict):
    """Uniform grid ``start, start+step, ...`` up to and including ``stop``."""

    start: float
    stop: float
    step: float = Field(gt=0)

    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n)


def grid_values(g) -> np.ndarray:
    if isinstance(g, Grid):
        return g.values()
    return np.asarray(g, dtype=float)


class ModelCfg(_Strict):
    d: int = Field(1, ge=1)
    L: Union[int, list[int]] = 0
    lam: float = Field(1.0, gt=0, alias="lambda")
    mu2: Mu2Cfg = DeltaCfg(kind="delta")
    max_sites: int = Field(DEFAULT_MAX_SITES, ge=1)

    @property
    def L_list(self) -> list[int]:
        return [self.L] if isinstance(self.L, int) else list(self.L)

    def disorder_spec(self) -> disorder.DisorderSpec:
        m = self.mu2
        if isinstance(m, DeltaCfg):
            mu2 = disorder.Delta(m.c)
        elif isinstance(m, UniformCfg):
            mu2 = disorder.Uniform(m.a, m.b)
        elif isinstance(m, BernoulliCfg):
            mu2 = disorder.Bernoulli(m.p, m.v1, m.v2)
        else:
            mu2 = disorder.Gaussian(m.mean, m.sd)
        return disorder.DisorderSpec(lam=self.lam, mu2=mu2)


class MCCfg(_Strict):
    realizations: int = Field(1, ge=1)
    seed: int = Field(42, ge=0, lt=2 ** 64)
    workers: int = Field(1, ge=1)


class WindowCfg(_Strict):
    E: float = 0.0
    gamma: float = 0.2
    a: float = -1.0
    b: float = 1.0


class PairCfg(_Strict):
    d: int = Field(ge=1)
    L: int = Field(ge=0)
    interval: tuple[float, float]


class GridsCfg(_Strict):
    t: Optional[Union[Grid, list[float]]] = None
    x: Optional[Union[Grid, list[float]]] = None
    window: Optional[WindowCfg] = None
    intervals: Optional[list[tuple[float, float]]] = None
    pairs: Optional[list[PairCfg]] = None
    bin_width: Optional[float] = Field(None, gt=0)


class InversionCfg(_Strict):
    t_max: Optional[float] = Field(None, gt=0)
    tail_tol: float = Field(1e-6, gt=0)


class PartitionCfg(_Strict):
    epsilon: float = Field(0.6, gt=0, lt=1)
    n_per_axis: Optional[int] = Field(None, ge=1)


class RMTCfg(_Strict):
    N: int = Field(ge=1)
    a_model: Literal["zero", "wigner", "fixed"] = "zero"
    entries: Literal["gaussian", "bernoulli"] = "gaussian"
    matrix_file: Optional[str] = None


class OutputCfg(_Strict):
    dir: str = "results"
    name: Optional[str] = None


class ExperimentConfig(_Strict):
    experiment: Literal[EXPERIMENTS]  # type: ignore[valid-type]
    model: ModelCfg = ModelCfg()
    mc: MCCfg = MCCfg()
    grids: GridsCfg = GridsCfg()
    inversion: InversionCfg = InversionCfg()
    partition: PartitionCfg = PartitionCfg()
    rmt: Optional[RMTCfg] = None
    output: OutputCfg = OutputCfg()

    @model_validator(mode="after")
    def _cross_checks(self):
        errors = []
        exp = self.experiment
        m = self.model
        for L in m.L_list:
            if L < 0:
                errors.append(f"model.L: half side must be >= 0, got {L}")
            elif exp not in ("eesd", "wegner-minami") and (2 * L + 1) ** m.d > m.max_sites:
                errors.append(f"model.L={L}: {(2 * L + 1) ** m.d} sites exceed "
                              f"max_sites={m.max_sites}")
        if exp in ("dos-fourier", "dos-invert", "eesd", "appendix-bound") and self.grids.t is None:
            errors.append(f"grids.t is required for {exp}")
        if exp in ("dos-fourier", "dos-invert", "eesd", "level-stats", "superposition") \
                and self.mc.realizations < 2:
            errors.append(f"mc.realizations must be >= 2 for {exp}")
        if exp in ("ids", "dos-invert") and self.grids.x is None:
            errors.append(f"grids.x is required for {exp}")
        if exp in ("level-stats", "superposition") and self.grids.window is None:
            errors.append(f"grids.window is required for {exp}")
        w = self.grids.window
        if w is not None and not w.a < w.b:
            errors.append(f"grids.window: need a < b, got [{w.a}, {w.b}]")
        if exp == "level-stats" and w is not None:
            upper = (m.d - 1) / (2 * m.d)
            if not 0 < w.gamma < upper:
                warnings.warn(f"gamma={w.gamma} outside (0, {upper:.4g}): exploratory run")
        if exp == "superposition":
            for L in m.L_list:
                side = 2 * L + 1
                n = self.partition.n_per_axis
                try:
                    if n is None:
                        choose_pieces_per_axis(side, self.partition.epsilon)
                    elif side % n:
                        errors.append(f"partition.n_per_axis={n} does not divide 2L+1={side}")
                except ValueError as exc:
                    errors.append(f"partition at L={L}: {exc}")
        if exp == "wegner-minami":
            g = self.grids
            if g.pairs is None and g.intervals is None:
                errors.append("wegner-minami needs grids.pairs or grids.intervals")
            if self.mc.realizations < 30:
                errors.append("wegner-minami needs mc.realizations >= 30")
            for p in g.pairs or []:
                if (2 * p.L + 1) ** p.d > m.max_sites:
                    errors.append(f"pair d={p.d}, L={p.L} exceeds max_sites")
            for lo, hi in [p.interval for p in g.pairs or []] + list(g.intervals or []):
                if not lo <= hi:
                    errors.append(f"interval [{lo}, {hi}] is reversed")
        if exp == "appendix-bound" and len(m.L_list) != 2:
            errors.append("appendix-bound needs model.L = [L1, L2]")
        if exp == "eesd":
            if self.rmt is None:
                errors.append("eesd needs an rmt section")
            elif self.rmt.a_model == "fixed" and not self.rmt.matrix_file:
                errors.append("rmt.a_model=fixed needs rmt.matrix_file")
        if errors:
            raise ValueError("; ".join(errors))
        return self


def _format_validation(exc: ValidationError) -> list[str]:
    out = []
    for e in exc.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        out.append(f"{loc}: {e['msg']}")
    return out


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(data)


def config_hash(cfg: ExperimentConfig) -> str:
    """Hash of everything that determines the numbers (not workers or output)."""
    payload = cfg.model_dump(mode="json", by_alias=True, exclude={"output": True, "mc": {"workers"}})
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
