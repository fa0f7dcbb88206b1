"""Experiment configuration: defaults, YAML loading, dotted-key overrides."""
from __future__ import annotations

import copy
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .analytic import QuadratureSpec
from .lattice import MAX_SITES, Lattice, LatticeKind, build_lattice
from .statmech import SamplingPlan

OUTPUT_ENV = "XYERGODIC_OUTPUT_DIR"


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


DEFAULTS: dict[str, Any] = {
    "geometry": "infinite-chain",
    "gamma": 0.5,
    "J": 1.0,
    "a_over_J": [0.2, 0.6, 1.2, 2.0],
    "beta_tilde_init": 20.0,
    "beta_grid": {"lo": 1e-3, "hi": 1e3, "count": 121},
    "time_sampling": {"t_max": 1000.0, "n_samples": 2000, "seed": 20110516},
    "quadrature": {"abs_tol": 1e-10, "rel_tol": 1e-8, "max_subdivisions": 2000},
    "band_factor": 10.0,
    "match_tol": 1e-4,
    "output_dir": "results",
}

FIGURE_PRESETS: dict[str, dict[str, Any]] = {
    "1": {"geometry": "infinite-chain", "a_over_J": [0.2, 0.6, 2.0]},
    "2": {"geometry": "chain 12"},
    "4": {"geometry": "ladder 2x4"},
    "6": {"geometry": "torus 3x4"},
}

_GEOMETRY = re.compile(r"^\s*(infinite-chain|chain|ladder|torus)\s*[: ]?\s*([0-9x ]*)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class Geometry:
    """Either the infinite chain (``lattice is None``) or a finite periodic lattice."""

    name: str
    lattice: Lattice | None

    @property
    def is_infinite(self) -> bool:
        return self.lattice is None

    @property
    def label(self) -> str:
        return "infinite_chain" if self.lattice is None else self.lattice.label


def parse_geometry(text: str, max_sites: int = MAX_SITES) -> Geometry:
    m = _GEOMETRY.match(str(text))
    if not m:
        raise ConfigError("geometry", f"cannot parse {text!r}; use 'infinite-chain', 'chain N', 'ladder 2xL' or 'torus RxC'")
    kind, dims_text = m.group(1).lower(), m.group(2).replace(" ", "")
    if kind == "infinite-chain":
        if dims_text:
            raise ConfigError("geometry", "infinite-chain takes no dimensions")
        return Geometry("infinite-chain", None)
    try:
        dims = tuple(int(d) for d in dims_text.split("x")) if dims_text else ()
    except ValueError:
        raise ConfigError("geometry", f"bad dimensions {dims_text!r}") from None
    if not dims:
        raise ConfigError("geometry", f"{kind} needs dimensions")
    try:
        lattice = build_lattice(LatticeKind(kind), dims)
    except ValueError as exc:
        raise ConfigError("geometry", str(exc)) from None
    if lattice.n_sites > max_sites:
        raise ConfigError("geometry", f"{lattice.n_sites} sites exceeds the cap of {max_sites}")
    return Geometry(f"{kind} {'x'.join(map(str, dims))}", lattice)


def _merge(base: dict, update: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in update.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def set_dotted(data: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError(dotted, f"{k!r} is not a section")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigError(dotted, "unknown configuration key")
    node[keys[-1]] = value


@dataclass
class ExperimentConfig:
    raw: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    # resolved views, filled by validate()
    geometry: Geometry = field(init=False)
    fields: list[float] = field(init=False)
    sampling: SamplingPlan = field(init=False)
    quadrature: QuadratureSpec = field(init=False)

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_mapping(cls, data: Mapping | None = None, overrides: Mapping[str, Any] | None = None) -> "ExperimentConfig":
        raw = _merge(DEFAULTS, data or {})
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        for k, v in (overrides or {}).items():
            set_dotted(raw, k, v)
        return cls(raw)

    @classmethod
    def from_file(cls, path: str | Path, overrides: Mapping[str, Any] | None = None) -> "ExperimentConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, Mapping):
            raise ConfigError(str(path), "config file must hold a mapping")
        return cls.from_mapping(data, overrides)

    def _number(self, path: str, value, positive=False, integer=False):
        try:
            v = int(value) if integer else float(value)
        except (TypeError, ValueError):
            raise ConfigError(path, f"expected a number, got {value!r}") from None
        if integer and v != value:
            raise ConfigError(path, f"expected an integer, got {value!r}")
        if positive and not v > 0:
            raise ConfigError(path, f"must be positive, got {value!r}")
        return v

    def validate(self) -> None:
        r = self.raw
        self.geometry = parse_geometry(r["geometry"])
        gamma = self._number("gamma", r["gamma"])
        if gamma == 0:
            raise ConfigError("gamma", "must be nonzero")
        if self._number("J", r["J"]) == 0:
            raise ConfigError("J", "must be nonzero")
        fields = r["a_over_J"]
        if not isinstance(fields, (list, tuple)) or not fields:
            raise ConfigError("a_over_J", "must be a non-empty list")
        self.fields = [self._number(f"a_over_J[{i}]", v) for i, v in enumerate(fields)]
        self._number("beta_tilde_init", r["beta_tilde_init"], positive=True)
        g = r["beta_grid"]
        lo = self._number("beta_grid.lo", g["lo"], positive=True)
        hi = self._number("beta_grid.hi", g["hi"], positive=True)
        count = self._number("beta_grid.count", g["count"], positive=True, integer=True)
        if hi <= lo:
            raise ConfigError("beta_grid.hi", "must exceed beta_grid.lo")
        if count < 16:
            raise ConfigError("beta_grid.count", "needs at least 16 points")
        ts = r["time_sampling"]
        try:
            self.sampling = SamplingPlan(
                t_max=self._number("time_sampling.t_max", ts["t_max"], positive=True),
                n_samples=self._number("time_sampling.n_samples", ts["n_samples"], integer=True),
                seed=self._number("time_sampling.seed", ts["seed"], integer=True),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("time_sampling.n_samples", str(exc)) from None
        q = r["quadrature"]
        self.quadrature = QuadratureSpec(
            abs_tol=self._number("quadrature.abs_tol", q["abs_tol"], positive=True),
            rel_tol=self._number("quadrature.rel_tol", q["rel_tol"], positive=True),
            max_subdivisions=self._number("quadrature.max_subdivisions", q["max_subdivisions"], positive=True, integer=True),
        )
        if not self._number("band_factor", r["band_factor"]) > 1:
            raise ConfigError("band_factor", "must exceed 1")
        self._number("match_tol", r["match_tol"], positive=True)

    @property
    def gamma(self) -> float:
        return float(self.raw["gamma"])

    @property
    def J(self) -> float:
        return float(self.raw["J"])

    @property
    def beta_tilde_init(self) -> float:
        return float(self.raw["beta_tilde_init"])

    @property
    def band_factor(self) -> float:
        return float(self.raw["band_factor"])

    @property
    def match_tol(self) -> float:
        return float(self.raw["match_tol"])

    @property
    def output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.raw["output_dir"])

    def beta_grid(self):
        from .ergodicity import log_grid

        g = self.raw["beta_grid"]
        return log_grid(float(g["lo"]), float(g["hi"]), int(g["count"]))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)
