"""Experiment orchestration: canonical curves, long-time values, verdicts, files."""
from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .analytic import ChainPoint, equilibrium_correlator_set_with_errors, evolved_correlator_set_with_errors
from .config import ExperimentConfig
from .ergodicity import EquilibriumCurve, ErgodicityVerdict, classify
from .lattice import LatticeKind, ModelParams
from .observables import CorrelatorSet, correlators_from_table, logarithmic_negativity, state_from_table, two_site_from_correlators
from .quench import QuenchEngine, sample_times
from .statmech import TimeAverageResult

log = logging.getLogger(__name__)

QUANTITIES = ("m_z", "t_xx", "t_yy", "t_zz", "e_n")
LINEAR = QUANTITIES[:4]
OFF_DIAGONAL_TOL = 1e-9
HEADLINE_BOND = {None: None, LatticeKind.CHAIN: "bond", LatticeKind.LADDER: "rail", LatticeKind.TORUS: "row"}


def fmt(x: float) -> str:
    return format(float(x), ".12g")


@dataclass
class LongTimeValue:
    a_over_J: float
    value: float
    std_error: float
    n_samples: int = 0
    window_T: float | None = None
    seed: int | None = None


@dataclass
class QuantityResult:
    quantity: str
    bond: str | None
    curve: EquilibriumCurve
    long_time: list[LongTimeValue] = field(default_factory=list)
    verdicts: list[ErgodicityVerdict] = field(default_factory=list)

    @property
    def key(self) -> str:
        return self.quantity if self.bond is None else f"{self.quantity}__{self.bond}"


@dataclass
class FigureDataset:
    config: ExperimentConfig
    geometry: str
    results: dict[str, QuantityResult]
    diagnostics: dict[str, list[LongTimeValue]] = field(default_factory=dict)
    headline_bond: str | None = None
    files: list[Path] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def get(self, quantity: str, bond: str | None = "headline") -> QuantityResult:
        if bond == "headline":
            bond = self.headline_bond
        return self.results[quantity if bond is None else f"{quantity}__{bond}"]


# ---------------------------------------------------------------------------
# infinite chain
# ---------------------------------------------------------------------------
def _set_value(cs: CorrelatorSet, errors: dict[str, float], quantity: str) -> tuple[float, float]:
    if quantity == "e_n":
        # crude Lipschitz bound: E_N moves by at most ~ sum of correlator shifts / ln 2
        return infinite_e_n(cs), sum(errors.values()) / np.log(2)
    return cs.get(quantity), errors[quantity]


def infinite_e_n(cs: CorrelatorSet) -> float:
    return logarithmic_negativity(two_site_from_correlators(cs)).e_n


def compute_infinite_chain(cfg: ExperimentConfig) -> FigureDataset:
    gamma, quad, b_init = cfg.gamma, cfg.quadrature, cfg.beta_tilde_init

    @lru_cache(maxsize=None)
    def canonical(beta: float):
        # canonical state at the post-quench field, which is zero
        return equilibrium_correlator_set_with_errors(ChainPoint(0.0, beta, gamma), quad)

    grid = cfg.beta_grid()
    results: dict[str, QuantityResult] = {}
    evolved = {a: evolved_correlator_set_with_errors(ChainPoint(a, b_init, gamma), quad) for a in cfg.fields}
    for q in QUANTITIES:
        curve = EquilibriumCurve.from_function(q, lambda b, q=q: _set_value(*canonical(b), q), grid)
        res = QuantityResult(q, None, curve)
        for a in cfg.fields:
            v, err = _set_value(*evolved[a], q)
            res.long_time.append(LongTimeValue(a, v, err))
        results[res.key] = res
    return FigureDataset(cfg, "infinite_chain", results)


# ---------------------------------------------------------------------------
# finite lattices
# ---------------------------------------------------------------------------
def _quantity_from_table(table: np.ndarray, quantity: str) -> float:
    if quantity == "e_n":
        return logarithmic_negativity(state_from_table(table)).e_n
    return correlators_from_table(table).get(quantity)


def compute_finite(cfg: ExperimentConfig, engine: QuenchEngine | None = None) -> FigureDataset:
    lattice = cfg.geometry.lattice
    if lattice is None:
        raise ValueError("compute_finite needs a finite geometry")
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    if engine is None:
        engine = QuenchEngine(lattice, ModelParams(cfg.J, cfg.gamma, 0.0))
    timings["diagonalize"] = time.perf_counter() - t0

    bonds = lattice.representative_bonds()
    counts = lattice.bond_counts()
    weights = {t: counts[t] / len(lattice.bonds) for t in bonds}
    grid = cfg.beta_grid()

    @lru_cache(maxsize=None)
    def thermal(bond_type: str, beta: float) -> np.ndarray:
        table = engine.thermal_table(bonds[bond_type], beta)
        off = np.abs(table[[1, 2, 3, 3, 1, 2, 0, 0], [3, 3, 1, 2, 0, 0, 1, 2]]).max()
        if off > OFF_DIAGONAL_TOL:
            raise AssertionError(f"canonical state has parity-odd correlator {off:.3e} on {bond_type} bond")
        if abs(table[1, 2]) > OFF_DIAGONAL_TOL or abs(table[2, 1]) > OFF_DIAGONAL_TOL:
            raise AssertionError(f"canonical state has t_xy {table[1, 2]:.3e} on {bond_type} bond")
        return table

    def canonical_value(bond_label: str, q: str) -> Callable[[float], tuple[float, float]]:
        if bond_label == "mean":
            return lambda b: (sum(w * _quantity_from_table(thermal(t, b), q) for t, w in weights.items()), 0.0)
        return lambda b: (_quantity_from_table(thermal(bond_label, b), q), 0.0)

    t0 = time.perf_counter()
    labels = list(bonds) + (["mean"] if len(bonds) > 1 else [])
    results: dict[str, QuantityResult] = {}
    for label in labels:
        for q in QUANTITIES:
            curve = EquilibriumCurve.from_function(q, canonical_value(label, q), grid)
            res = QuantityResult(q, label, curve)
            results[res.key] = res
    timings["canonical_curves"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    times = sample_times(cfg.sampling, cfg.J)
    rs = [engine.initial_state_eigenbasis(a, cfg.beta_tilde_init) for a in cfg.fields]
    timings["initial_states"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    per_bond: dict[str, dict[str, list[LongTimeValue]]] = {}
    for bond_type, bond in bonds.items():
        log.info("time series on %s bond %s", bond_type, bond)
        series = engine.bond_series_many(bond, rs, times)
        vals: dict[str, list[LongTimeValue]] = {q: [] for q in QUANTITIES + ("e_n_dephased",)}
        for a, s in zip(cfg.fields, series):
            dephased = correlators_from_table(s.diagonal)
            for q in LINEAR:
                vals[q].append(LongTimeValue(a, dephased.get(q), 0.0))
            samples = [logarithmic_negativity(state_from_table(t)).e_n for t in s.samples]
            tav = TimeAverageResult.from_samples(samples, cfg.sampling)
            vals["e_n"].append(LongTimeValue(a, tav.mean, tav.std_error, tav.n_samples, tav.window_T, tav.seed))
            vals["e_n_dephased"].append(LongTimeValue(a, _quantity_from_table(s.diagonal, "e_n"), 0.0))
        per_bond[bond_type] = vals
    del rs
    timings["long_time"] = time.perf_counter() - t0

    if len(bonds) > 1:
        mean: dict[str, list[LongTimeValue]] = {}
        for q in QUANTITIES + ("e_n_dephased",):
            mean[q] = []
            for k, a in enumerate(cfg.fields):
                v = sum(weights[t] * per_bond[t][q][k].value for t in bonds)
                e = np.sqrt(sum((weights[t] * per_bond[t][q][k].std_error) ** 2 for t in bonds))
                mean[q].append(LongTimeValue(a, v, float(e), per_bond[next(iter(bonds))][q][k].n_samples))
        per_bond["mean"] = mean

    diagnostics = {}
    for label in labels:
        for q in QUANTITIES:
            results[f"{q}__{label}"].long_time = per_bond[label][q]
        diagnostics[f"e_n_dephased__{label}"] = per_bond[label]["e_n_dephased"]

    ds = FigureDataset(cfg, lattice.label, results, diagnostics, HEADLINE_BOND[lattice.kind])
    ds.timings = timings
    return ds


# ---------------------------------------------------------------------------
# verdicts and emission
# ---------------------------------------------------------------------------
def classify_all(ds: FigureDataset) -> FigureDataset:
    cfg = ds.config
    for res in ds.results.values():
        res.verdicts = [
            classify(lt.value, res.curve, cfg.beta_tilde_init, cfg.band_factor, cfg.match_tol) for lt in res.long_time
        ]
    return ds


def verdict_records(ds: FigureDataset) -> list[dict]:
    cfg = ds.config
    rows = []
    for res in ds.results.values():
        for lt, v in zip(res.long_time, res.verdicts):
            row = {
                "geometry": ds.geometry,
                "quantity": res.quantity,
                "bond": res.bond,
                "headline": res.bond == ds.headline_bond,
                "a_over_J": lt.a_over_J,
                "gamma": cfg.gamma,
                "beta_init": cfg.beta_tilde_init,
                "long_time_value": lt.value,
                "std_error": lt.std_error,
            }
            row.update(v.to_dict())
            rows.append(row)
    return rows


def _metadata(ds: FigureDataset, extra: dict) -> list[str]:
    cfg = ds.config
    meta = {
        "geometry": ds.geometry,
        "gamma": fmt(cfg.gamma),
        "J": fmt(cfg.J),
        "beta_tilde_init": fmt(cfg.beta_tilde_init),
        "code_version": __version__,
    }
    meta.update(extra)
    return [f"# {k}: {v}" for k, v in meta.items()]


def _write_csv(path: Path, meta: list[str], header: list[str], rows: list[list[float]]) -> Path:
    lines = meta + [",".join(header)] + [",".join(fmt(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def emit(ds: FigureDataset, out_dir: Path | None = None) -> list[Path]:
    out = Path(out_dir) if out_dir is not None else ds.config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    prefix = ds.geometry
    files: list[Path] = []
    for res in ds.results.values():
        extra = {"quantity": res.quantity, "bond": res.bond or "n/a"}
        c = res.curve
        files.append(
            _write_csv(
                out / f"{prefix}_equilibrium_{res.key}.csv",
                _metadata(ds, {**extra, "field": "0 (post-quench)"}),
                ["beta_tilde", "value", "err_estimate"],
                [[b, v, e] for b, v, e in zip(c.beta_tilde, c.values, c.errors)],
            )
        )
        sampling = {}
        if res.quantity == "e_n" and res.long_time and res.long_time[0].n_samples:
            s = ds.config.sampling
            sampling = {"t_max": fmt(s.t_max), "n_samples": s.n_samples, "seed": s.seed}
        files.append(
            _write_csv(
                out / f"{prefix}_constants_{res.key}.csv",
                _metadata(ds, {**extra, **sampling}),
                ["a_over_J", "long_time_value", "std_error"],
                [[lt.a_over_J, lt.value, lt.std_error] for lt in res.long_time],
            )
        )
    for key, vals in ds.diagnostics.items():
        files.append(
            _write_csv(
                out / f"{prefix}_diagnostic_{key}.csv",
                _metadata(ds, {"quantity": "E_N of the infinite-time-averaged two-site state"}),
                ["a_over_J", "value", "std_error"],
                [[lt.a_over_J, lt.value, lt.std_error] for lt in vals],
            )
        )
    files.append(_write_json(out / f"{prefix}_verdicts.json", verdict_records(ds)))
    lattice = ds.config.geometry.lattice
    manifest = {
        "code_version": __version__,
        "config": {k: v for k, v in ds.config.to_dict().items() if k != "output_dir"},
        "geometry": ds.geometry,
        "lattice": lattice.to_dict() if lattice is not None else None,
        "headline_bond": ds.headline_bond,
        "seed": ds.config.sampling.seed,
        "files": {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in files},
    }
    files.append(_write_json(out / f"{prefix}_manifest.json", manifest))
    ds.files = files
    return files


def compute(cfg: ExperimentConfig) -> FigureDataset:
    ds = compute_infinite_chain(cfg) if cfg.geometry.is_infinite else compute_finite(cfg)
    return classify_all(ds)


def run(cfg: ExperimentConfig, out_dir: Path | None = None) -> FigureDataset:
    ds = compute(cfg)
    emit(ds, out_dir)
    return ds


def verdict_table(cfg: ExperimentConfig) -> list[dict]:
    return verdict_records(compute(cfg))
