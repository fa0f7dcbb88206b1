"""Command-line entry point: ``xyergodic <subcommand>``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .analytic import (
    ChainPoint,
    QuadratureError,
    equilibrium_correlator_set_with_errors,
    evolved_correlator_set_with_errors,
)
from .config import FIGURE_PRESETS, ConfigError, ExperimentConfig
from .ergodicity import CurveRefinementRequired, EquilibriumCurve, classify, log_grid
from .observables import UnphysicalStateError
from .runner import _set_value, fmt, run, verdict_records

EXIT_CONFIG = 1
EXIT_NUMERIC = 2

log = logging.getLogger("xyergodic")


def _overrides(args) -> dict:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = yaml.safe_load(v)
    flag_map = {
        "gamma": "gamma",
        "J": "J",
        "fields": "a_over_J",
        "beta_init": "beta_tilde_init",
        "band_factor": "band_factor",
        "match_tol": "match_tol",
        "seed": "time_sampling.seed",
        "n_samples": "time_sampling.n_samples",
        "t_max": "time_sampling.t_max",
        "output_dir": "output_dir",
        "geometry": "geometry",
    }
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            out[key] = v
    return out


def _config(args, preset: dict | None = None) -> ExperimentConfig:
    base = dict(preset or {})
    if args.config:
        with open(args.config) as fh:
            base.update(yaml.safe_load(fh) or {})
    return ExperimentConfig.from_mapping(base, _overrides(args))


def _print_verdicts(rows: list[dict], all_bonds: bool) -> None:
    for r in rows:
        if not all_bonds and not r["headline"] and r["bond"] is not None:
            continue
        bond = f"[{r['bond']}]" if r["bond"] else ""
        cross = "-" if r["crossing_beta_tilde"] is None else f"{r['crossing_beta_tilde']:.4g}"
        print(
            f"{r['geometry']:<16} {r['quantity'] + bond:<14} a/J={r['a_over_J']:<5g} "
            f"Q_inf={r['long_time_value']:+.5f} ({r['std_error']:.1e})  {r['verdict']:<19} crossing={cross}"
        )


def _run(cfg: ExperimentConfig, args) -> int:
    ds = run(cfg)
    _print_verdicts(verdict_records(ds), args.all_bonds)
    print(f"wrote {len(ds.files)} files to {cfg.output_dir}")
    return 0


def cmd_reproduce(args) -> int:
    return _run(_config(args, FIGURE_PRESETS[args.figure]), args)


def cmd_infinite(args) -> int:
    return _run(_config(args, {"geometry": "infinite-chain"}), args)


def cmd_finite(args) -> int:
    cfg = _config(args)
    if cfg.geometry.is_infinite:
        raise ConfigError("geometry", "the finite subcommand needs 'chain N', 'ladder 2xL' or 'torus RxC'")
    return _run(cfg, args)


def _read_curve_csv(path: Path) -> EquilibriumCurve:
    with open(path) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    data = [(float(r["beta_tilde"]), float(r["value"]), float(r.get("err_estimate") or 0.0)) for r in reader]
    b, v, e = map(np.array, zip(*data))
    return EquilibriumCurve(path.stem, b, v, e)


def cmd_classify(args) -> int:
    curve = _read_curve_csv(Path(args.curve))
    v = classify(args.value, curve, args.beta_init, args.band_factor, args.match_tol)
    print(json.dumps({"curve": str(args.curve), "q_infinity": args.value, "beta_init": args.beta_init, **v.to_dict()}, indent=2))
    return 0


def cmd_sweep(args) -> int:
    """Infinite-chain quantity versus beta~ (canonical at the given field, or evolved from it)."""
    grid = log_grid(args.lo, args.hi, args.count)
    fn = evolved_correlator_set_with_errors if args.kind == "evolved" else equilibrium_correlator_set_with_errors
    lines = [
        f"# quantity: {args.quantity}",
        f"# kind: {args.kind}",
        f"# a_tilde: {fmt(args.a_tilde)}",
        f"# gamma: {fmt(args.gamma)}",
        "beta_tilde,value,err_estimate",
    ]
    for b in grid:
        v, e = _set_value(*fn(ChainPoint(args.a_tilde, float(b), args.gamma)), args.quantity)
        lines.append(f"{fmt(b)},{fmt(v)},{fmt(e)}")
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _add_common(p: argparse.ArgumentParser, geometry: bool = False) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key (dotted path)")
    if geometry:
        p.add_argument("--geometry", help="'chain N', 'ladder 2xL' or 'torus RxC'")
    p.add_argument("--gamma", type=float)
    p.add_argument("--J", type=float)
    p.add_argument("--fields", type=float, nargs="+", help="initial fields a/J")
    p.add_argument("--beta-init", type=float, dest="beta_init")
    p.add_argument("--band-factor", type=float, dest="band_factor")
    p.add_argument("--match-tol", type=float, dest="match_tol")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--out", dest="output_dir", help="output directory (env XYERGODIC_OUTPUT_DIR wins)")
    p.add_argument("--all-bonds", action="store_true", help="print every bond type, not only the headline bond")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xyergodic", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("reproduce-figure", help="run a preset: 1 infinite chain, 2 chain 12, 4 ladder 2x4, 6 torus 3x4")
    s.add_argument("figure", choices=sorted(FIGURE_PRESETS))
    _add_common(s)
    s.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("infinite-chain", help="closed-form infinite chain")
    _add_common(s)
    s.set_defaults(func=cmd_infinite)

    s = sub.add_parser("finite", help="exact diagonalization of a finite periodic lattice")
    _add_common(s, geometry=True)
    s.set_defaults(func=cmd_finite)

    s = sub.add_parser("classify", help="classify one long-time value against an equilibrium CSV")
    s.add_argument("--curve", required=True, help="equilibrium CSV (beta_tilde,value,err_estimate)")
    s.add_argument("--value", type=float, required=True, help="long-time average Q_infinity")
    s.add_argument("--beta-init", type=float, default=20.0, dest="beta_init")
    s.add_argument("--band-factor", type=float, default=10.0, dest="band_factor")
    s.add_argument("--match-tol", type=float, default=1e-4, dest="match_tol")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("sweep", help="infinite-chain quantity on a log-spaced beta~ grid")
    s.add_argument("--quantity", choices=["m_z", "t_xx", "t_yy", "t_zz", "e_n"], default="t_xx")
    s.add_argument("--kind", choices=["equilibrium", "evolved"], default="equilibrium")
    s.add_argument("--a-tilde", type=float, default=0.0, dest="a_tilde")
    s.add_argument("--gamma", type=float, default=0.5)
    s.add_argument("--lo", type=float, default=1e-3)
    s.add_argument("--hi", type=float, default=1e3)
    s.add_argument("--count", type=int, default=121)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, UnphysicalStateError, CurveRefinementRequired, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
