"""Ergodicity verdicts: compare a long-time average with a canonical curve.

A quantity is ergodic if its long-time value is attained by the canonical
(zero-field) curve at some inverse temperature inside the band
[b_init / band_factor, b_init * band_factor], nonergodic if it is attained
only outside the band, and strongly nonergodic if it is never attained on
the searched range.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

BISECTION_RTOL = 1e-6
DEFAULT_MATCH_TOL = 1e-4
ZERO_TOL = 1e-10


class Verdict(str, enum.Enum):
    ERGODIC = "Ergodic"
    NONERGODIC = "Nonergodic"
    STRONGLY_NONERGODIC = "StronglyNonergodic"


class CurveRefinementRequired(ValueError):
    """A crossing cannot be placed relative to the band without more curve points."""

    def __init__(self, beta_lo: float, beta_hi: float):
        super().__init__(f"refine the curve between beta_tilde={beta_lo:.6g} and {beta_hi:.6g}")
        self.interval = (beta_lo, beta_hi)


def log_grid(lo: float = 1e-3, hi: float = 1e3, count: int = 121) -> np.ndarray:
    if not 0 < lo < hi or count < 2:
        raise ValueError(f"invalid grid lo={lo}, hi={hi}, count={count}")
    return np.geomspace(lo, hi, count)


@dataclass
class EquilibriumCurve:
    label: str
    beta_tilde: np.ndarray
    values: np.ndarray
    errors: np.ndarray | None = None
    evaluate: Callable[[float], float] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.beta_tilde = np.asarray(self.beta_tilde, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.errors is None:
            self.errors = np.zeros_like(self.values)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.beta_tilde.shape != self.values.shape or self.values.shape != self.errors.shape:
            raise ValueError("beta_tilde, values and errors must have equal length")
        if np.any(np.diff(self.beta_tilde) <= 0):
            raise ValueError("beta_tilde must be strictly increasing")

    @classmethod
    def from_function(cls, label: str, func: Callable[[float], tuple[float, float]], grid: Sequence[float]):
        """``func`` returns ``(value, error_estimate)`` at one inverse temperature."""
        pts = [func(float(b)) for b in grid]
        return cls(
            label,
            np.asarray(grid, dtype=float),
            np.array([p[0] for p in pts]),
            np.array([p[1] for p in pts]),
            evaluate=lambda b: func(b)[0],
        )

    def check_span(self, beta_init: float, band_factor: float = 10.0, min_points: int = 16) -> None:
        if len(self.beta_tilde) < min_points:
            raise ValueError(f"curve {self.label!r} has {len(self.beta_tilde)} points, need >= {min_points}")
        lo, hi = beta_init / band_factor, beta_init * band_factor
        if self.beta_tilde[0] > lo * (1 + 1e-12) or self.beta_tilde[-1] < hi * (1 - 1e-12):
            raise ValueError(
                f"curve {self.label!r} spans [{self.beta_tilde[0]:g}, {self.beta_tilde[-1]:g}], "
                f"must cover [{lo:g}, {hi:g}]"
            )


@dataclass
class ErgodicityVerdict:
    verdict: Verdict
    crossing_beta_tilde: float | None
    band: tuple[float, float]
    match_tolerance: float
    crossings: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "crossing_beta_tilde": self.crossing_beta_tilde,
            "band": list(self.band),
            "match_tolerance": self.match_tolerance,
            "n_crossings": len(self.crossings),
        }


def _bisect(f: Callable[[float], float], lo: float, hi: float, f_lo: float) -> float:
    """Sign change of f on [lo, hi], bisected in log(beta) to relative BISECTION_RTOL."""
    while hi / lo - 1 > BISECTION_RTOL:
        mid = math.sqrt(lo * hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def find_crossings(q_infinity: float, curve: EquilibriumCurve, match_tol: float = DEFAULT_MATCH_TOL) -> list[float]:
    """Inverse temperatures where the canonical curve meets ``q_infinity``.

    Sign changes are bisected when the curve carries an evaluator and
    interpolated linearly in log(beta) otherwise; grid points within
    ``match_tol`` are reported as touching crossings.
    """
    b = curve.beta_tilde
    d = curve.values - q_infinity
    found: list[float] = []
    for k in range(len(b) - 1):
        if d[k] * d[k + 1] < 0:
            if curve.evaluate is not None:
                found.append(_bisect(lambda x: curve.evaluate(x) - q_infinity, b[k], b[k + 1], d[k]))
            else:
                w = d[k] / (d[k] - d[k + 1])
                found.append(float(np.exp(np.log(b[k]) + w * (np.log(b[k + 1]) - np.log(b[k])))))
    found.extend(float(x) for x in b[np.abs(d) <= match_tol])
    return sorted(set(found))


def classify(
    q_infinity: float,
    curve: EquilibriumCurve,
    beta_init: float,
    band_factor: float = 10.0,
    match_tol: float = DEFAULT_MATCH_TOL,
    zero_tol: float = ZERO_TOL,
) -> ErgodicityVerdict:
    if not band_factor > 1:
        raise ValueError(f"band_factor must exceed 1, got {band_factor}")
    curve.check_span(beta_init, band_factor)
    band = (beta_init / band_factor, beta_init * band_factor)

    # a canonical curve that vanishes identically can never meet a nonzero value
    if np.all(np.abs(curve.values) <= zero_tol) and abs(q_infinity) > zero_tol:
        return ErgodicityVerdict(Verdict.STRONGLY_NONERGODIC, None, band, match_tol, [])

    if curve.evaluate is None:
        b, d = curve.beta_tilde, curve.values - q_infinity
        for k in range(len(b) - 1):
            if d[k] * d[k + 1] < 0 and any(b[k] < edge < b[k + 1] for edge in band):
                raise CurveRefinementRequired(b[k], b[k + 1])

    crossings = find_crossings(q_infinity, curve, match_tol)
    if not crossings:
        return ErgodicityVerdict(Verdict.STRONGLY_NONERGODIC, None, band, match_tol, [])

    def distance(x: float) -> float:
        return abs(math.log(x / beta_init))

    inside = [c for c in crossings if band[0] <= c <= band[1]]
    if inside:
        return ErgodicityVerdict(Verdict.ERGODIC, min(inside, key=distance), band, match_tol, crossings)
    return ErgodicityVerdict(Verdict.NONERGODIC, min(crossings, key=distance), band, match_tol, crossings)


def stationary_points(curve: EquilibriumCurve, prominence: float = 1e-6) -> list[tuple[float, float]]:
    """Interior extrema ``(beta_tilde, value)`` of the curve, refined in log(beta) when possible.

    Extrema shallower than ``prominence`` relative to both neighbours on the
    grid are ignored, which filters round-off wiggles on flat tails.
    """
    v = curve.values
    out = []
    for k in range(1, len(v) - 1):
        left, right = v[k] - v[k - 1], v[k + 1] - v[k]
        if left * right >= 0 or min(abs(left), abs(right)) < prominence:
            continue
        sign = 1.0 if left < 0 else -1.0  # minimum: +f, maximum: -f
        if curve.evaluate is None:
            out.append((float(curve.beta_tilde[k]), float(v[k])))
            continue
        lo, hi = math.log(curve.beta_tilde[k - 1]), math.log(curve.beta_tilde[k + 1])
        res = optimize.minimize_scalar(
            lambda x: sign * curve.evaluate(math.exp(x)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-7}
        )
        out.append((float(math.exp(res.x)), float(sign * res.fun)))
    return out


def low_temperature_plateau(curve: EquilibriumCurve) -> tuple[float, float]:
    """Where a finite-size canonical curve levels off on the cold side.

    This is the coldest interior extremum of the curve. A monotone curve
    has none, and then its value at the largest grid point is returned.
    Finite lattices often keep drifting slowly below this point as the
    lowest level splittings freeze out, so the value there can differ
    from the strict zero-temperature limit.
    """
    ext = stationary_points(curve)
    if ext:
        return ext[-1]
    return float(curve.beta_tilde[-1]), float(curve.values[-1])
