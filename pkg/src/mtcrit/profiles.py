"""Radial correction profiles for the bubble expansion.

T0(r) = log(1 + r^2) is the standard bubble; S0, S1, S2 solve the
linearized radial equation

    S'' + S'/r + 8 exp(-2 T0) S = -RHS_i(r),    S(0) = S'(0) = 0,

(with the -d_rr - d_r/r Laplacian convention) and behave for large r like
(A_i / 4 pi) log(1/r^2) + B_i.  S0 also has an explicit dilogarithm
formula, used as the oracle for the integrator.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.special import spence

__all__ = [
    "StepFailureError",
    "RadialProfile",
    "t0",
    "s0_explicit",
    "solve_profile",
    "profile_integrals",
    "A_CONSTANTS",
    "B0_CONSTANT",
]


class StepFailureError(RuntimeError):
    """Adaptive ODE integrator failed to meet its tolerance."""


A_CONSTANTS = (4.0 * math.pi, 4.0 * math.pi * (3.0 + math.pi**2 / 6.0), 2.0 * math.pi)
B0_CONSTANT = math.pi**2 / 6.0 + 2.0


def t0(r):
    """Standard bubble profile log(1 + r^2)."""
    r = np.asarray(r, dtype=float)
    out = np.log1p(r * r)
    return float(out) if out.ndim == 0 else out


def _dilog_tail(r2):
    """int_1^{1+r^2} log(t)/(1-t) dt, vectorized.

    scipy's spence(z) is exactly int_1^z log(t)/(1-t) dt for z >= 0.
    """
    return spence(1.0 + np.asarray(r2, dtype=float))


def s0_explicit(r):
    """Closed form for S0: combination of rational, log^2 and dilog terms."""
    r = np.asarray(r, dtype=float)
    r2 = r * r
    T = np.log1p(r2)
    val = -T + 2.0 * r2 / (1.0 + r2) - 0.5 * T * T
    val += (1.0 - r2) / (1.0 + r2) * _dilog_tail(r2)
    return float(val) if val.ndim == 0 else val


def _rhs(i: int, r: np.ndarray) -> np.ndarray:
    """Source terms of the linearized equation (all carry exp(-2 T0))."""
    r = np.asarray(r, dtype=float)
    T = np.log1p(r * r)
    w = np.exp(-2.0 * T)
    if i == 0:
        return 4.0 * w * (T * T - T)
    if i == 2:
        return 4.0 * w * T
    S0 = s0_explicit(r)
    return 4.0 * w * (S0 + 2.0 * S0 * S0 - 4.0 * T * S0 + 2.0 * S0 * T * T - T**3 + 0.5 * T**4)


@dataclass
class RadialProfile:
    """Sampled radial profile with its extracted logarithmic asymptote."""

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    asym_slope: float
    asym_intercept: float

    def __post_init__(self):
        self._spline = CubicHermiteSpline(self.grid, self.values, self.derivs)

    def __call__(self, r):
        """Evaluate via the stored samples, log asymptote beyond the grid."""
        r = np.asarray(r, dtype=float)
        inside = self._spline(np.minimum(r, self.grid[-1]))
        tail = self.asym_slope * np.log(np.maximum(r, 1.0) ** 2) + self.asym_intercept
        out = np.where(r <= self.grid[-1], inside, tail)
        return float(out) if out.ndim == 0 else out

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        inside = self._spline.derivative()(np.minimum(r, self.grid[-1]))
        tail = 2.0 * self.asym_slope / np.maximum(r, 1.0)
        out = np.where(r <= self.grid[-1], inside, tail)
        return float(out) if out.ndim == 0 else out

    @property
    def A(self) -> float:
        """Coefficient of log(1/r^2)/(4 pi) in the tail, i.e. -4 pi slope."""
        return -4.0 * math.pi * self.asym_slope

    @property
    def B(self) -> float:
        return self.asym_intercept

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "S", "dS_dr"])
            for row in zip(self.grid, self.values, self.derivs):
                w.writerow([f"{v:.17g}" for v in row])

    def metadata(self) -> dict:
        return {
            "A": self.A,
            "B": self.B,
            "r_max": float(self.grid[-1]),
            "rtol": 1e-10,
            "atol": 1e-10,
        }


def _richardson(seq):
    """One geometric-extrapolation step on three values at doubling radii.

    Assumes the error decays roughly geometrically (log-power/r^2 between
    doubled radii); falls back to the last value when the ratio is not
    contracting.
    """
    d1, d2 = seq[1] - seq[0], seq[2] - seq[1]
    if abs(d1) > 1e-300 and abs(d2 / d1) < 1.0:
        q = d2 / d1
        return seq[2] + d2 * q / (1.0 - q)
    return seq[2]


def solve_profile(i: int, r_max: float = 2000.0, rhs_scale: float = 1.0) -> RadialProfile:
    """Integrate the correction-profile ODE for i in {0, 1, 2}.

    The equation is singular at r=0; integration starts at r0 = 1e-6 from
    the second-order Taylor seed S(r0) = -RHS_i(0) r0^2 / 4.
    """
    if i not in (0, 1, 2):
        raise ValueError("profile index must be 0, 1 or 2")
    if r_max < 100.0:
        raise ValueError("r_max must be at least 100")

    def odes(r, y):
        S, dS = y
        T = math.log1p(r * r)
        rhs = rhs_scale * float(_rhs(i, r))
        return [dS, -dS / r - 8.0 * math.exp(-2.0 * T) * S - rhs]

    r0 = 1e-6
    rhs0 = rhs_scale * float(_rhs(i, 0.0))
    y0 = [-rhs0 * r0 * r0 / 4.0, -rhs0 * r0 / 2.0]
    probe = [250.0, 500.0, 1000.0] if r_max >= 1000.0 else [r_max / 4, r_max / 2, r_max]
    grid = np.unique(np.concatenate([[0.0], np.geomspace(r0, r_max, 4000), probe]))
    sol = solve_ivp(odes, (r0, r_max), y0, method="RK45", rtol=1e-10, atol=1e-10,
                    t_eval=grid[1:], dense_output=False)
    if not sol.success:
        raise StepFailureError(sol.message)
    values = np.concatenate([[0.0], sol.y[0]])
    derivs = np.concatenate([[0.0], sol.y[1]])

    # tail: S ~ slope*log(r^2) + B with slope = -A/(4 pi); both the slope
    # (from r S'/2) and the intercept carry log-power/r^2 contamination,
    # so extrapolate each over the doubling probe radii
    idx = np.searchsorted(grid, probe)
    pv, pd = values[idx], derivs[idx]
    slope = _richardson([0.5 * r * d for r, d in zip(probe, pd)])
    intercept = _richardson([v - slope * math.log(r * r) for r, v in zip(probe, pv)])
    return RadialProfile(grid=grid, values=values, derivs=derivs,
                         asym_slope=float(slope), asym_intercept=float(intercept))


def laplacian_profile(i: int, r, profile: RadialProfile | None = None):
    """-(S_i'' + S_i'/r) evaluated from the ODE: RHS_i + 8 e^{-2T0} S_i."""
    r = np.asarray(r, dtype=float)
    S = profile(r) if profile is not None else (
        s0_explicit(r) if i == 0 else solve_profile(i)(r))
    out = _rhs(i, r) + 8.0 * np.exp(-2.0 * np.log1p(r * r)) * S
    return float(out) if out.ndim == 0 else out


def profile_integrals(r_max: float = 2000.0) -> dict:
    """Plane integrals fixing the energy-expansion constants.

    Returns I_S0 = int e^{-2T0} S0, I_T0sq = int e^{-2T0} T0^2 and
    A_check[i] = int of the distributional Laplacian of S_i, all over R^2
    (radial quadrature, 2 pi r dr measure, analytic log-power tails).
    """
    if r_max < 1000.0:
        raise ValueError("r_max must be at least 1000")

    def radial(f, split=(1.0, 10.0, 100.0)):
        pts = (0.0,) + split + (r_max,)
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            total += quad(lambda r: f(r) * r, lo, hi, limit=200)[0]
        return 2.0 * math.pi * total

    I_S0 = radial(lambda r: math.exp(-2.0 * math.log1p(r * r)) * s0_explicit(r))
    # tail of e^{-2T0} S0 ~ (-log r^2 + B0)/r^4: integrate analytically
    I_S0 += 2.0 * math.pi * quad(
        lambda r: (s0_explicit(r) / (1.0 + r * r) ** 2) * r, r_max, np.inf, limit=200)[0]
    I_T0sq = radial(lambda r: math.exp(-2.0 * math.log1p(r * r)) * math.log1p(r * r) ** 2)
    I_T0sq += 2.0 * math.pi * quad(
        lambda r: (math.log1p(r * r) ** 2 / (1.0 + r * r) ** 2) * r, r_max, np.inf, limit=200)[0]

    profs = [solve_profile(k, r_max=r_max) for k in range(3)]
    A_check = []
    for k, pr in enumerate(profs):
        val = radial(lambda r, k=k, pr=pr: float(_rhs(k, r)) +
                     8.0 * math.exp(-2.0 * math.log1p(r * r)) * float(pr(r)))
        A_check.append(val)
    return {"I_S0": I_S0, "I_T0sq": I_T0sq, "A_check": A_check,
            "B": [pr.B for pr in profs], "A": [pr.A for pr in profs]}
