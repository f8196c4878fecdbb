"""Even C^1 perturbation weights and their derived functions.

The toolkit works with integrands of the form (1 + g(u)) * exp(u^2) where g
is an even C^1 perturbation with g > -1 and g -> 0 at infinity.  This module
provides:

* the perturbation families (zero, power-log branches, tabulated knots),
* the derived functions H, g_N, Psi_N, phi_N and the truncation weight xi,
* the asymptotic data (A, B, F, kappa) attached to a family,
* a numerical validator for the asymptotic hypotheses.

Large arguments are handled in log-scale with an explicit exponent budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammainc, gammaln

EXP_BUDGET = 700.0

__all__ = [
    "NonAdmissibleError",
    "ExponentBudgetError",
    "FamilyKind",
    "PerturbationFamily",
    "AsymptoticData",
    "HypothesisReport",
    "eval_g",
    "eval_H",
    "eval_tH",
    "phi_N",
    "log_phi_N",
    "eval_psi_N",
    "psi_prime",
    "g_N",
    "xi",
    "asymptotic_data",
    "validate_hypotheses",
]


class NonAdmissibleError(ValueError):
    """The perturbation leaves the admissible range g > -1."""


class ExponentBudgetError(OverflowError):
    """A linear-scale value would exceed exp(EXP_BUDGET)."""


class FamilyKind(str, Enum):
    ZERO = "Zero"
    POWER_LOG = "PowerLog"
    TABULATED = "Tabulated"


@dataclass(frozen=True)
class PerturbationFamily:
    """An even perturbation g, evaluated at |t|.

    kind = Zero gives g identically 0.  kind = PowerLog uses the two
    analytic branches

        g(t) = g0 + c * t^(a+1) * log(1/t)^(-b)        for t <= 1/R'
        g(t) = c' * t^(-a') * (log t)^(-b')            for t >= R'

    joined on [1/R', R'] by a quintic C^1 Hermite blend (see `_blend`).
    kind = Tabulated interpolates user-supplied (t, g, g') knots.
    """

    kind: FamilyKind = FamilyKind.ZERO
    c: float = 0.0
    a: float = 0.0
    b: float = 0.0
    c_prime: float = 0.0
    a_prime: float = 0.0
    b_prime: float = 0.0
    R_prime: float = 10.0
    g0: float = 0.0
    knots: tuple[tuple[float, float, float], ...] = ()
    _hermite: tuple[float, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if self.kind is FamilyKind.POWER_LOG:
            if self.R_prime <= 1.0:
                raise ValueError("R_prime must exceed 1")
            for (cc, aa, bb), tag in (
                ((self.c, self.a, self.b), "(a, b)"),
                ((self.c_prime, self.a_prime, self.b_prime), "(a', b')"),
            ):
                if cc != 0.0 and (aa < 0 or (aa == 0 and bb <= 0)):
                    raise ValueError(f"{tag} must lie in E: a >= 0 and b > 0 if a = 0")
            self._check_admissible_tail()
            object.__setattr__(self, "_hermite", self._blend_coeffs())
        elif self.kind is FamilyKind.TABULATED:
            if len(self.knots) < 2:
                raise ValueError("Tabulated family needs at least two knots")
        if self.kind is not FamilyKind.POWER_LOG and self.g0 <= -1.0:
            raise NonAdmissibleError("g(0) <= -1")

    # -- PowerLog branches ------------------------------------------------

    def _g_zero_branch(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Near-zero branch and derivative, valid for 0 < t < 1."""
        p = self.a + 1.0
        L = np.log(1.0 / t)
        val = self.g0 + self.c * t**p * L ** (-self.b)
        dval = self.c * t ** (p - 1.0) * (p * L ** (-self.b) + self.b * L ** (-self.b - 1.0))
        return val, dval

    def _g_inf_branch(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Infinity branch and derivative, valid for t > 1."""
        ell = np.log(t)
        val = self.c_prime * t ** (-self.a_prime) * ell ** (-self.b_prime)
        dval = (
            -self.c_prime
            * t ** (-self.a_prime - 1.0)
            * ell ** (-self.b_prime - 1.0)
            * (self.a_prime * ell + self.b_prime)
        )
        return val, dval

    def _check_admissible_tail(self) -> None:
        t = np.geomspace(self.R_prime, self.R_prime * 1e6, 4096)
        g_inf, _ = self._g_inf_branch(t)
        if np.min(g_inf) <= -1.0 + 1e-9:
            raise NonAdmissibleError("infinity branch dips to g <= -1")
        t0 = np.geomspace(1e-12, 1.0 / self.R_prime, 4096)
        g0v, _ = self._g_zero_branch(t0)
        if np.min(g0v) <= -1.0 + 1e-9:
            raise NonAdmissibleError("near-zero branch dips to g <= -1")

    def _blend_coeffs(self) -> tuple[float, ...]:
        """Quintic Hermite data for the blend region [1/R', R'].

        The near-zero branch is undefined past t = 1 (log(1/t) changes
        sign), so a pointwise smoothstep mix of the two branches cannot be
        used across the whole gap.  Instead we take the unique quintic in
        x = log t matching value, slope and curvature of each branch at the
        two knots; this is the smoothstep construction applied to the C^2
        jet data and keeps the blend C^2.
        """
        t1, t2 = 1.0 / self.R_prime, self.R_prime
        h = 1e-6
        out = []
        for t, branch in ((t1, self._g_zero_branch), (t2, self._g_inf_branch)):
            v, d = branch(np.asarray(t))
            _, dp = branch(np.asarray(t * (1 + h)))
            _, dm = branch(np.asarray(t / (1 + h)))
            d2 = (dp - dm) / (t * (1 + h) - t / (1 + h))
            # x = log t: dg/dx = t g', d2g/dx2 = t g' + t^2 g''
            out.extend([float(v), float(t * d), float(t * d + t * t * d2)])
        return tuple(out)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "c": self.c,
            "a": self.a,
            "b": self.b,
            "c_prime": self.c_prime,
            "a_prime": self.a_prime,
            "b_prime": self.b_prime,
            "R_prime": self.R_prime,
            "g0": self.g0,
        }

    @staticmethod
    def from_json(obj: dict | str) -> "PerturbationFamily":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = FamilyKind(obj.get("kind", "Zero"))
        return PerturbationFamily(
            kind=kind,
            c=obj.get("c", 0.0),
            a=obj.get("a", 0.0),
            b=obj.get("b", 0.0),
            c_prime=obj.get("c_prime", 0.0),
            a_prime=obj.get("a_prime", 0.0),
            b_prime=obj.get("b_prime", 0.0),
            R_prime=obj.get("R_prime", 10.0),
            g0=obj.get("g0", 0.0),
        )


def eval_g(fam: PerturbationFamily, t) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (g(t), g'(t)) at |t|; works on scalars and arrays."""
    t = np.abs(np.asarray(t, dtype=float))
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if fam.kind is FamilyKind.ZERO:
        g = np.zeros_like(t)
        dg = np.zeros_like(t)
    elif fam.kind is FamilyKind.TABULATED:
        g, dg = _eval_tabulated(fam, t)
    else:
        g, dg = _eval_power_log(fam, t)
    if np.any(g <= -1.0):
        raise NonAdmissibleError("g(t) <= -1 encountered")
    if scalar:
        return float(g[0]), float(dg[0])
    return g, dg


def _eval_power_log(fam: PerturbationFamily, t: np.ndarray):
    g = np.empty_like(t)
    dg = np.empty_like(t)
    t1, t2 = 1.0 / fam.R_prime, fam.R_prime
    low = t <= t1
    high = t >= t2
    mid = ~(low | high)
    at0 = t == 0.0
    if np.any(low):
        tl = np.where(low & ~at0, t, 0.5 * t1)
        gv, gd = fam._g_zero_branch(tl)
        g[low], dg[low] = gv[low], gd[low]
        g[at0] = fam.g0
        dg[at0] = 0.0
    if np.any(high):
        gv, gd = fam._g_inf_branch(np.where(high, t, 2.0 * t2))
        g[high], dg[high] = gv[high], gd[high]
    if np.any(mid):
        gv, gd = _hermite_eval(fam, t[mid])
        g[mid], dg[mid] = gv, gd
    return g, dg


def _hermite_eval(fam: PerturbationFamily, t: np.ndarray):
    x1, x2 = -math.log(fam.R_prime), math.log(fam.R_prime)
    v1, d1, s1, v2, d2, s2 = fam._hermite
    L = x2 - x1
    x = (np.log(t) - x1) / L
    h0, h1, h2 = v1, d1 * L, s1 * L * L / 2.0
    A = np.array([[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [6.0, 12.0, 20.0]])
    rhs = np.array(
        [v2 - (h0 + h1 + h2), d2 * L - (h1 + 2 * h2), s2 * L * L - 2 * h2]
    )
    c3, c4, c5 = np.linalg.solve(A, rhs)
    q = h0 + h1 * x + h2 * x**2 + c3 * x**3 + c4 * x**4 + c5 * x**5
    dqdx = h1 + 2 * h2 * x + 3 * c3 * x**2 + 4 * c4 * x**3 + 5 * c5 * x**4
    return q, dqdx / (L * t)


def _eval_tabulated(fam: PerturbationFamily, t: np.ndarray):
    from scipy.interpolate import CubicHermiteSpline

    ts = np.array([k[0] for k in fam.knots])
    gs = np.array([k[1] for k in fam.knots])
    ds = np.array([k[2] for k in fam.knots])
    spl = CubicHermiteSpline(ts, gs, ds)
    tcl = np.clip(t, ts[0], ts[-1])
    g = spl(tcl)
    dg = spl.derivative()(tcl)
    dg[(t < ts[0]) | (t > ts[-1])] = 0.0
    g[t > ts[-1]] = gs[-1]
    return g, dg


def eval_H(fam: PerturbationFamily, t) -> np.ndarray | float:
    """H(t) = 1 + g(t) + g'(t) / (2 t), defined for t > 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("eval_H requires t > 0; use eval_tH at t = 0")
    g, dg = eval_g(fam, t_arr)
    return 1.0 + g + dg / (2.0 * t_arr)


def eval_tH(fam: PerturbationFamily, t) -> np.ndarray | float:
    """t * H(t), extended by continuity to 0 at t = 0."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t_arr)
    pos = t_arr > 0
    if np.any(pos):
        out[pos] = t_arr[pos] * np.asarray(eval_H(fam, t_arr[pos]))
    return float(out[0]) if np.asarray(t).ndim == 0 else out


# -- exponential series tail ----------------------------------------------


def log_phi_N(N: int, T) -> np.ndarray | float:
    """log of phi_N(T) = sum_{k>N} T^k / k!, via the regularized lower
    incomplete gamma: phi_N(T) = exp(T) * P(N+1, T)."""
    T_in = np.asarray(T, dtype=float)
    if np.any(T_in < 0):
        raise ValueError("T must be nonnegative")
    T_arr = np.atleast_1d(T_in)
    out = np.full_like(T_arr, -np.inf)
    pos = T_arr > 0
    P = gammainc(N + 1, np.where(pos, T_arr, 1.0))
    ok = pos & (P > 0)
    with np.errstate(divide="ignore"):
        out[ok] = T_arr[ok] + np.log(P[ok])
    under = pos & (P == 0)  # T << N: take the first series terms directly
    if np.any(under):
        Tb = T_arr[under]
        lead = (N + 1) * np.log(Tb) - gammaln(N + 2)
        out[under] = lead + np.log1p(Tb / (N + 2) + Tb**2 / ((N + 2) * (N + 3)))
    return float(out[0]) if T_in.ndim == 0 else out


def phi_N(N: int, T) -> np.ndarray | float:
    """Tail of the exponential series, sum_{k>N} T^k / k! (N >= 0)."""
    lp = log_phi_N(N, T)
    lp_arr = np.asarray(lp)
    if np.any(lp_arr > EXP_BUDGET):
        raise ExponentBudgetError("phi_N would exceed the exponent budget; use log_phi_N")
    with np.errstate(over="ignore"):
        out = np.exp(lp_arr)
    return float(out) if np.asarray(T).ndim == 0 else out


def g_N(fam: PerturbationFamily, N: int, t) -> np.ndarray | float:
    """Truncation g_N, defined through
    (1 + g_N) exp(t^2) = (1 + g) (1 + t^2 + phi_N(t^2))."""
    t_arr = np.asarray(t, dtype=float)
    g, _ = eval_g(fam, t_arr)
    T = t_arr * t_arr
    if np.any(T > EXP_BUDGET):
        raise ExponentBudgetError("t^2 exceeds the exponent budget")
    return (1.0 + g) * (1.0 + T + phi_N(N, T)) * np.exp(-T) - 1.0


def eval_psi_N(fam: PerturbationFamily, N: int, t) -> tuple:
    """Psi_N(t) = (1 + g_N(t)) exp(t^2) and its derivative.

    Psi_N  = (1 + g(t)) (1 + t^2 + phi_N(t^2))
    Psi_N' = 2 t H(t) phi_N(t^2) + 2 t (1 + t^(2N)/N!) (1 + g) + g' (1 + t^2)
    """
    if N < 1:
        raise ValueError("N >= 1 required")
    t_arr = np.abs(np.asarray(t, dtype=float))
    T = t_arr * t_arr
    if np.any(T > EXP_BUDGET):
        raise ExponentBudgetError("t^2 exceeds the exponent budget")
    g, dg = eval_g(fam, t_arr)
    ph = phi_N(N, T)
    psi = (1.0 + g) * (1.0 + T + ph)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pow = np.where(T > 0, N * np.log(np.maximum(T, 1e-300)), -np.inf) - gammaln(N + 1)
    powterm = np.where(T > 0, np.exp(log_pow), 0.0)
    tH = np.where(t_arr > 0, t_arr + t_arr * g + dg / 2.0, 0.0)
    dpsi = 2.0 * tH * ph + 2.0 * t_arr * (1.0 + powterm) * (1.0 + g) + dg * (1.0 + T)
    if np.asarray(t).ndim == 0:
        return float(psi), float(dpsi)
    return psi, dpsi


def psi_prime(fam: PerturbationFamily, N: int, t):
    """Convenience accessor for Psi_N'."""
    return eval_psi_N(fam, N, t)[1]


def xi(N: int, gamma: float) -> float:
    """Truncation weight gamma^(2(N-1)) / (phi_{N-1}(gamma^2) (N-1)!)."""
    if gamma <= 0:
        raise ValueError("gamma > 0 required")
    if N < 1:
        raise ValueError("N >= 1 required")
    log_xi = 2.0 * (N - 1) * math.log(gamma) - log_phi_N(N - 1, gamma * gamma) - gammaln(N)
    return math.exp(log_xi)


# -- asymptotic data --------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticData:
    """Closed-form decay data of a family: infinity-side coefficient A,
    zero-side coefficient B, profile F(t) = eps0 * t^kappa."""

    A: Callable[[np.ndarray], np.ndarray]
    B: Callable[[np.ndarray], np.ndarray]
    kappa: float
    eps_tilde0: int = 1
    delta0: float = 0.5
    delta0_prime: float = 0.5

    def F(self, t):
        return self.eps_tilde0 * np.asarray(t, dtype=float) ** self.kappa


def asymptotic_data(fam: PerturbationFamily) -> AsymptoticData:
    """Closed-form A, B, F, kappa for the Zero and PowerLog families."""
    if fam.kind is FamilyKind.TABULATED:
        raise ValueError("asymptotic data must be supplied by the user for Tabulated")
    if fam.kind is FamilyKind.ZERO:
        return AsymptoticData(
            A=lambda gam: np.zeros_like(np.asarray(gam, dtype=float)),
            B=lambda gam: 1.0 / np.asarray(gam, dtype=float),
            kappa=1.0,
        )
    c, a, b = fam.c, fam.a, fam.b
    cp, ap, bp = fam.c_prime, fam.a_prime, fam.b_prime
    g0 = fam.g0

    def A(gam):
        gam = np.asarray(gam, dtype=float)
        if ap > 0:
            return cp * ap * gam ** (-(ap + 2.0)) * np.log(gam) ** (-bp)
        return cp * bp * gam**-2.0 * np.log(gam) ** (-(bp + 1.0))

    def B(gam):
        gam = np.asarray(gam, dtype=float)
        return (1.0 + g0) / gam + 0.5 * c * (a + 1.0) * gam ** (-a) * np.log(gam) ** (-b)

    kappa = min(a, 1.0) if c != 0.0 else 1.0
    return AsymptoticData(A=A, B=B, kappa=kappa)


@dataclass
class HypothesisReport:
    """Measured residuals for the decay hypotheses on a gamma grid."""

    infinity_ok: bool
    zero_ok: bool
    growth_ok: bool
    infinity_residuals: list
    zero_residuals: list
    measured_delta0: float
    measured_delta0_prime: float

    @property
    def all_ok(self) -> bool:
        return self.infinity_ok and self.zero_ok and self.growth_ok


def validate_hypotheses(
    fam: PerturbationFamily,
    data: AsymptoticData,
    gamma_grid: Sequence[float],
) -> HypothesisReport:
    """Numerically check the decay hypotheses on a grid of gamma values.

    (i)  H(gamma - t/gamma) / H(gamma) - 1 ~ A(gamma) t,   t in [0, 5]
    (ii) (t/gamma) H(t/gamma) ~ B(gamma) F(t),             t in [1, 5]
    (iii) exponential growth bounds with measured admissible exponents.
    Report-only: failures are recorded, not raised.
    """
    gammas = np.asarray(sorted(gamma_grid), dtype=float)
    t_inf = np.linspace(0.0, 5.0, 21)
    t_zero = np.linspace(1.0, 5.0, 17)
    inf_res, zero_res = [], []
    for gam in gammas:
        Hg = float(np.asarray(eval_H(fam, gam)))
        Hshift = np.asarray(eval_H(fam, np.maximum(gam - t_inf / gam, 1e-12)))
        lhs = Hshift / Hg - 1.0
        Ag = float(np.asarray(data.A(gam)))
        inf_res.append(float(np.max(np.abs(lhs - Ag * t_inf))))
        tH = np.asarray(eval_tH(fam, t_zero / gam))
        Bg = float(np.asarray(data.B(gam)))
        zero_res.append(float(np.max(np.abs(tH - Bg * data.F(t_zero)))))

    def scale_inf(gam):
        return abs(float(np.asarray(data.A(gam)))) + gam**-4.0

    def scale_zero(gam):
        return abs(float(np.asarray(data.B(gam)))) + 1.0 / gam

    # residual = o(scale): the normalized residual must shrink along the grid
    norm_inf = [r / scale_inf(g) for r, g in zip(inf_res, gammas)]
    norm_zero = [r / scale_zero(g) for r, g in zip(zero_res, gammas)]
    tiny = 1e-12
    infinity_ok = norm_inf[-1] <= max(norm_inf[0], tiny) + tiny
    zero_ok = norm_zero[-1] <= max(norm_zero[0], tiny) + tiny

    # growth bound b): measure the smallest workable delta0 on t <= gamma^2
    gam = gammas[-1]
    t_wide = np.linspace(0.5, min(gam * gam, 25.0), 200)
    Hg = float(np.asarray(eval_H(fam, gam)))
    diff = np.abs(np.asarray(eval_H(fam, np.maximum(gam - t_wide / gam, 1e-12))) - Hg)
    denom = abs(Hg) * scale_inf(gam)
    with np.errstate(divide="ignore"):
        need = np.log(np.maximum(diff / denom, tiny)) / t_wide
    measured_delta0 = float(np.clip(np.max(need), 0.0, 1.0))
    tHw = np.abs(np.asarray(eval_tH(fam, t_wide / gam)))
    with np.errstate(divide="ignore"):
        need2 = np.log(np.maximum(tHw / scale_zero(gam), tiny)) / t_wide
    measured_delta0_prime = float(np.clip(np.max(need2), 0.0, 1.0))
    growth_ok = measured_delta0 < 1.0 and measured_delta0_prime < 1.0

    return HypothesisReport(
        infinity_ok=bool(infinity_ok),
        zero_ok=bool(zero_ok),
        growth_ok=bool(growth_ok),
        infinity_residuals=inf_res,
        zero_residuals=zero_res,
        measured_delta0=measured_delta0,
        measured_delta0_prime=measured_delta0_prime,
    )
