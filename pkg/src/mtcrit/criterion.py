"""Existence criterion: the limit ratio l and the verdict assembly.

The decisive quantity is

    l = lim_{gamma->inf} ( g^-4 + A(g)/2 + 4 g^-3 e^{-1-M} B(g) S )
                       / ( g^-4 + |A(g)| + g^-3 |B(g)| ),

where M is the Robin maximum, S the concentration integral, and A, B the
decay/zero-behavior coefficients of the perturbation.  Existence of an
extremal holds when l > 0 or when Lambda_g >= pi e^{1+M}; truncated
perturbations admit no extremal when l < 0 and Lambda_g < pi e^{1+M}.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .perturbation import AsymptoticData, FamilyKind, PerturbationFamily

__all__ = [
    "Verdict",
    "Cor2Class",
    "CriterionReport",
    "ZeroDenominatorError",
    "NoLimitError",
    "ratio_value",
    "closed_form_l",
    "limit_l",
    "classify",
    "cor2_classifier",
    "nonasympt_condition",
    "DEFAULT_GAMMA_GRID",
]

DEFAULT_GAMMA_GRID = tuple(math.exp(k) for k in range(2, 9))


class ZeroDenominatorError(ArithmeticError):
    """All three denominator terms of the ratio underflowed."""


class NoLimitError(RuntimeError):
    """Grid values oscillate beyond the spread threshold."""


class Verdict(str, Enum):
    EXISTS_L = "ExtremalExists_l"
    EXISTS_LAMBDA = "ExtremalExists_Lambda"
    NO_EXTREMAL = "NoExtremal_Truncations"
    INCONCLUSIVE = "Inconclusive"


class Cor2Class(str, Enum):
    EXISTS = "Exists"
    NOT_EXISTS = "NotExists"
    BORDER = "Border"


def ratio_value(data: AsymptoticData, M: float, S: float, gamma: float) -> float:
    """Evaluate the criterion ratio at a single height gamma."""
    A = float(data.A(gamma))
    B = float(data.B(gamma))
    g4 = gamma**-4.0
    den = g4 + abs(A) + abs(B) / gamma**3
    if den == 0.0:
        raise ZeroDenominatorError("all denominator terms underflowed")
    num = g4 + 0.5 * A + 4.0 * B * S * math.exp(-1.0 - M) / gamma**3
    return num / den


def _powerlog_pieces(fam: PerturbationFamily, M: float, S: float):
    """Each ratio term as (coefficient, p, q) for C*gamma^-p*(log gamma)^-q.

    Returns (numerator pieces, denominator pieces).  The B-coefficient
    contributes two pieces (constant part from g(0), power-log part from
    the zero behavior); only leading pieces matter for the limit.
    """
    cS = 4.0 * S * math.exp(-1.0 - M)
    num = [(1.0, 4.0, 0.0), (cS * (1.0 + fam.g0), 4.0, 0.0)]
    den = [(1.0, 4.0, 0.0), (1.0 + fam.g0, 4.0, 0.0)]
    if fam.kind is FamilyKind.POWER_LOG:
        if fam.c_prime != 0.0:
            if fam.a_prime > 0.0:
                piece = (fam.c_prime * fam.a_prime, fam.a_prime + 2.0, fam.b_prime)
            else:
                piece = (fam.c_prime * fam.b_prime, 2.0, fam.b_prime + 1.0)
            num.append((0.5 * piece[0], piece[1], piece[2]))
            den.append((abs(piece[0]), piece[1], piece[2]))
        if fam.c != 0.0:
            coeff = 0.5 * fam.c * (fam.a + 1.0)
            num.append((cS * coeff, 3.0 + fam.a, fam.b))
            den.append((abs(coeff), 3.0 + fam.a, fam.b))
    return num, den


def closed_form_l(fam: PerturbationFamily, M: float, S: float) -> float | None:
    """Limit of the ratio by exponent bookkeeping (PowerLog/zero families).

    Every term decays like gamma^-p (log gamma)^-q; the limit is the
    coefficient sum of the lexicographically slowest-decaying (p, q) in
    the numerator over the same in the denominator.  Returns None for
    tabulated families (no closed form).
    """
    if fam.kind is FamilyKind.TABULATED:
        return None
    num, den = _powerlog_pieces(fam, M, S)
    key = min((p, q) for _, p, q in den)
    den_sum = sum(c for c, p, q in den if (p, q) == key)
    num_sum = sum(c for c, p, q in num if (p, q) == key)
    return num_sum / den_sum


def limit_l(data: AsymptoticData, M: float, S: float,
            gamma_grid=DEFAULT_GAMMA_GRID, fam: PerturbationFamily | None = None,
            spread_threshold: float = 0.25) -> tuple[float, float]:
    """Extrapolate the ratio over a log-spaced gamma grid.

    Returns (l, confidence).  The grid values carry 1/log(gamma)-scale
    corrections, so one Richardson step in 1/log(gamma) is applied and
    the spread of the extrapolants is the confidence width.  Raises
    NoLimit when the raw values oscillate by more than spread_threshold
    after extrapolation.
    """
    grid = sorted(gamma_grid)
    if len(grid) < 4:
        raise ValueError("need at least 4 grid points")
    vals = [ratio_value(data, M, S, g) for g in grid]
    ks = [math.log(g) for g in grid]
    # Richardson in 1/log gamma: eliminate the c/k term pairwise
    extr = [(ks[j] * vals[j] - ks[j - 1] * vals[j - 1]) / (ks[j] - ks[j - 1])
            for j in range(1, len(vals))]
    tail = extr[-3:]
    l_grid = tail[-1]
    confidence = max(tail) - min(tail)
    if confidence > spread_threshold:
        raise NoLimitError(f"ratio grid oscillates: spread {confidence:.3g}")
    if fam is not None:
        closed = closed_form_l(fam, M, S)
        if closed is not None:
            return closed, max(confidence, abs(closed - l_grid))
    return l_grid, confidence


@dataclass
class CriterionReport:
    M: float
    S: float
    lambda_g: float
    pi_e_level: float
    l_closed: float | None
    l_grid: float
    l_confidence: float
    verdict: Verdict
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "M": self.M, "S": self.S, "lambda_g": self.lambda_g,
            "pi_e_level": self.pi_e_level, "l_closed": self.l_closed,
            "l_grid": self.l_grid, "l_confidence": self.l_confidence,
            "verdict": self.verdict.value, "diagnostics": self.diagnostics,
        }


def classify(M: float, S: float, lambda_g: float, l: float, l_confidence: float,
             l_closed: float | None = None, lambda_gap: float = 0.0,
             diagnostics: dict | None = None) -> CriterionReport:
    """Assemble the existence verdict from the computed quantities.

    lambda_gap is the reported optimization gap of the Lambda_g solve;
    comparisons within the gap are treated as undecided.  For the
    no-extremal branch the conclusion applies to the truncations g_N for
    all N large (the statement is asymptotic in the truncation order).
    """
    level = math.pi * math.exp(1.0 + M)
    decided = l_closed if l_closed is not None else l
    diag = dict(diagnostics or {})
    if decided > l_confidence:
        verdict = Verdict.EXISTS_L
    elif lambda_g - lambda_gap >= level:
        verdict = Verdict.EXISTS_LAMBDA
    elif decided < -l_confidence and lambda_g + lambda_gap < level:
        verdict = Verdict.NO_EXTREMAL
        diag["note"] = ("no extremal for the truncated perturbations g_N, "
                        "N large; the truncation threshold is non-constructive")
    else:
        verdict = Verdict.INCONCLUSIVE
    return CriterionReport(M=M, S=S, lambda_g=lambda_g, pi_e_level=level,
                           l_closed=l_closed, l_grid=l, l_confidence=l_confidence,
                           verdict=verdict, diagnostics=diag)


def cor2_classifier(a_prime: float, b_prime: float, c_prime: float) -> Cor2Class:
    """Power-decay corollary: existence by (a', c') alone, border at a'=2.

    Requires (a', b') admissible and c' nonzero.  The border case a'=2,
    c'<0 is resolved by the sign of the limit l against the threshold
    c'* = -(1 + 2/e).
    """
    if c_prime == 0.0:
        raise ValueError("c' must be nonzero")
    if a_prime < 0.0 or (a_prime == 0.0 and b_prime <= 0.0):
        raise ValueError("(a', b') must be admissible")
    if a_prime > 2.0 or c_prime > 0.0:
        return Cor2Class.EXISTS
    if a_prime < 2.0:
        return Cor2Class.NOT_EXISTS
    return Cor2Class.BORDER


def nonasympt_condition(lambda1: float, M: float, A_bar: float) -> bool:
    """Sufficient non-asymptotic existence test 4(1+A_bar) > lambda1 e^{1+M}."""
    return 4.0 * (1.0 + A_bar) > lambda1 * math.exp(1.0 + M)


def ratio_curve_csv(path: str, data: AsymptoticData, M: float, S: float,
                    gamma_grid=DEFAULT_GAMMA_GRID) -> None:
    """Emit the (gamma, ratio) curve for plotting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma", "ratio"])
        for g in sorted(gamma_grid):
            w.writerow([f"{g:.17g}", f"{ratio_value(data, M, S, g):.17g}"])
