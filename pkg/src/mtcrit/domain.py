"""Planar domain models: Green function, Robin function, first Dirichlet
eigenvalue, area and singularity-aware quadrature.

Sign convention throughout: the Laplacian is -d_xx - d_yy, so the Green
function is written

    G_x(y) = (1/4 pi) * ( log(1/|x-y|^2) + H_x(y) ),

with H_x harmonic and equal to -log(1/|x-.|^2) on the boundary.  The Robin
function is x -> H_x(x); its maximum M, maximizer set K and the associated
integral S drive the existence criterion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize
from scipy.special import j0, j1

__all__ = [
    "Shape",
    "DomainModel",
    "RobinReport",
    "PoleCoincidenceError",
    "DegenerateMaxError",
    "green",
    "robin",
    "robin_report",
    "lambda1",
    "first_eigenfunction",
    "first_bessel_zero",
    "integrate_around_pole",
]


class PoleCoincidenceError(ValueError):
    """Green function requested at coincident points."""


class DegenerateMaxError(RuntimeError):
    """Robin maximizer escaped to the boundary margin."""


class Shape(str, Enum):
    UNIT_DISK = "UnitDisk"
    RECTANGLE = "Rectangle"


@dataclass(frozen=True)
class DomainModel:
    """Unit disk or axis-aligned rectangle [0,w] x [0,h]."""

    shape: Shape = Shape.UNIT_DISK
    width: float = 1.0
    height: float = 1.0
    quad_order: int = 64
    image_layers: int = 64

    def __post_init__(self):
        if self.shape is Shape.RECTANGLE and (self.width <= 0 or self.height <= 0):
            raise ValueError("rectangle sides must be positive")

    @property
    def area(self) -> float:
        if self.shape is Shape.UNIT_DISK:
            return math.pi
        return self.width * self.height

    def contains(self, p, margin: float = 0.0) -> bool:
        x, y = float(p[0]), float(p[1])
        if self.shape is Shape.UNIT_DISK:
            return math.hypot(x, y) < 1.0 - margin
        return margin < x < self.width - margin and margin < y < self.height - margin

    def boundary_distance(self, p) -> float:
        x, y = float(p[0]), float(p[1])
        if self.shape is Shape.UNIT_DISK:
            return 1.0 - math.hypot(x, y)
        return min(x, self.width - x, y, self.height - y)

    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Global rule (nodes (n,2), weights (n,)); weights sum to |Omega|."""
        n = self.quad_order
        xg, wg = leggauss(n)
        if self.shape is Shape.UNIT_DISK:
            # tensor rule in (r, theta); r-nodes from Gauss on [0,1] with
            # the r dr Jacobian
            r = 0.5 * (xg + 1.0)
            wr = 0.5 * wg * r
            theta = math.pi * (xg + 1.0)
            wt = math.pi * wg
            R, T = np.meshgrid(r, theta, indexing="ij")
            WR, WT = np.meshgrid(wr, wt, indexing="ij")
            pts = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
            w = (WR * WT).ravel()
        else:
            x = 0.5 * self.width * (xg + 1.0)
            y = 0.5 * self.height * (xg + 1.0)
            wx = 0.5 * self.width * wg
            wy = 0.5 * self.height * wg
            X, Y = np.meshgrid(x, y, indexing="ij")
            WX, WY = np.meshgrid(wx, wy, indexing="ij")
            pts = np.column_stack([X.ravel(), Y.ravel()])
            w = (WX * WY).ravel()
        return pts, w

    def to_json(self) -> dict:
        return {
            "shape": self.shape.value,
            "width": self.width,
            "height": self.height,
            "quad_order": self.quad_order,
            "image_layers": self.image_layers,
        }

    @staticmethod
    def from_json(obj: dict | str) -> "DomainModel":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return DomainModel(
            shape=Shape(obj.get("shape", "UnitDisk")),
            width=obj.get("width", 1.0),
            height=obj.get("height", 1.0),
            quad_order=obj.get("quad_order", 64),
            image_layers=obj.get("image_layers", 64),
        )


# -- Green and Robin functions ----------------------------------------------


def _green_disk(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Exact reflection formula on the unit disk, vectorized over y rows."""
    x = np.asarray(x, dtype=float)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d2 = np.sum((y - x) ** 2, axis=1)
    r2 = float(np.dot(x, x))
    if r2 == 0.0:
        num = 1.0
    else:
        ystar = x / r2
        num = r2 * np.sum((y - ystar) ** 2, axis=1)
    return (1.0 / (4.0 * math.pi)) * np.log(num / d2)


def _strip_green4pi(a: float, u, v, u0: float, v0: float):
    """4 pi times the Green function of the strip 0 < u < a (Dirichlet).

    Closed form obtained by summing the image lattice in the u-direction:
    the images at 2ma +/- u0 collapse to the cosh/cos kernel below.
    """
    u = np.asarray(u, dtype=float)
    dv = math.pi * (np.asarray(v, dtype=float) - v0) / a
    # distant images contribute ~ exp(-|dv|): below double precision long
    # before cosh overflows, so clip them to zero
    safe = np.abs(dv) < 35.0
    ch = np.cosh(np.where(safe, dv, 0.0))
    num = ch - np.cos(math.pi * (u + u0) / a)
    den = np.where(safe, ch - np.cos(math.pi * (u - u0) / a), 1.0)
    return np.where(safe, np.log(np.where(safe, num, 1.0) / den), 0.0)


def _rect_green4pi(dom: DomainModel, x: np.ndarray, y: np.ndarray, layers: int) -> np.ndarray:
    """4 pi G on the rectangle: strip kernel reflected across the far walls.

    The strip runs across the shorter side so each reflection gains a
    factor exp(-2 pi * long/short); truncation at `layers` reflections is
    far below double precision for any sane aspect ratio.
    """
    w, h = dom.width, dom.height
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if w <= h:
        a, b = w, h
        u0, v0 = float(x[0]), float(x[1])
        u, v = y[:, 0], y[:, 1]
    else:
        a, b = h, w
        u0, v0 = float(x[1]), float(x[0])
        u, v = y[:, 1], y[:, 0]
    total = np.zeros(y.shape[0])
    for n in range(-layers, layers + 1):
        total += _strip_green4pi(a, u, v, u0, v0 + 2.0 * n * b)
        total -= _strip_green4pi(a, u, v, u0, -v0 + 2.0 * n * b)
    return total


def green(dom: DomainModel, x, y) -> np.ndarray | float:
    """Dirichlet Green function G_x(y); y may be an (n,2) array."""
    x = np.asarray(x, dtype=float)
    y_in = np.asarray(y, dtype=float)
    y2 = np.atleast_2d(y_in)
    if np.any(np.sqrt(np.sum((y2 - x) ** 2, axis=1)) < 1e-14):
        raise PoleCoincidenceError("x and y coincide")
    if dom.shape is Shape.UNIT_DISK:
        out = _green_disk(x, y2)
    else:
        out = _rect_green4pi(dom, x, y2, dom.image_layers) / (4.0 * math.pi)
    return float(out[0]) if y_in.ndim == 1 else out


def robin(dom: DomainModel, x) -> float:
    """Robin function H_x(x): regular part of 4 pi G on the diagonal."""
    x = np.asarray(x, dtype=float)
    if not dom.contains(x):
        raise ValueError("x must be interior")
    if dom.shape is Shape.UNIT_DISK:
        r2 = float(np.dot(x, x))
        return 2.0 * math.log1p(-r2)
    # diagonal limit of 4 pi G + log|x-y|^2: the n=0 source strip term
    # contributes its regular part in closed form, every image term is
    # evaluated directly at y = x
    w, h = dom.width, dom.height
    if w <= h:
        a, b = w, h
        u0, v0 = float(x[0]), float(x[1])
    else:
        a, b = h, w
        u0, v0 = float(x[1]), float(x[0])
    total = math.log((1.0 - math.cos(2.0 * math.pi * u0 / a)) * 2.0 * a * a / math.pi**2)
    for n in range(-dom.image_layers, dom.image_layers + 1):
        if n != 0:
            total += float(_strip_green4pi(a, u0, v0, u0, v0 + 2.0 * n * b))
        total -= float(_strip_green4pi(a, u0, v0, u0, -v0 + 2.0 * n * b))
    return total


def first_bessel_zero() -> float:
    """First zero of J0 by bisection bracketing plus Newton (J0' = -J1)."""
    lo, hi = 2.0, 3.0
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if j0(lo) * j0(mid) <= 0:
            hi = mid
        else:
            lo = mid
    z = 0.5 * (lo + hi)
    for _ in range(50):
        step = j0(z) / j1(z)
        z += step
        if abs(step) < 1e-15:
            break
    return float(z)


def lambda1(dom: DomainModel) -> float:
    """First Dirichlet eigenvalue of -Laplace."""
    if dom.shape is Shape.UNIT_DISK:
        return first_bessel_zero() ** 2
    return math.pi**2 * (1.0 / dom.width**2 + 1.0 / dom.height**2)


@dataclass(frozen=True)
class RadialEigenfunction:
    """First disk eigenfunction v(r) = c J0(j01 r), H^1_0-normalized."""

    scale: float
    j01: float

    def __call__(self, r):
        return self.scale * j0(self.j01 * np.asarray(r, dtype=float))

    def derivative(self, r):
        return -self.scale * self.j01 * j1(self.j01 * np.asarray(r, dtype=float))


def first_eigenfunction(dom: DomainModel) -> RadialEigenfunction:
    """First eigenfunction normalized to Dirichlet energy 4 pi (disk only)."""
    if dom.shape is not Shape.UNIT_DISK:
        raise NotImplementedError("first_eigenfunction is provided for the disk")
    k = first_bessel_zero()
    # ||grad v||^2 = 2 pi k^2 int_0^1 J1(k r)^2 r dr = pi k^2 J1(k)^2
    # (Bessel norm with J0(k) = 0)
    energy_unit = math.pi * k * k * j1(k) ** 2
    return RadialEigenfunction(scale=math.sqrt(4.0 * math.pi / energy_unit), j01=k)


# -- singularity-aware integration over the domain ---------------------------


def _ray_length(dom: DomainModel, z: np.ndarray, theta: float) -> float:
    """Distance from z to the boundary along direction theta."""
    c, s = math.cos(theta), math.sin(theta)
    if dom.shape is Shape.UNIT_DISK:
        b = z[0] * c + z[1] * s
        return -b + math.sqrt(b * b + 1.0 - z[0] ** 2 - z[1] ** 2)
    best = math.inf
    for comp, d, lim in ((z[0], c, dom.width), (z[1], s, dom.height)):
        if d > 1e-15:
            best = min(best, (lim - comp) / d)
        elif d < -1e-15:
            best = min(best, -comp / d)
    return best

def _corner_angles(dom: DomainModel, z: np.ndarray) -> list[float]:
    if dom.shape is Shape.UNIT_DISK:
        return []
    out = []
    for cx in (0.0, dom.width):
        for cy in (0.0, dom.height):
            out.append(math.atan2(cy - z[1], cx - z[0]) % (2.0 * math.pi))
    return sorted(out)


def integrate_around_pole(
    dom: DomainModel,
    z,
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n_theta: int = 48,
    n_r: int = 48,
    n_panels: int = 14,
) -> float:
    """Integrate f(r, points) over the domain in polar coordinates around z.

    f receives radii (n,) and the corresponding points (n,2) and must be
    vectorized.  Radial panels are geometrically graded toward the pole so
    that log-power singularities of Green-type integrands are resolved.
    """
    z = np.asarray(z, dtype=float)
    xg, wg = leggauss(n_r)
    tg, twg = leggauss(n_theta)
    segs = [0.0] + _corner_angles(dom, z) + [2.0 * math.pi]
    segs = sorted(set(s % (2.0 * math.pi) if s > 0 else s for s in segs))
    if segs[-1] < 2.0 * math.pi:
        segs.append(2.0 * math.pi)
    total = 0.0
    for a0, a1 in zip(segs[:-1], segs[1:]):
        if a1 - a0 < 1e-14:
            continue
        thetas = 0.5 * (a1 - a0) * (tg + 1.0) + a0
        wth = 0.5 * (a1 - a0) * twg
        for theta, wt in zip(thetas, wth):
            R = _ray_length(dom, z, theta)
            if not np.isfinite(R) or R <= 0:
                continue
            # geometric panels [R q^(k+1), R q^k], q = 1/2, innermost to 0
            edges = R * 0.5 ** np.arange(n_panels + 1)
            edges = np.append(edges, 0.0)
            c, s = math.cos(theta), math.sin(theta)
            for r_hi, r_lo in zip(edges[:-1], edges[1:]):
                r = 0.5 * (r_hi - r_lo) * (xg + 1.0) + r_lo
                wr = 0.5 * (r_hi - r_lo) * wg
                pts = z[None, :] + r[:, None] * np.array([c, s])[None, :]
                total += wt * float(np.sum(wr * r * f(r, pts)))
    return total


# -- Robin report -------------------------------------------------------------


@dataclass
class RobinReport:
    M: float
    K: list
    S: float
    argmax_S: tuple
    tol_K: float

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "K": [list(map(float, p)) for p in self.K],
            "S": self.S,
            "argmax_S": list(map(float, self.argmax_S)),
            "tol_K": self.tol_K,
        }


def robin_report(
    dom: DomainModel,
    F: Callable[[np.ndarray], np.ndarray],
    tol_K: float = 1e-8,
    grid_n: int = 41,
    boundary_margin: float = 0.05,
) -> RobinReport:
    """Maximize the Robin function and evaluate the concentration integral.

    Returns M = max Robin, the maximizer set K (within tol_K after local
    refinement) and S = max over K of int_Omega G_z F(4 pi G_z).
    """
    if dom.shape is Shape.UNIT_DISK:
        xs = np.linspace(-1.0 + boundary_margin, 1.0 - boundary_margin, grid_n)
        ys = xs
    else:
        xs = np.linspace(boundary_margin * dom.width, (1 - boundary_margin) * dom.width, grid_n)
        ys = np.linspace(boundary_margin * dom.height, (1 - boundary_margin) * dom.height, grid_n)
    cands = []
    for x in xs:
        for y in ys:
            p = np.array([x, y])
            if dom.contains(p, margin=boundary_margin * 0.5):
                cands.append((robin(dom, p), p))
    cands.sort(key=lambda t: -t[0])
    # refine the top candidates
    refined = []
    seen: list[np.ndarray] = []
    for val, p in cands[:8]:
        res = minimize(lambda q: -robin(dom, q), p, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
        q = res.x
        if not dom.contains(q, margin=1e-6):
            raise DegenerateMaxError("Robin maximizer hit the boundary margin")
        if any(np.linalg.norm(q - s) < 1e-6 for s in seen):
            continue
        seen.append(q)
        refined.append((-res.fun, q))
    M = max(v for v, _ in refined)
    if dom.boundary_distance(refined[0][1]) < boundary_margin * 0.5:
        raise DegenerateMaxError("Robin maximizer hit the boundary margin")
    K = [q for v, q in refined if abs(v - M) <= tol_K]

    best_S, best_z = -math.inf, K[0]
    for zk in K:
        def integrand(r, pts, _z=zk):
            Gv = np.asarray(green(dom, _z, pts))
            return Gv * np.asarray(F(4.0 * math.pi * Gv))

        Sk = integrate_around_pole(dom, zk, integrand)
        if Sk > best_S:
            best_S, best_z = Sk, zk
    return RobinReport(M=float(M), K=[tuple(map(float, q)) for q in K],
                       S=float(best_S), argmax_S=tuple(map(float, best_z)), tol_K=tol_K)
