"""Analytic model of a finite beam on an elastic foundation under two
symmetric point loads, and the curvature obtained from its second derivative.

Closed-form deflection follows Hetenyi's free-end solution.  The dimensionless
shape w(x, lam) is built from the four initial-value basis functions

    A(t) = cosh t * cos t
    B(t) = cosh t * sin t - sinh t * cos t
    C(t) = cosh t * sin t + sinh t * cos t
    S(t) = sinh t * sin t

which satisfy the derivative cycle A' = -B, B' = 2S, S' = C, C' = 2A.  On
[0, x1] the shape is v(x) = (2*alpha*A(lam*x) + beta*C(lam*x)) / (sinh(lam*d)
+ sin(lam*d)); on [x1, x2] the load kink B(lam*(x - x1)) is added (its value
and first two derivatives vanish at x1, so the shape stays C^2 there); on
[x2, d] the mirror rule w(x) = w(d - x) applies.

Units are fixed: x and d in mm, p in N, k in N/mm^2, EI in N*mm^2, lam in
1/mm, deflection in mm, curvature in 1/mm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterRangeError
from ._fileio import write_csv

# sinh/cosh overflow near exp(710); leave headroom for products of terms
_HYPERBOLIC_LIMIT = 700.0


@dataclass(frozen=True)
class BeamConfig:
    """Geometry of the sleeper/sensor system.

    d: span length (mm); c: half-spacing offset between loads and ends (mm);
    x1, x2: load coordinates (mm), x2 = d - x1; sensor_coords: FBG coordinates
    (mm); strand_sep: vertical distance between the top and bottom FBG rows
    (mm); curvature_sign: -1 applies the leading minus of the bending operator
    -(p*lam/k) d^2/dx^2, +1 matches the data simulator's plain stencil.
    """

    d: float = 2500.0
    c: float = 750.0
    x1: float = 500.0
    x2: float = 2000.0
    sensor_coords: tuple = (500.0, 1250.0, 2000.0)
    strand_sep: float = 91.5
    curvature_sign: int = -1

    def __post_init__(self):
        if not (0.0 < self.x1 < self.x2 < self.d):
            raise ValueError("load coordinates must satisfy 0 < x1 < x2 < d")
        if abs(self.x2 - (self.d - self.x1)) > 1e-9 * self.d:
            raise ValueError("loads must be symmetric: x2 = d - x1")
        if not all(0.0 < xf < self.d for xf in self.sensor_coords):
            raise ValueError("sensor coordinates must lie strictly inside (0, d)")
        if self.strand_sep <= 0.0:
            raise ValueError("strand separation must be positive")
        if self.curvature_sign not in (-1, 1):
            raise ValueError("curvature_sign must be -1 or +1")


@dataclass(frozen=True)
class PhysicsParams:
    """Point-load magnitude p (N), ballast stiffness k (N/mm^2) and flexural
    rigidity EI (N*mm^2); the flexibility lam = (k/(4*EI))^(1/4) is derived."""

    p: float
    k: float
    EI: float

    def __post_init__(self):
        if self.p < 0.0:
            raise ValueError("load magnitude p must be nonnegative")
        if self.k <= 0.0 or self.EI <= 0.0:
            raise ValueError("k and EI must be strictly positive")

    @property
    def lam(self) -> float:
        return (self.k / (4.0 * self.EI)) ** 0.25


def _kA(t):
    return np.cosh(t) * np.cos(t)


def _kB(t):
    return np.cosh(t) * np.sin(t) - np.sinh(t) * np.cos(t)


def _kC(t):
    return np.cosh(t) * np.sin(t) + np.sinh(t) * np.cos(t)


def _kS(t):
    return np.sinh(t) * np.sin(t)


def _shape_coeffs(lam, cfg):
    """Coefficients (a, c) of the end-segment solution a*A(lam*x) + c*C(lam*x)."""
    td = lam * cfg.d
    t1 = lam * cfg.x1
    t2 = lam * cfg.x2
    denom = np.sinh(td) + np.sin(td)
    alpha = np.cosh(t1) * np.cos(t2) + np.cosh(t2) * np.cos(t1)
    beta = (np.cosh(t1) * np.sin(t2) - np.sinh(t1) * np.cos(t2)
            + np.cosh(t2) * np.sin(t1) - np.sinh(t2) * np.cos(t1))
    return 2.0 * alpha / denom, beta / denom


def _check_args(lam, cfg):
    if lam <= 0.0:
        raise ParameterRangeError("flexibility lam must be positive")
    if lam * cfg.d > _HYPERBOLIC_LIMIT:
        raise ParameterRangeError(
            f"lam*d = {lam * cfg.d:.3g} exceeds the hyperbolic overflow bound "
            f"({_HYPERBOLIC_LIMIT:g}); parameters are outside the usable range")


def _shape(x, lam, cfg, deriv):
    """w(x, lam) or its first/second x-derivative, vectorized over x."""
    _check_args(lam, cfg)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > cfg.d):
        raise DomainError("coordinate outside the beam domain [0, d]")
    mirrored = xa > cfg.x2
    xm = np.where(mirrored, cfg.d - xa, xa)
    a, c = _shape_coeffs(lam, cfg)
    t = lam * xm
    tau = lam * np.clip(xm - cfg.x1, 0.0, None)
    in_mid = xm > cfg.x1
    if deriv == 0:
        val = a * _kA(t) + c * _kC(t)
        val = np.where(in_mid, val + _kB(tau), val)
    elif deriv == 1:
        val = lam * (-a * _kB(t) + 2.0 * c * _kA(t))
        val = np.where(in_mid, val + 2.0 * lam * _kS(tau), val)
        val = np.where(mirrored, -val, val)  # odd derivative flips under mirror
    elif deriv == 2:
        val = lam ** 2 * (-2.0 * a * _kS(t) - 2.0 * c * _kB(t))
        val = np.where(in_mid, val + 2.0 * lam ** 2 * _kC(tau), val)
    else:
        raise ValueError("deriv must be 0, 1 or 2")
    return float(val) if np.ndim(x) == 0 else val


def deflection_shape(x, lam, cfg):
    """Dimensionless deflection shape w(x, lam); symmetric about midspan."""
    return _shape(x, lam, cfg, deriv=0)


def deflection(x, params, cfg):
    """Vertical deflection y(x) = (p*lam/k) * w(x, lam) in mm."""
    lam = params.lam
    return (params.p * lam / params.k) * _shape(x, lam, cfg, deriv=0)


def curvature_physics(x, params, cfg, method="fd", h=1.0, sign=None):
    """Curvature sign * (p*lam/k) * w''(x) in 1/mm.

    method "analytic" differentiates the closed form; "fd" uses the central
    stencil (w(x+h) - 2 w(x) + w(x-h)) / h^2 with h in mm (default 1, the
    spacing used by the data generator).  sign defaults to
    cfg.curvature_sign (-1, the bending-operator convention).
    """
    lam = params.lam
    scale = params.p * lam / params.k
    if sign is None:
        sign = cfg.curvature_sign
    if method == "analytic":
        return sign * scale * _shape(x, lam, cfg, deriv=2)
    if method == "fd":
        if h <= 0.0:
            raise ValueError("stencil width h must be positive")
        xa = np.asarray(x, dtype=float)
        if np.any(xa < h) or np.any(xa > cfg.d - h):
            raise DomainError("FD stencil needs x within (h, d - h)")
        num = (_shape(xa + h, lam, cfg, 0) - 2.0 * _shape(xa, lam, cfg, 0)
               + _shape(xa - h, lam, cfg, 0))
        val = sign * scale * num / h ** 2
        return float(val) if np.ndim(x) == 0 else val
    raise ValueError(f"unknown curvature method {method!r}")


def profile_grid(params, cfg, n=251, sign=None, h=1.0):
    """Evaluate (x, w, y, curvature) on an n-point grid inset by the stencil."""
    x = np.linspace(h, cfg.d - h, n)
    w = deflection_shape(x, params.lam, cfg)
    y = (params.p * params.lam / params.k) * w
    f = curvature_physics(x, params, cfg, method="fd", h=h, sign=sign)
    return x, w, y, f


def write_profile_csv(path, params, cfg, n=251, sign=None, meta=None):
    """Emit the grid profile as CSV with columns x_mm, w, y_mm, curvature."""
    x, w, y, f = profile_grid(params, cfg, n=n, sign=sign)
    write_csv(path, ["x_mm", "w", "y_mm", "curvature"],
              zip(x, w, y, f), meta=meta)
