"""Squared-exponential prior kernel for the deflection process and the
cross/auto kernels induced by the bending operator L = -(p*lam/k) d^2/dx^2.

k_uu(x, x')  = exp(-(sigma2/2) ((x-x')/d)^2)
k_uf = k_fu  = -(sigma2*p*lam)/(d^2*k) * {sigma2 ((x-x')/d)^2 - 1} * k_uu
k_ff         = (sigma2^2*p^2*lam^2)/(d^4*k^2)
               * {3 - 6 sigma2 u^2 + sigma2^2 u^4} * k_uu,   u = (x-x')/d

All three are even in the lag, so k_uf(x, x') == k_uf(x', x) numerically.
The lag is normalised by the span d inside the kernel, keeping sigma2 near
its prior scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HyperParams:
    """GP hyperparameters theta = (k, EI, sigma2) with the known load p."""

    k: float
    EI: float
    sigma2: float
    p: float = 125000.0

    def __post_init__(self):
        if self.k <= 0.0 or self.EI <= 0.0 or self.sigma2 <= 0.0 or self.p <= 0.0:
            raise ValueError("hyperparameters must be strictly positive")

    @property
    def lam(self) -> float:
        return (self.k / (4.0 * self.EI)) ** 0.25


def k_uu(x, xp, sigma2, d):
    u = (np.asarray(x, float) - np.asarray(xp, float)) / d
    return np.exp(-0.5 * sigma2 * u * u)


def k_uf(x, xp, theta, cfg):
    u = (np.asarray(x, float) - np.asarray(xp, float)) / cfg.d
    pref = theta.sigma2 * theta.p * theta.lam / (cfg.d ** 2 * theta.k)
    return -pref * (theta.sigma2 * u * u - 1.0) * np.exp(-0.5 * theta.sigma2 * u * u)


def k_fu(x, xp, theta, cfg):
    return k_uf(xp, x, theta, cfg)


def k_ff(x, xp, theta, cfg):
    u = (np.asarray(x, float) - np.asarray(xp, float)) / cfg.d
    su2 = theta.sigma2 * u * u
    pref = (theta.sigma2 * theta.p * theta.lam / (cfg.d ** 2 * theta.k)) ** 2
    return pref * (3.0 - 6.0 * su2 + su2 * su2) * np.exp(-0.5 * su2)
