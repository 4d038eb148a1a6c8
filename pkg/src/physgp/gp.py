"""Joint covariance assembly, log marginal likelihood and point-wise
posteriors for the two linked outputs (deflection u, curvature f).

The stacked vector Y = [w(X_u, lam), mu_f] pairs noise-free simulation
anchors with empirical curvature means; its covariance is the block matrix

    K = [[k_uu(X_u, X_u),  k_uf(X_u, X_f)],
         [k_fu(X_f, X_u),  k_ff(X_f, X_f) + Sigma_f]]  + jitter*I.

Factorisation is Cholesky with adaptive jitter: the base jitter is
1e-10 * trace(K)/n and is escalated three times by a factor 10 before a
CholeskyFailure is raised.  A factorised JointModel is immutable and can
serve concurrent posterior queries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from . import kernels
from .beam import deflection_shape
from .errors import CholeskyFailure
from ._fileio import write_csv

_BASE_JITTER = 1e-10
_JITTER_ESCALATIONS = 3


@dataclass(frozen=True)
class JointDesign:
    """Simulation coordinates X_u, sensor coordinates X_f, stacked vector Y
    of length N_u + N_f, and the diagonal of the sensor noise covariance."""

    x_u: np.ndarray
    x_f: np.ndarray
    y: np.ndarray
    sigma_f: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_u", np.atleast_1d(np.asarray(self.x_u, float)))
        object.__setattr__(self, "x_f", np.atleast_1d(np.asarray(self.x_f, float)))
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, float)))
        object.__setattr__(self, "sigma_f", np.atleast_1d(np.asarray(self.sigma_f, float)))
        if self.y.shape != (self.x_u.size + self.x_f.size,):
            raise ValueError("stacked vector must have length N_u + N_f")
        if self.sigma_f.shape != self.x_f.shape:
            raise ValueError("noise diagonal must match the sensor coordinates")
        if np.any(self.sigma_f < 0.0):
            raise ValueError("noise variances must be nonnegative")

    @property
    def n_u(self) -> int:
        return self.x_u.size

    @property
    def n_f(self) -> int:
        return self.x_f.size


@dataclass(frozen=True)
class PosteriorPoint:
    x: float
    mean: float
    variance: float


def design_for(theta, n_u, cfg, mu_f, sigma_f, x_f=None):
    """Build the joint design: N_u evenly spaced anchors on [0, d], the
    physics values w(X_u, lam(theta)) and the empirical sensor moments."""
    x_u = np.linspace(0.0, cfg.d, n_u) if n_u > 0 else np.empty(0)
    if x_f is None:
        x_f = np.asarray(cfg.sensor_coords, float)
    w_u = deflection_shape(x_u, theta.lam, cfg) if n_u > 0 else np.empty(0)
    y = np.concatenate([np.atleast_1d(w_u), np.asarray(mu_f, float)])
    return JointDesign(x_u=x_u, x_f=x_f, y=y, sigma_f=np.asarray(sigma_f, float))


def assemble_K(design, theta, cfg):
    """Block covariance of the stacked vector, plus the base jitter."""
    xu = design.x_u[:, None]
    xf = design.x_f[:, None]
    kuu = kernels.k_uu(xu, design.x_u[None, :], theta.sigma2, cfg.d)
    kuf = kernels.k_uf(xu, design.x_f[None, :], theta, cfg)
    kff = kernels.k_ff(xf, design.x_f[None, :], theta, cfg) + np.diag(design.sigma_f)
    K = np.block([[kuu, kuf], [kuf.T, kff]])
    n = K.shape[0]
    K[np.diag_indices_from(K)] += _BASE_JITTER * np.trace(K) / n
    return K


def _factor(K):
    """Cholesky with jitter escalation; raises CholeskyFailure when exhausted."""
    n = K.shape[0]
    eps = _BASE_JITTER * np.trace(K) / n
    bump = 0.0
    for attempt in range(_JITTER_ESCALATIONS + 1):
        try:
            return cho_factor(K + bump * np.eye(n), lower=True)
        except LinAlgError:
            bump = eps * 10.0 ** (attempt + 1)
    raise CholeskyFailure(
        f"covariance not positive definite after {_JITTER_ESCALATIONS} "
        "jitter escalations; the hyperparameters are pathological")


def _gauss_logpdf(y, factor):
    half_logdet = np.sum(np.log(np.diag(factor[0])))
    quad = float(y @ cho_solve(factor, y))
    n = y.size
    return -0.5 * quad - half_logdet - 0.5 * n * np.log(2.0 * np.pi)


def log_marginal(y, K):
    """Gaussian log marginal likelihood -1/2 y'K^-1 y - 1/2 log|K| - n/2 log 2pi.

    Higher is better; computed via Cholesky (with jitter escalation).
    """
    y = np.asarray(y, float)
    return _gauss_logpdf(y, _factor(np.asarray(K, float)))


class JointModel:
    """Assembled and factorised joint model for one (design, theta) pair.

    The factorisation is computed once in the constructor and reused for the
    marginal likelihood, swapped-observation likelihoods and every posterior
    query; instances are immutable after construction.
    """

    def __init__(self, design, theta, cfg):
        self.design = design
        self.theta = theta
        self.cfg = cfg
        self.K = assemble_K(design, theta, cfg)
        self._factor = _factor(self.K)
        self._alpha = cho_solve(self._factor, design.y)
        self._half_logdet = np.sum(np.log(np.diag(self._factor[0])))

    @property
    def log_ml(self) -> float:
        """Log marginal likelihood of the design's own stacked vector."""
        return self.log_ml_of(self.design.y)

    def log_ml_of(self, y) -> float:
        y = np.asarray(y, float)
        quad = float(y @ cho_solve(self._factor, y))
        return -0.5 * quad - self._half_logdet - 0.5 * y.size * np.log(2.0 * np.pi)

    def log_ml_many(self, ys) -> np.ndarray:
        """Vectorised log_ml_of for an (n_reps, N) stack of observation vectors."""
        ys = np.asarray(ys, float)
        sol = cho_solve(self._factor, ys.T)
        quad = np.einsum("ij,ji->i", ys, sol)
        n = ys.shape[1]
        return -0.5 * quad - self._half_logdet - 0.5 * n * np.log(2.0 * np.pi)

    def swap_observations(self, mu_f) -> np.ndarray:
        """Stacked vector with the sensor block replaced by new batch means."""
        y = self.design.y.copy()
        y[self.design.n_u:] = np.asarray(mu_f, float)
        return y

    def _posterior(self, q, prior_var):
        sol = cho_solve(self._factor, q)
        mean = q.T @ self._alpha
        var = prior_var - np.einsum("ij,ij->j", q, sol)
        var = np.where(var < 0.0, 0.0, var)  # clamp jitter-level negatives
        return mean, var

    def _cross_f(self, xa):
        top = kernels.k_fu(xa[None, :], self.design.x_u[:, None], self.theta, self.cfg)
        bot = kernels.k_ff(self.design.x_f[:, None], xa[None, :], self.theta, self.cfg)
        return np.vstack([top, bot])

    def _cross_u(self, xa):
        top = kernels.k_uu(self.design.x_u[:, None], xa[None, :], self.theta.sigma2, self.cfg.d)
        bot = kernels.k_uf(self.design.x_f[:, None], xa[None, :], self.theta, self.cfg)
        return np.vstack([top, bot])

    def posterior_f(self, x):
        """Point-wise posterior of the curvature process at x."""
        xa = np.atleast_1d(np.asarray(x, float))
        prior = kernels.k_ff(xa, xa, self.theta, self.cfg)
        mean, var = self._posterior(self._cross_f(xa), prior)
        if np.ndim(x) == 0:
            return PosteriorPoint(float(x), float(mean[0]), float(var[0]))
        return mean, var

    def posterior_u(self, x):
        """Point-wise posterior of the deflection-shape process at x."""
        xa = np.atleast_1d(np.asarray(x, float))
        prior = kernels.k_uu(xa, xa, self.theta.sigma2, self.cfg.d)
        mean, var = self._posterior(self._cross_u(xa), prior)
        if np.ndim(x) == 0:
            return PosteriorPoint(float(x), float(mean[0]), float(var[0]))
        return mean, var


def posterior_f(x, design, theta, cfg):
    return JointModel(design, theta, cfg).posterior_f(x)


def posterior_u(x, design, theta, cfg):
    return JointModel(design, theta, cfg).posterior_u(x)


def write_posterior_csv(path, model, xs, meta=None, bands=False):
    """Posterior grid CSV: x_mm, f_mean, f_var, u_mean, u_var (plus optional
    95% bands mean +- 1.96 sqrt(var))."""
    xs = np.asarray(xs, float)
    f_mean, f_var = model.posterior_f(xs)
    u_mean, u_var = model.posterior_u(xs)
    cols = ["x_mm", "f_mean", "f_var", "u_mean", "u_var"]
    data = [xs, f_mean, f_var, u_mean, u_var]
    if bands:
        zs = 1.959963984540054  # two-sided 95% normal quantile
        cols += ["f_lo95", "f_hi95", "u_lo95", "u_hi95"]
        data += [f_mean - zs * np.sqrt(f_var), f_mean + zs * np.sqrt(f_var),
                 u_mean - zs * np.sqrt(u_var), u_mean + zs * np.sqrt(u_var)]
    write_csv(path, cols, zip(*data), meta=meta)
