"""MAP estimation of theta = (k, EI, sigma2): empirical batch moments,
log-normal regularization and simulated annealing over log-parameters.

The objective is the joint log marginal likelihood of the stacked vector
Y_theta = [w(X_u, lam(theta)), mu_f] plus the log prior.  Y_theta is rebuilt
at every proposal because the physics anchors w(X_u, lam) move with theta.
Proposals are Gaussian random walks in log-parameter space (which keeps every
component strictly positive and matches the log-normal prior geometry); the
best visited state is returned, never the last accepted one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gp
from .errors import (CholeskyFailure, InsufficientData, OptimizationFailure,
                     ParameterRangeError)
from .kernels import HyperParams


@dataclass(frozen=True)
class EmpiricalStats:
    """Per-sensor batch mean and population (1/M) variance."""

    mu_f: np.ndarray
    sigma_f_diag: np.ndarray
    n_obs: int

    def __post_init__(self):
        object.__setattr__(self, "mu_f", np.atleast_1d(np.asarray(self.mu_f, float)))
        object.__setattr__(self, "sigma_f_diag",
                           np.atleast_1d(np.asarray(self.sigma_f_diag, float)))
        if self.mu_f.shape != self.sigma_f_diag.shape:
            raise ValueError("mean and variance vectors must align")
        if np.any(self.sigma_f_diag < 0.0):
            raise ValueError("variances must be nonnegative")

    def restrict(self, indices):
        """Stats for a subset of sensors (used by the holdout tuning)."""
        idx = list(indices)
        return EmpiricalStats(self.mu_f[idx], self.sigma_f_diag[idx], self.n_obs)


@dataclass(frozen=True)
class PriorSpec:
    """(m, s) of the log-normal density q(x, m, s) per parameter."""

    sigma2: tuple = (2.5, 0.125)
    k: tuple = (5.0, 0.25)
    EI: tuple = (28.0, 0.25)

    def __post_init__(self):
        for m, s in (self.sigma2, self.k, self.EI):
            if s <= 0.0:
                raise ValueError("prior scale s must be positive")

    def modes(self):
        """Component-wise log-normal modes exp(m - s^2), as (k, EI, sigma2)."""
        return tuple(np.exp(m - s * s) for m, s in (self.k, self.EI, self.sigma2))


@dataclass(frozen=True)
class AnnealSchedule:
    """Cooling T_n = exp(-delta*n/N), log-space proposal scale and restarts."""

    n_iters: int = 2000
    delta: float = 5.0
    proposal_std: float = 0.05
    restarts: int = 3
    rng_seed: int = 1234

    def __post_init__(self):
        if self.n_iters < 1:
            raise ValueError("n_iters must be at least 1")
        if self.proposal_std <= 0.0:
            raise ValueError("proposal std must be positive")
        if self.restarts < 1:
            raise ValueError("at least one restart is required")


@dataclass(frozen=True)
class FitResult:
    theta_hat: HyperParams
    lambda_hat: float
    objective: float
    n_iters: int
    seed: int
    n_u: int

    def to_dict(self):
        return {
            "theta_hat": {"k": self.theta_hat.k, "EI": self.theta_hat.EI,
                          "sigma2": self.theta_hat.sigma2, "p": self.theta_hat.p},
            "lambda_hat": self.lambda_hat,
            "objective": self.objective,
            "n_iters": self.n_iters,
            "seed": self.seed,
            "N_u": self.n_u,
        }


def empirical_stats(batch) -> EmpiricalStats:
    """Batch mean and diagonal population variance (1/M normalisation)."""
    values = np.asarray(getattr(batch, "values", batch), float)
    if values.ndim != 2:
        raise ValueError("curvature batch must be an M x N_f matrix")
    m = values.shape[0]
    if m < 2:
        raise InsufficientData(f"need at least 2 observations, got {m}")
    mu = values.mean(axis=0)
    var = ((values - mu) ** 2).mean(axis=0)
    return EmpiricalStats(mu_f=mu, sigma_f_diag=var, n_obs=m)


def _log_q(x, m, s):
    if x <= 0.0:
        return -np.inf
    lx = np.log(x)
    return -lx - 0.5 * np.log(2.0 * np.pi * s * s) - (lx - m) ** 2 / (2.0 * s * s)


def log_prior(theta, prior) -> float:
    """Sum of log-normal log densities over (sigma2, k, EI)."""
    return (_log_q(theta.sigma2, *prior.sigma2)
            + _log_q(theta.k, *prior.k)
            + _log_q(theta.EI, *prior.EI))


def derive_seed(*keys) -> int:
    """Deterministic integer sub-seed from a tuple of integer keys."""
    return int(np.random.SeedSequence(list(int(k) for k in keys)).generate_state(1)[0])


def map_objective(stats, n_u, cfg, prior, p_known):
    """Return a callable theta -> log marginal likelihood + log prior.

    Pathological proposals (overflow, non-PD covariance) score -inf so the
    annealer simply moves away from them.
    """
    mu = stats.mu_f
    sig = stats.sigma_f_diag
    x_f = np.asarray(cfg.sensor_coords, float)[: mu.size]

    def objective(theta):
        lp = log_prior(theta, prior)
        if not np.isfinite(lp):
            return -np.inf
        try:
            design = gp.design_for(theta, n_u, cfg, mu, sig, x_f=x_f)
            K = gp.assemble_K(design, theta, cfg)
            return gp.log_marginal(design.y, K) + lp
        except (ParameterRangeError, CholeskyFailure):
            return -np.inf

    return objective


def _anneal(objective, start_log, schedule, rng, p_known):
    """One annealing run; returns (best_log_theta, best_objective)."""
    n = schedule.n_iters
    cur = np.array(start_log, float)

    def theta_of(l):
        return HyperParams(k=np.exp(l[0]), EI=np.exp(l[1]),
                           sigma2=np.exp(l[2]), p=p_known)

    cur_val = objective(theta_of(cur))
    best, best_val = cur.copy(), cur_val
    steps = rng.normal(0.0, schedule.proposal_std, size=(n, 3))
    logu = np.log(rng.uniform(size=n))
    for i in range(n):
        cand = cur + steps[i]
        cand_val = objective(theta_of(cand))
        temp = np.exp(-schedule.delta * (i + 1) / n)
        if cand_val > cur_val or logu[i] <= (cand_val - cur_val) / temp:
            cur, cur_val = cand, cand_val
            if cur_val > best_val:
                best, best_val = cur.copy(), cur_val
    return best, best_val


def fit_map(stats, n_u, cfg, prior=None, schedule=None, p_known=125000.0) -> FitResult:
    """Algorithm: MAP estimate of theta by simulated annealing with restarts.

    Restart 0 starts at the prior modes; later restarts start from prior
    draws with sub-seeds derived from schedule.rng_seed, so the result is
    deterministic.  The winner is the max-objective restart (ties break to
    the lowest restart index).
    """
    prior = prior or PriorSpec()
    schedule = schedule or AnnealSchedule()
    objective = map_objective(stats, n_u, cfg, prior, p_known)

    mode_k, mode_ei, mode_s2 = prior.modes()
    start0 = np.log([mode_k, mode_ei, mode_s2])
    best_log, best_val = None, -np.inf
    for r in range(schedule.restarts):
        rng = np.random.default_rng(derive_seed(schedule.rng_seed, r))
        if r == 0:
            start = start0
        else:
            start = np.array([
                rng.normal(prior.k[0], prior.k[1]),
                rng.normal(prior.EI[0], prior.EI[1]),
                rng.normal(prior.sigma2[0], prior.sigma2[1]),
            ])
        cand, val = _anneal(objective, start, schedule, rng, p_known)
        if val > best_val:
            best_log, best_val = cand, val
    if best_log is None or not np.isfinite(best_val):
        raise OptimizationFailure("all annealing proposals evaluated to -inf")
    theta = HyperParams(k=float(np.exp(best_log[0])), EI=float(np.exp(best_log[1])),
                        sigma2=float(np.exp(best_log[2])), p=p_known)
    return FitResult(theta_hat=theta, lambda_hat=theta.lam, objective=float(best_val),
                     n_iters=schedule.n_iters, seed=schedule.rng_seed, n_u=n_u)
