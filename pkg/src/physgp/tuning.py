"""Selection of the physics-anchor count N_u by held-out mean squared error.

One sensor (the third by default) is excluded from training; the model is
fitted on the remaining sensors, the curvature posterior is evaluated at the
held-out coordinate, and the score is squared bias plus posterior variance.
The anchor count with the lowest score balances the data against the physics
model: too few anchors leave a wide posterior, too many drag it away from
the observations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import gp
from .estimation import AnnealSchedule, derive_seed, empirical_stats, fit_map

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class HoldoutScore:
    n_u: int
    bias2: float
    variance: float
    mse: float


@dataclass(frozen=True)
class TuningResult:
    selected_n_u: int
    curve: tuple  # HoldoutScore per evaluated N_u, ascending N_u


def mse_at_holdout(n_u, batch, cfg, prior=None, schedule=None,
                   p=125000.0, holdout_index=2) -> HoldoutScore:
    """Held-out MSE of the curvature posterior at one sensor coordinate."""
    stats = empirical_stats(batch)
    if stats.mu_f.size < 3:
        raise ValueError("holdout tuning needs at least three sensors")
    train_idx = [i for i in range(stats.mu_f.size) if i != holdout_index]
    train_stats = stats.restrict(train_idx)
    x_all = np.asarray(cfg.sensor_coords, float)
    x_train = x_all[train_idx]
    x_test = float(x_all[holdout_index])
    mu_test = float(stats.mu_f[holdout_index])

    fit = fit_map(train_stats, n_u, cfg, prior=prior, schedule=schedule,
                  p_known=p)
    design = gp.design_for(fit.theta_hat, n_u, cfg, train_stats.mu_f,
                           train_stats.sigma_f_diag, x_f=x_train)
    post = gp.JointModel(design, fit.theta_hat, cfg).posterior_f(x_test)
    bias2 = (post.mean - mu_test) ** 2
    return HoldoutScore(n_u=n_u, bias2=bias2, variance=post.variance,
                        mse=bias2 + post.variance)


def tune_nu(batch, cfg, prior=None, schedule=None, p=125000.0,
            n_min=2, n_max=14, holdout_index=2) -> TuningResult:
    """Score every N_u in [n_min, n_max]; ties select the smaller N_u.

    Each N_u gets a sub-seed derived from the schedule seed so evaluations
    are independent and reproducible in any execution order.
    """
    if n_min > n_max:
        raise ValueError("n_min must not exceed n_max")
    schedule = schedule or AnnealSchedule()
    curve = []
    for n_u in range(n_min, n_max + 1):
        sched = replace(schedule, rng_seed=derive_seed(schedule.rng_seed, n_u))
        curve.append(mse_at_holdout(n_u, batch, cfg, prior=prior,
                                    schedule=sched, p=p,
                                    holdout_index=holdout_index))
    best = min(s.mse for s in curve)
    selected = next(s.n_u for s in curve if s.mse <= best + _TIE_TOL)
    return TuningResult(selected_n_u=selected, curve=tuple(curve))
