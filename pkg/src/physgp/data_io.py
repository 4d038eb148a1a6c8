"""FBG wavelength -> strain -> curvature ingestion, synthetic curvature
generation and the CSV file formats.

Curvature is (eps_top - eps_bottom) * 1e-6 / strand_sep in 1/mm: the 1e-6
factor converts microstrain to dimensionless strain so the measured quantity
shares units with the physics side.  The synthetic generator perturbs the
unit-spaced second-difference of the deflection shape,

    z_j(x) = (p*lam/k) * {w(x+1) - 2 w(x) + w(x-1)} + xi,
    xi ~ N(0, noise_var),

with no leading minus (the bending operator carries one; the two conventions
are kept deliberately distinct, see beam.curvature_physics).

File schemas (first line is a '# physgp-v1 ...' metadata comment):
  curvature: t_s,x_mm,curvature_per_mm
  strain:    t_s,sensor_x_mm,row,value,kind   row in {top,bottom},
             kind in {strain_microstrain,wavelength_nm}
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .beam import curvature_physics
from .errors import MonotonicityError, PairingError, SchemaError
from ._fileio import read_csv_rows, write_csv

SAMPLE_RATE_HZ = 50.0

CURVATURE_HEADER = ["t_s", "x_mm", "curvature_per_mm"]
STRAIN_HEADER = ["t_s", "sensor_x_mm", "row", "value", "kind"]


@dataclass(frozen=True)
class CurvatureBatch:
    """M x N_f curvature matrix with time stamps and sensor coordinates."""

    values: np.ndarray
    t: np.ndarray
    x: np.ndarray
    source: str = "simulated"

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, float))
        object.__setattr__(self, "t", np.asarray(self.t, float))
        object.__setattr__(self, "x", np.asarray(self.x, float))
        if self.values.ndim != 2:
            raise ValueError("curvature values must form an M x N_f matrix")
        if self.t.shape != (self.values.shape[0],):
            raise ValueError("one time stamp per observation row is required")
        if self.x.shape != (self.values.shape[1],):
            raise ValueError("one coordinate per sensor column is required")
        if np.any(~np.isfinite(self.values)):
            raise ValueError("curvature matrix contains missing cells")

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_sensors(self) -> int:
        return self.values.shape[1]

    def rows(self, start, stop):
        return CurvatureBatch(self.values[start:stop], self.t[start:stop],
                              self.x, self.source)


def wavelength_to_strain(lambda_t, lambda_0):
    """Microstrain from the relative Bragg wavelength shift."""
    lambda_0 = np.asarray(lambda_0, float)
    return 1e6 * (np.asarray(lambda_t, float) - lambda_0) / (0.78 * lambda_0)


def strain_to_curvature(top, bottom, strand_sep=91.5):
    """Curvature (1/mm) from top/bottom microstrain over the strand gap."""
    if strand_sep <= 0.0:
        raise ValueError("strand separation must be positive")
    return (np.asarray(top, float) - np.asarray(bottom, float)) * 1e-6 / strand_sep


def _stencil_row(params, cfg):
    """Unit-spaced second-difference curvature at the sensor coordinates."""
    x_f = np.asarray(cfg.sensor_coords, float)
    return curvature_physics(x_f, params, cfg, method="fd", h=1.0, sign=+1)


def simulate_dataset(params_before, params_after, change_at, n_points,
                     noise_var, cfg, seed) -> CurvatureBatch:
    """Stream of n_points noisy curvature rows with a parameter switch.

    Rows 0..change_at-1 use params_before, the rest params_after; noise_var
    is the variance of the additive Gaussian perturbation.  Deterministic
    for a given seed.
    """
    if not 0 <= change_at <= n_points:
        raise ValueError("change_at must lie within [0, n_points]")
    if noise_var < 0.0:
        raise ValueError("noise variance must be nonnegative")
    base0 = _stencil_row(params_before, cfg)
    base1 = _stencil_row(params_after, cfg)
    rows = np.vstack([np.tile(base0, (change_at, 1)),
                      np.tile(base1, (n_points - change_at, 1))])
    rng = np.random.default_rng(seed)
    rows = rows + rng.normal(0.0, np.sqrt(noise_var), size=rows.shape)
    t = np.arange(n_points) / SAMPLE_RATE_HZ
    return CurvatureBatch(rows, t, np.asarray(cfg.sensor_coords, float))


def simulate_simple(mean_vector=(-1e-5, 2.45e-6, -1e-5), cov_scalar=1e-6,
                    m=5, seed=0, x=(500.0, 1250.0, 2000.0)) -> CurvatureBatch:
    """M i.i.d. draws from N(mean_vector, cov_scalar * I)."""
    if m < 1:
        raise ValueError("at least one draw is required")
    mean = np.asarray(mean_vector, float)
    rng = np.random.default_rng(seed)
    rows = mean + rng.normal(0.0, np.sqrt(cov_scalar), size=(m, mean.size))
    t = np.arange(m) / SAMPLE_RATE_HZ
    return CurvatureBatch(rows, t, np.asarray(x, float))


def write_curvature_csv(path, batch, meta=None):
    """Long-format curvature CSV, one row per (t, sensor) cell."""
    rows = ((batch.t[i], batch.x[j], batch.values[i, j])
            for i in range(batch.n_obs) for j in range(batch.n_sensors))
    write_csv(path, CURVATURE_HEADER, rows, meta=meta)


def write_strain_csv(path, records, meta=None):
    """Strain CSV from (t_s, x_mm, row, value, kind) tuples."""
    write_csv(path, STRAIN_HEADER, records, meta=meta)


def strain_records_from_batch(batch, strand_sep=91.5):
    """Synthesize symmetric top/bottom microstrain records reproducing a
    curvature batch (used to exercise the strain ingestion path)."""
    recs = []
    for i in range(batch.n_obs):
        for j in range(batch.n_sensors):
            half = batch.values[i, j] * strand_sep * 1e6 / 2.0
            recs.append((batch.t[i], batch.x[j], "top", half, "strain_microstrain"))
            recs.append((batch.t[i], batch.x[j], "bottom", -half, "strain_microstrain"))
    return recs


def _ingest_curvature(rows, cfg):
    by_t = defaultdict(dict)
    for t_s, x_mm, val in rows:
        by_t[float(t_s)][float(x_mm)] = float(val)
    times = sorted(by_t)
    coords = sorted({x for cells in by_t.values() for x in cells})
    want = sorted(float(x) for x in cfg.sensor_coords)
    if coords != want:
        raise SchemaError(f"sensor coordinates {coords} do not match the "
                          f"configured {want}")
    values = np.empty((len(times), len(coords)))
    for i, t_s in enumerate(times):
        cells = by_t[t_s]
        if sorted(cells) != coords:
            raise SchemaError(f"missing curvature cell at t={t_s}")
        values[i] = [cells[x] for x in coords]
    return CurvatureBatch(values, np.asarray(times), np.asarray(coords),
                          source="ingested")


def _ingest_strain(rows, cfg):
    series = defaultdict(list)  # (x, row) -> [(t, value, kind)]
    for t_s, x_mm, row, value, kind in rows:
        if row not in ("top", "bottom"):
            raise SchemaError(f"unknown strand row {row!r}")
        if kind not in ("strain_microstrain", "wavelength_nm"):
            raise SchemaError(f"unknown value kind {kind!r}")
        series[(float(x_mm), row)].append((float(t_s), float(value), kind))

    coords = sorted({x for x, _ in series})
    want = sorted(float(x) for x in cfg.sensor_coords)
    if coords != want:
        raise SchemaError(f"sensor coordinates {coords} do not match the "
                          f"configured {want}")
    strains = {}
    for key, recs in series.items():
        t = np.array([r[0] for r in recs])
        if np.any(np.diff(t) <= 0.0):
            raise MonotonicityError(f"time not strictly increasing for sensor {key}")
        vals = np.array([r[1] for r in recs])
        kinds = {r[2] for r in recs}
        if len(kinds) != 1:
            raise SchemaError(f"mixed value kinds for sensor {key}")
        if kinds.pop() == "wavelength_nm":
            vals = wavelength_to_strain(vals, vals[0])
        strains[key] = (t, vals)

    values = []
    times = None
    for x in coords:
        if (x, "top") not in strains or (x, "bottom") not in strains:
            raise PairingError(f"sensor x={x} lacks a top/bottom pair")
        t_top, top = strains[(x, "top")]
        t_bot, bot = strains[(x, "bottom")]
        if t_top.shape != t_bot.shape or np.any(t_top != t_bot):
            raise PairingError(f"sensor x={x} has unmatched top/bottom records")
        if times is None:
            times = t_top
        elif times.shape != t_top.shape or np.any(times != t_top):
            raise PairingError("sensors do not share a common time base")
        values.append(strain_to_curvature(top, bot, cfg.strand_sep))
    return CurvatureBatch(np.column_stack(values), times, np.asarray(coords),
                          source="ingested")


def ingest_csv(path, cfg) -> CurvatureBatch:
    """Load a curvature or strain CSV (dispatch on the header row)."""
    header, rows = read_csv_rows(path)
    if header == CURVATURE_HEADER:
        return _ingest_curvature(rows, cfg)
    if header == STRAIN_HEADER:
        return _ingest_strain(rows, cfg)
    raise SchemaError(f"unrecognised header {header!r}")
