"""Ensemble runs with chunked, index-ordered reduction."""
from dataclasses import dataclass
import math

import numpy as np
from scipy import stats
from scipy.optimize import curve_fit

from .kernels import run_batch

BATCHES = 20
MIN_BATCH = 5


@dataclass
class EnsembleSummary:
    t: np.ndarray
    mean: np.ndarray          # (rows, 3) mean Bloch vector
    se: np.ndarray            # (rows, 3) sample std / sqrt(N)
    mean_s: np.ndarray        # (rows, 4) mean unnormalized state
    n: int
    decay_rate: float = math.nan
    decay_ci: float = math.nan


class _Moments:
    """Running mean and sum of squared deviations, merged chunk by chunk."""

    def __init__(self, rows, width):
        self.n = 0
        self.mean = np.zeros((rows, width))
        self.m2 = np.zeros((rows, width))

    def merge(self, mean, m2, n):
        if self.n == 0:
            self.n, self.mean, self.m2 = n, mean, m2
            return
        tot = self.n + n
        delta = mean - self.mean
        self.mean = self.mean + delta * (n / tot)
        self.m2 = self.m2 + m2 + delta ** 2 * (self.n * n / tot)
        self.n = tot


def _chunk_moments(cfg, indices, batch_of, n_batches):
    rows = cfg.n_steps + 1
    n = len(indices)
    S = np.empty((rows, n, 3))
    s = np.empty((rows, 4))

    def visit(k, state, ell, out):
        S[k] = state[:, 1:] / state[:, :1]
        s[k] = state.mean(axis=0)

    run_batch(cfg, indices, visit)
    mean = S.mean(axis=1)
    m2 = ((S - mean[:, None, :]) ** 2).sum(axis=1)
    sums = np.zeros((n_batches, rows))
    for j, i in enumerate(indices):
        sums[batch_of(i)] += S[:, j, 0]
    return mean, m2, s, sums


def fit_decay(t, y, se):
    """Weighted fit of ``a exp(-rate t)``; returns ``(rate, 95% half-width)``.

    The half-width treats grid points as independent, which understates the
    error for trajectory ensembles (points on one path are correlated);
    ``run_ensemble`` replaces it by a batch-means interval.
    """
    mask = (t > 0) & (se > 0)
    if mask.sum() < 3:
        return math.nan, math.nan
    model = lambda t, a, rate: a * np.exp(-rate * t)
    popt, pcov = curve_fit(model, t[mask], y[mask], p0=(y[0], 1.0), sigma=se[mask], absolute_sigma=True)
    return float(popt[1]), float(1.96 * math.sqrt(pcov[1, 1]))


def run_ensemble(cfg, fit=True):
    """Mean Bloch trajectory of ``cfg.n`` independent trajectories.

    Trajectory ``i`` always uses stream ``(seed, i)``, and chunks are merged in
    index order, so the summary does not depend on ``cfg.chunk``.  The decay
    interval comes from refitting ``BATCHES`` contiguous sub-ensembles.
    """
    rows = cfg.n_steps + 1
    nb = min(BATCHES, cfg.n // MIN_BATCH)
    nb = nb if nb >= 2 else 1
    batch_of = lambda i: i * nb // cfg.n
    acc = _Moments(rows, 3)
    s_sum = np.zeros((rows, 4))
    sums = np.zeros((nb, rows))
    for start in range(0, cfg.n, cfg.chunk):
        idx = list(range(start, min(cfg.n, start + cfg.chunk)))
        mean, m2, s_mean, part = _chunk_moments(cfg, idx, batch_of, nb)
        acc.merge(mean, m2, len(idx))
        s_sum += s_mean * len(idx)
        sums += part
    t = np.arange(rows) * cfg.dt
    if cfg.n > 1:
        se = np.sqrt(acc.m2 / (cfg.n - 1) / cfg.n)
    else:
        se = np.zeros_like(acc.mean)
    summary = EnsembleSummary(t, acc.mean, se, s_sum / cfg.n, cfg.n)
    if fit and cfg.n > 1:
        summary.decay_rate, summary.decay_ci = fit_decay(t, summary.mean[:, 0], se[:, 0])
        if nb >= 2:
            counts = np.bincount([batch_of(i) for i in range(cfg.n)], minlength=nb)
            rates = [fit_decay(t, sums[b] / counts[b], se[:, 0] * math.sqrt(cfg.n / counts[b]))[0]
                     for b in range(nb)]
            summary.decay_ci = float(stats.t.ppf(0.975, nb - 1) * np.std(rates, ddof=1) / math.sqrt(nb))
    return summary


def max_zscore(a, b):
    """Largest pointwise ``|mean_a - mean_b| / sqrt(se_a^2 + se_b^2)``."""
    se = np.sqrt(a.se ** 2 + b.se ** 2)
    mask = se > 0
    diff = np.abs(a.mean - b.mean)
    if np.any(~mask & (diff > 1e-12)):
        return math.inf
    return float(np.max(diff[mask] / se[mask])) if mask.any() else 0.0


def theta_comparison(cfg, thetas=(0.0, math.pi / 2)):
    """Ensembles differing only in constant quadrature angle, with the largest z-score."""
    runs = [run_ensemble(cfg.replace(theta=float(th)), fit=False) for th in thetas]
    return runs, max_zscore(runs[0], runs[1])
