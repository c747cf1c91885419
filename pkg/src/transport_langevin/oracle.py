"""Independent ground-truth generators used to cross-check the dynamics.

The conjugate Gaussian posterior is exact algebra; finite differences check
every analytic gradient; long reference chains stand in for the invariant
measure; Monte-Carlo estimators probe the small-ball mass and the correlation
inequality for centered ellipsoids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import models as _models
from .spectral import GaussianMeasureSpec

__all__ = [
    "GaussianPosterior",
    "conjugate_posterior",
    "finite_diff_grad",
    "SmallBallEstimate",
    "small_ball_mc",
    "CorrelationEstimate",
    "gaussian_correlation_mc",
    "reference_chain",
    "batch_means_stderr",
    "write_report",
]


@dataclass
class GaussianPosterior:
    """Exact posterior of a coefficient-linear model under squared loss.

    The covariance block is shared across output coordinates because the
    features do not depend on the outputs.
    """

    mean: np.ndarray          # (n_modes, d_out)
    covariance: np.ndarray    # (n_modes, n_modes)

    def __post_init__(self):
        C = self.covariance
        if np.max(np.abs(C - C.T)) > 1e-12:
            raise ValueError("covariance must be symmetric")
        if np.any(np.linalg.eigvalsh(C) <= 0):
            raise ValueError("covariance must be positive definite")

    @property
    def marginal_variances(self) -> np.ndarray:
        return np.diag(self.covariance)


def conjugate_posterior(basis, feature_matrix, y, beta: float, lam: float,
                        eigen=None) -> GaussianPosterior:
    """Gaussian invariant measure of the coefficient-linear squared-loss model.

    The empirical risk (1/n) * sum (y_i - (Phi alpha)_i)^2 carries curvature
    2/n * Phi^T Phi, so the posterior precision is
    beta * (2/n * Phi^T Phi + lam * diag(1/mu)); completing the square gives
    the mean.  With no data the posterior is the reference measure itself.
    """
    if eigen is None:
        eigen = basis.eigen
    Phi = np.asarray(feature_matrix, dtype=float)
    if Phi.ndim != 2:
        raise ValueError("feature matrix must be 2-d")
    n, N = Phi.shape
    if N > len(eigen):
        raise ValueError("more feature columns than eigenvalues")
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    mu = eigen.mu[:N]
    if n == 0:
        prec = beta * lam * np.diag(1.0 / mu)
        rhs = np.zeros((N, y.shape[1]))
    else:
        prec = beta * ((2.0 / n) * Phi.T @ Phi + lam * np.diag(1.0 / mu))
        rhs = (2.0 * beta / n) * Phi.T @ y
    try:
        c, low = cho_factor(prec)
    except np.linalg.LinAlgError as exc:  # cannot happen for lam > 0
        raise RuntimeError("posterior precision is singular") from exc
    cov = cho_solve((c, low), np.eye(N))
    cov = 0.5 * (cov + cov.T)
    mean = cho_solve((c, low), rhs)
    return GaussianPosterior(mean=mean, covariance=cov)


def finite_diff_grad(model, loss_kind, dataset, W, step: float = 1e-5) -> np.ndarray:
    """Central differences of the empirical risk per coefficient, O(step^2)."""
    if step <= 0:
        raise ValueError("step must be positive")
    base = W.coeffs.copy()
    out = np.zeros_like(base)
    for idx in np.ndindex(base.shape):
        c_plus = base.copy()
        c_plus[idx] += step
        c_minus = base.copy()
        c_minus[idx] -= step
        lp = _models.empirical_risk(model, W.copy_with(c_plus), loss_kind, dataset)
        lm = _models.empirical_risk(model, W.copy_with(c_minus), loss_kind, dataset)
        out[idx] = (lp - lm) / (2.0 * step)
    return out


class SmallBallEstimate(NamedTuple):
    probability: float
    stderr: float
    neg_log: float
    zero_hits: bool          # when True, neg_log is only a lower bound


def small_ball_mc(spec: GaussianMeasureSpec, radius: float, n_samples: int,
                  rng: np.random.Generator, n_modes: Optional[int] = None) -> SmallBallEstimate:
    """Monte-Carlo mass of the centered ball {||alpha|| <= radius} under the measure."""
    if n_samples < 1000:
        raise ValueError("use at least 10^3 samples")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if n_modes is None:
        n_modes = len(spec.eigen)
    sd = np.sqrt(spec.mode_variances[:n_modes])
    hits = 0
    chunk = 200_000
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        X = rng.standard_normal((m, n_modes)) * sd[None, :]
        hits += int(np.sum(np.sum(X ** 2, axis=1) <= radius ** 2))
        done += m
    p = hits / n_samples
    stderr = float(np.sqrt(max(p * (1 - p), 0.0) / n_samples))
    if hits == 0:
        # p < ~3/n at 95%; report the implied lower bound on -log p
        return SmallBallEstimate(0.0, stderr, float(np.log(n_samples / 3.0)), True)
    return SmallBallEstimate(p, stderr, float(-np.log(p)), False)


class CorrelationEstimate(NamedTuple):
    p_both: float
    p_product: float
    stderr: float            # delta-method stderr of (p_both - p_product)


def gaussian_correlation_mc(spec: GaussianMeasureSpec, ellipsoid_a, ellipsoid_b,
                            n_samples: int, rng: np.random.Generator,
                            dim_cap: int = 16) -> CorrelationEstimate:
    """Shared-sample estimate of P(A and B) against P(A)*P(B) for the
    centered ellipsoids {sum a_i alpha_i^2 <= 1} and {sum b_i alpha_i^2 <= 1}.
    """
    a = np.asarray(ellipsoid_a, dtype=float)
    b = np.asarray(ellipsoid_b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("ellipsoid weights must be non-negative")
    dim = a.size
    if b.size != dim:
        raise ValueError("weight vectors must have equal length")
    if dim > dim_cap:
        raise ValueError(f"dimension {dim} exceeds the configured cap {dim_cap}")
    sd = np.sqrt(spec.mode_variances[:dim])
    in_a = np.empty(n_samples, dtype=bool)
    in_b = np.empty(n_samples, dtype=bool)
    chunk = 200_000
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        X2 = (rng.standard_normal((m, dim)) * sd[None, :]) ** 2
        in_a[done:done + m] = X2 @ a <= 1.0
        in_b[done:done + m] = X2 @ b <= 1.0
        done += m
    both = in_a & in_b
    p_ab, p_a, p_b = both.mean(), in_a.mean(), in_b.mean()
    # delta method on g(m_ab, m_a, m_b) = m_ab - m_a*m_b with shared samples
    Z = np.stack([both, in_a, in_b]).astype(float)
    S = np.cov(Z)
    grad = np.array([1.0, -p_b, -p_a])
    var = float(grad @ S @ grad) / n_samples
    return CorrelationEstimate(float(p_ab), float(p_a * p_b), float(np.sqrt(max(var, 0.0))))


def batch_means_stderr(series: np.ndarray) -> float:
    """Batch-means standard error of the mean of a correlated series."""
    series = np.asarray(series, dtype=float)
    n = series.size
    n_batches = max(int(np.floor(np.sqrt(n))), 2)
    batch = n // n_batches
    trimmed = series[n - n_batches * batch:]
    means = trimmed.reshape(n_batches, batch).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


def reference_chain(cfg, model, loss_kind, dataset,
                    test_functions: dict[str, Callable], **run_kwargs) -> dict[str, tuple[float, float]]:
    """Long-run averages of test functions with batch-means standard errors.

    The chain itself carries an O(step-size) bias; callers compare against it
    under the stated extrapolation assumption rather than as exact truth.
    """
    from .langevin import run_chain
    traj = run_chain(cfg, model, loss_kind, dataset, record_coeffs=True,
                     record_observables=False, **run_kwargs)
    out = {}
    for name, fn in test_functions.items():
        vals = np.array([fn(c) for c in traj.coeffs])
        out[name] = (float(vals.mean()), batch_means_stderr(vals))
    return out


def write_report(payload: dict, path):
    """Deterministic structured-text report for the acceptance suite."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=float)
        fh.write("\n")
