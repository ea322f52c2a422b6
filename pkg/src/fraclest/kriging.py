"""Ordinary Kriging over (filter ratio, Reynolds number) sample points.

Gaussian covariance with per-dimension length scales on z-scored inputs,
constant unknown mean handled through the Lagrange-multiplier system:

    [K  1] [w]   [k*]
    [1' 0] [l] = [1 ]

prediction ``w'y``, variance ``sigma2 - w'k* - l``.  With zero nugget the
surrogate interpolates the samples exactly.  Hyperparameters can be fixed or
picked by maximizing the profiled log marginal likelihood over a coarse
grid.  The jitter ladder operates on the unit-diagonal correlation matrix,
so nugget values are relative to ``sigma2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import SurrogateDataError, SurrogateFitError

NUGGET_LADDER = (1e-10, 1e-8, 1e-6)
ALPHA_FLOOR = 1e-12  # clamp target for predictions at or below zero


@dataclass(frozen=True)
class KrigingModel:
    x: np.ndarray            # standardized inputs, shape (m, d)
    y: np.ndarray            # outputs, shape (m,)
    x_mean: np.ndarray
    x_scale: np.ndarray
    theta: np.ndarray        # length scales in standardized units
    sigma2: float
    nugget: float
    # cached solves against A = R + nugget*I
    _solve_y: np.ndarray
    _solve_1: np.ndarray
    _denom: float
    _cho: tuple

    def standardize(self, q: np.ndarray) -> np.ndarray:
        return (np.asarray(q, dtype=float) - self.x_mean) / self.x_scale


def _correlation(xa: np.ndarray, xb: np.ndarray, theta: np.ndarray) -> np.ndarray:
    d = xa[:, None, :] - xb[None, :, :]
    return np.exp(-0.5 * np.sum((d / theta) ** 2, axis=-1))


def _standardize_inputs(x: np.ndarray):
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0  # collapsed dimension contributes no distance
    return (x - mean) / scale, mean, scale


def _check_duplicates(xs: np.ndarray, y: np.ndarray) -> None:
    m = xs.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            if np.all(np.abs(xs[i] - xs[j]) < 1e-12) and abs(y[i] - y[j]) > 1e-12:
                raise SurrogateDataError(
                    f"samples {i} and {j} share inputs but disagree on the output")


def _profiled_likelihood(xs, y, theta, nugget):
    """(log marginal likelihood, sigma2_hat) for fixed length scales."""
    m = len(y)
    a = _correlation(xs, xs, theta) + nugget * np.eye(m)
    try:
        cho = cho_factor(a, lower=True)
    except LinAlgError:
        return -np.inf, None
    s1 = cho_solve(cho, np.ones(m))
    mu = float(s1 @ y) / float(s1 @ np.ones(m))
    resid = y - mu
    sigma2 = float(resid @ cho_solve(cho, resid)) / m
    logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    if sigma2 <= 0.0:
        return -np.inf, sigma2
    return -0.5 * (m * np.log(sigma2) + logdet), sigma2


def fit(samples, theta=None, sigma2=None, nugget: float = 0.0) -> KrigingModel:
    """Fit the surrogate from (l_delta, re_lambda, alpha_opt) rows.

    ``theta``/``sigma2`` default to an automatic coarse-grid likelihood
    search; the nugget escalates through the jitter ladder when the
    correlation matrix is not numerically positive definite.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise SurrogateDataError("samples must be rows of (l_delta, re_lambda, alpha_opt)")
    if arr.shape[0] < 3:
        raise SurrogateDataError("kriging needs at least 3 samples")
    x_raw, y = arr[:, :2], arr[:, 2]
    xs, mean, scale = _standardize_inputs(x_raw)
    _check_duplicates(xs, y)

    if theta is None:
        grid = (0.5, 1.0, 2.0, 4.0)
        best = (-np.inf, None, None)
        for t0 in grid:
            for t1 in grid:
                cand = np.array([t0, t1])
                lml, s2 = _profiled_likelihood(xs, y, cand, max(nugget, 1e-10))
                if lml > best[0]:
                    best = (lml, cand, s2)
        if best[1] is None:
            raise SurrogateFitError("likelihood search failed for every length scale")
        theta = best[1]
        if sigma2 is None:
            sigma2 = best[2]
    theta = np.asarray(theta, dtype=float)
    if sigma2 is None:
        _, sigma2 = _profiled_likelihood(xs, y, theta, max(nugget, 1e-10))
    if sigma2 is None or sigma2 <= 0.0:
        sigma2 = 1.0  # constant outputs: any positive variance reproduces them

    m = len(y)
    r = _correlation(xs, xs, theta)
    last_exc = None
    for nug in (nugget, *[n for n in NUGGET_LADDER if n > nugget]):
        try:
            cho = cho_factor(r + nug * np.eye(m), lower=True)
        except LinAlgError as exc:
            last_exc = exc
            continue
        s_y = cho_solve(cho, y)
        s_1 = cho_solve(cho, np.ones(m))
        denom = float(np.ones(m) @ s_1)
        return KrigingModel(x=xs, y=y.copy(), x_mean=mean, x_scale=scale,
                            theta=theta, sigma2=float(sigma2), nugget=float(nug),
                            _solve_y=s_y, _solve_1=s_1, _denom=denom, _cho=cho)
    raise SurrogateFitError("correlation matrix singular after nugget "
                            f"escalation up to {NUGGET_LADDER[-1]}") from last_exc


def predict(model: KrigingModel, query) -> tuple[float, float, bool]:
    """Predict (alpha_hat, variance, clamped) at one (l_delta, re_lambda) point."""
    q = model.standardize(np.asarray(query, dtype=float).reshape(1, 2))
    r_star = _correlation(model.x, q, model.theta)[:, 0]
    lam = (float(r_star @ model._solve_1) - 1.0) / model._denom
    w = cho_solve(model._cho, r_star - lam)
    mean = float(w @ model.y)
    var_rel = (1.0 + model.nugget) - float(w @ r_star) - lam
    variance = model.sigma2 * max(var_rel, 0.0)
    clamped = False
    alpha_hat = mean
    if alpha_hat > 1.0:
        alpha_hat, clamped = 1.0, True
    elif alpha_hat <= 0.0:
        alpha_hat, clamped = ALPHA_FLOOR, True
    return alpha_hat, variance, clamped


def predict_grid(model: KrigingModel, l_values, re_values):
    """Evaluate the surface on a product grid; rows of (ld, re, alpha, var)."""
    rows = []
    for ld in l_values:
        for re in re_values:
            alpha_hat, var, _ = predict(model, (ld, re))
            rows.append((float(ld), float(re), alpha_hat, var))
    return rows
