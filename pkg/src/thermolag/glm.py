"""Quasi-Poisson log-link GLM fitted by iteratively reweighted least squares."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import gammaln, xlogy

from .errors import AllZeroExposure, SingularDesign

MAX_ITER = 100
TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Model matrix with named column blocks.

    ``blocks`` maps a block name (``"intercept"``, ``"cb"``, ``"ns(rh)"``...)
    to its ``(start, stop)`` column range.
    """

    values: np.ndarray
    response: np.ndarray
    column_names: list
    blocks: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X, y = self.values, self.response
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"design {X.shape} does not match response {y.shape}")
        if X.shape[1] != len(self.column_names):
            raise ValueError("column_names length does not match the design")
        if not np.all(np.isfinite(X)):
            raise ValueError("design matrix has non-finite entries")
        if np.any(y < 0):
            raise ValueError("response must be non-negative")
        if X.shape[1] >= X.shape[0]:
            raise SingularDesign(f"p={X.shape[1]} parameters for n={X.shape[0]} observations")

    @property
    def shape(self):
        return self.values.shape

    def block(self, name: str) -> slice:
        start, stop = self.blocks[name]
        return slice(start, stop)


@dataclass(frozen=True, eq=False)
class FitResult:
    beta: np.ndarray
    vcov: np.ndarray
    dispersion: float
    deviance: float
    loglik: float
    qaic: float
    iterations: int
    converged: bool
    column_names: list
    blocks: dict
    n_obs: int
    fitted: np.ndarray = field(repr=False, default=None)

    @property
    def n_params(self) -> int:
        return len(self.beta)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.vcov))

    def block(self, name: str) -> slice:
        start, stop = self.blocks[name]
        return slice(start, stop)

    def to_dict(self) -> dict:
        return {
            "column_names": list(self.column_names),
            "beta": [float(v) for v in self.beta],
            "vcov": [float(v) for v in self.vcov.ravel()],
            "dispersion": float(self.dispersion),
            "deviance": float(self.deviance),
            "loglik": float(self.loglik),
            "qaic": float(self.qaic),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "n_obs": int(self.n_obs),
            "settings": {
                "family": "quasipoisson",
                "link": "log",
                "tolerance": TOLERANCE,
                "max_iter": MAX_ITER,
                "start": "mu = y + 0.5",
                "dispersion": "pearson",
            },
        }


def _qr(X, w):
    sw = np.sqrt(w)
    Q, R, piv = scipy.linalg.qr(sw[:, None] * X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(X.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    if diag.size == 0 or np.any(diag <= tol):
        rank = int(np.sum(diag > tol))
        raise SingularDesign(f"weighted design has rank {rank} < {X.shape[1]} columns")
    return sw, Q, R, piv


def weighted_least_squares(X, w, z) -> np.ndarray:
    """Minimize ``sum(w * (z - X @ beta)**2)`` by column-pivoted QR."""
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.ndim == 2:
        w = np.diag(w)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    sw, Q, R, piv = _qr(X, w)
    beta = np.empty(X.shape[1])
    beta[piv] = scipy.linalg.solve_triangular(R, Q.T @ (sw * np.asarray(z, dtype=float)))
    return beta


def _unscaled_cov(X, w) -> np.ndarray:
    _, _, R, piv = _qr(X, w)
    Rinv = scipy.linalg.solve_triangular(R, np.eye(R.shape[0]))
    cov_piv = Rinv @ Rinv.T
    cov = np.empty_like(cov_piv)
    cov[np.ix_(piv, piv)] = cov_piv
    return (cov + cov.T) / 2


def poisson_deviance(y, mu) -> float:
    return float(2.0 * np.sum(xlogy(y, y / mu) - (y - mu)))


def poisson_loglik(y, mu) -> float:
    return float(np.sum(xlogy(y, mu) - mu - gammaln(y + 1.0)))


def fit(design: DesignMatrix, max_iter: int = MAX_ITER, tol: float = TOLERANCE) -> FitResult:
    """Fit a quasi-Poisson GLM with log link.

    IRLS starts from ``mu = y + 0.5`` and stops once the relative deviance
    change ``|dD| / (|D| + 0.1)`` drops below ``tol``. The dispersion is the
    Pearson statistic over ``n - p``. If ``max_iter`` is reached the last
    iterate is returned with ``converged=False``.
    """
    X = design.values
    y = np.asarray(design.response, dtype=float)
    n, p = X.shape
    if y.sum() <= 0:
        raise ValueError("response has zero total")
    if "cb" in design.blocks and not np.any(X[:, design.block("cb")]):
        raise AllZeroExposure("crossbasis block is identically zero in the fitting window")

    mu = y + 0.5
    eta = np.log(mu)
    dev = poisson_deviance(y, mu)
    converged = False
    beta = None
    it = 0
    for it in range(1, max_iter + 1):
        z = eta + (y - mu) / mu
        beta_new = weighted_least_squares(X, mu, z)
        eta_new = X @ beta_new
        mu_new = np.exp(eta_new)
        dev_new = poisson_deviance(y, mu_new)
        halvings = 0
        while beta is not None and not np.isfinite(dev_new) and halvings < 30:
            beta_new = (beta_new + beta) / 2
            eta_new = X @ beta_new
            mu_new = np.exp(eta_new)
            dev_new = poisson_deviance(y, mu_new)
            halvings += 1
        beta, eta, mu = beta_new, eta_new, mu_new
        change = abs(dev_new - dev) / (abs(dev_new) + 0.1)
        dev = dev_new
        if change < tol:
            converged = True
            break

    phi = float(np.sum((y - mu) ** 2 / mu) / (n - p))
    vcov = phi * _unscaled_cov(X, mu)
    ll = poisson_loglik(y, mu)
    return FitResult(
        beta=beta,
        vcov=vcov,
        dispersion=phi,
        deviance=dev,
        loglik=ll,
        qaic=-2.0 * ll / phi + 2.0 * p,
        iterations=it,
        converged=converged,
        column_names=list(design.column_names),
        blocks=dict(design.blocks),
        n_obs=n,
        fitted=mu,
    )


def qaic(fit_result: FitResult, phi_override: float | None = None) -> float:
    """Quasi-AIC ``-2 loglik / phi + 2 p``; ``phi_override`` fixes a common scale."""
    phi = fit_result.dispersion if phi_override is None else phi_override
    return -2.0 * fit_result.loglik / phi + 2.0 * fit_result.n_params


def wald_interval(fit_result: FitResult, z: float = 1.959964):
    se = fit_result.se
    return fit_result.beta - z * se, fit_result.beta + z * se
