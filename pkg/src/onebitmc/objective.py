"""Negative log-likelihood, log-barrier objective and the factored objective.

Everything here is evaluated on the observed entries only, except the
barrier term, which runs over all ``m * n`` entries so that unobserved
entries are held inside the box as well.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import links
from .errors import InfeasiblePointError, InvalidArgumentError


@dataclass(frozen=True)
class FactorPair:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.ndim != 2 or self.v.ndim != 2 or self.u.shape[1] != self.v.shape[1]:
            raise InvalidArgumentError(
                f"factor shapes {self.u.shape} and {self.v.shape} are incompatible"
            )

    @property
    def k(self):
        return self.u.shape[1]

    @property
    def shape(self):
        return (self.u.shape[0], self.v.shape[0])

    def product(self):
        return self.u @ self.v.T


@dataclass(frozen=True)
class ObjectiveValue:
    nll: float
    barrier: float
    total: float
    lam: float


def _observed(obs, m_hat):
    m_hat = np.asarray(m_hat, dtype=float)
    if m_hat.shape != obs.shape:
        raise InvalidArgumentError(f"matrix shape {m_hat.shape} does not match observations {obs.shape}")
    return m_hat, m_hat[obs.rows, obs.cols]


def nll(obs, link, m_hat) -> float:
    _, x = _observed(obs, m_hat)
    return float(np.sum(links.neg_log_lik(link, x, obs.values)))


def nll_grad(obs, link, m_hat):
    """Entrywise gradient of :func:`nll`; zero off the mask."""
    m_hat, x = _observed(obs, m_hat)
    out = np.zeros_like(m_hat)
    out[obs.rows, obs.cols] = links.score(link, x, obs.values)
    return out


def nll_hess_diag(obs, link, m_hat):
    """Diagonal of the (diagonal) Hessian of :func:`nll` in vec(M) coordinates."""
    m_hat, x = _observed(obs, m_hat)
    out = np.zeros_like(m_hat)
    out[obs.rows, obs.cols] = links.curvature(link, x, obs.values)
    return out


def _barrier_terms(m_hat, alpha):
    ratio = np.asarray(m_hat, dtype=float) / alpha
    sq = ratio * ratio
    if not np.all(sq < 1.0):
        raise InfeasiblePointError(f"max |M_ij| = {np.abs(m_hat).max():.6g} is not below alpha = {alpha}")
    return ratio, sq


def barrier(m_hat, alpha) -> float:
    """``-sum log(1 - (M_ij/alpha)^2)`` over every entry."""
    _, sq = _barrier_terms(m_hat, alpha)
    return float(-np.sum(np.log1p(-sq)))


def barrier_objective(obs, link, m_hat, alpha, lam) -> ObjectiveValue:
    if lam < 0:
        raise InvalidArgumentError("lambda must be nonnegative")
    b = barrier(m_hat, alpha)
    f = nll(obs, link, m_hat)
    return ObjectiveValue(nll=f, barrier=b, total=f + lam * b, lam=float(lam))


class FactoredObjective:
    """Barrier objective as a function of ``(U, V)`` with ``M = U V^T``.

    Holds the observation arrays so the solver's inner loop avoids
    re-validating inputs on every evaluation.
    """

    def __init__(self, obs, link, alpha, lam=0.0):
        if alpha <= 0:
            raise InvalidArgumentError("alpha must be positive")
        self.obs = obs
        self.link = link
        self.alpha = float(alpha)
        self.lam = float(lam)
        self.rows = obs.rows
        self.cols = obs.cols
        self.y = obs.values.astype(float)
        self._cached = (None,)

    def is_feasible(self, m_hat):
        return bool(np.abs(m_hat).max() < self.alpha) if m_hat.size else True

    def evaluate(self, m_hat) -> ObjectiveValue:
        ratio, sq = _barrier_terms(m_hat, self.alpha)
        b = float(-np.sum(np.log1p(-sq)))
        terms, sc = links.nll_and_score(self.link, m_hat[self.rows, self.cols], self.y)
        # keep the pieces the gradient at this point will need
        self._cached = (m_hat, ratio, sq, sc)
        f = float(np.sum(terms))
        return ObjectiveValue(nll=f, barrier=b, total=f + self.lam * b, lam=self.lam)

    def value(self, fp: FactorPair) -> ObjectiveValue:
        return self.evaluate(fp.product())

    def grad_matrix(self, m_hat):
        """Entrywise gradient W of the barrier objective with respect to M."""
        cached = self._cached
        if cached[0] is m_hat:
            _, ratio, sq, sc = cached
        else:
            ratio, sq = _barrier_terms(m_hat, self.alpha)
            sc = links.score(self.link, m_hat[self.rows, self.cols], self.y)
        w = np.subtract(1.0, sq)
        np.divide(ratio, w, out=w)
        w *= 2.0 * self.lam / self.alpha
        w[self.rows, self.cols] += sc
        return w

    def value_and_grad(self, fp: FactorPair):
        m_hat = fp.product()
        val = self.evaluate(m_hat)
        w = self.grad_matrix(m_hat)
        return val, w @ fp.v, w.T @ fp.u


def factored_objective_and_grad(obs, link, fp: FactorPair, alpha, lam):
    """Objective at ``M = U V^T`` and its gradients ``(W V, W^T U)``."""
    if fp.shape != obs.shape:
        raise InvalidArgumentError(f"factor product shape {fp.shape} does not match {obs.shape}")
    return FactoredObjective(obs, link, alpha, lam).value_and_grad(fp)
