"""Logit and probit link functions with analytic derivatives.

All routines are vectorised over numpy arrays. The per-entry likelihood
pieces (``neg_log_lik``, ``score``, ``curvature``) use the symmetry
``1 - f(x) = f(-x)`` so that a ``-1`` observation at ``x`` is the same
computation as a ``+1`` observation at ``-x``; the probit path works on
the log scale throughout to stay accurate deep in the tails.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidArgumentError

#: smallest value f (or 1 - f) is allowed to take in ``eval_link``
EPS_F = 1e-300
_F_MAX = np.nextafter(1.0, 0.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

GRID_POINTS = 2001
_DEEP_TAIL = -35.0


class LinkKind(str, enum.Enum):
    LOGIT = "logit"
    PROBIT = "probit"


@dataclass(frozen=True)
class LinkModel:
    kind: LinkKind
    sigma: float = 1.0

    def __post_init__(self):
        try:
            kind = LinkKind(str(getattr(self.kind, "value", self.kind)).lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown link kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        sigma = float(self.sigma)
        if not math.isfinite(sigma) or sigma <= 0:
            raise InvalidArgumentError(f"sigma must be positive and finite, got {self.sigma}")
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def logit(cls, sigma=1.0):
        return cls(LinkKind.LOGIT, sigma)

    @classmethod
    def probit(cls, sigma=1.0):
        return cls(LinkKind.PROBIT, sigma)

    def __str__(self):
        return f"{self.kind.value}(sigma={self.sigma:g})"


@dataclass(frozen=True)
class LinkConstants:
    """Curvature lower bound and score upper bound over ``|x| <= alpha``.

    ``gamma_alpha`` and ``l_alpha`` are the closed-form values used in
    bound reports. ``gamma_grid`` and ``l_grid`` are the infimum/supremum
    of the defining expressions evaluated on a uniform grid.
    """

    gamma_alpha: float
    l_alpha: float
    alpha: float
    gamma_grid: float
    l_grid: float
    kind: LinkKind


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("link argument must be finite")
    return x


def _log_phi(z):
    return -0.5 * z * z - _LOG_SQRT_2PI


def _probit_core(z):
    """``log Phi(z)`` and ``phi(z) / Phi(z)`` from one ndtr evaluation.

    ndtr is taken on the smaller tail so neither branch cancels; arguments
    past ``_DEEP_TAIL`` fall back to log_ndtr.
    """
    z = np.asarray(z, dtype=float)
    c = special.ndtr(-np.abs(z))
    neg = z < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_cdf = np.where(neg, np.log(c), np.log1p(-c))
        mills = np.exp(_log_phi(z)) / np.where(neg, c, 1.0 - c)
    deep = z < _DEEP_TAIL
    if np.any(deep):
        lc = special.log_ndtr(z[deep])
        log_cdf[deep] = lc
        mills[deep] = np.exp(_log_phi(z[deep]) - lc)
    return log_cdf, mills


def _logit_core(z):
    z = np.asarray(z, dtype=float)
    log_cdf = -(np.log1p(np.exp(-np.abs(z))) + np.maximum(-z, 0.0))
    return log_cdf, special.expit(-z)


def _core(model, z):
    """``(log f, sigma * fdot / f)`` as functions of ``z = x / sigma``."""
    if model.kind is LinkKind.LOGIT:
        return _logit_core(z)
    return _probit_core(z)


def eval_link(model: LinkModel, x):
    """Return ``(f, fdot, fddot)`` at ``x``.

    ``f`` is clamped to ``[EPS_F, 1 - 2**-53]`` so downstream logs stay
    finite; the derivatives are exact analytic expressions.
    """
    x = _check_x(x)
    s = model.sigma
    z = x / s
    if model.kind is LinkKind.LOGIT:
        f = special.expit(z)
        fdot = special.expit(z) * special.expit(-z) / s
        fddot = -fdot * np.tanh(0.5 * z) / s
    else:
        f = special.ndtr(z)
        pdf = np.exp(_log_phi(z))
        fdot = pdf / s
        fddot = -z * pdf / (s * s)
    f = np.clip(f, EPS_F, _F_MAX)
    if f.ndim == 0:
        return float(f), float(fdot), float(fddot)
    return f, fdot, fddot


def log_f(model: LinkModel, x):
    """``log f(x)`` without forming ``f``."""
    return _core(model, np.asarray(x, dtype=float) / model.sigma)[0]


def log_1mf(model: LinkModel, x):
    """``log(1 - f(x))``."""
    return log_f(model, -np.asarray(x, dtype=float))


def neg_log_lik(model: LinkModel, x, y):
    """Per-entry ``-log P(Y = y | M = x)`` for ``y`` in ``{+1, -1}``."""
    return -log_f(model, np.asarray(y) * np.asarray(x, dtype=float))


def score(model: LinkModel, x, y):
    """Derivative of ``neg_log_lik`` with respect to ``x``.

    Equals ``-fdot/f`` for ``y = +1`` and ``fdot/(1 - f)`` for ``y = -1``.
    """
    return nll_and_score(model, x, y)[1]


def nll_and_score(model: LinkModel, x, y):
    """``neg_log_lik`` and ``score`` sharing one CDF evaluation."""
    y = np.asarray(y, dtype=float)
    log_cdf, ratio = _core(model, y * np.asarray(x, dtype=float) / model.sigma)
    return -log_cdf, -y * ratio / model.sigma


def curvature(model: LinkModel, x, y):
    """Second derivative of ``neg_log_lik`` with respect to ``x``."""
    y = np.asarray(y, dtype=float)
    z = y * np.asarray(x, dtype=float) / model.sigma
    s2 = model.sigma ** 2
    if model.kind is LinkKind.LOGIT:
        return special.expit(z) * special.expit(-z) / s2
    h = _probit_core(z)[1]
    return h * (h + z) / s2


def score_bound_expr(model: LinkModel, x):
    """``|fdot(x)| / (f(x) (1 - f(x)))``, the quantity bounded by L_alpha."""
    # 1/(f(1-f)) = 1/f + 1/(1-f)
    return np.abs(score(model, x, 1.0)) + np.abs(score(model, x, -1.0))


def link_constants(model: LinkModel, alpha: float) -> LinkConstants:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0:
        raise InvalidArgumentError(f"alpha must be positive and finite, got {alpha}")
    s = model.sigma
    a = alpha / s
    if model.kind is LinkKind.LOGIT:
        l_alpha = 1.0 / s
        # e^a / (s^2 (1 + e^a)^2) written to avoid overflow for large a
        gamma = float(special.expit(a) * special.expit(-a)) / s ** 2
    else:
        l_alpha = (4.0 / s) * (a + 1.0)
        gamma = alpha / (math.sqrt(2.0 * math.pi) * s ** 3) * math.exp(-0.5 * a * a)

    grid = np.linspace(-alpha, alpha, GRID_POINTS)
    curv = np.minimum(curvature(model, grid, 1.0), curvature(model, grid, -1.0))
    return LinkConstants(
        gamma_alpha=gamma,
        l_alpha=l_alpha,
        alpha=alpha,
        gamma_grid=float(curv.min()),
        l_grid=float(score_bound_expr(model, grid).max()),
        kind=model.kind,
    )
