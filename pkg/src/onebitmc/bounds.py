"""Error-bound calculator for the rank-constrained ML estimator.

The theorem bounds are on ``||M_hat - M*||_F / sqrt(mn)``. The corollary
and comparison rates are order-of-magnitude expressions reported with
constant 1 (``RATE_ONLY``), not absolute bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import BoundUndefinedError, InvalidArgumentError
from .links import LinkConstants

RATE_ONLY = "rate-only (constant 1)"
L_ALPHA_NOTE = (
    "C2_alpha uses L_alpha at the stated alpha; the theorem's constant list "
    "also mentions L_{2 alpha}, which is not separately defined"
)
C1_FACTOR = 4.0 * math.sqrt(2.0)
C2_FACTOR = 32.16 * math.sqrt(2.0)


@dataclass(frozen=True)
class BoundInputs:
    m: int
    n: int
    r: int
    alpha: float
    link_constants: LinkConstants
    sigma1: float
    sigma2: float
    omega_size: int
    c_spectral: float = 3.0

    def __post_init__(self):
        if min(self.m, self.n, self.r, self.omega_size) <= 0:
            raise InvalidArgumentError("m, n, r and omega_size must be positive")
        if self.alpha <= 0 or self.c_spectral <= 0:
            raise InvalidArgumentError("alpha and c_spectral must be positive")
        if not self.sigma1 >= self.sigma2 >= 0:
            raise InvalidArgumentError("need sigma1 >= sigma2 >= 0")
        if self.sigma1 == 0:
            raise InvalidArgumentError("sigma1 must be positive")
        if self.m < self.n:
            # singular values are transpose-invariant; only the roles of m, n swap
            m, n = self.n, self.m
            object.__setattr__(self, "m", m)
            object.__setattr__(self, "n", n)


class TheoremBound(NamedTuple):
    spectral_form: float
    omega_form: float


def bound_constants(b: BoundInputs):
    """``(C1_alpha, C2_alpha)``."""
    gamma = b.link_constants.gamma_alpha
    if not gamma > 0:
        raise BoundUndefinedError(f"gamma_alpha = {gamma} is not positive")
    return C1_FACTOR * b.alpha, C2_FACTOR * b.link_constants.l_alpha / gamma


def theorem_bound(b: BoundInputs) -> TheoremBound:
    c1, c2 = bound_constants(b)
    m, n, r = b.m, b.n, b.r
    s1, s2 = b.sigma1, b.sigma2
    omega = float(b.omega_size)
    root = math.sqrt(r ** 3 * n)
    spectral = max(c1 * r * s2 / s1, c2 * m * root / s1 ** 2)
    omega_form = max(
        c1 * b.c_spectral * r * math.sqrt(m) / math.sqrt(omega),
        c2 * m ** 3 * root / omega ** 2,
    )
    return TheoremBound(spectral, omega_form)


def corollary_rate(b: BoundInputs, p=None, delta=None) -> float:
    """``(delta / p^2) sqrt(r^3 / n)`` with ``p = |Omega|/(mn)``, ``delta = m/n`` by default."""
    if p is None:
        p = b.omega_size / (b.m * b.n)
    if delta is None:
        delta = b.m / b.n
    if not 0 < p <= 1:
        raise InvalidArgumentError(f"p must lie in (0, 1], got {p}")
    if delta < 1:
        raise InvalidArgumentError(f"delta = m/n must be >= 1, got {delta}")
    return delta / p ** 2 * math.sqrt(b.r ** 3 / b.n)


def comparison_rates(n, r, p):
    """Squared-error rates for an ``n x n`` matrix: ``(trace-norm rate, this estimator's rate)``."""
    if n <= 0 or r <= 0:
        raise InvalidArgumentError("n and r must be positive")
    if not 0 < p <= 1:
        raise InvalidArgumentError(f"p must lie in (0, 1], got {p}")
    prior = math.sqrt(r / (p * n))
    ours = r ** 3 / (p ** 4 * n)
    return prior, ours
