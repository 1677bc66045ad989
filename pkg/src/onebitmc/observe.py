"""Ground-truth matrices and 1-bit observations drawn from them."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ParseError
from .links import LinkKind, LinkModel, eval_link
from .sampling import Mask, _parse_header


@dataclass(frozen=True, eq=False)
class BinaryObservations:
    """``values[t]`` in ``{+1, -1}`` is the observation at ``mask`` entry ``t``."""

    mask: Mask
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int8).ravel()
        if values.size != self.mask.size:
            raise InvalidArgumentError(
                f"{values.size} values for a mask with {self.mask.size} entries"
            )
        if values.size and not np.all((values == 1) | (values == -1)):
            raise InvalidArgumentError("observations must be +1 or -1")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.mask.shape

    @property
    def rows(self):
        return self.mask.rows

    @property
    def cols(self):
        return self.mask.cols

    def __len__(self):
        return self.mask.size

    def subset(self, index):
        index = np.sort(np.asarray(index, dtype=np.int64))
        return BinaryObservations(self.mask.subset(index), self.values[index])

    def to_dense(self):
        """Dense int8 matrix with the observations on the mask and 0 elsewhere."""
        y = np.zeros(self.shape, dtype=np.int8)
        y[self.rows, self.cols] = self.values
        return y

    def __eq__(self, other):
        if not isinstance(other, BinaryObservations):
            return NotImplemented
        return self.mask == other.mask and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class GroundTruth:
    m_star: np.ndarray
    rank_r: int
    alpha: float

    @property
    def shape(self):
        return self.m_star.shape


def substreams(seed, k=3):
    """Independent child seeds (mask, truth, observations, ...) of one master seed."""
    return np.random.SeedSequence(seed).spawn(k)


def gen_ground_truth(m, n, r, alpha=1.0, seed=None) -> GroundTruth:
    """``M* = M1 M2^T`` with Uniform[-0.5, 0.5] factors, scaled to ``max|M*| = alpha``."""
    if r <= 0 or r > min(m, n):
        raise InvalidArgumentError(f"rank {r} infeasible for a {m}x{n} matrix")
    if alpha <= 0:
        raise InvalidArgumentError("alpha must be positive")
    rng = np.random.default_rng(seed)
    m1 = rng.uniform(-0.5, 0.5, size=(m, r))
    m2 = rng.uniform(-0.5, 0.5, size=(n, r))
    prod = m1 @ m2.T
    prod *= alpha / np.abs(prod).max()
    return GroundTruth(prod, int(r), float(alpha))


def _check_dims(truth, mask):
    if truth.shape != mask.shape:
        raise InvalidArgumentError(f"truth shape {truth.shape} does not match mask {mask.shape}")


def sample_observations(truth: GroundTruth, mask: Mask, link: LinkModel, seed=None):
    """Draw ``Y_ij = +1`` with probability ``f(M*_ij)`` for each observed index."""
    _check_dims(truth, mask)
    rng = np.random.default_rng(seed)
    x = truth.m_star[mask.rows, mask.cols]
    f, _, _ = eval_link(link, x)
    values = np.where(rng.random(x.size) < f, 1, -1)
    return BinaryObservations(mask, values)


def draw_noise(link: LinkModel, size, rng):
    """Noise whose negation has CDF ``f`` (both laws are symmetric)."""
    if link.kind is LinkKind.LOGIT:
        return rng.logistic(0.0, link.sigma, size=size)
    return rng.normal(0.0, link.sigma, size=size)


def sample_via_noise(truth: GroundTruth, mask: Mask, link: LinkModel, seed=None):
    """Quantise ``M*_ij + Z_ij`` to its sign; exact zeros are redrawn."""
    _check_dims(truth, mask)
    rng = np.random.default_rng(seed)
    x = truth.m_star[mask.rows, mask.cols]
    total = x + draw_noise(link, x.size, rng)
    zero = total == 0
    while zero.any():
        total[zero] = x[zero] + draw_noise(link, int(zero.sum()), rng)
        zero = total == 0
    return BinaryObservations(mask, np.where(total > 0, 1, -1))


def format_observations(obs: BinaryObservations) -> str:
    lines = [f"{obs.mask.m} {obs.mask.n}"]
    lines.extend(
        f"{i} {j} {y}"
        for i, j, y in zip(obs.rows.tolist(), obs.cols.tolist(), obs.values.tolist())
    )
    return "\n".join(lines) + "\n"


def write_observations(obs: BinaryObservations, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_observations(obs))


def parse_observations(text: str) -> BinaryObservations:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty observation file")
    m, n = _parse_header(lines[0])
    rows, cols, vals = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'i j y', got {line.strip()!r}", lineno)
        try:
            i, j, y = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"non-integer field in {line.strip()!r}", lineno) from None
        if y not in (1, -1):
            raise ParseError(f"observation must be +1 or -1, got {parts[2]}", lineno)
        rows.append(i)
        cols.append(j)
        vals.append(y)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.int8)
    try:
        mask = Mask.from_pairs(m, n, rows, cols)
    except InvalidArgumentError as exc:
        raise ParseError(str(exc)) from None
    # Mask.from_pairs sorts; carry the values along
    order = np.argsort(rows * n + cols, kind="stable")
    return BinaryObservations(mask, vals[order])


def read_observations(path) -> BinaryObservations:
    with open(os.fspath(path)) as fh:
        return parse_observations(fh.read())
