"""Observation index sets, their bipartite-graph spectra, and R_Omega."""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import InvalidArgumentError, ParseError

log = logging.getLogger(__name__)

#: above this size spectral_report switches from dense SVD to power iteration
DENSE_SVD_LIMIT = 512
POWER_TOL = 1e-10
POWER_MAXITER = 10_000


@dataclass(frozen=True, eq=False)
class Mask:
    """A duplicate-free set of observed ``(row, col)`` indices.

    Entries are stored as two int64 arrays sorted lexicographically.
    Use :meth:`from_pairs` to build one from unsorted input.
    """

    m: int
    n: int
    rows: np.ndarray
    cols: np.ndarray
    _degrees: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_pairs(cls, m, n, rows, cols):
        m, n = int(m), int(n)
        if m <= 0 or n <= 0:
            raise InvalidArgumentError(f"mask dimensions must be positive, got {m}x{n}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise InvalidArgumentError("rows and cols must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise InvalidArgumentError("mask index out of range")
        lin = rows * n + cols
        order = np.argsort(lin, kind="stable")
        lin = lin[order]
        if lin.size > 1 and np.any(lin[1:] == lin[:-1]):
            raise InvalidArgumentError("duplicate index pair in mask")
        rows, cols = np.divmod(lin, n)
        rows.flags.writeable = False
        cols.flags.writeable = False
        return cls(m, n, rows, cols)

    @classmethod
    def from_dense(cls, g):
        g = np.asarray(g)
        rows, cols = np.nonzero(g)
        return cls.from_pairs(g.shape[0], g.shape[1], rows, cols)

    @classmethod
    def full(cls, m, n):
        return cls.from_dense(np.ones((m, n), dtype=bool))

    @property
    def shape(self):
        return (self.m, self.n)

    @property
    def size(self):
        return int(self.rows.size)

    def __len__(self):
        return self.size

    @property
    def tall(self):
        """Orientation flag: True when ``m >= n``."""
        return self.m >= self.n

    @property
    def linear(self):
        return self.rows * self.n + self.cols

    @property
    def row_degrees(self):
        if "row" not in self._degrees:
            self._degrees["row"] = np.bincount(self.rows, minlength=self.m)
        return self._degrees["row"]

    @property
    def col_degrees(self):
        if "col" not in self._degrees:
            self._degrees["col"] = np.bincount(self.cols, minlength=self.n)
        return self._degrees["col"]

    def to_dense(self):
        g = np.zeros((self.m, self.n), dtype=bool)
        g[self.rows, self.cols] = True
        return g

    def to_sparse(self):
        data = np.ones(self.size)
        return sparse.csr_matrix((data, (self.rows, self.cols)), shape=self.shape)

    def subset(self, index):
        """Mask restricted to the entries at positions ``index`` (kept sorted)."""
        index = np.sort(np.asarray(index, dtype=np.int64))
        return Mask(self.m, self.n, self.rows[index], self.cols[index])

    def transpose(self):
        return Mask.from_pairs(self.n, self.m, self.cols, self.rows)

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
        )

    def __hash__(self):
        return hash((self.m, self.n, self.rows.tobytes(), self.cols.tobytes()))


@dataclass(frozen=True)
class SpectralReport:
    sigma1: float
    sigma2: float
    d_mean: float
    a1_residual: float
    a2_ratio: float
    method: str = "svd"

    @property
    def gap(self):
        return math.inf if self.sigma2 == 0 else self.sigma1 / self.sigma2


def _rng(seed):
    return np.random.default_rng(seed)


def gen_bernoulli(m, n, p, seed=None) -> Mask:
    """Include each index independently with probability ``p``."""
    if not 0 < p <= 1:
        raise InvalidArgumentError(f"p must lie in (0, 1], got {p}")
    g = _rng(seed).random((m, n)) < p
    return Mask.from_dense(g)


def gen_block_model(m, n, p, q, seed=None) -> Mask:
    """Two-block stochastic block model.

    Rows and columns are each split into equal halves; the two diagonal
    blocks are sampled with probability ``p`` and the off-diagonal blocks
    with probability ``q``.
    """
    if m % 2 or n % 2:
        raise InvalidArgumentError(f"block model needs even dimensions, got {m}x{n}")
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise InvalidArgumentError(f"block probabilities must lie in [0, 1], got p={p}, q={q}")
    same = (np.arange(m)[:, None] < m // 2) == (np.arange(n)[None, :] < n // 2)
    prob = np.where(same, p, q)
    g = _rng(seed).random((m, n)) < prob
    return Mask.from_dense(g)


def gen_regular(m, n, d, seed=None, swaps_per_edge=10) -> Mask:
    """Random bi-regular mask: every row has ``d`` entries, every column ``m*d/n``.

    A deterministic circulant bi-regular graph is relabelled by random row
    and column permutations and then mixed by degree-preserving double
    edge swaps, which keeps the result duplicate-free at every step.
    """
    m, n, d = int(m), int(n), int(d)
    if m <= 0 or n <= 0 or d <= 0:
        raise InvalidArgumentError("m, n and d must be positive")
    if d > n or (m * d) % n:
        raise InvalidArgumentError(f"no bi-regular {m}x{n} graph with row degree {d}")
    rng = _rng(seed)
    # row i -> columns i*d .. i*d+d-1 (mod n): consecutive stubs give every
    # column exactly m*d/n edges
    rows = np.repeat(np.arange(m), d)
    cols = np.arange(m * d) % n
    rows = rng.permutation(m)[rows]
    cols = rng.permutation(n)[cols]

    col_deg = m * d // n
    if d < n and col_deg < m:
        rows_l, cols_l = rows.tolist(), cols.tolist()
        edges = set((rows * n + cols).tolist())
        n_edges = len(rows_l)
        picks = rng.integers(0, n_edges, size=(swaps_per_edge * n_edges, 2)).tolist()
        for a, b in picks:
            i1, j1, i2, j2 = rows_l[a], cols_l[a], rows_l[b], cols_l[b]
            if i1 == i2 or j1 == j2 or i1 * n + j2 in edges or i2 * n + j1 in edges:
                continue
            edges.difference_update((i1 * n + j1, i2 * n + j2))
            edges.update((i1 * n + j2, i2 * n + j1))
            cols_l[a], cols_l[b] = j2, j1
        cols = np.asarray(cols_l, dtype=np.int64)
    return Mask.from_pairs(m, n, rows, cols)


def _unit_ones(k):
    return np.full(k, 1.0 / math.sqrt(k))


def _sin_to(vec, target):
    """Sine of the angle between the lines spanned by unit vectors."""
    vec = vec / np.linalg.norm(vec)
    return float(np.linalg.norm(vec - (vec @ target) * target))


def _power_top2(g, tol, maxiter, rng):
    """Top two singular triplets of a sparse matrix via power iteration.

    The second triplet is found by running the same iteration on the
    subspace orthogonal to the first right singular vector.
    """
    gt = g.T.tocsr()

    def top(deflate, vec_tol):
        v = rng.standard_normal(g.shape[1])
        if deflate is not None:
            v -= (v @ deflate) * deflate
        v /= np.linalg.norm(v)
        s_old = 0.0
        for _ in range(maxiter):
            w = gt @ (g @ v)
            if deflate is not None:
                w -= (w @ deflate) * deflate
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return 0.0, np.zeros(g.shape[0]), v
            v_new = w / norm
            s = math.sqrt(norm)
            done = abs(s - s_old) <= tol * max(s, 1e-300) and np.linalg.norm(v_new - v) <= vec_tol
            v, s_old = v_new, s
            if done:
                break
        u = g @ v
        s = float(np.linalg.norm(u))
        return s, (u / s if s > 0 else u), v

    # the first pair's vectors feed the (A1) residual, so converge them
    # tightly; only the value of the second pair is reported
    s1, u1, v1 = top(None, 10 * tol)
    s2, _, _ = top(v1, math.inf)
    return s1, s2, u1, v1


def spectral_report(mask: Mask, method="auto", seed=0) -> SpectralReport:
    """Spectral statistics of the 0/1 bi-adjacency matrix of ``mask``."""
    if mask.size == 0:
        raise InvalidArgumentError("spectral report of an empty mask")
    if method == "auto":
        method = "svd" if min(mask.m, mask.n) <= DENSE_SVD_LIMIT else "power"
    if method == "svd":
        u, s, vt = np.linalg.svd(mask.to_dense().astype(float), full_matrices=False)
        s1 = float(s[0])
        s2 = float(s[1]) if s.size > 1 else 0.0
        u1, v1 = u[:, 0], vt[0]
    elif method == "power":
        s1, s2, u1, v1 = _power_top2(mask.to_sparse(), POWER_TOL, POWER_MAXITER, _rng(seed))
    else:
        raise InvalidArgumentError(f"unknown spectral method {method!r}")
    a1 = max(_sin_to(u1, _unit_ones(mask.m)), _sin_to(v1, _unit_ones(mask.n)))
    d_mean = mask.size / mask.m
    return SpectralReport(
        sigma1=s1,
        sigma2=s2,
        d_mean=d_mean,
        a1_residual=a1,
        a2_ratio=s2 / math.sqrt(d_mean),
        method=method,
    )


def apply_sampling_op(mask: Mask, z):
    """R_Omega: keep the entries of ``z`` on the mask, zero elsewhere."""
    z = np.asarray(z)
    if z.shape != mask.shape:
        raise InvalidArgumentError(f"matrix shape {z.shape} does not match mask {mask.shape}")
    out = np.zeros_like(z)
    out[mask.rows, mask.cols] = z[mask.rows, mask.cols]
    return out


def format_mask(mask: Mask) -> str:
    lines = [f"{mask.m} {mask.n}"]
    lines.extend(f"{i} {j}" for i, j in zip(mask.rows.tolist(), mask.cols.tolist()))
    return "\n".join(lines) + "\n"


def write_mask(mask: Mask, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_mask(mask))


def _parse_header(line, lineno=1):
    parts = line.split()
    if len(parts) != 2:
        raise ParseError(f"expected header 'm n', got {line.strip()!r}", lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"non-integer header {line.strip()!r}", lineno) from None


def parse_mask(text: str) -> Mask:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty mask file")
    m, n = _parse_header(lines[0])
    rows, cols = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'i j', got {line.strip()!r}", lineno)
        try:
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
        except ValueError:
            raise ParseError(f"non-integer index in {line.strip()!r}", lineno) from None
    try:
        return Mask.from_pairs(m, n, rows, cols)
    except InvalidArgumentError as exc:
        raise ParseError(str(exc)) from None


def read_mask(path) -> Mask:
    with open(os.fspath(path)) as fh:
        return parse_mask(fh.read())
