"""MovieLens 100k ingestion, binarisation and train/test splits."""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ParseError
from .observe import BinaryObservations
from .sampling import Mask

log = logging.getLogger(__name__)

MOVIELENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
EXPECTED_USERS = 943
EXPECTED_ITEMS = 1682
EXPECTED_RATINGS = 100_000


@dataclass(frozen=True, eq=False)
class RatingsTable:
    """Ratings with dense 0-based user/item indices.

    ``user_ids`` and ``item_ids`` map the dense indices back to the ids
    found in the file.
    """

    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    timestamps: np.ndarray
    user_ids: np.ndarray
    item_ids: np.ndarray

    @property
    def n_users(self):
        return int(self.user_ids.size)

    @property
    def n_items(self):
        return int(self.item_ids.size)

    def __len__(self):
        return int(self.ratings.size)

    def __eq__(self, other):
        if not isinstance(other, RatingsTable):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("users", "items", "ratings", "timestamps", "user_ids", "item_ids")
        )


def _table_from_raw(uid, iid, rating, ts):
    uid = np.asarray(uid, dtype=np.int64)
    iid = np.asarray(iid, dtype=np.int64)
    # last occurrence of a (user, item) pair wins
    key = np.stack([uid, iid], axis=1)
    _, first_from_end = np.unique(key[::-1], axis=0, return_index=True)
    keep = np.sort(len(uid) - 1 - first_from_end)
    if keep.size < uid.size:
        log.warning("dropped %d duplicate (user, item) ratings", uid.size - keep.size)
    uid, iid = uid[keep], iid[keep]
    user_ids, users = np.unique(uid, return_inverse=True)
    item_ids, items = np.unique(iid, return_inverse=True)
    return RatingsTable(
        users=users.astype(np.int64),
        items=items.astype(np.int64),
        ratings=np.asarray(rating, dtype=np.int64)[keep],
        timestamps=np.asarray(ts, dtype=np.int64)[keep],
        user_ids=user_ids,
        item_ids=item_ids,
    )


def parse_movielens(text: str) -> RatingsTable:
    uid, iid, rating, ts = [], [], [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, got {len(parts)}", lineno)
        try:
            u, i, r, t = (int(x) for x in parts)
        except ValueError:
            raise ParseError(f"non-integer field in {line.strip()!r}", lineno) from None
        if not 1 <= r <= 5:
            raise ParseError(f"rating {r} outside 1..5", lineno)
        uid.append(u)
        iid.append(i)
        rating.append(r)
        ts.append(t)
    return _table_from_raw(uid, iid, rating, ts)


def load_movielens(path) -> RatingsTable:
    """Read a ``u.data`` style file: ``user  item  rating  timestamp`` per line."""
    with open(os.fspath(path)) as fh:
        table = parse_movielens(fh.read())
    log.info("loaded %d ratings from %d users on %d items", len(table), table.n_users, table.n_items)
    return table


def format_movielens(table: RatingsTable) -> str:
    lines = (
        f"{u}\t{i}\t{r}\t{t}"
        for u, i, r, t in zip(
            table.user_ids[table.users].tolist(),
            table.item_ids[table.items].tolist(),
            table.ratings.tolist(),
            table.timestamps.tolist(),
        )
    )
    return "".join(line + "\n" for line in lines)


def write_movielens(table: RatingsTable, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_movielens(table))


def subsample(table: RatingsTable, size, seed=None) -> RatingsTable:
    """Uniformly chosen ``size`` ratings, re-indexed densely."""
    if size >= len(table):
        return table
    keep = np.sort(np.random.default_rng(seed).choice(len(table), size=size, replace=False))
    return _table_from_raw(
        table.user_ids[table.users[keep]],
        table.item_ids[table.items[keep]],
        table.ratings[keep],
        table.timestamps[keep],
    )


def binarize(table: RatingsTable) -> BinaryObservations:
    """+1 above the global mean rating, -1 below; ties with the mean are dropped."""
    if len(table) == 0:
        raise InvalidArgumentError("empty ratings table")
    mean = float(np.mean(table.ratings))
    keep = table.ratings != mean
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        log.info("dropped %d ratings equal to the mean %.4f", dropped, mean)
    values = np.where(table.ratings[keep] > mean, 1, -1)
    rows, cols = table.users[keep], table.items[keep]
    mask = Mask.from_pairs(table.n_users, table.n_items, rows, cols)
    order = np.argsort(rows * table.n_items + cols, kind="stable")
    obs = BinaryObservations(mask, values[order])
    if len(obs):
        log.info("mean rating %.4f, fraction of +1 = %.4f", mean, float(np.mean(obs.values == 1)))
    return obs


def split(obs: BinaryObservations, train_fraction, seed=None):
    """Uniform random train/test partition with ``floor(|Omega| * fraction)`` training entries."""
    if len(obs) == 0:
        raise InvalidArgumentError("nothing to split")
    if not 0 < train_fraction < 1:
        raise InvalidArgumentError(f"train fraction must lie in (0, 1), got {train_fraction}")
    n_train = math.floor(len(obs) * train_fraction)
    if n_train == 0 or n_train == len(obs):
        raise InvalidArgumentError(f"fraction {train_fraction} leaves one side of the split empty")
    perm = np.random.default_rng(seed).permutation(len(obs))
    return obs.subset(perm[:n_train]), obs.subset(perm[n_train:])
