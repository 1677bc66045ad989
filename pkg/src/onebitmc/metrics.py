"""Evaluation metrics and the per-run CSV schema."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError

CSV_COLUMNS = (
    "run_id", "m", "n", "r", "p", "sigma", "link",
    "lambda_selected", "relative_mse", "sign_accuracy", "wall_time_s",
)


@dataclass(frozen=True)
class MetricReport:
    relative_mse: Optional[float]
    sign_accuracy: float
    n_test: int


def relative_mse(m_hat, m_star) -> float:
    """``||M_hat - M*||_F^2 / ||M*||_F^2``."""
    m_hat = np.asarray(m_hat, dtype=float)
    m_star = np.asarray(m_star, dtype=float)
    if m_hat.shape != m_star.shape:
        raise InvalidArgumentError(f"shape mismatch {m_hat.shape} vs {m_star.shape}")
    denom = float(np.sum(m_star * m_star))
    if denom == 0:
        raise InvalidArgumentError("relative MSE against an all-zero ground truth")
    diff = m_hat - m_star
    return float(np.sum(diff * diff)) / denom


def sign_accuracy(m_hat, test) -> float:
    """Fraction of test entries where ``sign(M_hat_ij) == Y_ij``.

    Exact zeros in ``m_hat`` count as wrong.
    """
    if len(test) == 0:
        raise InvalidArgumentError("empty test set")
    pred = np.sign(np.asarray(m_hat)[test.rows, test.cols])
    return float(np.mean(pred == test.values))


def metric_report(m_hat, test, m_star=None) -> MetricReport:
    mse = None if m_star is None else relative_mse(m_hat, m_star)
    return MetricReport(mse, sign_accuracy(m_hat, test), len(test))


def _cell(x):
    if isinstance(x, float):
        # shortest round-trip form, so values read back bit-exactly
        return "nan" if math.isnan(x) else repr(float(x))
    return str(x)


def write_rows(fh, rows, columns=CSV_COLUMNS, header_lines=()):
    """Write comment header lines then CSV ``rows`` (dicts keyed by ``columns``)."""
    for line in header_lines:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c, "")) for c in columns])


def read_rows(fh):
    """Inverse of :func:`write_rows`; comment lines are skipped."""
    lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))
