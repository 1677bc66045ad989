"""Factored log-barrier solver with central-path continuation and CV.

The estimator minimises ``nll(U V^T) + lam * barrier(U V^T)`` by gradient
descent with Armijo backtracking, for ``lam = lam0, lam0/2, lam0/4, ...``,
warm-starting each value from the previous solution. The value of ``lam``
at which to stop is picked by K-fold cross-validation on held-out
negative log-likelihood.
"""
from __future__ import annotations

import enum
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CVDegenerateError, InfeasiblePointError, InvalidArgumentError, LineSearchStall, ParseError
from .objective import FactoredObjective, FactorPair, ObjectiveValue, nll

log = logging.getLogger(__name__)

STEP_FLOOR = 1e-20
INIT_SCALE = 0.95
CERT_RTOL = 1e-6


class Certificate(str, enum.Enum):
    RANK_DEFICIENT = "RankDeficient_GlobalOpt"
    FULL_RANK = "FullRank_NoCertificate"


@dataclass(frozen=True)
class SolverConfig:
    rank_r: int
    k: Optional[int] = None
    alpha: float = 1.0
    lambda0: Optional[float] = None
    lambda_halvings: int = 12
    max_iters_per_lambda: int = 500
    grad_tol: float = 1e-5
    armijo_c: float = 1e-4
    backtrack_beta: float = 0.5
    cv_folds: int = 5
    seed: int = 0
    reproducible: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        if self.rank_r <= 0:
            raise InvalidArgumentError("rank_r must be positive")
        if self.k is None:
            object.__setattr__(self, "k", self.rank_r + 1)
        if self.k <= 0:
            raise InvalidArgumentError("k must be positive")
        if self.alpha <= 0:
            raise InvalidArgumentError("alpha must be positive")
        if self.lambda0 is not None and self.lambda0 <= 0:
            raise InvalidArgumentError("lambda0 must be positive")
        if self.lambda_halvings < 0 or self.max_iters_per_lambda <= 0:
            raise InvalidArgumentError("lambda_halvings and max_iters_per_lambda must be positive")
        if self.grad_tol <= 0:
            raise InvalidArgumentError("grad_tol must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.backtrack_beta < 1):
            raise InvalidArgumentError("armijo_c and backtrack_beta must lie in (0, 1)")
        if self.cv_folds < 2:
            raise InvalidArgumentError("cv_folds must be at least 2")


@dataclass
class LambdaResult:
    factors: FactorPair
    value: ObjectiveValue
    iterations: int
    grad_norm: float
    step: float
    stalled: bool = False


@dataclass
class FitReport:
    m_hat: np.ndarray
    factors: FactorPair
    lambda_selected: float
    cv_errors: list
    iterations: list
    certificate: Certificate
    final_grad_norm: float
    stalled: bool = False
    cv_fold_errors: Optional[np.ndarray] = field(default=None, repr=False)


def init_factors(m, n, cfg: SolverConfig, seed=None) -> FactorPair:
    """Standard normal factors scaled by a common factor so that
    ``max |U V^T| = 0.95 alpha``."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    u = rng.standard_normal((m, cfg.k))
    v = rng.standard_normal((n, cfg.k))
    peak = np.abs(u @ v.T).max()
    scale = math.sqrt(INIT_SCALE * cfg.alpha / peak)
    return FactorPair(u * scale, v * scale)


def minimize_at_lambda(
    obs,
    link,
    fp0: FactorPair,
    alpha,
    lam,
    cfg: SolverConfig,
    *,
    t_init=1.0,
    callback: Optional[Callable] = None,
    raise_on_stall=False,
) -> LambdaResult:
    """Gradient descent with backtracking at a fixed barrier weight.

    A trial step is accepted once it is strictly feasible and satisfies
    the Armijo condition. ``callback(fp, value)`` sees every accepted
    iterate.
    """
    obj = FactoredObjective(obs, link, alpha, lam)
    fp = fp0
    m_hat = fp.product()
    if not obj.is_feasible(m_hat):
        raise InfeasiblePointError("starting point is not strictly feasible")
    val = obj.evaluate(m_hat)
    w = obj.grad_matrix(m_hat)
    gu, gv = w @ fp.v, w.T @ fp.u
    step = min(1.0, t_init)
    stalled = False
    it = 0
    while True:
        g2 = float(np.sum(gu * gu) + np.sum(gv * gv))
        gnorm = math.sqrt(g2)
        if gnorm <= cfg.grad_tol * max(1.0, abs(val.total)) or it >= cfg.max_iters_per_lambda:
            break
        t = step
        while True:
            u_new = fp.u - t * gu
            v_new = fp.v - t * gv
            m_new = u_new @ v_new.T
            if obj.is_feasible(m_new):
                val_new = obj.evaluate(m_new)
                if val_new.total <= val.total - cfg.armijo_c * t * g2:
                    break
            t *= cfg.backtrack_beta
            if t < STEP_FLOOR:
                stalled = True
                break
        if stalled:
            log.debug("line search stalled at lambda=%g after %d iterations", lam, it)
            if raise_on_stall:
                raise LineSearchStall(f"step fell below {STEP_FLOOR} at lambda={lam}", fp)
            break
        fp = FactorPair(u_new, v_new)
        val = val_new
        w = obj.grad_matrix(m_new)
        gu, gv = w @ v_new, w.T @ u_new
        it += 1
        step = min(1.0, 2.0 * t)
        if callback is not None:
            callback(fp, val)
    return LambdaResult(fp, val, it, gnorm, step, stalled)


def lambda_schedule(lambda0, halvings):
    return [lambda0 / 2.0 ** t for t in range(halvings + 1)]


def default_lambda0(obs, link, fp0: FactorPair):
    m, n = fp0.shape
    return max(1.0, nll(obs, link, fp0.product()) / (m * n))


def certify(fp: FactorPair, rtol=CERT_RTOL) -> Certificate:
    """Rank-deficiency test on the factors (a sufficient condition only)."""
    k = fp.k
    su = np.linalg.svd(fp.u, compute_uv=False)
    sv = np.linalg.svd(fp.v, compute_uv=False)
    top = max(su[0] if su.size else 0.0, sv[0] if sv.size else 0.0)
    su_k = su[k - 1] if su.size >= k else 0.0
    sv_k = sv[k - 1] if sv.size >= k else 0.0
    if min(su_k, sv_k) <= rtol * top:
        return Certificate.RANK_DEFICIENT
    return Certificate.FULL_RANK


def _run_path(obs, link, fp, lambdas, cfg, callback=None, on_lambda=None):
    """Follow the central path; ``on_lambda(idx, result)`` after each stage."""
    step = 1.0
    results = []
    for idx, lam in enumerate(lambdas):
        cb = None if callback is None else (lambda f, v, lam=lam: callback(lam, f, v))
        res = minimize_at_lambda(obs, link, fp, cfg.alpha, lam, cfg, t_init=step, callback=cb)
        fp, step = res.factors, res.step
        results.append(res)
        if on_lambda is not None:
            on_lambda(idx, res)
    return results


def _fold_errors(obs, link, cfg, lambdas, train_idx, hold_idx, seed):
    train, hold = obs.subset(train_idx), obs.subset(hold_idx)
    fp0 = init_factors(obs.shape[0], obs.shape[1], cfg, seed=seed)
    errs = np.empty(len(lambdas))

    def record(idx, res):
        errs[idx] = nll(hold, link, res.factors.product()) / len(hold)

    _run_path(train, link, fp0, lambdas, cfg, on_lambda=record)
    return errs


def fit(obs, link, cfg: SolverConfig, callback: Optional[Callable] = None) -> FitReport:
    """Central-path fit with the stopping ``lam`` chosen by cross-validation.

    ``callback(lam, fp, value)`` is called on every accepted iterate of the
    final (full-data) path.
    """
    if len(obs) == 0:
        raise InvalidArgumentError("no observations to fit")
    m, n = obs.shape
    init_ss, fold_ss, *cv_ss = np.random.SeedSequence(cfg.seed).spawn(2 + cfg.cv_folds)
    fp_init = init_factors(m, n, cfg, seed=init_ss)
    lam0 = cfg.lambda0 if cfg.lambda0 is not None else default_lambda0(obs, link, fp_init)
    lambdas = lambda_schedule(lam0, cfg.lambda_halvings)

    perm = np.random.default_rng(fold_ss).permutation(len(obs))
    folds = np.array_split(perm, cfg.cv_folds)
    jobs = []
    for f, hold_idx in enumerate(folds):
        train_idx = np.concatenate([folds[g] for g in range(cfg.cv_folds) if g != f])
        if hold_idx.size == 0 or train_idx.size == 0:
            log.warning("cv fold %d is empty; skipped", f)
            continue
        jobs.append((train_idx, hold_idx, cv_ss[f]))
    if not jobs:
        raise CVDegenerateError(
            f"all {cfg.cv_folds} folds are degenerate for {len(obs)} observations; use fewer folds"
        )

    def run(job):
        return _fold_errors(obs, link, cfg, lambdas, *job)

    if cfg.n_jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_jobs) as pool:
            fold_errs = list(pool.map(run, jobs))
    else:
        fold_errs = [run(job) for job in jobs]
    fold_errs = np.vstack(fold_errs)
    mean_errs = fold_errs.mean(axis=0)
    best = int(np.argmin(mean_errs))

    results = _run_path(obs, link, fp_init, lambdas[: best + 1], cfg, callback=callback)
    final = results[-1]
    m_hat = final.factors.product()
    return FitReport(
        m_hat=m_hat,
        factors=final.factors,
        lambda_selected=lambdas[best],
        cv_errors=list(zip(lambdas, mean_errs.tolist())),
        iterations=[r.iterations for r in results],
        certificate=certify(final.factors),
        final_grad_norm=final.grad_norm,
        stalled=any(r.stalled for r in results),
        cv_fold_errors=fold_errs,
    )


# -- serialisation -----------------------------------------------------------

def _fmt(x):
    return format(float(x), ".17g")


def _matrix_lines(name, a):
    lines = [f"[{name}]", f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(_fmt(x) for x in row) for row in a)
    return lines


def format_fit_report(report: FitReport) -> str:
    lams = [lam for lam, _ in report.cv_errors]
    errs = [e for _, e in report.cv_errors]
    lines = [
        "[fit]",
        f"lambda_selected={_fmt(report.lambda_selected)}",
        f"certificate={report.certificate.value}",
        f"final_grad_norm={_fmt(report.final_grad_norm)}",
        f"stalled={int(report.stalled)}",
        f"k={report.factors.k}",
        f"iterations={','.join(str(i) for i in report.iterations)}",
        "[cv_errors]",
        f"lambdas={','.join(_fmt(x) for x in lams)}",
        f"mean_holdout_nll={','.join(_fmt(x) for x in errs)}",
    ]
    lines += _matrix_lines("m_hat", report.m_hat)
    lines += _matrix_lines("u", report.factors.u)
    lines += _matrix_lines("v", report.factors.v)
    return "\n".join(lines) + "\n"


def write_fit_report(report: FitReport, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_fit_report(report))


def parse_fit_report(text: str) -> FitReport:
    sections = {}
    name = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            sections[name] = []
        elif name is None:
            raise ParseError("content before first section", lineno)
        elif line:
            sections[name].append(line)

    def kv(sec):
        return dict(line.split("=", 1) for line in sections[sec])

    def matrix(sec):
        rows = sections[sec]
        m, n = (int(t) for t in rows[0].split())
        a = np.array([[float(t) for t in r.split()] for r in rows[1:]], dtype=float)
        return a.reshape(m, n)

    try:
        meta, cv = kv("fit"), kv("cv_errors")
        lams = [float(x) for x in cv["lambdas"].split(",")]
        errs = [float(x) for x in cv["mean_holdout_nll"].split(",")]
        iters = meta["iterations"]
        return FitReport(
            m_hat=matrix("m_hat"),
            factors=FactorPair(matrix("u"), matrix("v")),
            lambda_selected=float(meta["lambda_selected"]),
            cv_errors=list(zip(lams, errs)),
            iterations=[int(x) for x in iters.split(",")] if iters else [],
            certificate=Certificate(meta["certificate"]),
            final_grad_norm=float(meta["final_grad_norm"]),
            stalled=bool(int(meta["stalled"])),
        )
    except (KeyError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed fit report: {exc}") from exc


def read_fit_report(path) -> FitReport:
    with open(os.fspath(path)) as fh:
        return parse_fit_report(fh.read())
