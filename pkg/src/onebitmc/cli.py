"""Command-line front end.

Subcommands::

    onebitmc synth      synthetic sweeps (fig2 / fig3 / fig4 / grid modes)
    onebitmc movielens  MovieLens 100k sign-prediction experiment
    onebitmc bound      tabulate theoretical bounds and rates
    onebitmc spectral   spectral report of a mask file or generated mask
    onebitmc fit        fit an observation file and write a fit report

Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bounds import L_ALPHA_NOTE, RATE_ONLY, BoundInputs, comparison_rates, corollary_rate, theorem_bound
from .errors import (
    BoundUndefinedError,
    CVDegenerateError,
    InfeasiblePointError,
    InvalidArgumentError,
    LineSearchStall,
    ParseError,
)
from .links import LinkModel, link_constants
from .metrics import CSV_COLUMNS, relative_mse, sign_accuracy, write_rows
from .movielens import MOVIELENS_URL, binarize, load_movielens, split, subsample
from .observe import BinaryObservations, gen_ground_truth, read_observations, sample_observations
from .sampling import (
    Mask,
    gen_bernoulli,
    gen_block_model,
    gen_regular,
    read_mask,
    spectral_report,
)
from .solver import SolverConfig, fit, write_fit_report

log = logging.getLogger("onebitmc")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

AGG_COLUMNS = (
    "m", "n", "r", "p", "q", "count",
    "mse_mean", "mse_stderr", "acc_mean", "acc_stderr", "reference",
)
BOUND_COLUMNS = (
    "m", "n", "r", "p", "alpha", "link", "sigma", "gamma_alpha", "l_alpha",
    "sigma1", "sigma2", "omega_size", "spectral_form", "omega_form",
    "corollary_rate", "prior_rate", "ours_rate", "error",
)

SYNTH_MODES = {
    # mode: (sampling, n-grid, p-grid)
    "fig2": ("bernoulli", "100", "0.2,0.4,0.6,0.8"),
    "fig3": ("bernoulli", "50,100,200", "0.4"),
    "fig4": ("block", "100", "0.35,0.40,0.45,0.50,0.55,0.60,0.65"),
    "grid": ("bernoulli", "100", "0.4"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def _add_common(p, *, link="probit", sigma="0.18"):
    p.add_argument("--link", choices=("logit", "probit"), default=link)
    p.add_argument("--sigma", default=sigma, help="noise scale (comma list allowed for movielens)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default=None, help="output path or prefix")
    p.add_argument("--config", default=None, help="flat key=value file; flags override it")


def _add_solver(p, *, lambda0=None, halvings=12):
    p.add_argument("--lambda0", type=float, default=lambda0)
    p.add_argument("--halvings", type=int, default=halvings)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--k", type=int, default=None, help="factor width (default r+1)")


def build_parser():
    parser = _Parser(prog="onebitmc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"onebitmc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("synth", help="synthetic experiments")
    s.add_argument("--mode", choices=sorted(SYNTH_MODES), default="fig2")
    s.add_argument("--m", default=None, help="rows (default: n)")
    s.add_argument("--n", default=None, help="comma list of sizes")
    s.add_argument("--r", default="5", help="comma list of ranks")
    s.add_argument("--p", type=float, default=None, help="single sampling probability")
    s.add_argument("--p-grid", default=None)
    s.add_argument("--q", type=float, default=None, help="fixed off-diagonal block probability")
    s.add_argument("--pq-sum", type=float, default=0.7, help="p + q when --q is not given")
    s.add_argument("--repeats", type=int, default=20)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--reproducible", action="store_true")
    _add_common(s)
    _add_solver(s, lambda0=16.0, halvings=10)

    ml = sub.add_parser("movielens", help="MovieLens 100k experiment")
    ml.add_argument("--data", default=os.environ.get("ONEBITMC_MOVIELENS", "u.data"))
    ml.add_argument("--fractions", default="0.95,0.10,0.05")
    ml.add_argument("--repeats", type=int, default=20)
    ml.add_argument("--r", default="1,2,3,5,10", help="rank grid")
    ml.add_argument("--subsample", type=int, default=None)
    ml.add_argument("--smoke", action="store_true",
                    help="5000-rating subsample, 2 realizations, reduced grid and budget")
    ml.add_argument("--threads", type=int, default=1)
    ml.add_argument("--reproducible", action="store_true")
    _add_common(ml, link="logit", sigma="0.1,0.25,0.5,1,2")
    _add_solver(ml, lambda0=None, halvings=10)

    b = sub.add_parser("bound", help="tabulate bounds")
    b.add_argument("--m", default=None)
    b.add_argument("--n", default="100,200,400,800")
    b.add_argument("--r", default="5")
    b.add_argument("--p-grid", default="0.2,0.4,0.6,0.8,1.0")
    b.add_argument("--c-spectral", type=float, default=3.0)
    b.add_argument("--spectral", choices=("ideal", "bernoulli", "regular"), default="ideal",
                   help="ideal: sigma1=|Omega|/sqrt(mn), sigma2=C sqrt(d); otherwise a generated mask")
    _add_common(b)

    sp = sub.add_parser("spectral", help="spectral report of a sampling mask")
    sp.add_argument("--mask", default=None, help="mask file")
    sp.add_argument("--gen", choices=("bernoulli", "regular", "block"), default="bernoulli")
    sp.add_argument("--m", type=int, default=200)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--p", type=float, default=0.4)
    sp.add_argument("--q", type=float, default=0.1)
    sp.add_argument("--d", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--config", default=None)

    f = sub.add_parser("fit", help="fit an observation file")
    f.add_argument("--obs", required=True, help="observation file")
    f.add_argument("--r", type=int, required=True)
    _add_common(f)
    _add_solver(f)
    return parser, sub.choices


# -- config file --------------------------------------------------------------

def read_config(path):
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"expected key=value, got {line!r}", lineno)
            key, value = line.split("=", 1)
            cfg[key.strip().replace("_", "-")] = value.strip()
    return cfg


def _config_argv(subparser, cfg):
    argv = []
    for key, value in cfg.items():
        action = next((a for a in subparser._actions if f"--{key}" in a.option_strings), None)
        if action is None:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                argv.append(f"--{key}")
        else:
            argv += [f"--{key}", value]
    return argv


def parse_args(argv):
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required (synth, movielens, bound, spectral, fit)")
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        cmd_at = argv.index(args.command)
        extra = _config_argv(subparsers[args.command], cfg)
        argv = argv[: cmd_at + 1] + extra + argv[cmd_at + 1:]
        args = parser.parse_args(argv)
    return args


def _header(command, args):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "verbose", "config")}
    return [
        f"onebitmc {__version__} command={command}",
        "params: " + " ".join(f"{k}={v}" for k, v in params.items()),
        f"seed={args.seed}",
    ]


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    return open(path, "w", newline="\n"), True


def _map(fn, jobs, threads):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


# -- synth --------------------------------------------------------------------

def _seed_int(ss):
    return int(ss.generate_state(1)[0])


def run_synth_job(job):
    """One Monte Carlo repeat at one grid point; returns a CSV row dict."""
    m, n, r, p, q = job["m"], job["n"], job["r"], job["p"], job["q"]
    link = LinkModel(job["link"], job["sigma"])
    # same repeat index -> same truth and mask stream at every p
    ss_mask, ss_truth, ss_obs, ss_fit = np.random.SeedSequence(
        job["seed"], spawn_key=(job["repeat"],)
    ).spawn(4)
    start = time.perf_counter()
    truth = gen_ground_truth(m, n, r, job["alpha"], ss_truth)
    if job["sampling"] == "block":
        mask = gen_block_model(m, n, p, q, ss_mask)
    else:
        mask = gen_bernoulli(m, n, p, ss_mask)
    obs = sample_observations(truth, mask, link, ss_obs)
    cfg = SolverConfig(
        rank_r=r,
        k=job["k"],
        alpha=job["alpha"],
        lambda0=job["lambda0"],
        lambda_halvings=job["halvings"],
        max_iters_per_lambda=job["max_iters"],
        cv_folds=job["folds"],
        seed=_seed_int(ss_fit),
    )
    report = fit(obs, link, cfg)
    signs = np.sign(truth.m_star)
    full = BinaryObservations(Mask.full(m, n), np.where(signs.ravel() >= 0, 1, -1))
    wall = math.nan if job["reproducible"] else time.perf_counter() - start
    return {
        "run_id": job["run_id"],
        "m": m, "n": n, "r": r, "p": p,
        "sigma": job["sigma"], "link": job["link"],
        "lambda_selected": report.lambda_selected,
        "relative_mse": relative_mse(report.m_hat, truth.m_star),
        "sign_accuracy": sign_accuracy(report.m_hat, full),
        "wall_time_s": wall,
        "_q": q,
    }


def synth_jobs(args):
    sampling, n_default, p_default = SYNTH_MODES[args.mode]
    n_grid = _ints(args.n or n_default)
    r_grid = _ints(args.r)
    if args.p_grid:
        p_grid = _floats(args.p_grid)
    elif args.p is not None:
        p_grid = [args.p]
    else:
        p_grid = _floats(p_default)
    sigma = float(args.sigma)
    jobs = []
    for n in n_grid:
        m = int(args.m) if args.m else n
        for r in r_grid:
            if r > min(m, n):
                log.warning("skipping infeasible grid point n=%d r=%d", n, r)
                continue
            for p in p_grid:
                q = None
                if sampling == "block":
                    q = args.q if args.q is not None else round(args.pq_sum - p, 12)
                    if not (0 <= q <= 1) or m % 2 or n % 2:
                        log.warning("skipping infeasible block grid point n=%d p=%g q=%s", n, p, q)
                        continue
                elif not 0 < p <= 1:
                    log.warning("skipping infeasible grid point p=%g", p)
                    continue
                for rep in range(args.repeats):
                    tag = f"{args.mode}-m{m}-n{n}-r{r}-p{p:g}" + (f"-q{q:g}" if q is not None else "")
                    jobs.append(dict(
                        run_id=f"{tag}-rep{rep}", m=m, n=n, r=r, p=p, q=q,
                        sampling=sampling, link=args.link, sigma=sigma, alpha=args.alpha,
                        lambda0=args.lambda0, halvings=args.halvings, folds=args.folds,
                        max_iters=args.max_iters, k=args.k, seed=args.seed, repeat=rep,
                        reproducible=args.reproducible,
                    ))
    return jobs


def aggregate(rows, reference=None):
    groups = {}
    for row in rows:
        key = (row["m"], row["n"], row["r"], row["p"], row.get("_q"))
        groups.setdefault(key, []).append(row)
    out = []
    for (m, n, r, p, q), grp in groups.items():
        mse = np.array([g["relative_mse"] for g in grp], dtype=float)
        acc = np.array([g["sign_accuracy"] for g in grp], dtype=float)
        k = len(grp)
        se = (lambda a: float(a.std(ddof=1) / math.sqrt(k)) if k > 1 else math.nan)
        out.append({
            "m": m, "n": n, "r": r, "p": p, "q": "" if q is None else q, "count": k,
            "mse_mean": float(np.mean(mse)), "mse_stderr": se(mse),
            "acc_mean": float(np.mean(acc)), "acc_stderr": se(acc),
            "reference": reference(n) if reference else "",
        })
    return out


def _gnuplot_script(agg_path, mode):
    xcol, xlabel = (2, "n") if mode == "fig3" else (4, "p")
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xlabel}'",
        "set ylabel 'relative MSE'",
    ]
    if mode == "fig3":
        lines.append("set logscale xy")
        lines.append(
            f"plot '{agg_path}' using {xcol}:7:8 with yerrorlines title 'relative MSE', "
            f"'' using {xcol}:11 with lines title '1/n'"
        )
    else:
        lines.append(f"plot '{agg_path}' using {xcol}:7:8 with yerrorlines title 'relative MSE'")
    return "\n".join(lines) + "\n"


def cmd_synth(args):
    jobs = synth_jobs(args)
    rows = _map(run_synth_job, jobs, args.threads)
    rows.sort(key=lambda r: r["run_id"])
    reference = (lambda n: 1.0 / n) if args.mode == "fig3" else None
    agg = aggregate(rows, reference)
    header = _header("synth", args)
    prefix = args.out or f"synth_{args.mode}"
    with open(prefix + ".csv", "w", newline="\n") as fh:
        write_rows(fh, rows, CSV_COLUMNS, header)
    with open(prefix + "_agg.csv", "w", newline="\n") as fh:
        write_rows(fh, agg, AGG_COLUMNS, header)
    with open(prefix + ".gp", "w", newline="\n") as fh:
        fh.write(_gnuplot_script(prefix + "_agg.csv", args.mode))
    for row in agg:
        print(f"n={row['n']} r={row['r']} p={row['p']:g} q={row['q']} "
              f"mse={row['mse_mean']:.4f}±{row['mse_stderr']:.4f} acc={row['acc_mean']:.4f}")
    return EXIT_OK


# -- movielens -----------------------------------------------------------------

SMOKE_SUBSAMPLE = 5000
SMOKE_REPEATS = 2
# default lambda0 per training entry; the barrier covers all m*n entries, so
# the weight is scaled by the training density to keep the two terms balanced
LAMBDA0_PER_ENTRY = 16.0


def run_movielens_job(job):
    obs, frac, rep = job["obs"], job["fraction"], job["repeat"]
    start = time.perf_counter()
    train, test = split(obs, frac, seed=np.random.SeedSequence(job["seed"], spawn_key=(rep, 0)))
    m, n = obs.shape
    lambda0 = job["lambda0"] or LAMBDA0_PER_ENTRY * len(train) / (m * n)
    best = None
    for sigma in job["sigmas"]:
        link = LinkModel.logit(sigma)
        for r in job["ranks"]:
            if r >= min(obs.shape):
                continue
            cfg = SolverConfig(
                rank_r=r, k=job["k"], alpha=job["alpha"], lambda0=lambda0,
                lambda_halvings=job["halvings"], max_iters_per_lambda=job["max_iters"],
                cv_folds=job["folds"], seed=_seed_int(np.random.SeedSequence(job["seed"], spawn_key=(rep, 1))),
            )
            report = fit(train, link, cfg)
            cv_err = min(e for _, e in report.cv_errors)
            if best is None or cv_err < best[0]:
                best = (cv_err, sigma, r, report)
    _, sigma, r, report = best
    wall = math.nan if job["reproducible"] else time.perf_counter() - start
    return {
        "run_id": f"movielens-train{frac:g}-rep{rep}",
        "m": m, "n": n, "r": r, "p": frac, "sigma": sigma, "link": "logit",
        "lambda_selected": report.lambda_selected, "relative_mse": math.nan,
        "sign_accuracy": sign_accuracy(report.m_hat, test), "wall_time_s": wall,
    }


def cmd_movielens(args):
    if not os.path.exists(args.data):
        print(
            f"error: MovieLens ratings file {args.data!r} not found.\n"
            f"Download {MOVIELENS_URL}, unzip it, and pass --data ml-100k/u.data "
            f"(or set ONEBITMC_MOVIELENS).",
            file=sys.stderr,
        )
        return EXIT_DATA
    table = load_movielens(args.data)
    size = args.subsample
    repeats, sigmas, ranks = args.repeats, _floats(args.sigma), _ints(args.r)
    halvings, max_iters, folds = args.halvings, args.max_iters, args.folds
    if args.smoke:
        size = size or SMOKE_SUBSAMPLE
        repeats = min(repeats, SMOKE_REPEATS)
        sigmas, ranks = sigmas[len(sigmas) // 2: len(sigmas) // 2 + 1], ranks[:1]
        halvings, max_iters, folds = min(halvings, 3), min(max_iters, 40), min(folds, 2)
    if size:
        table = subsample(table, size, seed=args.seed)
    elif (table.n_users, table.n_items, len(table)) != (943, 1682, 100_000):
        log.warning("ratings file has %d users, %d items, %d ratings; the 100k release has 943, 1682, 100000",
                    table.n_users, table.n_items, len(table))
    obs = binarize(table)
    jobs = [
        dict(obs=obs, fraction=frac, repeat=rep, seed=args.seed, sigmas=sigmas, ranks=ranks,
             k=args.k, alpha=args.alpha, lambda0=args.lambda0, halvings=halvings,
             max_iters=max_iters, folds=folds, reproducible=args.reproducible)
        for frac in _floats(args.fractions)
        for rep in range(repeats)
    ]
    rows = _map(run_movielens_job, jobs, args.threads)
    header = _header("movielens", args)
    header.insert(2, f"effective: subsample={size} repeats={repeats} sigma={','.join(map(str, sigmas))} "
                     f"r={','.join(map(str, ranks))} halvings={halvings} max_iters={max_iters} folds={folds} "
                     f"lambda0={args.lambda0 if args.lambda0 else f'{LAMBDA0_PER_ENTRY:g}*density'}")
    out, close = _open_out(args.out or "movielens.csv")
    try:
        write_rows(out, rows, CSV_COLUMNS, header)
    finally:
        if close:
            out.close()
    for frac in _floats(args.fractions):
        acc = np.array([r["sign_accuracy"] for r in rows if r["p"] == frac])
        print(f"train={frac:g}: accuracy {100 * acc.mean():.1f} ± {100 * acc.std():.1f} % over {acc.size} splits")
    return EXIT_OK


# -- bound ---------------------------------------------------------------------

def bound_rows(args):
    rows = []
    link = LinkModel(args.link, float(args.sigma))
    consts = link_constants(link, args.alpha)
    for n in _ints(args.n):
        m = int(args.m) if args.m else n
        for r in _ints(args.r):
            for p in _floats(args.p_grid):
                row = {"m": max(m, n), "n": min(m, n), "r": r, "p": p, "alpha": args.alpha,
                       "link": args.link, "sigma": link.sigma,
                       "gamma_alpha": consts.gamma_alpha, "l_alpha": consts.l_alpha, "error": ""}
                if args.spectral == "ideal":
                    omega = round(p * m * n)
                    d = omega / m
                    s1 = d * math.sqrt(m / n)
                    s2 = min(args.c_spectral * math.sqrt(d), s1)
                else:
                    if args.spectral == "regular":
                        mask = gen_regular(m, n, max(1, round(p * n)), seed=args.seed)
                    else:
                        mask = gen_bernoulli(m, n, p, seed=args.seed)
                    rep = spectral_report(mask)
                    omega, s1, s2 = mask.size, rep.sigma1, rep.sigma2
                row.update(sigma1=s1, sigma2=s2, omega_size=omega)
                prior, ours = comparison_rates(n, r, p) if m == n else (math.nan, math.nan)
                row.update(prior_rate=prior, ours_rate=ours)
                try:
                    b = BoundInputs(m, n, r, args.alpha, consts, s1, s2, omega, args.c_spectral)
                    spec_form, omega_form = theorem_bound(b)
                    row.update(spectral_form=spec_form, omega_form=omega_form,
                               corollary_rate=corollary_rate(b, p, max(m, n) / min(m, n)))
                except BoundUndefinedError as exc:
                    row.update(spectral_form=math.nan, omega_form=math.nan,
                               corollary_rate=math.nan, error=f"bound-undefined: {exc}")
                rows.append(row)
    return rows


def cmd_bound(args):
    rows = bound_rows(args)
    header = _header("bound", args) + [f"corollary_rate, prior_rate, ours_rate: {RATE_ONLY}", L_ALPHA_NOTE]
    out, close = _open_out(args.out)
    try:
        write_rows(out, rows, BOUND_COLUMNS, header)
    finally:
        if close:
            out.close()
    return EXIT_OK


# -- spectral ------------------------------------------------------------------

A1_PASS = 1e-6
A1_WARN = 0.05
A2_WARN = 5.0


def spectral_lines(mask, source):
    rep = spectral_report(mask)
    lines = [
        f"source: {source}",
        f"m={mask.m} n={mask.n} |Omega|={mask.size} method={rep.method}",
        f"sigma1={rep.sigma1:.12g}",
        f"sigma2={rep.sigma2:.12g}",
        f"d_mean={rep.d_mean:.12g}",
        f"a1_residual={rep.a1_residual:.3e}",
        f"a2_ratio={rep.a2_ratio:.6g}",
    ]
    if rep.a1_residual <= A1_PASS:
        lines.append("(A1): PASS (residual ≤ 1e-6)")
    elif rep.a1_residual <= A1_WARN:
        lines.append(f"(A1): APPROX (residual={rep.a1_residual:.3e} ≤ {A1_WARN})")
    else:
        lines.append(f"(A1): WARN (residual={rep.a1_residual:.3e} > {A1_WARN})")
    if rep.a2_ratio <= A2_WARN:
        lines.append(f"(A2): PASS (sigma2/sqrt(d)={rep.a2_ratio:.4g} ≤ {A2_WARN})")
    else:
        lines.append(f"(A2): WARN (sigma2/sqrt(d)={rep.a2_ratio:.4g} > {A2_WARN})")
    return lines, rep


def cmd_spectral(args):
    if args.mask:
        try:
            mask = read_mask(args.mask)
        except OSError as exc:
            print(f"error: cannot read mask file: {exc}", file=sys.stderr)
            return EXIT_DATA
        source = args.mask
    elif args.gen == "regular":
        mask, source = gen_regular(args.m, args.n, args.d, args.seed), f"regular(d={args.d})"
    elif args.gen == "block":
        mask, source = gen_block_model(args.m, args.n, args.p, args.q, args.seed), f"block(p={args.p}, q={args.q})"
    else:
        mask, source = gen_bernoulli(args.m, args.n, args.p, args.seed), f"bernoulli(p={args.p})"
    lines, rep = spectral_lines(mask, source)
    print("\n".join(lines))
    if rep.a1_residual > A1_WARN or rep.a2_ratio > A2_WARN:
        log.warning("sampling graph departs from the spectral-gap assumptions")
    return EXIT_OK


# -- fit -----------------------------------------------------------------------

def cmd_fit(args):
    obs = read_observations(args.obs)
    link = LinkModel(args.link, float(args.sigma))
    cfg = SolverConfig(
        rank_r=args.r, k=args.k, alpha=args.alpha, lambda0=args.lambda0,
        lambda_halvings=args.halvings, max_iters_per_lambda=args.max_iters,
        cv_folds=args.folds, seed=args.seed,
    )
    report = fit(obs, link, cfg)
    write_fit_report(report, args.out or "fit_report.txt")
    print(f"lambda_selected={report.lambda_selected:g} certificate={report.certificate.value}")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "movielens": cmd_movielens,
    "bound": cmd_bound,
    "spectral": cmd_spectral,
    "fit": cmd_fit,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ParseError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InfeasiblePointError, LineSearchStall, CVDegenerateError, BoundUndefinedError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidArgumentError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
