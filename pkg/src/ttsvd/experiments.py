"""Experiment harness: config parsing, matrix construction, benchmark runs.

A run configuration is a small YAML document (``schema_version: 1``) naming
one experiment family, a solver list, an N grid, and parameters.  Results
are written as two CSVs with a stable column order plus JSON reports:

* ``results.csv``   - experiment,solver,N,K,param,rep,seed,sweeps,
                      relative_residual,spectrum_rel_error,max_v_rank,
                      termination
* ``timings.csv``   - experiment,solver,N,K,param,rep,seed,wall_time_s,
                      construction_s
* ``metadata.json`` - timestamps and environment info (kept out of the
                      CSVs so identical configs produce identical CSVs)
* ``report.json``   - aggregate statistics and linear time-vs-N fits
* ``plotdata/*.tsv`` - one plot-ready table per (experiment, solver)

Repetition r of any cell uses seed ``base_seed + r`` for both the matrix
generator (where randomness applies) and the solver, so runs are
deterministic end to end.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import solver as solver_mod
from .generators import (
    full_toeplitz_tt,
    hilbert_submatrix_tt,
    prescribed_svd_matrix,
    random_vector_tt,
    tridiagonal_tt,
)
from .serialization import load_tt
from .tt import MatrixTT, tt_svd_compress, _rf


class ConfigError(ValueError):
    """Anything wrong with a run configuration (including generator budgets)."""


EXPERIMENTS = ("prescribed_svd", "hilbert", "tridiagonal", "toeplitz", "custom")
SOLVERS = {
    "als_svd": solver_mod.als_svd,
    "mals_svd": solver_mod.mals_svd,
    "als_eig": solver_mod.als_eig_baseline,
    "mals_eig": solver_mod.mals_eig_baseline,
}

RESULT_COLUMNS = ("experiment", "solver", "N", "K", "param", "rep", "seed",
                  "sweeps", "relative_residual", "spectrum_rel_error",
                  "max_v_rank", "termination")
TIMING_COLUMNS = ("experiment", "solver", "N", "K", "param", "rep", "seed",
                  "wall_time_s", "construction_s")


@dataclass
class RunConfig:
    experiment: str
    solvers: list
    n_values: list
    k: int = 10
    epsilon: float = 1e-8
    reps: int = 5
    seed: int = 0
    params: dict = field(default_factory=dict)
    solver_options: dict = field(default_factory=dict)
    out_dir: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.solvers:
            raise ConfigError("solver list must not be empty")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ConfigError(f"unknown solver {s!r}")
        if self.reps < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.experiment != "custom":
            if not self.n_values:
                raise ConfigError("n_values must not be empty")
            for n in self.n_values:
                if not isinstance(n, int) or n < 2:
                    raise ConfigError("every N must be an integer >= 2")
        if self.experiment == "custom" and "path" not in self.params:
            raise ConfigError("custom experiment needs params.path")

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "experiment": self.experiment,
            "solvers": list(self.solvers),
            "n_values": list(self.n_values),
            "k": self.k,
            "epsilon": self.epsilon,
            "reps": self.reps,
            "seed": self.seed,
            "params": dict(self.params),
            "solver_options": dict(self.solver_options),
            "out_dir": self.out_dir,
        }


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, "r") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    version = doc.pop("schema_version", None)
    if version != 1:
        raise ConfigError(f"unsupported schema_version {version!r} (expected 1)")
    known = {"experiment", "solvers", "n_values", "k", "epsilon", "reps",
             "seed", "params", "solver_options", "out_dir"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class ResultRow:
    experiment: str
    solver: str
    n: int
    k: int
    param: str
    rep: str
    seed: str
    sweeps: str
    relative_residual: str
    spectrum_rel_error: str
    max_v_rank: str
    termination: str

    def as_list(self) -> list:
        return [self.experiment, self.solver, str(self.n), str(self.k),
                self.param, self.rep, self.seed, self.sweeps,
                self.relative_residual, self.spectrum_rel_error,
                self.max_v_rank, self.termination]


@dataclass
class TimingRow:
    experiment: str
    solver: str
    n: int
    k: int
    param: str
    rep: str
    seed: str
    wall_time_s: float
    construction_s: float

    def as_list(self) -> list:
        return [self.experiment, self.solver, str(self.n), str(self.k),
                self.param, self.rep, self.seed, repr(self.wall_time_s),
                repr(self.construction_s)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _param_grid(cfg: RunConfig):
    """Experiment-specific parameter values; None means 'no parameter'."""
    p = cfg.params
    if cfg.experiment == "prescribed_svd":
        betas = p.get("beta", [0.3, 0.5])
        if not isinstance(betas, (list, tuple)):
            betas = [betas]
        for b in betas:
            if not 0 < float(b) < 1:
                raise ConfigError("beta must lie strictly between 0 and 1")
        return [float(b) for b in betas]
    if cfg.experiment == "hilbert":
        deltas = p.get("delta", [1e-8])
        if not isinstance(deltas, (list, tuple)):
            deltas = [deltas]
        return [float(d) for d in deltas]
    if cfg.experiment == "toeplitz":
        caps = p.get("max_rank", [5, 10, 15, None])
        if not isinstance(caps, (list, tuple)):
            caps = [caps]
        return [None if c is None else int(c) for c in caps]
    return [None]


def _build_matrix(cfg: RunConfig, n: int, param, rep_seed: int):
    """Return (MatrixTT, ground-truth top-K spectrum or None)."""
    p = cfg.params
    if cfg.experiment == "prescribed_svd":
        k0 = int(p.get("k0", 25))
        rank = int(p.get("rank", 5))
        if cfg.k > k0:
            raise ConfigError("k exceeds the prescribed spectrum length k0")
        a, _, _, spectrum = prescribed_svd_matrix(n, param, k0=k0, rank=rank,
                                                  seed=rep_seed)
        return a, spectrum[:cfg.k]
    if cfg.experiment == "hilbert":
        a = hilbert_submatrix_tt(n, param)
        return a, None
    if cfg.experiment == "tridiagonal":
        # second-difference matrix: eigenvalues 2 - 2 cos(j*pi/(M+1)) are a
        # closed-form ground truth at any N
        m = 2 ** n
        ones = tt_svd_compress(_rf(np.ones(m), (2,) * n), 0.0)
        neg = tt_svd_compress(_rf(-np.ones(m), (2,) * n), 0.0)
        two = tt_svd_compress(_rf(2.0 * np.ones(m), (2,) * n), 0.0)
        a = tridiagonal_tt(neg, two, neg)
        j = np.arange(m, m - cfg.k, -1)
        truth = 2.0 - 2.0 * np.cos(j * math.pi / (m + 1))
        return a, truth
    if cfg.experiment == "toeplitz":
        rank = int(p.get("rank", 3))
        x = random_vector_tt([2] * (n + 1), rank, rep_seed)
        return full_toeplitz_tt(x), None
    if cfg.experiment == "custom":
        path = p["path"]
        try:
            a = load_tt(path)
        except OSError as exc:
            raise ConfigError(f"cannot read TT container: {exc}") from exc
        if not isinstance(a, MatrixTT):
            raise ConfigError("custom experiment needs a serialized MatrixTT")
        return a, None
    raise ConfigError(f"unknown experiment {cfg.experiment!r}")


def _solver_config(cfg: RunConfig, rep_seed: int, cap) -> solver_mod.SolverConfig:
    opts = dict(cfg.solver_options)
    opts.setdefault("max_full_sweeps", 20)
    if cap is not None:
        opts["max_rank"] = int(cap)
    try:
        return solver_mod.SolverConfig(k=cfg.k, epsilon=cfg.epsilon,
                                       seed=rep_seed, **opts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver options: {exc}") from exc


def run_experiment(cfg: RunConfig):
    """Run the full grid; returns (result_rows, timing_rows).

    Per-repetition rows come first within each cell, followed by mean and
    population-std aggregate rows (rep = "mean" / "std", empty seed).
    """
    grid = _param_grid(cfg)
    n_values = list(cfg.n_values) if cfg.experiment != "custom" else [None]
    results, timings = [], []
    for n in n_values:
        for param in grid:
            for solver_name in cfg.solvers:
                cell_res, cell_tim = _run_cell(cfg, n, param, solver_name)
                results.extend(cell_res)
                timings.extend(cell_tim)
    return results, timings


def _run_cell(cfg: RunConfig, n, param, solver_name: str):
    cap = param if cfg.experiment == "toeplitz" else None
    param_str = _fmt("none" if cap is None else cap) if cfg.experiment == "toeplitz" \
        else _fmt(param)
    run = SOLVERS[solver_name]
    rows, times = [], []
    numeric = []
    for rep in range(cfg.reps):
        rep_seed = cfg.seed + rep
        t0 = time.perf_counter()
        try:
            a, truth = _build_matrix(cfg, n, param, rep_seed)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"generator rejected N={n}: {exc}") from exc
        construction = time.perf_counter() - t0
        scfg = _solver_config(cfg, rep_seed, cap)
        try:
            sigma, u, v, report = run(a, scfg)
        except ValueError as exc:
            raise ConfigError(f"solver {solver_name} rejected the problem: "
                              f"{exc}") from exc
        rdelta = scfg.residual_delta if scfg.residual_delta is not None \
            else scfg.epsilon / 10
        resid = solver_mod.residual(a, u, v, sigma, rdelta)
        if truth is not None:
            spec_err = float(np.linalg.norm(sigma - truth)
                             / np.linalg.norm(truth))
        else:
            spec_err = None
        n_out = a.n_cores if n is None else n
        max_v = max(v.ranks)
        rows.append(ResultRow(
            cfg.experiment, solver_name, n_out, cfg.k, param_str, str(rep),
            str(rep_seed), str(report.sweeps_used), repr(float(resid)),
            "" if spec_err is None else repr(spec_err), str(max_v),
            report.termination))
        times.append(TimingRow(
            cfg.experiment, solver_name, n_out, cfg.k, param_str, str(rep),
            str(rep_seed), float(report.wall_time_s), float(construction)))
        numeric.append((report.sweeps_used, float(resid), spec_err, max_v,
                        report.termination))
    n_out = rows[0].n
    sweeps = np.array([x[0] for x in numeric], dtype=float)
    resids = np.array([x[1] for x in numeric])
    specs = [x[2] for x in numeric]
    vranks = np.array([x[3] for x in numeric], dtype=float)
    terms = [x[4] for x in numeric]
    agg_term = "converged" if all(t == "converged" for t in terms) else "mixed"
    spec_mean = "" if specs[0] is None else repr(float(np.mean(specs)))
    spec_std = "" if specs[0] is None else repr(float(np.std(specs)))
    rows.append(ResultRow(
        cfg.experiment, solver_name, n_out, cfg.k, param_str, "mean", "",
        repr(float(sweeps.mean())), repr(float(resids.mean())), spec_mean,
        repr(float(vranks.mean())), agg_term))
    rows.append(ResultRow(
        cfg.experiment, solver_name, n_out, cfg.k, param_str, "std", "",
        repr(float(sweeps.std())), repr(float(resids.std())), spec_std,
        repr(float(vranks.std())), ""))
    return rows, times


def toeplitz_capped_rank_experiment(cfg: RunConfig):
    """Convenience wrapper pinning the experiment family to 'toeplitz'."""
    if cfg.experiment != "toeplitz":
        raise ConfigError("this helper runs the toeplitz experiment only")
    return run_experiment(cfg)


# ---------------------------------------------------------------------------
# output files


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(r.as_list())
    return buf.getvalue()


def parse_results_csv(text: str):
    """Read results.csv text back into ResultRow objects (header checked)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != RESULT_COLUMNS:
        raise ConfigError(f"unexpected results.csv columns: {header}")
    out = []
    for rec in reader:
        out.append(ResultRow(rec[0], rec[1], int(rec[2]), int(rec[3]), rec[4],
                             rec[5], rec[6], rec[7], rec[8], rec[9], rec[10],
                             rec[11]))
    return out


def parse_timings_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != TIMING_COLUMNS:
        raise ConfigError(f"unexpected timings.csv columns: {header}")
    out = []
    for rec in reader:
        out.append(TimingRow(rec[0], rec[1], int(rec[2]), int(rec[3]), rec[4],
                             rec[5], rec[6], float(rec[7]), float(rec[8])))
    return out


def scaling_report(timing_rows) -> dict:
    """Least-squares fit wall_time = a*N + b per solver over mean rep times.

    Solvers with fewer than 3 distinct N values are skipped.  A constant
    time profile (zero variance) fits perfectly, so R^2 reports 1.0 there.
    """
    per = {}
    for row in timing_rows:
        if row.rep in ("mean", "std"):
            continue
        per.setdefault(row.solver, {}).setdefault(row.n, []).append(
            row.wall_time_s)
    fits = {}
    for solver_name, by_n in per.items():
        if len(by_n) < 3:
            continue
        ns = np.array(sorted(by_n), dtype=float)
        means = np.array([float(np.mean(by_n[int(n)])) for n in ns])
        a, b = np.polyfit(ns, means, 1)
        pred = a * ns + b
        ss_res = float(np.sum((means - pred) ** 2))
        ss_tot = float(np.sum((means - means.mean()) ** 2))
        if ss_tot == 0.0:
            r2 = 1.0 if ss_res <= 1e-30 else 0.0
        else:
            r2 = 1.0 - ss_res / ss_tot
        fits[solver_name] = {
            "slope": float(a),
            "intercept": float(b),
            "r_squared": float(r2),
            "n_values": [int(x) for x in ns],
            "mean_times": [float(x) for x in means],
        }
    return fits


def build_report(result_rows, timing_rows, config_dict=None) -> dict:
    terminations = {}
    for row in result_rows:
        if row.rep in ("mean", "std"):
            continue
        terminations[row.termination] = terminations.get(row.termination, 0) + 1
    aggregates = []
    for row in result_rows:
        if row.rep != "mean":
            continue
        aggregates.append({
            "experiment": row.experiment,
            "solver": row.solver,
            "N": row.n,
            "K": row.k,
            "param": row.param,
            "mean_sweeps": float(row.sweeps),
            "mean_relative_residual": float(row.relative_residual),
            "mean_spectrum_rel_error": (None if row.spectrum_rel_error == ""
                                        else float(row.spectrum_rel_error)),
            "mean_max_v_rank": float(row.max_v_rank),
            "termination": row.termination,
        })
    report = {
        "aggregates": aggregates,
        "termination_counts": terminations,
        "scaling_fits": scaling_report(timing_rows),
    }
    if config_dict is not None:
        report["config"] = config_dict
    return report


def write_plotdata(out_dir: str, result_rows, timing_rows) -> list:
    """One TSV per (experiment, solver) with mean quantities by (N, param)."""
    plot_dir = os.path.join(out_dir, "plotdata")
    os.makedirs(plot_dir, exist_ok=True)
    times = {}
    for t in timing_rows:
        if t.rep not in ("mean", "std"):
            times.setdefault((t.experiment, t.solver, t.n, t.param),
                             []).append(t.wall_time_s)
    groups = {}
    for row in result_rows:
        if row.rep != "mean":
            continue
        groups.setdefault((row.experiment, row.solver), []).append(row)
    written = []
    for (experiment, solver_name), rows in sorted(groups.items()):
        path = os.path.join(plot_dir, f"{experiment}_{solver_name}.tsv")
        with open(path, "w") as fh:
            fh.write("N\tparam\tmean_relative_residual\t"
                     "mean_spectrum_rel_error\tmean_sweeps\t"
                     "mean_max_v_rank\tmean_wall_time_s\n")
            for row in sorted(rows, key=lambda r: (r.n, r.param)):
                tkey = (experiment, solver_name, row.n, row.param)
                wall = times.get(tkey)
                wall_s = repr(float(np.mean(wall))) if wall else ""
                fh.write("\t".join([
                    str(row.n), row.param, row.relative_residual,
                    row.spectrum_rel_error, row.sweeps, row.max_v_rank,
                    wall_s]) + "\n")
        written.append(path)
    return written


def write_results(out_dir: str, result_rows, timing_rows, config_dict=None,
                  extra_metadata=None) -> dict:
    """Write all output files; returns the paths that were written."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    paths["results"] = os.path.join(out_dir, "results.csv")
    with open(paths["results"], "w") as fh:
        fh.write(rows_to_csv(result_rows, RESULT_COLUMNS))
    paths["timings"] = os.path.join(out_dir, "timings.csv")
    with open(paths["timings"], "w") as fh:
        fh.write(rows_to_csv(timing_rows, TIMING_COLUMNS))
    meta = {
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "platform": platform.platform(),
        "numpy_version": np.__version__,
    }
    if extra_metadata:
        meta.update(extra_metadata)
    paths["metadata"] = os.path.join(out_dir, "metadata.json")
    with open(paths["metadata"], "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    report = build_report(result_rows, timing_rows, config_dict)
    paths["report"] = os.path.join(out_dir, "report.json")
    with open(paths["report"], "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["plotdata"] = write_plotdata(out_dir, result_rows, timing_rows)
    return paths
