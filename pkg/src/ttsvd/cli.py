"""Command line interface.

Verbs:

* ``ttsvd run <config.yaml>``  - run an experiment grid and write results
* ``ttsvd verify``             - run the built-in oracle check battery
* ``ttsvd report <results.csv>`` - rebuild report.json and plotdata/ from CSVs

Exit codes: 0 success; 1 verification failure; 2 configuration error
(including generator budgets); 3 at least one repetition did not converge
in a run marked ``--strict``.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .experiments import (
    ConfigError,
    build_report,
    load_run_config,
    parse_results_csv,
    parse_timings_csv,
    run_experiment,
    write_plotdata,
    write_results,
)
from .verify import run_verification


@click.group()
def main():
    """Dominant singular triplets of huge structured matrices in TT format."""


@main.command(name="run")
@click.argument("config_path", type=click.Path())
@click.option("--seed", type=int, default=None, help="override the base seed")
@click.option("--out-dir", type=click.Path(), default=None,
              help="override the output directory")
@click.option("--reps", type=int, default=None,
              help="override the repetition count")
@click.option("--solvers", type=str, default=None,
              help="comma-separated solver subset")
@click.option("--max-n", type=int, default=None,
              help="drop N values above this bound")
@click.option("--strict", is_flag=True,
              help="exit 3 if any repetition fails to converge")
def run_cmd(config_path, seed, out_dir, reps, solvers, max_n, strict):
    """Run the experiment grid described by CONFIG_PATH."""
    try:
        cfg = load_run_config(config_path)
        if seed is not None:
            cfg.seed = seed
        if out_dir is not None:
            cfg.out_dir = out_dir
        if reps is not None:
            if reps < 1:
                raise ConfigError("repetitions must be >= 1")
            cfg.reps = reps
        if solvers is not None:
            wanted = [s.strip() for s in solvers.split(",") if s.strip()]
            if not wanted:
                raise ConfigError("empty --solvers list")
            unknown = [s for s in wanted if s not in cfg.solvers]
            extra = [s for s in unknown
                     if s not in ("als_svd", "mals_svd", "als_eig", "mals_eig")]
            if extra:
                raise ConfigError(f"unknown solvers: {extra}")
            cfg.solvers = wanted
        if max_n is not None:
            kept = [n for n in cfg.n_values if n <= max_n]
            if not kept and cfg.experiment != "custom":
                raise ConfigError(f"--max-n {max_n} removes every N value")
            cfg.n_values = kept
        # revalidate after overrides
        cfg.__post_init__()
        result_rows, timing_rows = run_experiment(cfg)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)
    paths = write_results(cfg.out_dir, result_rows, timing_rows,
                          config_dict=cfg.to_dict())
    rep_rows = [r for r in result_rows if r.rep not in ("mean", "std")]
    converged = sum(1 for r in rep_rows if r.termination == "converged")
    click.echo(f"wrote {paths['results']} ({len(rep_rows)} runs, "
               f"{converged} converged)")
    if strict and converged < len(rep_rows):
        click.echo("strict mode: at least one run did not converge", err=True)
        sys.exit(3)
    sys.exit(0)


@main.command(name="verify")
@click.option("--seed", type=int, default=0, help="base seed for the checks")
def verify_cmd(seed):
    """Run the built-in oracle and property checks; exit 1 on any failure."""
    failures = run_verification(seed=seed, echo=click.echo)
    if failures:
        click.echo(f"{failures} check(s) failed", err=True)
        sys.exit(1)
    click.echo("all checks passed")
    sys.exit(0)


@main.command(name="report")
@click.argument("rows_csv", type=click.Path())
@click.option("--out-dir", type=click.Path(), default=None,
              help="where to write report.json and plotdata/ "
                   "(default: alongside the CSV)")
def report_cmd(rows_csv, out_dir):
    """Rebuild report.json and plotdata/ from an existing results.csv.

    A timings.csv sitting next to the results file is picked up
    automatically for the scaling fits.
    """
    try:
        try:
            with open(rows_csv, "r") as fh:
                result_rows = parse_results_csv(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read {rows_csv}: {exc}") from exc
        timing_rows = []
        timings_path = os.path.join(os.path.dirname(os.path.abspath(rows_csv)),
                                    "timings.csv")
        if os.path.exists(timings_path):
            with open(timings_path, "r") as fh:
                timing_rows = parse_timings_csv(fh.read())
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)
    target = out_dir or os.path.dirname(os.path.abspath(rows_csv))
    os.makedirs(target, exist_ok=True)
    report = build_report(result_rows, timing_rows)
    report_path = os.path.join(target, "report.json")
    with open(report_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    plots = write_plotdata(target, result_rows, timing_rows)
    click.echo(f"wrote {report_path} and {len(plots)} plotdata file(s)")
    sys.exit(0)


if __name__ == "__main__":
    main()
