"""Command line entry points: run a config, validate it, or render
figures from a finished run's artifacts."""

import dataclasses
import shutil

import click

from .errors import ConfigInvalid, NodalPeaksError
from .experiment import load_config, run_experiment, validate_config
from .plots import render_plots


@click.group()
def main():
    """Ring-peak experiments for coupled cubic Schrodinger systems."""


def _load(path):
    try:
        return load_config(path)
    except ConfigInvalid as exc:
        click.echo(f"config invalid: {exc}", err=True)
        raise SystemExit(1) from exc


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="TOML experiment config.")
@click.option("--out", "out_dir", default=None,
              help="Override the config's output directory.")
@click.option("--workers", default=1, show_default=True,
              help="Worker threads across eps points.")
@click.option("--resume", is_flag=True,
              help="Reuse converged checkpoints, continue partial ones.")
def run(config_path, out_dir, workers, resume):
    """Run the sweep defined by a config."""
    cfg = _load(config_path)
    if out_dir is not None:
        cfg = dataclasses.replace(cfg, out_dir=out_dir)
    try:
        summary = run_experiment(cfg, workers=workers, resume=resume)
    except ConfigInvalid as exc:
        click.echo(f"config invalid: {exc}", err=True)
        raise SystemExit(1) from exc
    shutil.copyfile(config_path, f"{cfg.out_dir}/config.toml")
    click.echo(cfg.out_dir)
    bad = [p for p in summary["points"]
           if p["solve_status"].startswith(("failed", "not_converged"))]
    for p in bad:
        click.echo(f"eps={p['eps']:g}: {p['solve_status']}", err=True)
    if bad:
        raise SystemExit(3)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="TOML experiment config.")
def validate(config_path):
    """Check a config against the regime hypotheses without running."""
    cfg = _load(config_path)
    diags = validate_config(cfg)
    for d in diags:
        click.echo(d)
    if any(d.startswith("error") for d in diags):
        raise SystemExit(1)
    if not diags:
        click.echo("ok")


@main.command("plot-data")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Config whose out_dir holds the artifacts.")
@click.option("--out", "out_dir", default=None,
              help="Artifact directory (overrides the config's).")
def plot_data(config_path, out_dir):
    """Render PNG figures from a run's artifacts."""
    if out_dir is None:
        if config_path is None:
            raise click.UsageError("need --config or --out")
        out_dir = _load(config_path).out_dir
    try:
        written = render_plots(out_dir)
    except NodalPeaksError as exc:
        click.echo(f"plot rendering failed: {exc}", err=True)
        raise SystemExit(1) from exc
    for path in written:
        click.echo(path)


if __name__ == "__main__":
    main()
