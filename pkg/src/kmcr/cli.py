"""``kmcr`` command-line interface.

Failures exit with status 1 and print exactly one line to stderr::

    error: <Category>: <message>
"""

from __future__ import annotations

import logging
import sys

import click

from . import io as kio
from .criteria import QuantizationConfig
from .exceptions import KMCRError
from .selection import Stage2Options, refine, sweep
from .synth import SyntheticSpec, generate

ORIENTATION = click.Choice(kio.ORIENTATIONS)
FORMAT = click.Choice(["json", "csv"])


def _int_list(value):
    if value is None:
        return None
    try:
        return [int(v) for v in value.replace(" ", "").split(",") if v]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from None


def _build_grid(k_min, k_max, k_step, k_grid, n):
    if k_grid is not None:
        if k_min is not None or k_max is not None or k_step is not None:
            raise click.UsageError("--k-grid cannot be combined with --k-min/--k-max/--k-step")
        return _int_list(k_grid)
    if k_min is None and k_max is None:
        if k_step is not None:
            raise click.UsageError("--k-step needs --k-min or --k-max")
        return None
    lo = 1 if k_min is None else k_min
    hi = n if k_max is None else k_max
    step = 1 if k_step is None else k_step
    if step < 1:
        raise click.UsageError("--k-step must be >= 1")
    return list(range(lo, hi + 1, step))


def _write(report, out, fmt):
    kio.write_report(report, out, fmt)
    click.echo(f"kmcr1_k={report.selected_k_kmcr1} kmcr2_k={report.selected_k_kmcr2}")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Choose the number of k-means clusters by compression ratio."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")


@cli.command("generate")
@click.option("--dim", "d", type=int, required=True, help="Dimension d.")
@click.option("--clusters", "k_c", type=int, required=True, help="True cluster count.")
@click.option("--per-cluster", "n_c", type=int, required=True, help="Members per cluster.")
@click.option("--centroid-radius", type=float, default=1.0, show_default=True)
@click.option("--member-radius", type=float, default=0.01, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--labels-out", type=click.Path(dir_okay=False), default=None)
def generate_cmd(d, k_c, n_c, centroid_radius, member_radius, seed, out, labels_out):
    """Write a synthetic sphere-centroid dataset, one point per row."""
    ds = generate(SyntheticSpec(d, k_c, n_c, centroid_radius, member_radius, seed))
    kio.write_points_csv(out, ds.data)
    if labels_out:
        kio.write_labels_csv(labels_out, ds.true_labels)


def _stage2_options(stage2, stage2_grid):
    grid = _int_list(stage2_grid)
    return Stage2Options(enabled=stage2 or grid is not None, k2_grid=tuple(grid) if grid else None)


@cli.command("sweep")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--orientation", type=ORIENTATION, default="rows", show_default=True)
@click.option("--k-min", type=int, default=None)
@click.option("--k-max", type=int, default=None)
@click.option("--k-step", type=int, default=None)
@click.option("--k-grid", default=None, help="Comma-separated k values.")
@click.option("--restarts", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--h", "h", type=float, default=1.0, show_default=True, help="Quantization unit.")
@click.option("--stage2", is_flag=True, help="Run the second-stage redundancy check.")
@click.option("--stage2-grid", default=None, help="Comma-separated k2 values (implies --stage2).")
@click.option("--cluster-count", type=click.Choice(["requested", "effective"]), default="requested", show_default=True)
@click.option("--max-iter", type=click.IntRange(min=1), default=300, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--format", "fmt", type=FORMAT, default="json", show_default=True)
def sweep_cmd(input_path, orientation, k_min, k_max, k_step, k_grid, restarts, h, stage2,
              stage2_grid, cluster_count, max_iter, seed, out, fmt):
    """Evaluate KMCR1/KMCR2 over a grid of k."""
    X = kio.read_points_csv(input_path, orientation)
    report = sweep(
        X,
        _build_grid(k_min, k_max, k_step, k_grid, X.cols),
        restarts=restarts,
        q=QuantizationConfig(h),
        stage2=_stage2_options(stage2, stage2_grid),
        master_seed=seed,
        max_iterations=max_iter,
        cluster_count=cluster_count,
    )
    _write(report, out, fmt)


@cli.command("refine")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--orientation", type=ORIENTATION, default="rows", show_default=True)
@click.option("--report", "report_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--half-width", type=click.IntRange(min=0), required=True)
@click.option("--restarts", type=click.IntRange(min=1), default=None)
@click.option("--h", "h", type=float, default=None)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--format", "fmt", type=FORMAT, default="json", show_default=True)
def refine_cmd(input_path, orientation, report_path, half_width, restarts, h, seed, out, fmt):
    """Re-sweep a unit-step grid around the selections of a JSON report."""
    X = kio.read_points_csv(input_path, orientation)
    prior = kio.read_report(report_path)
    report = refine(
        X,
        prior,
        half_width,
        restarts=restarts,
        q=QuantizationConfig(h) if h is not None else None,
        master_seed=seed,
    )
    _write(report, out, fmt)


@cli.command("select")
@click.option("--report", "report_path", type=click.Path(exists=True, dir_okay=False), required=True)
def select_cmd(report_path):
    """Print the k minimizing each criterion in a JSON or CSV report."""
    k1, k2 = kio.select_from_file(report_path)
    click.echo(f"kmcr1_k={k1} kmcr2_k={k2}")


@cli.command("gram")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--drop-constant", is_flag=True, help="Drop constant feature columns first.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def gram_cmd(input_path, drop_constant, out):
    """z-score an observations x features table and write Z^T Z."""
    A = kio.read_points_csv(input_path, kio.COLUMNS_ARE_POINTS)
    G, dropped = kio.gram_from_table(A, drop_constant)
    if dropped:
        click.echo(f"dropped_columns={','.join(map(str, dropped))}", err=True)
    kio.write_points_csv(out, G, header=[f"f{i}" for i in range(G.rows)])


@cli.command("centroids")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--orientation", type=ORIENTATION, default="rows", show_default=True)
@click.option("--k", "k", type=click.IntRange(min=1), required=True)
@click.option("--runs", type=click.IntRange(min=1), required=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def centroids_cmd(input_path, orientation, k, runs, seed, out):
    """Dump the converged centroids of independent restarts."""
    X = kio.read_points_csv(input_path, orientation)
    kio.export_restart_centroids(X, k, runs, seed, out)


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="kmcr", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        _fail("UsageError", exc.format_message())
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("error: Aborted: interrupted", err=True)
        return 1
    except KMCRError as exc:
        _fail(exc.category, exc)
        return 1
    except (ValueError, OSError) as exc:
        _fail(type(exc).__name__, exc)
        return 1
    return 0


def _fail(category, exc):
    message = " ".join(str(exc).split())
    click.echo(f"error: {category}: {message}", err=True)


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
