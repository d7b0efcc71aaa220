"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 stage failure, 3 backend
failure.  ``main`` returns the code instead of raising SystemExit so
tests can call it directly.
"""

from __future__ import annotations

import glob as globmod
import logging
import os
import tempfile

import click

from ..compose import video_info
from ..config import load_config
from ..errors import BackendError, PipelineError
from ..evaluate import (
    CONDITION_MULTI,
    CONDITION_SINGLE,
    EvaluationReport,
    aggregate_scores,
    evaluate_video,
    write_aggregate_csv,
)
from ..gateway import ModelClient
from ..jsonio import read_json, write_json
from ..types import VideoArtifact
from .baseline import run_baseline
from .pipeline import resume_pipeline, run_pipeline

log = logging.getLogger(__name__)

_config_option = click.option(
    "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
    default=None, help="YAML config file; defaults apply when omitted.")


@click.group()
def cli() -> None:
    """Automatic paper-to-short-video pipeline."""


@cli.command("run")
@click.option("--source", required=True, help="Paper source: local file, URL, or arXiv id.")
@click.option("--iterations", type=click.IntRange(min=1), default=None,
              help="Refinement iterations; overrides the config value.")
@_config_option
def cmd_run(source: str, iterations: int | None, config_path: str | None) -> None:
    """Run the full iterative pipeline on one paper."""
    overrides = {"iterations": iterations} if iterations is not None else None
    config = load_config(config_path, overrides)
    result = run_pipeline(source, config)
    for video, report in zip(result.videos, result.reports):
        click.echo(f"iter {video.iteration}: {video.path} "
                   f"({video.duration_s:.2f}s, {len(report.scores)} metrics scored)")
    click.echo(f"run manifest: {result.manifest_path}")


@cli.command("baseline")
@click.option("--source", required=True, help="Paper source: local file, URL, or arXiv id.")
@_config_option
def cmd_baseline(source: str, config_path: str | None) -> None:
    """Generate and evaluate the single-pass baseline video."""
    config = load_config(config_path)
    result = run_baseline(source, config)
    click.echo(f"baseline: {result.video.path} ({result.video.duration_s:.2f}s, "
               f"condition={result.report.condition})")


@cli.command("evaluate")
@click.option("--video", "video_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Any playable video file, including externally produced ones.")
@click.option("--condition", type=click.Choice([CONDITION_MULTI, CONDITION_SINGLE]),
              default=CONDITION_MULTI, help="Condition label recorded in the report.")
@click.option("--paper-id", default="external", help="Identifier recorded in the report.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Report JSON path; defaults to <video>.evaluation.json.")
@_config_option
def cmd_evaluate(video_path: str, condition: str, paper_id: str,
                 out_path: str | None, config_path: str | None) -> None:
    """Score one video against the ten-metric rubric."""
    config = load_config(config_path)
    frame_count, fps, width, height = video_info(video_path)
    video = VideoArtifact(path=video_path, duration_s=frame_count / fps,
                          width_px=width, height_px=height, iteration=0)
    client = ModelClient(config)
    with tempfile.TemporaryDirectory(prefix="flashvid_eval_") as frames_dir:
        report = evaluate_video(video, client, config, paper_id, frames_dir,
                                condition=condition)
    out_path = out_path or f"{video_path}.evaluation.json"
    write_json(out_path, report.to_dict())
    shown = ", ".join(f"{k}={v}" for k, v in sorted(report.scores.items()))
    click.echo(f"{out_path}: {shown}")


@cli.command("resume")
@click.option("--paper", "paper_id", required=True, help="Paper id of the interrupted run.")
@_config_option
def cmd_resume(paper_id: str, config_path: str | None) -> None:
    """Continue an interrupted run; finished stages are not re-executed."""
    config = load_config(config_path)
    result = resume_pipeline(paper_id, config)
    click.echo(f"resumed {result.paper_id}: {len(result.videos)} videos complete")


@cli.command("report")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results",
              help="Directory receiving aggregate.csv.")
@_config_option
def cmd_report(out_dir: str, config_path: str | None) -> None:
    """Aggregate every stored evaluation report into one table."""
    config = load_config(config_path)
    reports = []
    pattern = os.path.join(config.workdir, "*", "**", "evaluation.json")
    for path in sorted(globmod.glob(pattern, recursive=True)):
        reports.append(EvaluationReport.from_dict(read_json(path)))
    rows = aggregate_scores(reports, group_by=("condition", "iteration"))
    out_path = os.path.join(out_dir, "aggregate.csv")
    write_aggregate_csv(rows, out_path)
    click.echo(f"{out_path}: {len(rows)} rows from {len(reports)} reports")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cli.main(args=argv, prog_name="flashvid", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except BackendError as exc:
        click.echo(f"backend failure: {exc}", err=True)
        return 3
    except PipelineError as exc:
        click.echo(f"stage failure: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
