"""Entry point for the ``tubeground`` command line program."""
import functools
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Tuple, TypeVar, cast

import click
import toml

from tubeground.data.exceptions import DataError
from tubeground.model.exceptions import ModelError
from tubeground.training.config import TrainConfig
from tubeground.training.exceptions import CheckpointError, ConfigurationError

F = TypeVar("F", bound=Callable[..., Any])

_EXPECTED_ERRORS = (DataError, ConfigurationError, CheckpointError, ModelError)


def _fail_on_errors(func: F) -> F:
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except _EXPECTED_ERRORS as e:
            raise click.ClickException(f"{type(e).__name__}: {e}") from e

    return cast(F, wrapper)


def _parse_override(item: str) -> Tuple[str, Any]:
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigurationError(f"Bad override {item!r}; expected KEY=VALUE.")
    try:
        value = toml.loads(f"value = {raw}")["value"]
    except toml.TomlDecodeError:
        value = raw
    return key.strip(), value


def load_config(
    path: Optional[str] = None,
    seed: Optional[int] = None,
    overrides: Sequence[str] = (),
) -> TrainConfig:
    """Create a run configuration from command line arguments.

    Args:
        path: A TOML file. Use defaults if ``None``.
        seed: If given, replaces ``training.seed``.
        overrides: Strings on the form ``section.key=value``, where ``value`` is parsed as TOML if possible.

    Returns:
        A :class:`~tubeground.training.TrainConfig`.

    Examples:
        >>> from tubeground.cli import load_config
        >>> load_config(seed=3, overrides=["model.cqg=false"]).model.cqg
        False
    """
    config = TrainConfig() if path is None else TrainConfig.from_toml(path)
    changes = dict(map(_parse_override, overrides))
    if seed is not None:
        changes["training.seed"] = seed
    return config.with_overrides(changes) if changes else config


def _config_options(func: F) -> F:
    func = click.option(
        "--set",
        "overrides",
        multiple=True,
        metavar="KEY=VALUE",
        help="Override a configuration key, eg '--set model.cqg=false'. May be repeated.",
    )(func)
    func = click.option("--seed", type=int, default=None, help="Override training.seed.")(func)
    return click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="TOML configuration file. See the documentation for all keys.",
    )(func)


def _out_option(default: Optional[str]) -> Callable[[F], F]:
    return click.option(
        "--out",
        type=click.Path(file_okay=False),
        default=default,
        required=default is None,
        show_default=bool(default),
        help="Output directory.",
    )


_SPLIT = click.option("--split", type=click.Choice(["train", "val"]), default="val", show_default=True)


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="INFO",
    show_default=True,
    help="Log level of the tubeground package.",
)
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Number of torch threads.")
@click.version_option(package_name="tubeground")
def main(log_level: str, threads: Optional[int]) -> None:
    """Ground sentences in videos as spatio-temporal tubes."""
    from tubeground.utility import configure_runtime

    configure_runtime(level="WARNING", num_threads=threads, tubeground_level=log_level.upper())


@main.command()
@_config_options
@_out_option("runs/train")
@click.option("--resume", type=click.Path(exists=True, dir_okay=False), default=None, help="Resume from a checkpoint.")
@_fail_on_errors
def train(
    config_path: Optional[str], seed: Optional[int], overrides: Sequence[str], out: str, resume: Optional[str]
) -> None:
    """Train a model; writes config.toml, runlog.jsonl and checkpoint.pt."""
    from tubeground.training import Trainer, load_datasets

    config = load_config(config_path, seed, overrides)
    out_dir = Path(out)
    train_set, val_set = load_datasets(config)
    if resume is None:
        trainer = Trainer(config, train_set, val_set, out=out_dir)
    else:
        trainer = Trainer.from_checkpoint(resume, train_set, val_set, out=out_dir)
    (out_dir / "config.toml").write_text(trainer.config.to_toml(), encoding="utf-8")
    log = trainer.fit()
    for record in log.epochs[-2:]:
        click.echo(f"epoch {record['epoch']} {record['split']}: accuracy@0.5={record['accuracy@0.5']:.4f}")


@main.command("eval")
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False), required=True)
@_SPLIT
@_config_options
@_out_option("")
@click.option("--bypass", is_flag=True, help="Score ground truth against itself instead of running the model.")
@_fail_on_errors
def evaluate(
    checkpoint: str,
    split: str,
    config_path: Optional[str],
    seed: Optional[int],
    overrides: Sequence[str],
    out: str,
    bypass: bool,
) -> None:
    """Evaluate a checkpoint and print its metrics."""
    from tubeground.geometry.scoring import write_report
    from tubeground.training import evaluate_checkpoint

    config = None
    if config_path is not None or seed is not None or overrides:
        config = load_config(config_path, seed, overrides)
    report = evaluate_checkpoint(checkpoint, split, config, bypass=bypass)
    click.echo(report.to_text())
    if out:
        write_report(report, out)


@main.command()
@_config_options
@click.option("--seeds", type=int, multiple=True, default=(0, 1, 2), show_default=True, help="Training seeds.")
@_out_option("runs/converge")
@click.option("--plot/--no-plot", default=True, show_default=True, help="Render figures.")
@_fail_on_errors
def converge(
    config_path: Optional[str],
    seed: Optional[int],
    overrides: Sequence[str],
    seeds: Sequence[int],
    out: str,
    plot: bool,
) -> None:
    """Compare convergence of content-aware and content-agnostic queries."""
    from tubeground.training import convergence_experiment

    config = load_config(config_path, seed, overrides)
    result = convergence_experiment(config, seeds, out, plot=plot)
    for label, epochs in result.median_epochs.items():
        click.echo(f"{label}: median epochs to accuracy@0.5>={result.threshold} = {epochs:g}")


@main.command()
@click.option("--checkpoint", type=click.Path(exists=True, dir_okay=False), required=True)
@_SPLIT
@click.option("--video-id", default=None, help="Sample to analyze. Defaults to the first sample of the split.")
@click.option("--frame", type=int, default=None, help="Frame to analyze. Defaults to the middle annotated frame.")
@click.option("--rate", is_flag=True, help="Also compute the top-word-in-span rate over the split.")
@_out_option("runs/heatmap")
@_fail_on_errors
def heatmap(
    checkpoint: str, split: str, video_id: Optional[str], frame: Optional[int], rate: bool, out: str
) -> None:
    """Write the query-word similarity matrix of one sample."""
    from tubeground.training import alignment_heatmap, load_datasets, load_model, top_word_in_span_rate

    model, config, _ = load_model(checkpoint)
    train_set, val_set = load_datasets(config)
    manifest = train_set if split == "train" or val_set is None else val_set
    video_id = video_id or manifest.samples[0].video_id
    try:
        result = alignment_heatmap(model, manifest, video_id, frame, config.weights)
    except (KeyError, ValueError) as e:
        raise click.BadParameter(str(e)) from e

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result.write(out_dir / f"{video_id}.csv")
    _try_plot_heatmap(result, out_dir / f"{video_id}.png")
    click.echo(f"{video_id} frame {result.frame}: query {result.selected} -> '{result.words[result.top_word]}'")
    if rate:
        hit_rate, chance = top_word_in_span_rate(model, manifest, config.weights)
        click.echo(f"top-word-in-span rate: {hit_rate:.4f} (chance {chance:.4f})")


def _try_plot_heatmap(result: Any, path: Path) -> None:
    try:
        from tubeground.utility.plotting import plot_heatmap
    except ModuleNotFoundError as e:
        click.echo(f"Plotting not available: {e}", err=True)
        return
    plot_heatmap(result.similarity, result.words, result.selected, title=result.video_id, path=path)


@main.command("sweep")
@_config_options
@click.option("--num-frames", type=int, multiple=True, help="Values of synth.num_frames.")
@click.option("--image-size", type=int, multiple=True, help="Values of synth.image_size.")
@click.option("--train/--no-train", default=True, show_default=True, help="Train before evaluating.")
@_out_option("runs/sweep")
@_fail_on_errors
def sweep_command(
    config_path: Optional[str],
    seed: Optional[int],
    overrides: Sequence[str],
    num_frames: Sequence[int],
    image_size: Sequence[int],
    train: bool,
    out: str,
) -> None:
    """Evaluate on a grid of clip lengths and resolutions."""
    from tubeground.training import sweep

    config = load_config(config_path, seed, overrides)
    table = sweep(config, num_frames or None, image_size or None, train=train)
    Path(out).mkdir(parents=True, exist_ok=True)
    table.to_csv(Path(out) / "sweep.csv", index=False)
    click.echo(table.to_string(index=False))


@main.command()
@_config_options
@click.option("--seeds", type=int, multiple=True, default=(0, 1, 2), show_default=True, help="Training seeds.")
@_out_option("runs/ablation")
@_fail_on_errors
def ablation(
    config_path: Optional[str], seed: Optional[int], overrides: Sequence[str], seeds: Sequence[int], out: str
) -> None:
    """Train all combinations of content-aware queries and entity alignment."""
    from tubeground.training import ablation_experiment

    config = load_config(config_path, seed, overrides)
    table = ablation_experiment(config, seeds, out)
    click.echo(table.groupby(["cqg", "ecl"]).median(numeric_only=True).drop(columns="seed").to_string())


@main.command()
@_config_options
@_SPLIT
@_out_option(None)
@_fail_on_errors
def synth(config_path: Optional[str], seed: Optional[int], overrides: Sequence[str], split: str, out: str) -> None:
    """Generate a synthetic dataset from the [synth] section."""
    from tubeground.data import synth_generate, write_dataset

    config = load_config(config_path, seed, overrides)
    path = write_dataset(synth_generate(config.synth_spec(split)), out)
    click.echo(f"Wrote '{path}'.")


@main.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--check-files", is_flag=True, help="Also check that frame files exist.")
def validate(manifest: str, check_files: bool) -> None:
    """Check a manifest file; exits with status 1 if any problem is found."""
    from tubeground.data import diagnose_manifest

    problems = diagnose_manifest(manifest, check_files=check_files)
    for problem in problems:
        click.echo(f"{type(problem).__name__}: {problem}", err=True)
    if problems:
        raise click.ClickException(f"Found {len(problems)} problems in '{manifest}'.")
    click.echo(f"'{manifest}' is valid.")


@main.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.argument("video_id")
@_fail_on_errors
def inspect(manifest: str, video_id: str) -> None:
    """Print one sample of a manifest."""
    from tubeground.data import inspect_sample, load_manifest

    try:
        click.echo(inspect_sample(load_manifest(manifest), video_id))
    except KeyError as e:
        raise click.BadParameter(str(e), param_hint="video_id") from e


@main.command()
@click.argument("predictions", type=click.Path(exists=True, dir_okay=False))
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--accuracy-mode", type=click.Choice(["frame", "video"]), default="frame", show_default=True)
@click.option(
    "--missing",
    type=click.Choice(["raise", "warn", "ignore"]),
    default="raise",
    show_default=True,
    help="Action for samples without a prediction.",
)
@_out_option("")
@_fail_on_errors
def score(predictions: str, manifest: str, accuracy_mode: str, missing: str, out: str) -> None:
    """Score a predictions file against the ground truth of a manifest."""
    from tubeground.geometry.scoring import score as _score

    report = _score(predictions, manifest, out or None, accuracy_mode, missing)  # type: ignore[arg-type]
    click.echo(report.to_text())


if __name__ == "__main__":
    main()
