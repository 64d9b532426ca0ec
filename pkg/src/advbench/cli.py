"""CLI entry point for advbench."""

import functools
import logging
import sys
from pathlib import Path
from typing import Optional

import click

from .config import get_settings
from .errors import BenchError
from .models import Norm


def _exit_codes(command):
    """Report benchmark and I/O errors as messages with stable exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except BenchError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except OSError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(4)

    return wrapper


def _resolve_dataset(spec: str, seed: int):
    """A CSV path, or `blobs` / `moons` generated from Settings."""
    from .datasets import SyntheticKind, generate_synthetic, load_dataset

    if spec in {kind.value for kind in SyntheticKind}:
        settings = get_settings()
        return generate_synthetic(
            spec,
            n=settings.dataset_size,
            d=settings.dataset_dim,
            seed=seed,
            classes=settings.dataset_classes,
        )
    return load_dataset(Path(spec))


def _resolve_attack(spec: str):
    """A preset name, or a path to an AttackConfig JSON document."""
    from pydantic import ValidationError

    from .attacks.presets import PRESETS, preset
    from .errors import ConfigError
    from .models import AttackConfig

    path = Path(spec)
    if spec in PRESETS or (path.suffix != ".json" and not path.exists()):
        return preset(spec)
    try:
        return AttackConfig.model_validate_json(path.read_bytes())
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


@click.group()
@click.version_option()
@click.option("--verbose", "-v", is_flag=True, help="Log progress at INFO level")
def main(verbose: bool):
    """Adversarial attack benchmark: model zoo, query-budgeted runs, rankings."""
    level = logging.INFO if verbose else get_settings().log_level.upper()
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command("train-zoo")
@click.option("--dataset", "dataset_spec", default="blobs", show_default=True,
              help="CSV path, or blobs/moons")
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--adv-preset", default="PGD-Linf", show_default=True)
@_exit_codes
def train_zoo(dataset_spec: str, out_dir: Path, seed: int, adv_preset: str):
    """Train the plain and adversarially trained models."""
    from .zoo import train_zoo as build_zoo

    dataset = _resolve_dataset(dataset_spec, seed)
    manifest = build_zoo(
        dataset, out_dir, seed=seed, adv_preset=adv_preset, dataset_name=dataset_spec
    )
    for entry in manifest.models:
        accuracy = entry.train_accuracy
        click.echo(f"{entry.id}: {out_dir / entry.file} (train accuracy {accuracy:.3f})")


@main.command()
@click.option("--attack", "attack_spec", required=True, help="Preset name or config JSON")
@click.option("--model", "model_path", type=click.Path(dir_okay=False, path_type=Path),
              required=True)
@click.option("--dataset", "dataset_spec", default="blobs", show_default=True,
              help="CSV path, or blobs/moons")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for generated datasets")
@click.option("--norm", type=click.Choice([n.value for n in Norm]), default=None)
@click.option("--budget", type=int, default=None, help="Query budget (default from settings)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--threads", type=int, default=None)
@click.option("--model-id", default=None, help="Model name in the record (default: file stem)")
@click.option("--progress", is_flag=True, help="Show a progress bar")
@_exit_codes
def run(
    attack_spec: str,
    model_path: Path,
    dataset_spec: str,
    seed: int,
    norm: Optional[str],
    budget: Optional[int],
    out: Path,
    threads: Optional[int],
    model_id: Optional[str],
    progress: bool,
):
    """Benchmark one attack against one model and write the record."""
    import math

    from .harness import benchmark, to_table
    from .metrics import asr
    from .modelfile import load_model
    from .store import save_record

    attack = _resolve_attack(attack_spec)
    model = load_model(model_path)
    dataset = _resolve_dataset(dataset_spec, seed)
    record = benchmark(
        attack,
        model,
        dataset,
        budget=budget if budget is not None else get_settings().budget,
        norm=Norm(norm) if norm else None,
        model_id=model_id or model_path.stem,
        threads=threads,
        progress=progress,
    )
    save_record(record, out)
    click.echo(
        f"Wrote {out}: {len(record.records)} samples, "
        f"ASR {asr(to_table(record), math.inf):.3f}"
    )


def _print_leaderboard(leaderboard) -> None:
    for board in leaderboard.boards:
        click.echo(f"[{board.norm.value}] models: {', '.join(board.models)}")
        click.echo(
            f"{'attack':<16} {'GO':>7} {'ASR':>7} {'median':>9} "
            f"{'#F':>9} {'#B':>9} {'time_s':>9}"
        )
        for e in board.entries:
            median = "-" if e.median_distance is None else f"{e.median_distance:.4g}"
            click.echo(
                f"{e.attack:<16} {e.go:>7.4f} {e.asr:>7.3f} {median:>9} "
                f"{e.mean_forwards:>9.1f} {e.mean_backwards:>9.1f} {e.mean_time_s:>9.4f}"
            )


@main.command()
@click.option("--records-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Leaderboard JSON (default: <records-dir>/leaderboard.json)")
@_exit_codes
def rank(records_dir: Path, out: Optional[Path]):
    """Rank every attack in a directory of records by global optimality."""
    from .harness import build_leaderboard
    from .store import LEADERBOARD_FILE, load_records, save_leaderboard

    board = build_leaderboard(load_records(records_dir))
    save_leaderboard(board, out or records_dir / LEADERBOARD_FILE)
    _print_leaderboard(board)


@main.command()
@click.option("--records-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--model", "model_id", required=True)
@click.option("--norm", type=click.Choice([n.value for n in Norm]), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@_exit_codes
def curves(records_dir: Path, model_id: str, norm: str, out_dir: Path):
    """Export robustness evaluation curves as CSV."""
    from .errors import DataError
    from .harness import export_curves
    from .store import load_records

    selected = [
        r for r in load_records(records_dir) if r.model == model_id and r.norm == Norm(norm)
    ]
    if not selected:
        raise DataError(f"No records for {model_id}/{norm} in {records_dir}")
    for path in export_curves(selected, out_dir):
        click.echo(f"Wrote {path}")


@main.command()
@click.option("--store", "store_dir", type=click.Path(file_okay=False, path_type=Path),
              required=True)
@click.option("--record", "record_path", type=click.Path(dir_okay=False, path_type=Path),
              required=True)
@_exit_codes
def merge(store_dir: Path, record_path: Path):
    """Merge a record into a leaderboard store and refresh the rankings."""
    from .store import load_record, merge_leaderboard

    board = merge_leaderboard(store_dir, load_record(record_path))
    _print_leaderboard(board)


if __name__ == "__main__":
    main()
