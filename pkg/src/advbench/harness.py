"""Benchmark loop and optimality computation.

`benchmark` runs one attack over a dataset, one fresh `BenchModel` per sample,
and keys every result by the SHA-512 of the sample so records from different
runs, orders or sources line up. `compute_local_optimality` and
`build_leaderboard` turn sets of records into LO/GO rankings.
"""

import csv
import hashlib
import logging
import math
import socket
import struct
import time
from collections import defaultdict
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np
from tqdm.auto import tqdm

from .attacks.engine import run_attack
from .benchmodel import BenchModel
from .config import get_settings
from .datasets import Dataset
from .errors import (
    BenchError,
    ConfigError,
    DataError,
    DegenerateError,
    DimensionError,
    InitError,
)
from .metrics import (
    DistanceTable,
    OptimalityReport,
    asr,
    curve_points,
    distance,
    ensemble_best,
    epsilon_zero,
    global_optimality,
    mean_distance,
    median_distance,
    optimality_report,
    rank,
)
from .models import (
    AttackConfig,
    AttackMode,
    AttackRecord,
    Board,
    InitKind,
    Leaderboard,
    LeaderboardEntry,
    Norm,
    RecordMeta,
    SampleResult,
    SearchConfig,
)
from .network import ModelParams, predict_batch
from .search import search

logger = logging.getLogger(__name__)


def hash_sample(x: np.ndarray) -> str:
    """SHA-512 of the stored form: uint32 LE dim, then float32 LE coordinates."""
    data = np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel(), dtype="<f4")
    return hashlib.sha512(struct.pack("<I", data.size) + data.tobytes()).hexdigest()


def sample_entropy(sample_hash: str) -> int:
    """Seed material derived from a sample hash."""
    return int(sample_hash[:16], 16)


def adversarial_start(
    x: np.ndarray,
    y: int,
    dataset: Dataset,
    predictions: np.ndarray,
    hashes: list[str],
    p: Norm,
) -> np.ndarray:
    """Nearest dataset sample the model does not assign to class y.

    Ties go to the lexicographically smallest sample hash.

    Raises:
        InitError: If every sample is predicted as y
    """
    candidates = [i for i in range(len(dataset)) if predictions[i] != y]
    if not candidates:
        raise InitError(f"No dataset sample is classified differently from {y}")
    best = min(candidates, key=lambda i: (distance(x, dataset.features[i], p), hashes[i]))
    return dataset.features[best].copy()


def _search_config(attack: AttackConfig) -> SearchConfig:
    return attack.search or SearchConfig(steps=get_settings().search_steps)


def _attack_sample(
    attack: AttackConfig,
    model: ModelParams,
    budget: int,
    x: np.ndarray,
    y: int,
    sample_hash: str,
    start: Optional[np.ndarray],
) -> SampleResult:
    bm: Optional[BenchModel] = None
    returned: Optional[np.ndarray] = None
    began = time.perf_counter()
    try:
        bm = BenchModel(model, budget, attack.p, x, y)
        entropy = (sample_entropy(sample_hash),)
        if attack.mode == AttackMode.FIXED_BUDGET:
            found = search(
                attack, bm, x, y, _search_config(attack), start=start, entropy=entropy
            )
            returned = found.x_adv
        else:
            returned = run_attack(attack, bm, x, y, start=start, entropy=entropy).x_adv
    except BenchError as e:
        elapsed = time.perf_counter() - began
        logger.warning("Sample %s failed: %s", sample_hash[:12], e)
        forwards, backwards = bm.num_queries() if bm is not None else (0, 0)
        return SampleResult(
            distance=None,
            forwards=forwards,
            backwards=backwards,
            time_s=elapsed,
            error=f"{type(e).__name__}: {e}",
        )
    elapsed = time.perf_counter() - began

    best, _ = bm.take_best()
    forwards, backwards = bm.num_queries()
    logger.debug("Sample %s: d*=%s after (%d, %d)", sample_hash[:12], best, forwards, backwards)
    return SampleResult(
        distance=best,
        forwards=forwards,
        backwards=backwards,
        time_s=elapsed,
        returned_distance=distance(x, returned, attack.p) if returned is not None else None,
    )


def benchmark(
    attack: AttackConfig,
    model: ModelParams,
    dataset: Dataset,
    budget: Optional[int] = None,
    norm: Optional[Norm] = None,
    model_id: str = "model",
    threads: Optional[int] = None,
    progress: bool = False,
) -> AttackRecord:
    """Run an attack over every sample and collect the per-hash results.

    Samples the model already misclassifies are recorded with distance 0 and
    no queries; the check does not touch the budget. FixedBudget attacks run
    through the ε search.

    Raises:
        ConfigError: If `norm` disagrees with the attack
        DimensionError: If the model and dataset dimensions differ
    """
    settings = get_settings()
    budget = budget if budget is not None else settings.budget
    if norm is not None and norm != attack.p:
        raise ConfigError(
            f"Attack {attack.label} is {attack.p.value}, benchmark asked for {norm.value}"
        )
    if dataset.dim != model.input_dim:
        raise DimensionError(f"Dataset has dim {dataset.dim}, model expects {model.input_dim}")
    if len(dataset) == 0:
        raise DataError("Dataset is empty")

    hashes = [hash_sample(x) for x in dataset.features]
    predictions = predict_batch(model, dataset.features)
    unique: dict[str, int] = {}
    for index, sample_hash in enumerate(hashes):
        if sample_hash in unique:
            logger.warning("Duplicate sample %s ignored", sample_hash[:12])
        else:
            unique[sample_hash] = index

    def run(sample_hash: str) -> tuple[str, SampleResult]:
        index = unique[sample_hash]
        x = dataset.features[index]
        y = int(dataset.labels[index])
        if predictions[index] != y:
            return sample_hash, SampleResult(distance=0.0, forwards=0, backwards=0)
        start = None
        if attack.init.kind == InitKind.ADV:
            try:
                start = adversarial_start(x, y, dataset, predictions, hashes, attack.p)
            except InitError as e:
                logger.warning("Sample %s failed: %s", sample_hash[:12], e)
                return sample_hash, SampleResult(
                    distance=None, forwards=0, backwards=0, error=f"InitError: {e}"
                )
        return sample_hash, _attack_sample(attack, model, budget, x, y, sample_hash, start)

    logger.info(
        "Benchmarking %s on %s: %d samples, budget %d", attack.label, model_id, len(unique), budget
    )
    workers = settings.worker_count(threads)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = dict(
            tqdm(
                pool.map(run, list(unique)),
                total=len(unique),
                desc=attack.label,
                disable=not progress,
            )
        )

    record = AttackRecord(
        attack=attack.label,
        model=model_id,
        norm=attack.p,
        budget=budget,
        search=_search_config(attack) if attack.mode == AttackMode.FIXED_BUDGET else None,
        records={h: results[h] for h in sorted(results)},
        meta=RecordMeta(host=socket.gethostname()),
    )
    residual = 1.0 - asr(to_table(record), math.inf)
    if residual > 0:
        logger.warning(
            "%s leaves %.1f%% of samples without an adversarial; a nonzero residual "
            "indicates that the attack is applied incorrectly",
            attack.label,
            100 * residual,
        )
    logger.info("Finished %s on %s", attack.label, model_id)
    return record


def to_table(record: AttackRecord) -> DistanceTable:
    return DistanceTable(
        distances={h: r.distance for h, r in record.records.items()},
        norm=record.norm,
        name=record.attack,
    )


def _check_consistent(records: list[AttackRecord]) -> None:
    if not records:
        raise DataError("No records given")
    first = records[0]
    seen: set[str] = set()
    for record in records:
        if record.norm != first.norm or record.model != first.model:
            raise DataError(
                f"Record {record.attack} is for {record.model}/{record.norm.value}, "
                f"expected {first.model}/{first.norm.value}"
            )
        if record.hashes != first.hashes:
            raise DataError(
                f"Record {record.attack} covers different samples than {first.attack}"
            )
        if record.attack in seen:
            raise DataError(f"Attack {record.attack} appears twice for {record.model}")
        seen.add(record.attack)


def compute_local_optimality(records: list[AttackRecord]) -> OptimalityReport:
    """LO of every attack evaluated on one model under one norm.

    Raises:
        DataError: If the records disagree on model, norm or sample set
    """
    _check_consistent(records)
    return optimality_report({record.attack: to_table(record) for record in records})


def build_leaderboard(records: Iterable[AttackRecord]) -> Leaderboard:
    """Per-norm boards ranking attacks by GO across the models they were run on.

    A model on which no attack can be scored (every sample misclassified, or
    every attack failing everywhere) is left out of its board with a warning;
    the other models and norms are still ranked.
    """
    grouped: dict[Norm, dict[str, list[AttackRecord]]] = defaultdict(lambda: defaultdict(list))
    for record in records:
        grouped[record.norm][record.model].append(record)

    boards = []
    for norm in sorted(grouped, key=lambda n: list(Norm).index(n)):
        by_model = grouped[norm]
        los: dict[str, dict[str, float]] = defaultdict(dict)
        asrs: dict[str, list[float]] = defaultdict(list)
        samples: dict[str, dict[str, SampleResult]] = defaultdict(dict)
        models = []
        for model_id in sorted(by_model):
            try:
                report = compute_local_optimality(by_model[model_id])
            except (ConfigError, DegenerateError) as e:
                logger.warning("Skipping %s on the %s board: %s", model_id, norm.value, e)
                continue
            models.append(model_id)
            for record in by_model[model_id]:
                los[record.attack][model_id] = report.lo[record.attack]
                asrs[record.attack].append(asr(to_table(record), math.inf))
                for sample_hash, result in record.records.items():
                    samples[record.attack][f"{model_id}/{sample_hash}"] = result
        if not models:
            logger.warning("No model on the %s board could be scored", norm.value)
            continue

        entries = []
        for attack in sorted(los):
            missing = [m for m in models if m not in los[attack]]
            if missing:
                logger.warning("%s has no record for %s; GO averages the others", attack, missing)
            results = list(samples[attack].values())
            pooled = DistanceTable(
                distances={key: r.distance for key, r in samples[attack].items()},
                norm=norm,
                name=attack,
            )
            entries.append(
                LeaderboardEntry(
                    attack=attack,
                    go=global_optimality(los[attack].values()),
                    asr=math.fsum(asrs[attack]) / len(asrs[attack]),
                    lo=dict(los[attack]),
                    mean_forwards=math.fsum(r.forwards for r in results) / len(results),
                    mean_backwards=math.fsum(r.backwards for r in results) / len(results),
                    mean_time_s=math.fsum(r.time_s for r in results) / len(results),
                    mean_distance=mean_distance(pooled),
                    median_distance=median_distance(pooled),
                )
            )
        boards.append(Board(norm=norm, models=models, entries=rank(entries)))
    return Leaderboard(boards=boards)


def export_curves(records: list[AttackRecord], out_dir: Path) -> list[Path]:
    """Write one robustness-curve CSV per attack plus the ensemble.

    All records must belong to one model and norm.
    """
    _check_consistent(records)
    tables = [to_table(record) for record in records]
    best = ensemble_best(tables)
    eps0 = epsilon_zero(best)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for table in [*tables, best]:
        path = out_dir / f"{_safe_name(table.name)}.csv"
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["epsilon", "robust_accuracy"])
            for eps, rho in curve_points(table, eps0):
                writer.writerow([repr(eps), repr(rho)])
        written.append(path)
        logger.info("Wrote %s", path)
    return written


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)
