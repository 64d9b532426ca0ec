"""Desk-scale model zoo: a plain network and an adversarially trained copy."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional

from .attacks.presets import preset
from .config import get_settings
from .datasets import Dataset
from .errors import ConfigError
from .modelfile import save_model
from .models import AttackMode, ZooEntry, ZooManifest
from .search import at_epsilon
from .training import TrainConfig, accuracy, train

logger = logging.getLogger(__name__)

MANIFEST_FILE = "zoo.json"


def _sha512(path: Path) -> str:
    return hashlib.sha512(path.read_bytes()).hexdigest()


def train_zoo(
    dataset: Dataset,
    out_dir: Path,
    seed: int = 0,
    adv_preset: str = "PGD-Linf",
    dataset_name: str = "dataset",
    config: Optional[TrainConfig] = None,
) -> ZooManifest:
    """Train the zoo and write model files plus `zoo.json` into out_dir.

    The adversarial model perturbs each minibatch with `adv_preset` at
    Settings.adv_epsilon for Settings.adv_steps steps.

    Raises:
        ConfigError: If the preset is unknown or not a fixed_budget attack
    """
    settings = get_settings()
    config = config or TrainConfig()
    attack = preset(adv_preset)
    if attack.mode != AttackMode.FIXED_BUDGET:
        raise ConfigError(f"Adversarial training needs a fixed_budget preset, got {adv_preset}")
    attack = at_epsilon(attack, settings.adv_epsilon, settings.adv_steps)

    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for model_id, adversarial in (("plain", None), ("adv", attack)):
        model = train(dataset, config, adversarial=adversarial, seed=seed)
        path = out_dir / f"{model_id}.abnet"
        save_model(model, path)
        entries.append(
            ZooEntry(
                id=model_id,
                file=path.name,
                hidden=list(config.hidden),
                adversarial=adv_preset if adversarial else None,
                epsilon=settings.adv_epsilon if adversarial else None,
                seed=seed,
                train_accuracy=accuracy(model, dataset),
                sha512=_sha512(path),
            )
        )
        logger.info("Wrote %s", path)

    manifest = ZooManifest(dataset=dataset_name, seed=seed, models=entries)
    (out_dir / MANIFEST_FILE).write_text(
        json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest
