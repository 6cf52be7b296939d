"""Extraction job definition and the supported model registry."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

# model_id -> (family, default layer spec); token models keep their last
# four hidden layers, character models their final hidden layer.
MODEL_REGISTRY = {
    "bert-base-uncased": ("bert", "last4"),
    "bert-large-uncased": ("bert", "last4"),
    "canine-c": ("canine", "final"),
    "canine-s": ("canine", "final"),
    "bert-forced": ("bert-forced", "last4"),
    "type-subword": ("type", "final"),
}

FAMILIES = ("bert", "canine", "bert-forced", "type")

# Hub checkpoints behind the registry aliases.
CHECKPOINTS = {
    "bert-forced": "bert-base-uncased",
    "canine-c": "google/canine-c",
    "canine-s": "google/canine-s",
}

CACHE_ENV_VAR = "ORTHOEXTRACT_CACHE"


class JobError(ValueError):
    pass


@dataclass
class ExtractionJob:
    """One model run over the dataset.

    ``model_id`` is normally a registry alias; a local checkpoint can be
    used by passing ``model_path`` plus an explicit ``family``.
    """

    model_id: str
    dataset: Path
    variants: Path
    output: Path
    layer_spec: str | None = None
    family: str | None = None
    model_path: Path | None = None
    device: str = "cpu"
    batch_chars: int = 8000

    def __post_init__(self):
        self.dataset = Path(self.dataset)
        self.variants = Path(self.variants)
        self.output = Path(self.output)
        if self.model_path is not None:
            self.model_path = Path(self.model_path)

        if self.family is None:
            if self.model_id not in MODEL_REGISTRY:
                raise JobError(
                    f"model_id {self.model_id!r} not in registry {sorted(MODEL_REGISTRY)}; "
                    "pass family= for a custom checkpoint"
                )
            self.family = MODEL_REGISTRY[self.model_id][0]
        if self.family not in FAMILIES:
            raise JobError(f"unknown model family {self.family!r}")

        default_spec = (
            MODEL_REGISTRY[self.model_id][1] if self.model_id in MODEL_REGISTRY
            else ("final" if self.family in ("canine", "type") else "last4")
        )
        if self.layer_spec is None:
            self.layer_spec = default_spec
        expected = "final" if self.family in ("canine", "type") else "last4"
        if self.layer_spec != expected:
            raise JobError(
                f"layer spec {self.layer_spec!r} incompatible with family {self.family!r} "
                f"(expected {expected!r})"
            )
        if self.batch_chars < 1:
            raise JobError("batch_chars must be >= 1")

    @property
    def n_layers(self) -> int:
        return 4 if self.layer_spec == "last4" else 1

    def checkpoint(self) -> str:
        if self.model_path is not None:
            return str(self.model_path)
        return CHECKPOINTS.get(self.model_id, self.model_id)


def hub_cache_dir() -> str | None:
    return os.environ.get(CACHE_ENV_VAR) or None
