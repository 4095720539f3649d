"""One structured config file; every module default is overridable here."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from ..ecosystem import DEFAULT_MAX_HOPS
from ..register import DEFAULT_THETA_GRAY, DEFAULT_THETA_OBVIOUS
from ..relation import TrainingConfig


@dataclass(frozen=True)
class Config:
    min_support: int = 1
    learning_rate: float = 0.1
    l2: float = 1e-4
    max_epochs: int = 500
    tol: float = 1e-6
    threshold: float = 0.5
    balance_classes: bool = False
    seed: int = 42
    theta_obvious: float = DEFAULT_THETA_OBVIOUS
    theta_gray: float = DEFAULT_THETA_GRAY
    max_hops: int = DEFAULT_MAX_HOPS
    page_size: int = 50
    auth_token_env: str = "RISKMINE_TOKEN"

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            learning_rate=self.learning_rate, l2=self.l2,
            max_epochs=self.max_epochs, tol=self.tol,
            threshold=self.threshold, balance_classes=self.balance_classes,
            seed=self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**raw)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    return Config.from_file(path)
