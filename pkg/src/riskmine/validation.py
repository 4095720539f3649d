"""Small input-validation helpers shared across modules."""

from __future__ import annotations

from typing import Any, NoReturn


def require(condition: bool, message: str) -> None:
    """Raise ValueError with `message` unless `condition` holds."""
    if not condition:
        raise ValueError(message)


def fail(message: str) -> NoReturn:
    raise ValueError(message)


def check_fitted(estimator: Any, *attributes: str) -> None:
    """Raise if any fit-time attribute is missing (sklearn convention)."""
    missing = [a for a in attributes if getattr(estimator, a, None) is None]
    if missing:
        raise ValueError(
            f"{type(estimator).__name__} is not fitted; "
            f"missing attribute(s): {', '.join(missing)}"
        )
