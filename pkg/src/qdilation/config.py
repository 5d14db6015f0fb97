"""Runtime limits, overridable through environment variables."""

import os

DENSE_SPECTRUM_LIMIT = 2048
NORM_DENSE_CROSSOVER = 64
DILATION_MAX_DIM = 4096


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ValueError(f"{name} must be a positive integer, got {raw!r}")
    return value


def dense_limit() -> int:
    return _env_int("QDIL_DENSE_LIMIT", DENSE_SPECTRUM_LIMIT)


def norm_crossover() -> int:
    return _env_int("QDIL_NORM_CROSSOVER", NORM_DENSE_CROSSOVER)


def dilation_max_dim() -> int:
    return _env_int("QDIL_MAX_DIM", DILATION_MAX_DIM)


def default_workers() -> int:
    return _env_int("QDIL_WORKERS", 1)
