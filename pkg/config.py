# config.py
import os
from typing import Optional

VALID_LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


def _int_env(name: str, default: int, errors: list) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return int(raw)
    except ValueError:
        errors.append(f"{name} must be an integer, got {raw!r}")
        return None


class Config:
    """Configuration class for the polling benchmark harness"""

    def __init__(self):
        errors = []

        # Worker processes for sweeps and the acceptance suite; 1 disables the pool
        self.WORKERS = _int_env('POLLBENCH_WORKERS', os.cpu_count() or 1, errors)

        # Largest instance the exact search accepts
        self.MAX_N = _int_env('POLLBENCH_MAX_N', 10, errors)

        self.OUTPUT_DIR = os.getenv('POLLBENCH_OUTPUT_DIR', 'results')

        # Randomized acceptance suites
        self.SEED = _int_env('POLLBENCH_SEED', 0, errors)
        self.SUITE_SIZE = _int_env('POLLBENCH_SUITE_SIZE', 500, errors)

        # Engine safety cap on decision epochs per run
        self.MAX_EPOCHS = _int_env('POLLBENCH_MAX_EPOCHS', 5_000_000, errors)

        self.LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

        self._validate(errors)

    def _validate(self, errors: list):
        """Validate ranges; parse errors collected above are reported together"""
        if self.WORKERS is not None and self.WORKERS < 1:
            errors.append(f"POLLBENCH_WORKERS must be >= 1, got {self.WORKERS}")

        if self.MAX_N is not None and self.MAX_N < 0:
            errors.append(f"POLLBENCH_MAX_N must be >= 0, got {self.MAX_N}")

        if not self.OUTPUT_DIR:
            errors.append("POLLBENCH_OUTPUT_DIR must not be empty")

        if self.SEED is not None and self.SEED < 0:
            errors.append(f"POLLBENCH_SEED must be >= 0, got {self.SEED}")

        if self.SUITE_SIZE is not None and self.SUITE_SIZE < 1:
            errors.append(f"POLLBENCH_SUITE_SIZE must be >= 1, got {self.SUITE_SIZE}")

        if self.MAX_EPOCHS is not None and self.MAX_EPOCHS < 1:
            errors.append(f"POLLBENCH_MAX_EPOCHS must be >= 1, got {self.MAX_EPOCHS}")

        if self.LOG_LEVEL not in VALID_LOG_LEVELS:
            errors.append(f"LOG_LEVEL must be one of {', '.join(VALID_LOG_LEVELS)}, got {self.LOG_LEVEL!r}")

        if errors:
            raise ValueError(f"Configuration errors:\n" + "\n".join(f"  - {e}" for e in errors))

    def __repr__(self):
        return (
            f"Config(\n"
            f"  WORKERS={self.WORKERS},\n"
            f"  MAX_N={self.MAX_N},\n"
            f"  OUTPUT_DIR={self.OUTPUT_DIR},\n"
            f"  SEED={self.SEED},\n"
            f"  SUITE_SIZE={self.SUITE_SIZE},\n"
            f"  MAX_EPOCHS={self.MAX_EPOCHS},\n"
            f"  LOG_LEVEL={self.LOG_LEVEL}\n"
            f")"
        )
