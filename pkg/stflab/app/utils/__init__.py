from .logging import (
    configure_logging,
    init_sentry,
    log_action,
    log_artifact_written,
    log_experiment,
    log_error,
    log_contract_violation,
)
from .io import UnsupportedFormatError

__all__ = [
    "configure_logging",
    "init_sentry",
    "log_action",
    "log_artifact_written",
    "log_experiment",
    "log_error",
    "log_contract_violation",
    "UnsupportedFormatError",
]
