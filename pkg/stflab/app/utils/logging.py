import sentry_sdk
from sentry_sdk.integrations.logging import LoggingIntegration
from sentry_sdk.integrations.sqlalchemy import SqlalchemyIntegration
import logging
import time
from functools import wraps
from pathlib import Path
from typing import Callable, Any, Optional
from ..config import settings


logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None):
    """Configure root logging for CLI runs"""
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def init_sentry():
    """Initialize Sentry SDK for error tracking"""
    if settings.sentry_dsn:
        sentry_logging = LoggingIntegration(level=logging.INFO, event_level=logging.ERROR)

        sentry_sdk.init(
            dsn=settings.sentry_dsn,
            integrations=[
                sentry_logging,
                SqlalchemyIntegration(),
            ],
            traces_sample_rate=1.0 if settings.debug else 0.1,
            environment=settings.app_env,
        )
        logger.info("Sentry initialized successfully")
    else:
        logger.debug("Sentry DSN not configured")


def log_action(action: str):
    """Decorator logging a long-running lab action with its wall time"""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
                elapsed = time.perf_counter() - start
                logger.info(f"{action} - Success - {elapsed:.2f}s")
                return result
            except Exception as e:
                logger.error(f"{action} - Failed - Error: {e}")

                if settings.sentry_dsn:
                    sentry_sdk.capture_exception(e)

                raise

        return wrapper

    return decorator


def log_artifact_written(kind: str, path: Path, details: str = ""):
    """Log that an output artifact (mask, table, image, csv) was written"""
    message = f"Artifact written - Kind: {kind}, Path: {path}"
    if details:
        message += f", {details}"
    logger.info(message)


def log_experiment(name: str, params: dict, metrics: dict):
    """Log the outcome of one experiment configuration"""
    message = f"Experiment {name} - Params: {params}, Metrics: {metrics}"
    logger.info(message)

    if settings.sentry_dsn:
        sentry_sdk.capture_message(message, level="info")


def log_error(error: Exception, context: dict = None):
    """Log error with context"""
    logger.error(f"Error occurred: {error}", exc_info=True)

    if settings.sentry_dsn:
        with sentry_sdk.push_scope() as scope:
            if context:
                for key, value in context.items():
                    scope.set_context(key, value)
            sentry_sdk.capture_exception(error)


def log_contract_violation(contract: str, details: str):
    """Log a violated simulator contract (e.g. reading an inactive lane)"""
    message = f"Contract violation - {contract}: {details}"
    logger.warning(message)

    if settings.sentry_dsn:
        sentry_sdk.capture_message(message, level="warning")
