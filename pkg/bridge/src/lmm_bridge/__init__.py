"""Thin HTTP inference service exposing five comparative-level logits."""

from .errors import BadRequestError, BridgeError, StartupError
from .extraction import extract_level_logits, level_first_token_ids
from .models import MockComparatorModel, load_model
from .protocol import COMPARE_PATH, HEALTH_PATH, INSTRUCTION_TEMPLATE, LEVEL_NAMES
from .service import DEFAULT_QUEUE_DEPTH, create_app

__version__ = "0.1.0"

__all__ = [
    "BadRequestError",
    "BridgeError",
    "COMPARE_PATH",
    "DEFAULT_QUEUE_DEPTH",
    "HEALTH_PATH",
    "INSTRUCTION_TEMPLATE",
    "LEVEL_NAMES",
    "MockComparatorModel",
    "StartupError",
    "create_app",
    "extract_level_logits",
    "level_first_token_ids",
    "load_model",
]
