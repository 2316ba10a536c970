"""Python front end to the native benchmark core.

Configs are plain dicts with the same sections as the JSON files the ``sib``
command reads (``data``, ``victim``, ``attack``, ``eval``).
"""

import json as _json

from . import _core
from ._core import (
    BudgetError,
    ConfigError,
    DataError,
    DimensionError,
    Error,
    TrainingError,
    ValidationError,
    fidelity_of,
    m_global,
    parse_label_list,
    rate_encode,
    update_k,
)

__version__ = _core.__version__


def _dump(config):
    return config if isinstance(config, str) else _json.dumps(config)


def materialize_config(config):
    """Validated config with every default filled in."""
    return _json.loads(_core.materialize_config(_dump(config)))


def config_hash(config):
    return _core.config_hash(_dump(config))


def train_target(config):
    return _core.train_target(_dump(config))


def attack(config, parallel=1, resume=False):
    return _core.attack(_dump(config), parallel, resume)


def evaluate(configs, out_dir=""):
    return _core.evaluate([_dump(c) for c in configs], str(out_dir))


def reconstruct(configs, out_dir=""):
    return _core.reconstruct([_dump(c) for c in configs], str(out_dir))


def configure_logging():
    _core.configure_logging()


__all__ = [
    "BudgetError",
    "ConfigError",
    "DataError",
    "DimensionError",
    "Error",
    "TrainingError",
    "ValidationError",
    "attack",
    "config_hash",
    "configure_logging",
    "evaluate",
    "fidelity_of",
    "m_global",
    "materialize_config",
    "parse_label_list",
    "rate_encode",
    "reconstruct",
    "train_target",
    "update_k",
]
