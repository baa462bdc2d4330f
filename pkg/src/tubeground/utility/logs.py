"""Logging constants, a :py:func:`logging.basicConfig` wrapper with package defaults, and per-run log files."""
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple, Union

from tubeground._internal_support.types import PathLikeType

FORMAT: str = "%(asctime)s.%(msecs)03d [%(name)s:%(levelname)s] %(message)s"
"""Default logging format; ``<date-format>.378 [tubeground.training.Trainer:INFO] Epoch 1/10 done.``"""

DATE_FORMAT: str = "%Y-%m-%dT%H:%M:%S"
"""Default logging date format; ``2026-02-05T11:17:05<logging-format>``"""

LevelType = Union[int, str]


def basic_config(tubeground_level: Optional[LevelType] = None, force: bool = True, **kwargs: Any) -> None:
    """Do basic logging configuration with package defaults.

    Args:
        tubeground_level: Log level for the `tubeground` package. Inherit if ``None``.
        force: If ``True``, override existing configuration if it exists.
        **kwargs: Keyword arguments for :py:func:`logging.basicConfig`.

    Keyword Args:
        <namespace>_level: Log level for the namespace denoted by `namespace` (without the `"_level"`-suffix).
            Use underscores instead of dots for submodules, eg ``tubeground.training`` => ``tubeground_training``.

    Examples:
        Quiet everything except the training loop.

        >>> from tubeground.utility.logs import basic_config, logging
        >>> basic_config(level=logging.WARNING, tubeground_training_level=logging.INFO)
        >>> logging.getLogger("tubeground.training").getEffectiveLevel() == logging.INFO
        True
    """
    levels, kwargs = _split_levels(tubeground_level=tubeground_level, force=force, **kwargs)

    kwargs.setdefault("format", FORMAT)
    kwargs.setdefault("datefmt", DATE_FORMAT)
    logging.basicConfig(**kwargs)

    for name, level in levels.items():
        logging.getLogger(name).setLevel(level)


@contextmanager
def log_to_file(path: PathLikeType, level: LevelType = logging.INFO, name: str = "tubeground") -> Iterator[Path]:
    """Copy records of the `name` logger to a file while the context is active.

    The logger level is lowered to `level` if needed, and restored on exit.

    Args:
        path: Log file. Appended to if it exists.
        level: Minimum level written to the file.
        name: Logger to attach to.

    Yields:
        The log file path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(logging.Formatter(FORMAT, DATE_FORMAT))
    handler.setLevel(level)

    logger = logging.getLogger(name)
    old_level = logger.level
    if not logger.isEnabledFor(handler.level):
        logger.setLevel(handler.level)
    logger.addHandler(handler)
    try:
        yield path
    finally:
        logger.removeHandler(handler)
        logger.setLevel(old_level)
        handler.close()


_LEVEL_SUFFIX = "_level"


def _split_levels(**kwargs: Any) -> Tuple[Dict[str, LevelType], Dict[str, Any]]:
    levels: Dict[str, LevelType] = {}
    for key in [k for k in kwargs if k.endswith(_LEVEL_SUFFIX)]:
        level = kwargs.pop(key)
        if level is not None:
            levels[key[: -len(_LEVEL_SUFFIX)].replace("_", ".")] = level
    return levels, kwargs
