import logging
from typing import Any, Optional

import pandas as pd
import torch

from tubeground.utility.logs import LevelType, basic_config

LOGGER = logging.getLogger(__package__)


def configure_runtime(
    level: LevelType = logging.INFO,
    matplotlib_level: LevelType = logging.WARNING,
    num_threads: Optional[int] = None,
    **kwargs: Any,
) -> None:
    """Configure logging, table and tensor printing, torch threads and plotting themes for interactive runs.

    Args:
        level: Root log level.
        matplotlib_level: Matplotlib log level.
        num_threads: Intra-op threads used by torch. Leave unchanged if ``None``.
        **kwargs: Keyword arguments for :meth:`tubeground.utility.logs.basic_config`.
    """
    basic_config(level=level, matplotlib_level=matplotlib_level, **kwargs)

    pd.options.display.max_columns = 50
    pd.options.display.width = 0
    pd.options.display.float_format = "{:.4f}".format
    torch.set_printoptions(precision=4, sci_mode=False)
    if num_threads is not None:
        torch.set_num_threads(num_threads)

    try:
        from tubeground.utility.plotting import configure
    except ModuleNotFoundError as e:
        LOGGER.debug(f"Plotting not configured: {e}")
    else:
        configure()
