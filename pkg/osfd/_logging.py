import logging
import os
import sys
from typing import Optional, Union

FORMAT = "[%(levelname)s] [%(asctime)s] %(name)-16s : %(message)s "
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def get_logger(
    name: Optional[str] = None, level: Optional[Union[int, str]] = None
) -> logging.Logger:
    """
    Logger with the project's stream handler attached

    Parameters
    ----------
    name : str, optional
        Logger name. Defaults to the package logger, ``"osfd"``.
    level : {int, str}, optional
        Logging level. If not provided, ``OSFD_LOG_LEVEL`` is used and
        then ``"WARNING"``.

    Returns
    -------
    logging.Logger
        Configured logger. Calling again does not attach a second handler.
    """
    logger = logging.getLogger("osfd" if name is None else name)
    if level is None:
        level = os.environ.get("OSFD_LOG_LEVEL", "WARNING")
    if isinstance(level, str):
        level = level.upper()
    logger.setLevel(level)
    if not any(getattr(h, "_osfd_handler", False) for h in logger.handlers):
        formatter = logging.Formatter(FORMAT, DATE_FORMAT)
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(formatter)
        handler._osfd_handler = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    return logger
