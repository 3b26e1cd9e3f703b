import sys

from loguru import logger

_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | {name}: {message}"


def configure_logging(verbosity: int = 0) -> None:
    """
    Installs the standard-error sink. verbosity < 0 keeps warnings only,
    0 is INFO and > 0 is DEBUG. Library code never calls this.
    """
    if verbosity < 0:
        level = "WARNING"
    elif verbosity == 0:
        level = "INFO"
    else:
        level = "DEBUG"
    logger.remove()
    logger.add(sys.stderr, level=level, format=_FORMAT)
