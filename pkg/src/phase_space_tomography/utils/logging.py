import logging
import os
from datetime import datetime
from pathlib import Path

from phase_space_tomography.constants import LOG_DIR, LOG_DIR_ENV, LOG_LEVEL_ENV


def setup_logging() -> Path:
    """Setup logging configuration for one tomo invocation."""
    log_level = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
    log_dir = Path(os.getenv(LOG_DIR_ENV, str(LOG_DIR)))

    # Ensure log directory exists
    log_dir.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    log_file = log_dir / f"tomo_{timestamp}.log"

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.FileHandler(log_file)],
    )

    logging.info(f"Logging to: {log_file}")
    return log_file
