import logging
import sys

from config import settings


def setup_logger():
    """Настройка логгера"""
    logger = logging.getLogger()
    logger.setLevel(getattr(logging, settings.LOG_LEVEL, logging.WARNING))

    if getattr(logger, "_gci_configured", False):
        return logger

    # Форматтер
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # Консольный вывод (stdout занят результатами)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # Файловый вывод
    if settings.LOG_FILE:
        try:
            file_handler = logging.FileHandler(settings.LOG_FILE, encoding='utf-8')
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError:
            pass

    logger._gci_configured = True
    return logger


logger = setup_logger()
