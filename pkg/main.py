#!/usr/bin/env python3
import argparse
import asyncio
import sys
from typing import List, Optional

from config import settings
from errors import GCIError
from handlers import CommandHandlers
from logger import logger


def build_parser(handlers: CommandHandlers) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gci",
        description="Вывод гауссовских условных независимостей: миноры, сертификаты, контрпримеры",
    )
    handlers.register_handlers(parser)
    return parser


async def main(argv: Optional[List[str]] = None) -> int:
    """Разбор аргументов и запуск подкоманды; возвращает код выхода"""
    handlers = CommandHandlers()
    parser = build_parser(handlers)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse завершает процесс с кодом 2 при ошибке разбора
        return 0 if not e.code else 64

    for name in settings.bad_env:
        logger.warning(f"⚠️ Некорректное значение {name}, используется значение по умолчанию")

    logger.info(f"🚀 gci {args.command}")
    try:
        return await args.handler(args)
    except GCIError as e:
        logger.warning(f"❌ {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"❌ Непредвиденная ошибка: {e}", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return 70


if __name__ == "__main__":
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        logger.info("👋 Остановлено пользователем")
        sys.exit(130)
