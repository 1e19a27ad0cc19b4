import json
import hashlib
import asyncio
from typing import List, Optional, Sequence

import aiosqlite

from certify import IdealTerm
from config import settings
from formats import poly_from_json, poly_to_json
from logger import logger
from polynomial import MultiPolynomial


class CacheManager:
    """Кэш кофакторов принадлежности идеалу"""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = settings.CACHE_DB if db_path is None else db_path
        self.init_lock = asyncio.Lock()
        self.initialized = False

    @property
    def enabled(self) -> bool:
        return bool(self.db_path)

    async def _init_db(self):
        """Инициализация БД"""
        async with self.init_lock:
            if not self.initialized:
                async with aiosqlite.connect(self.db_path) as db:
                    await db.execute("""
                        CREATE TABLE IF NOT EXISTS certificates (
                            id TEXT PRIMARY KEY,
                            generators INTEGER,
                            cofactors_json TEXT,
                            last_access TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                        )
                    """)
                    await db.commit()
                self.initialized = True

    def _get_cache_id(self, target: MultiPolynomial, generators: Sequence[MultiPolynomial]) -> str:
        """ID по сериализованным целевому многочлену и образующим"""
        key = json.dumps({"target": poly_to_json(target), "f": [poly_to_json(g) for g in generators]},
                         sort_keys=True)
        return hashlib.md5(key.encode()).hexdigest()[:16]

    async def get(self, target: MultiPolynomial, generators: Sequence[MultiPolynomial]) -> Optional[List[IdealTerm]]:
        """Получить из кэша"""
        if not self.enabled:
            return None
        cache_id = self._get_cache_id(target, generators)
        try:
            await self._init_db()
            async with aiosqlite.connect(self.db_path) as db:
                db.row_factory = aiosqlite.Row
                cursor = await db.execute(
                    "SELECT cofactors_json FROM certificates WHERE id = ?",
                    (cache_id,)
                )
                row = await cursor.fetchone()
                if row:
                    await db.execute(
                        "UPDATE certificates SET last_access = CURRENT_TIMESTAMP WHERE id = ?",
                        (cache_id,)
                    )
                    await db.commit()
                    data = json.loads(row["cofactors_json"])
                    return [IdealTerm(poly_from_json(t["cofactor"]), int(t["index"])) for t in data]
        except Exception as e:
            logger.warning(f"Ошибка кэша (get): {e}")
        return None

    async def set(self, target: MultiPolynomial, generators: Sequence[MultiPolynomial], terms: List[IdealTerm]):
        """Сохранить в кэш"""
        if not self.enabled:
            return
        cache_id = self._get_cache_id(target, generators)
        cofactors_json = json.dumps([{"cofactor": poly_to_json(t.cofactor), "index": t.index} for t in terms])
        try:
            await self._init_db()
            async with aiosqlite.connect(self.db_path) as db:
                await db.execute(
                    "INSERT OR REPLACE INTO certificates (id, generators, cofactors_json) VALUES (?, ?, ?)",
                    (cache_id, len(generators), cofactors_json)
                )
                await db.commit()
        except Exception as e:
            logger.warning(f"Ошибка кэша (set): {e}")
