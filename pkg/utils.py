from typing import Optional, Tuple

import psutil

from minors import GroundSet, split_labels

MAX_FORMULA_LENGTH = 4000


def validate_formula_text(text: str):
    """Проверка строки формулы"""
    if len(text) > MAX_FORMULA_LENGTH:
        return False, f"❌ Слишком длинная формула (макс {MAX_FORMULA_LENGTH} символов)"
    if "=>" not in text:
        return False, "❌ В формуле нет '=>'"
    return True, ""


def validate_symbolic_size(n: int):
    """Размер символической матрицы"""
    if n < 1:
        return False, "❌ Размер должен быть ≥ 1"
    if n > 8:
        return False, "❌ Символические миноры поддерживаются при n ≤ 8"
    return True, ""


def parse_label_list(text: Optional[str], ground_set: GroundSet) -> Tuple[str, ...]:
    """'' → ∅; 'k,l' или 'kl' → метки в порядке N"""
    text = (text or "").strip()
    if not text:
        return ()
    if "," in text:
        labels = [part.strip() for part in text.split(",") if part.strip()]
        ground_set.check(*labels)
        return ground_set.canonical(labels)
    return split_labels(text, ground_set)


def default_ground_set(n: int) -> GroundSet:
    """i, j, k, l для n ≤ 4, иначе 1..n"""
    if n <= 4:
        return GroundSet.of("ijkl"[:n])
    return GroundSet([str(k) for k in range(1, n + 1)])


def memory_usage_mb() -> float:
    """Память процесса (для диагностических логов)"""
    return psutil.Process().memory_info().rss / (1024 * 1024)
