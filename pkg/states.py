from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from errors import GCIError


class VerdictStatus(str, Enum):
    """Итоги команды check"""
    VALID_CERTIFIED = "valid-certified"
    VALID_BY_RULES = "valid-by-rules"
    FALSIFIED_EXACT = "falsified-exact"
    FALSIFIED_NUMERIC = "falsified-numeric"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self) -> int:
        if self in (VerdictStatus.VALID_CERTIFIED, VerdictStatus.VALID_BY_RULES):
            return 0
        if self in (VerdictStatus.FALSIFIED_EXACT, VerdictStatus.FALSIFIED_NUMERIC):
            return 1
        return 2


@dataclass
class Verdict:
    """Ровно один статус; доказательства обязательны для всех, кроме inconclusive"""
    status: VerdictStatus
    evidence: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        if self.status != VerdictStatus.INCONCLUSIVE and not self.evidence:
            raise GCIError(f"Вердикт {self.status.value} без доказательств")

    def to_json(self, formula: str) -> Dict[str, Any]:
        return {"formula": formula, "status": self.status.value, "evidence": self.evidence}


class CheckState:
    """Состояние конвейера проверки формулы"""

    def __init__(self, formula: str):
        self.formula = formula
        self.stages: List[Dict[str, Any]] = []
        self.verdict: Optional[Verdict] = None

    def record(self, stage: str, outcome: str, **details) -> None:
        self.stages.append({"stage": stage, "outcome": outcome, **details})

    def conclude(self, status: VerdictStatus, *evidence: Dict[str, Any]) -> Verdict:
        self.verdict = Verdict(status, list(evidence))
        return self.verdict

    def inconclusive(self) -> Verdict:
        return self.conclude(VerdictStatus.INCONCLUSIVE, *self.stages)
