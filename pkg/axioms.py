from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, Iterable, List, Optional, Tuple

from ci_core import CIStatement, CIStructure, InferenceFormula, parse_formula
from config import settings
from errors import DataFormatError, DisjunctiveRuleError
from logger import logger
from minors import GroundSet

SEMIGRAPHOID_HALF = "semigraphoid-half"
WEAK_TRANSITIVITY_GENERAL = "weak-transitivity"


@dataclass(frozen=True)
class Instance:
    """Конкретный экземпляр правила над N"""
    rule: str
    antecedents: Tuple[CIStatement, ...]
    consequents: Tuple[CIStatement, ...]

    def __str__(self) -> str:
        lhs = " & ".join(map(str, self.antecedents))
        rhs = " | ".join(map(str, self.consequents))
        return f"{lhs} => {rhs}"


class InferenceRule:
    """Шаблон формулы со схематическими метками"""

    def __init__(self, name: str, template: InferenceFormula):
        if not template.antecedents:
            raise DataFormatError(f"Правило {name}: пустой список посылок")
        self.name = name
        self.template = template

    @classmethod
    def from_text(cls, name: str, text: str) -> "InferenceRule":
        return cls(name, parse_formula(text))

    @property
    def is_conjunctive(self) -> bool:
        return len(self.template.consequents) == 1

    def instances(self, ground_set: GroundSet) -> List[Instance]:
        """Инъективные подстановки меток × расширения условного множества"""
        labels = self.template.ground_set.labels
        if len(labels) > ground_set.n:
            return []
        result = []
        for image in permutations(ground_set.labels, len(labels)):
            sub = dict(zip(labels, image))
            free = [x for x in ground_set.labels if x not in image]
            for L in ground_set.subsets(among=free):
                def inst(s: CIStatement) -> CIStatement:
                    return CIStatement.of(sub[s.i], sub[s.j], [sub[k] for k in s.K] + list(L), ground_set)
                result.append(Instance(
                    self.name,
                    tuple(inst(s) for s in self.template.antecedents),
                    tuple(inst(s) for s in self.template.consequents),
                ))
        return list(dict.fromkeys(result))

    def __repr__(self) -> str:
        return f"InferenceRule({self.name}: {self.template})"


class RuleSet:
    """Именованный список правил"""

    def __init__(self, rules: Iterable[InferenceRule] = ()):
        self.rules: Dict[str, InferenceRule] = {}
        for rule in rules:
            self.add(rule)

    def add(self, rule: InferenceRule) -> None:
        if rule.name in self.rules:
            raise DataFormatError(f"Правило {rule.name} уже есть в наборе")
        self.rules[rule.name] = rule

    def __iter__(self):
        return iter(self.rules.values())

    def __len__(self) -> int:
        return len(self.rules)

    def __contains__(self, name: str) -> bool:
        return name in self.rules

    def get(self, name: str) -> Optional[InferenceRule]:
        return self.rules.get(name)

    def merged(self, other: "RuleSet") -> "RuleSet":
        return RuleSet(list(self) + [r for r in other if r.name not in self.rules])

    def instances(self, ground_set: GroundSet) -> List[Instance]:
        result = []
        for rule in self:
            result.extend(rule.instances(ground_set))
        return result


BUILTIN_RULES = RuleSet([
    InferenceRule.from_text(SEMIGRAPHOID_HALF, "[A,C|B] & [A,B|] => [A,C|]"),
    InferenceRule.from_text(WEAK_TRANSITIVITY_GENERAL, "[i,j|] & [i,j|k] => [i,k|] | [j,k|]"),
])


def parse_rules(text: str, prefix: str = "rule") -> RuleSet:
    """Файл правил: одна формула на строку (`имя: формула` или просто формула), строки с # пропускаются"""
    rules = RuleSet()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name = f"{prefix}-{lineno}"
        if ":" in line:
            name, line = (part.strip() for part in line.split(":", 1))
        try:
            rules.add(InferenceRule.from_text(name, line))
        except DataFormatError as e:
            raise DataFormatError(f"Строка {lineno}: {e}")
    return rules


def resolve_rules(names: Iterable[str]) -> RuleSet:
    """Встроенные правила по именам"""
    rules = RuleSet()
    for name in names:
        rule = BUILTIN_RULES.get(name)
        if rule is None:
            raise DataFormatError(f"Неизвестное встроенное правило: {name}")
        rules.add(rule)
    return rules


# --- проверка и замыкание ----------------------------------------------------------

def satisfies(G: CIStructure, rule: InferenceRule) -> Tuple[bool, Optional[Instance]]:
    """Каждый экземпляр со всеми посылками в G имеет хотя бы одно следствие в G"""
    for inst in rule.instances(G.ground_set):
        if all(s in G for s in inst.antecedents) and not any(s in G for s in inst.consequents):
            return False, inst
    return True, None


def closure(G: CIStructure, rules: RuleSet) -> CIStructure:
    """Наименьшая неподвижная точка, содержащая G"""
    for rule in rules:
        if not rule.is_conjunctive:
            raise DisjunctiveRuleError(f"Правило {rule.name} дизъюнктивно, замыкание не определено")
    instances = rules.instances(G.ground_set)
    current = set(G.statements)
    changed = True
    while changed:
        changed = False
        for inst in instances:
            consequent = inst.consequents[0]
            if consequent not in current and all(s in current for s in inst.antecedents):
                current.add(consequent)
                changed = True
    return CIStructure(G.ground_set, frozenset(current))


# --- доказательство перебором случаев ----------------------------------------------

PROVED = "proved"
NOT_PROVED = "not-proved"


@dataclass
class ProofResult:
    """Результат доказательства правилами"""
    verdict: str
    trace: List[str] = field(default_factory=list)
    reason: Optional[str] = None
    countermodel: Optional[CIStructure] = None
    nodes: int = 0

    @property
    def proved(self) -> bool:
        return self.verdict == PROVED


class _Budget(Exception):
    pass


class _Search:
    """DPLL по клаузам ¬a₁ ∨ … ∨ ¬aₖ ∨ c₁ ∨ … ∨ cₘ"""

    def __init__(self, instances: List[Instance], max_depth: int, max_nodes: int):
        self.instances = instances
        self.max_depth = max_depth
        self.max_nodes = max_nodes
        self.nodes = 0
        self.trace: List[str] = []
        self.model: Optional[Dict[CIStatement, bool]] = None

    def _literals(self, inst: Instance):
        return [(s, False) for s in inst.antecedents] + [(s, True) for s in inst.consequents]

    def propagate(self, assign: Dict[CIStatement, bool], depth: int) -> Optional[Instance]:
        """Распространение единичных клауз; возвращает нарушенный экземпляр"""
        changed = True
        while changed:
            changed = False
            for inst in self.instances:
                open_lits = []
                satisfied = False
                for stmt, polarity in self._literals(inst):
                    value = assign.get(stmt)
                    if value is None:
                        open_lits.append((stmt, polarity))
                    elif value == polarity:
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not open_lits:
                    self.trace.append(f"{'  ' * depth}✗ {inst.rule}: {inst}")
                    return inst
                if len(open_lits) == 1:
                    stmt, polarity = open_lits[0]
                    assign[stmt] = polarity
                    mark = "" if polarity else "¬"
                    self.trace.append(f"{'  ' * depth}{inst.rule}: {inst} ⊢ {mark}{stmt}")
                    changed = True
        return None

    def _branch_variable(self, assign: Dict[CIStatement, bool]) -> Optional[CIStatement]:
        for inst in self.instances:
            lits = self._literals(inst)
            if any(assign.get(s) == p for s, p in lits):
                continue
            for stmt, _ in lits:
                if stmt not in assign:
                    return stmt
        return None

    def refute(self, assign: Dict[CIStatement, bool], depth: int) -> bool:
        """True, если все ветви противоречивы"""
        self.nodes += 1
        if self.nodes > self.max_nodes or depth > self.max_depth:
            raise _Budget()
        if self.propagate(assign, depth) is not None:
            return True
        stmt = self._branch_variable(assign)
        if stmt is None:
            self.model = dict(assign)
            return False
        for value in (False, True):
            self.trace.append(f"{'  ' * depth}? {'' if value else '¬'}{stmt}")
            if not self.refute({**assign, stmt: value}, depth + 1):
                return False
        return True


def prove_by_rules(formula: InferenceFormula, rules: RuleSet = BUILTIN_RULES,
                   max_depth: Optional[int] = None, max_nodes: Optional[int] = None) -> ProofResult:
    """Посылки истинны, следствия ложны; противоречие во всех ветвях означает доказательство"""
    gs = formula.ground_set
    search = _Search(rules.instances(gs),
                     max_depth if max_depth is not None else settings.PROOF_DEPTH,
                     max_nodes if max_nodes is not None else settings.BUDGET)
    assign: Dict[CIStatement, bool] = {}
    for s in formula.antecedents:
        assign[s] = True
    for s in formula.consequents:
        if assign.get(s) is True:
            return ProofResult(PROVED, [f"{s} одновременно посылка и следствие"])
        assign[s] = False
    try:
        refuted = search.refute(assign, 0)
    except _Budget:
        logger.warning(f"⚠️ Бюджет поиска исчерпан для {formula} ({search.nodes} узлов)")
        return ProofResult(NOT_PROVED, search.trace, reason="budget", nodes=search.nodes)
    if refuted:
        logger.info(f"✅ Доказано правилами: {formula}")
        return ProofResult(PROVED, search.trace, nodes=search.nodes)
    model = CIStructure(gs, frozenset(s for s, v in (search.model or {}).items() if v))
    return ProofResult(NOT_PROVED, search.trace, reason="countermodel", countermodel=model, nodes=search.nodes)
