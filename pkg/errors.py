from typing import Optional


class GCIError(Exception):
    """Базовая ошибка workbench"""
    exit_code = 70


class UsageError(GCIError):
    """Неверные аргументы командной строки"""
    exit_code = 64


class DataFormatError(GCIError):
    """Некорректные входные данные"""
    exit_code = 65


class SemanticError(GCIError):
    """Корректный формат, но недопустимое использование"""
    exit_code = 66


class VariableTableMismatch(SemanticError):
    pass


class MissingAssignment(DataFormatError):
    pass


class NonSquareMatrix(DataFormatError):
    pass


class StatementError(DataFormatError):
    """Некорректное CI-утверждение (i = j, K пересекает {i,j}, чужая метка)"""


class FormulaSyntaxError(DataFormatError):
    """Синтаксическая ошибка в формуле"""

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None:
            message = f"{message} (позиция {position})"
        super().__init__(message)
        self.position = position


class DisjunctiveRuleError(SemanticError):
    pass


class NotPositiveDefinite(SemanticError):
    pass


class FieldMismatch(SemanticError):
    pass


class ZeroDivisionInField(SemanticError, ZeroDivisionError):
    pass


class CertificateIndexError(DataFormatError):
    pass


class BudgetExceeded(GCIError):
    pass
