import json
from dataclasses import asdict
from fractions import Fraction
from typing import Any, Dict, List

from algnum import AlgebraicReal, CounterexampleReport, FieldCovariance
from certify import ConeTerm, FinalPolynomialCertificate, IdealTerm, SemialgebraicSystem
from ci_core import CIModelSpec, CIStatement, CIStructure
from errors import DataFormatError, UsageError
from minors import GroundSet, RationalCovariance
from polynomial import MultiPolynomial, format_rat, make_monomial, to_rat
from sampler import SampleReport


def read_json(path: str) -> Any:
    """Чтение JSON-файла с переводом ошибок в коды выхода"""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"Файл не найден: {path}")
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path}: некорректный JSON ({e.msg}, строка {e.lineno})")


def dump_json(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True)


def _require(data: Any, key: str, kind: type, where: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise DataFormatError(f"{where}: отсутствует поле {key!r}")
    value = data[key]
    if not isinstance(value, kind):
        raise DataFormatError(f"{where}: поле {key!r} имеет неверный тип")
    return value


def ground_set_from_json(data: Any) -> GroundSet:
    labels = _require(data, "ground_set", list, "ground_set")
    if not all(isinstance(x, str) for x in labels):
        raise DataFormatError("ground_set: метки должны быть строками")
    return GroundSet(labels)


# --- многочлены ---------------------------------------------------------------

def poly_to_json(p: MultiPolynomial) -> List[Dict[str, Any]]:
    return [{"coeff": format_rat(c), "monomial": dict(mono)} for mono, c in p.sorted_terms()]


def poly_from_json(data: Any, table=None) -> MultiPolynomial:
    if not isinstance(data, list):
        raise DataFormatError("Многочлен должен быть списком термов")
    terms: Dict[tuple, Fraction] = {}
    for term in data:
        coeff = to_rat(_require(term, "coeff", (str, int), "терм"))
        monomial = _require(term, "monomial", dict, "терм")
        mono = make_monomial(monomial)
        terms[mono] = terms.get(mono, Fraction(0)) + coeff
    return MultiPolynomial(terms, table)


# --- матрицы --------------------------------------------------------------------

def matrix_to_json(sigma) -> Dict[str, Any]:
    gs = sigma.ground_set
    if isinstance(sigma, FieldCovariance):
        return {
            "ground_set": list(gs.labels),
            "alpha": {
                "minpoly": [format_rat(c) for c in sigma.alpha.coeffs],
                "interval": [format_rat(sigma.alpha.lo), format_rat(sigma.alpha.hi)],
            },
            "entries": [[[format_rat(c) for c in sigma.entry(a, b).coeffs] for b in gs] for a in gs],
        }
    return {"ground_set": list(gs.labels),
            "entries": [[format_rat(v) for v in row] for row in sigma.rows()]}


def matrix_from_json(data: Any):
    """RationalCovariance или FieldCovariance (если есть поле alpha)"""
    gs = ground_set_from_json(data)
    entries = _require(data, "entries", list, "матрица")
    if "alpha" in data:
        alpha_data = _require(data, "alpha", dict, "матрица")
        minpoly = _require(alpha_data, "minpoly", list, "alpha")
        interval = _require(alpha_data, "interval", list, "alpha")
        if len(interval) != 2:
            raise DataFormatError("alpha.interval: нужны две границы")
        alpha = AlgebraicReal(minpoly, (interval[0], interval[1]))
        for row in entries:
            if not isinstance(row, list) or not all(isinstance(c, list) for c in row):
                raise DataFormatError("Элементы матрицы над Q(α) должны быть векторами коэффициентов")
        return FieldCovariance.from_rows(gs, alpha, entries)
    return RationalCovariance.from_rows(gs, entries)


# --- утверждения, модели, структуры -----------------------------------------------

def statement_to_json(s: CIStatement) -> List[Any]:
    return [s.i, s.j, list(s.K)]


def statement_from_json(item: Any, gs: GroundSet) -> CIStatement:
    if (not isinstance(item, list) or len(item) != 3 or not isinstance(item[2], list)
            or not all(isinstance(x, str) for x in item[:2] + item[2])):
        raise DataFormatError(f"Утверждение должно иметь вид [i, j, [K...]]: {item!r}")
    return CIStatement.of(item[0], item[1], item[2], gs)


def spec_to_json(spec: CIModelSpec) -> Dict[str, Any]:
    return {
        "ground_set": list(spec.ground_set.labels),
        "independences": [statement_to_json(s) for s in spec.independences],
        "dependences": [statement_to_json(s) for s in spec.dependences],
    }


def spec_from_json(data: Any) -> CIModelSpec:
    gs = ground_set_from_json(data)
    independences = data.get("independences", [])
    dependences = data.get("dependences", [])
    if not isinstance(independences, list) or not isinstance(dependences, list):
        raise DataFormatError("independences/dependences должны быть списками")
    return CIModelSpec(gs,
                       tuple(statement_from_json(x, gs) for x in independences),
                       tuple(statement_from_json(x, gs) for x in dependences))


def structure_to_json(G: CIStructure) -> Dict[str, Any]:
    return {"ground_set": list(G.ground_set.labels), "statements": [statement_to_json(s) for s in G]}


def structure_from_json(data: Any) -> CIStructure:
    gs = ground_set_from_json(data)
    statements = _require(data, "statements", list, "структура")
    return CIStructure(gs, frozenset(statement_from_json(x, gs) for x in statements))


# --- сертификаты ------------------------------------------------------------------

def certificate_to_json(cert: FinalPolynomialCertificate) -> Dict[str, Any]:
    system = cert.system
    return {
        "name": cert.name,
        "system": {
            "f": [poly_to_json(p) for p in system.f],
            "g": [poly_to_json(p) for p in system.g],
            "h": [poly_to_json(p) for p in system.h],
            "labels": {"f": list(system.f_labels), "g": list(system.g_labels), "h": list(system.h_labels)},
        },
        "target": poly_to_json(cert.target),
        "ideal_part": [{"cofactor": poly_to_json(t.cofactor), "index": t.index} for t in cert.ideal_part],
        "cone_part": [{"weight": format_rat(t.weight), "square": poly_to_json(t.square),
                       "g_indices": list(t.g_indices)} for t in cert.cone_part],
        "monoid_part": list(cert.monoid_part),
    }


def _index(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise DataFormatError(f"{where}: индекс должен быть целым числом")
    return value


def certificate_from_json(data: Any) -> FinalPolynomialCertificate:
    system_data = _require(data, "system", dict, "сертификат")
    labels = system_data.get("labels", {})
    if not isinstance(labels, dict):
        raise DataFormatError("system: поле 'labels' имеет неверный тип")
    for part, names in labels.items():
        if not isinstance(names, list) or not all(isinstance(name, str) for name in names):
            raise DataFormatError(f"system.labels: поле {part!r} должно быть списком строк")
    polys = {part: tuple(poly_from_json(p) for p in _require(system_data, part, list, "system"))
             for part in ("f", "g", "h")}
    system = SemialgebraicSystem(
        f=polys["f"], g=polys["g"], h=polys["h"],
        f_labels=tuple(labels.get("f", ())), g_labels=tuple(labels.get("g", ())), h_labels=tuple(labels.get("h", ())),
    )
    ideal = [IdealTerm(poly_from_json(_require(t, "cofactor", list, "ideal_part")),
                       _index(_require(t, "index", int, "ideal_part"), "ideal_part"))
             for t in _require(data, "ideal_part", list, "сертификат")]
    cone = [ConeTerm(to_rat(_require(t, "weight", (str, int), "cone_part")),
                     poly_from_json(_require(t, "square", list, "cone_part")),
                     tuple(_index(x, "cone_part") for x in _require(t, "g_indices", list, "cone_part")))
            for t in _require(data, "cone_part", list, "сертификат")]
    monoid = [_index(x, "monoid_part") for x in _require(data, "monoid_part", list, "сертификат")]
    return FinalPolynomialCertificate(system, poly_from_json(_require(data, "target", list, "сертификат")),
                                      ideal, cone, monoid, name=str(data.get("name", "")))


# --- отчёты -----------------------------------------------------------------------

def counterexample_report_to_json(report: CounterexampleReport) -> Dict[str, Any]:
    data = asdict(report)
    data.update(confirmed=report.confirmed,
                confirmed_principally_regular=report.confirmed_principally_regular)
    return data


def sample_report_to_json(report: SampleReport) -> Dict[str, Any]:
    """Без времени и путей: одинаковое зерно даёт побайтно одинаковый вывод"""
    return {
        "spec": spec_to_json(report.spec),
        "attempts": report.attempts,
        "accepted": len(report.samples),
        "failures": report.failures,
        "samples": [{"trial": t, "matrix": s.tolist(), "residuals": r}
                    for t, s, r in zip(report.trials, report.samples, report.residuals)],
    }
