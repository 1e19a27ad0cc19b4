import argparse
import os
from typing import Any, Dict, Optional

import numpy as np

from algnum import verify_counterexample
from axioms import BUILTIN_RULES, RuleSet, closure, parse_rules, prove_by_rules, resolve_rules
from base_sampler import SamplerConfig
from cache import CacheManager
from certify import (certificate_for_formula, lookup, search_monoid_certificate,
                     verify_final_polynomial)
from ci_core import CIModelSpec, InferenceFormula, parse_formula
from config import settings
from errors import DataFormatError, UsageError
from formats import (certificate_from_json, certificate_to_json, counterexample_report_to_json,
                     dump_json, matrix_from_json, poly_to_json, read_json, sample_report_to_json,
                     spec_from_json, structure_from_json, structure_to_json)
from groebner import GroebnerBudget
from logger import logger
from minors import almost_principal_minor, principal_minor, symbolic_covariance
from polynomial import MultiPolynomial, format_rat
from sampler import pappus_check, pappus_check_exact, sample_model_async, search_counterexample_async
from states import CheckState, Verdict, VerdictStatus
from utils import default_ground_set, memory_usage_mb, parse_label_list, validate_formula_text, validate_symbolic_size

WITNESS_INDEX = "witnesses.json"


def _formula_key(formula: InferenceFormula):
    return (formula.ground_set, frozenset(formula.antecedents), frozenset(formula.consequents))


class CommandHandlers:
    """Обработчики подкоманд"""

    def __init__(self):
        self.cache = CacheManager()

    def register_handlers(self, parser: argparse.ArgumentParser):
        """Регистрация всех подкоманд"""
        subparsers = parser.add_subparsers(dest="command", required=True)
        commands = [
            ("minor", self.handle_minor, self._minor_args, "точный минор матрицы"),
            ("check", self.handle_check, self._check_args, "проверка формулы вывода"),
            ("verify-cert", self.handle_verify_cert, self._verify_cert_args, "проверка сертификата"),
            ("verify-cx", self.handle_verify_cx, self._verify_cx_args, "проверка контрпримера"),
            ("sample", self.handle_sample, self._sample_args, "выборка точек модели"),
            ("closure", self.handle_closure, self._closure_args, "замыкание CI-структуры"),
            ("pappus", self.handle_pappus, self._pappus_args, "проверка теоремы Паппа"),
            ("export-cert", self.handle_export_cert, self._export_cert_args, "выгрузка встроенного сертификата"),
        ]
        for command, handler, add_args, help_text in commands:
            sub = subparsers.add_parser(command, help=help_text)
            add_args(sub)
            sub.add_argument("--json", action="store_true", help="вывод в JSON")
            sub.set_defaults(handler=handler)

    # --- аргументы ---------------------------------------------------------------

    @staticmethod
    def _minor_args(sub):
        sub.add_argument("matrix", nargs="?", help="JSON-файл матрицы")
        sub.add_argument("--symbolic", type=int, metavar="N", help="символическая матрица N×N")
        group = sub.add_mutually_exclusive_group(required=True)
        group.add_argument("--principal", metavar="K", help="главный минор [K]")
        group.add_argument("--apm", nargs="+", metavar="LABEL", help="почти главный минор: i j [K]")

    @staticmethod
    def _check_args(sub):
        sub.add_argument("formula", help="формула или путь к файлу с формулой")
        sub.add_argument("--rules", help="файл дополнительных правил")
        sub.add_argument("--budget", type=int, help="бюджет поиска")
        sub.add_argument("--seed", type=int, help="зерно генератора")
        sub.add_argument("--skip-witnesses", action="store_true", help="не использовать поставляемые контрпримеры")

    @staticmethod
    def _verify_cert_args(sub):
        sub.add_argument("certificate", help="JSON-файл сертификата")

    @staticmethod
    def _verify_cx_args(sub):
        sub.add_argument("matrix", help="JSON-файл матрицы (над Q или Q(α))")
        sub.add_argument("formula", help="формула вывода")

    @staticmethod
    def _sample_args(sub):
        sub.add_argument("spec", help="JSON-файл модели")
        sub.add_argument("--config", help="JSON-файл параметров сэмплера")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--budget", type=int)
        sub.add_argument("--samples", type=int)
        sub.add_argument("--eps-eq", type=float)
        sub.add_argument("--eps-dep", type=float)
        sub.add_argument("--max-iter", type=int)
        sub.add_argument("--workers", type=int)

    @staticmethod
    def _closure_args(sub):
        sub.add_argument("structure", help="JSON-файл структуры")
        sub.add_argument("--rules", default="semigraphoid-half",
                         help="имена встроенных правил через запятую или файл правил")

    @staticmethod
    def _pappus_args(sub):
        sub.add_argument("--trials", type=int, default=1000)
        sub.add_argument("--seed", type=int, help="зерно генератора")

    @staticmethod
    def _export_cert_args(sub):
        sub.add_argument("name", help="имя сертификата, например lm20")
        sub.add_argument("-o", "--output", help="файл для записи")

    # --- вспомогательное ------------------------------------------------------------

    @staticmethod
    def _emit(args, data: Any, text: Optional[str] = None):
        if args.json or text is None:
            print(dump_json(data))
        else:
            print(text)

    @staticmethod
    def _read_formula(value: str) -> InferenceFormula:
        text = value
        if os.path.isfile(value):
            with open(value, encoding="utf-8") as fh:
                text = fh.read().strip()
        ok, msg = validate_formula_text(text)
        if not ok:
            raise DataFormatError(msg)
        return parse_formula(text)

    @staticmethod
    def _rules(value: Optional[str], base: RuleSet) -> RuleSet:
        if not value:
            return base
        if os.path.isfile(value):
            with open(value, encoding="utf-8") as fh:
                return base.merged(parse_rules(fh.read()))
        return resolve_rules(name.strip() for name in value.split(",") if name.strip())

    # --- подкоманды -------------------------------------------------------------------

    async def handle_minor(self, args) -> int:
        """Обработка minor"""
        if (args.matrix is None) == (args.symbolic is None):
            raise UsageError("Укажите либо файл матрицы, либо --symbolic N")
        if args.symbolic is not None:
            ok, msg = validate_symbolic_size(args.symbolic)
            if not ok:
                raise UsageError(msg)
            sigma = symbolic_covariance(default_ground_set(args.symbolic))
        else:
            sigma = matrix_from_json(read_json(args.matrix))
        gs = sigma.ground_set
        if args.principal is not None:
            K = parse_label_list(args.principal, gs)
            label = f"[{''.join(K)}]"
            value = principal_minor(K, sigma)
        else:
            if len(args.apm) not in (2, 3):
                raise UsageError("--apm принимает i j [K]")
            i, j = args.apm[0], args.apm[1]
            K = parse_label_list(args.apm[2] if len(args.apm) == 3 else "", gs)
            label = f"[{i}{j}|{''.join(K)}]"
            value = almost_principal_minor(i, j, K, sigma)
        if isinstance(value, MultiPolynomial):
            text, encoded = value.to_string(), poly_to_json(value)
        else:
            text = format_rat(value) if not hasattr(value, "coeffs") else str(value)
            encoded = text
        self._emit(args, {"minor": label, "value": encoded}, text)
        return 0

    async def handle_check(self, args) -> int:
        """Обработка check: правила → сертификаты → контрпримеры"""
        formula = self._read_formula(args.formula)
        rules = self._rules(args.rules, BUILTIN_RULES)
        state = CheckState(str(formula))
        budget = args.budget if args.budget is not None else settings.BUDGET
        verdict = await self._check_pipeline(formula, rules, budget, args, state)
        logger.info(f"🧾 {formula}: {verdict.status.value}")
        data = verdict.to_json(str(formula))
        self._emit(args, data, f"{verdict.status.value}: {formula}")
        return verdict.status.exit_code

    async def _check_pipeline(self, formula: InferenceFormula, rules: RuleSet, budget: int,
                              args, state: CheckState) -> Verdict:
        proof = prove_by_rules(formula, rules, max_nodes=budget)
        if proof.proved:
            return state.conclude(VerdictStatus.VALID_BY_RULES,
                                  {"stage": "rules", "rules": [r.name for r in rules], "trace": proof.trace})
        state.record("rules", proof.reason or "not-proved", nodes=proof.nodes)

        cert = certificate_for_formula(formula)
        if cert is None:
            pairs = max(1, min(settings.GROEBNER_MAX_PAIRS, budget))
            cert = await search_monoid_certificate(
                CIModelSpec.from_formula(formula), self.cache,
                GroebnerBudget(settings.GROEBNER_MAX_BASIS, pairs))
        if cert is not None:
            check = verify_final_polynomial(cert)
            if check.valid:
                return state.conclude(VerdictStatus.VALID_CERTIFIED,
                                      {"stage": "certificate", "name": cert.name, "check": check.verdict})
            state.record("certificate", check.verdict, failed=check.failed)
        else:
            state.record("certificate", "none")

        if not args.skip_witnesses:
            evidence = self._shipped_witness(formula)
            if evidence is not None:
                return state.conclude(VerdictStatus.FALSIFIED_EXACT, evidence)
            state.record("witness", "none")

        config = SamplerConfig.from_settings(seed=args.seed, budget=budget)
        report = await search_counterexample_async(formula, config)
        if report.samples:
            return state.conclude(VerdictStatus.FALSIFIED_NUMERIC, {
                "stage": "numeric",
                "trial": report.trials[0],
                "attempts": report.attempts,
                "matrix": report.samples[0].tolist(),
                "residuals": report.residuals[0],
            })
        state.record("numeric", "no-hit", attempts=report.attempts, failures=report.failures)
        return state.inconclusive()

    @staticmethod
    def _shipped_witness(formula: InferenceFormula) -> Optional[Dict[str, Any]]:
        index_path = os.path.join(settings.FIXTURES_DIR, WITNESS_INDEX)
        if not os.path.isfile(index_path):
            return None
        key = _formula_key(formula)
        for entry in read_json(index_path):
            candidate = parse_formula(entry["formula"])
            if _formula_key(candidate) != key:
                continue
            path = os.path.join(settings.FIXTURES_DIR, entry["matrix"])
            report = verify_counterexample(matrix_from_json(read_json(path)), formula)
            if report.confirmed:
                return {"stage": "witness", "matrix": entry["matrix"],
                        "report": counterexample_report_to_json(report)}
            logger.warning(f"⚠️ Поставляемый контрпример {entry['matrix']} не подтвердился")
        return None

    async def handle_verify_cert(self, args) -> int:
        """Обработка verify-cert"""
        cert = certificate_from_json(read_json(args.certificate))
        check = verify_final_polynomial(cert)
        data = {"name": cert.name, "verdict": check.verdict, "failed": check.failed, "detail": check.detail}
        text = check.verdict if check.valid else f"{check.verdict}: {check.failed} identity fails ({check.detail})"
        self._emit(args, data, text)
        return 0 if check.valid else 1

    async def handle_verify_cx(self, args) -> int:
        """Обработка verify-cx"""
        sigma = matrix_from_json(read_json(args.matrix))
        formula = parse_formula(args.formula, sigma.ground_set)
        report = verify_counterexample(sigma, formula)
        lines = [f"formula: {report.formula}",
                 f"positive definite: {report.positive_definite}",
                 f"principally regular: {report.principally_regular}"]
        lines += [f"  {m.label} = {m.value}" for m in report.principal_minors]
        lines += [f"antecedent {m.label} = {m.value}" for m in report.antecedents]
        lines += [f"consequent {m.label} = {m.value}" for m in report.consequents]
        lines += [f"reason: {r}" for r in report.reasons]
        lines.append("confirmed" if report.confirmed else "refuted")
        self._emit(args, counterexample_report_to_json(report), "\n".join(lines))
        return 0 if report.confirmed else 1

    async def handle_sample(self, args) -> int:
        """Обработка sample"""
        spec = spec_from_json(read_json(args.spec))
        overrides = {}
        if args.config:
            data = read_json(args.config)
            if not isinstance(data, dict):
                raise DataFormatError("Файл параметров должен быть объектом JSON")
            overrides.update(data)
        overrides.update(seed=args.seed, budget=args.budget, samples=args.samples, eps_eq=args.eps_eq,
                         eps_dep=args.eps_dep, max_iter=args.max_iter, workers=args.workers)
        try:
            config = SamplerConfig.from_settings(**{k: v for k, v in overrides.items() if v is not None})
        except TypeError as e:
            raise DataFormatError(f"Неизвестный параметр сэмплера: {e}")
        report = await sample_model_async(spec, config)
        logger.info(f"📈 Память процесса: {memory_usage_mb():.1f} MB")
        print(dump_json(sample_report_to_json(report)))
        return 0 if report.samples else 2

    async def handle_closure(self, args) -> int:
        """Обработка closure"""
        G = structure_from_json(read_json(args.structure))
        rules = self._rules(args.rules, RuleSet())
        print(dump_json(structure_to_json(closure(G, rules))))
        return 0

    async def handle_pappus(self, args) -> int:
        """Обработка pappus: численная и точная проверки"""
        seed = args.seed if args.seed is not None else settings.SEED
        numeric = pappus_check(args.trials, np.random.default_rng(seed))
        exact = pappus_check_exact(min(args.trials, 200), seed)
        data = {
            "numeric": {"trials": numeric.trials, "nondegenerate": numeric.nondegenerate,
                        "discarded": numeric.discarded, "max_normalized": numeric.max_normalized},
            "exact": {"trials": exact.trials, "nondegenerate": exact.nondegenerate,
                      "discarded": exact.discarded, "violations": exact.violations},
        }
        ok = numeric.max_normalized <= 1e-9 and exact.violations == 0
        text = (f"numeric: max |[ghi]| = {numeric.max_normalized:.3e} on {numeric.nondegenerate} trials "
                f"({numeric.discarded} discarded); exact: {exact.violations} violations")
        self._emit(args, data, text)
        return 0 if ok else 1

    async def handle_export_cert(self, args) -> int:
        """Обработка export-cert"""
        cert = lookup(args.name)
        if cert is None:
            raise UsageError(f"Нет встроенного сертификата {args.name!r}")
        text = dump_json(certificate_to_json(cert))
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
            logger.info(f"✅ Сертификат {cert.name} записан в {args.output}")
        else:
            print(text)
        return 0
