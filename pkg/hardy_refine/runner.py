"""Runner module for hardy-refine.

Orchestrates the verification suites behind the CLI subcommands and collects
their outcomes in SuiteResult objects. Independent instances (sweep rows,
random suites) can be spread over a process pool; results are always kept in
input order so reports do not depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from hardy_refine.config import RefineConfig
from hardy_refine.corpus import CORPUS, resolve_function
from hardy_refine.hardy import HardyReport, Verdict, refined_check, run_check
from hardy_refine.logging import get_logger
from hardy_refine.operator import (
    AveragingMap,
    expression_field,
    hansen_check,
    hansen_counterexample_search,
    instance_rng,
    log_grid,
    operator_hardy_refined,
    random_field,
    random_psd,
    random_smooth_field,
    random_unit,
    theorem_a_gap,
    theorem_b_gap,
)
from hardy_refine.quadrature import QuadConfig
from hardy_refine.superquad import (
    Verdict as GridVerdict,
    check_superquadratic,
    convexity_check,
    jensen_gap,
    mp_jensen_gap,
    random_measure,
)

# Module logger
logger = get_logger("runner")

JENSEN_TOL = 1e-10
OPERATOR_JENSEN_TOL = 1e-8
MAX_JENSEN_DIM = 6


@dataclass
class SuiteResult:
    """Outcome of one suite: report records, verdicts and findings."""

    name: str
    records: list[dict[str, Any]] = field(default_factory=list)
    verdicts: list[str] = field(default_factory=list)
    findings: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return Verdict.VIOLATED.value in self.verdicts

    @property
    def exit_code(self) -> int:
        return 2 if self.violated else 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.name,
            "summary": self.summary,
            "records": self.records,
            "findings": self.findings,
        }

    def __repr__(self) -> str:
        return f"SuiteResult({self.name}, records={len(self.records)}, violated={self.violated})"


def _hardy_task(args: tuple[str, str, float, QuadConfig]) -> HardyReport:
    form, spec, p, cfg = args
    return run_check(form, resolve_function(spec), p, cfg)


def _theorem_instance(args: tuple[int, int, str]) -> dict[str, Any]:
    seed, index, spec = args
    f = resolve_function(spec)
    rng = instance_rng(seed, index)
    dim = 2 + index % (MAX_JENSEN_DIM - 1)
    eta = random_unit(rng, dim)
    a = random_psd(rng, dim)
    m = 2 + index % 4
    samples = [random_psd(rng, dim) for _ in range(m)]
    phi = AveragingMap.normalized(rng.uniform(0.05, 1.0, size=m))
    gap_a = theorem_a_gap(a, eta, f)
    gap_b = theorem_b_gap(samples, phi, eta, f)
    return {"index": index, "dim": dim, "points": m, "theorem_a_gap": gap_a.gap, "theorem_b_gap": gap_b.gap}


class VerificationRunner:
    """Runs the verification suites for one resolved configuration."""

    def __init__(self, config: RefineConfig | None = None, jobs: int | None = None):
        """Initialize the runner.

        Args:
            config: Loaded configuration. If None, loads from default locations.
            jobs: Worker processes; defaults to the configured ``jobs``.
        """
        self.config = config or RefineConfig()
        self.jobs = jobs or self.config.get_jobs()

    def _map(self, fn: Callable[[Any], Any], tasks: Iterable[Any]) -> list[Any]:
        tasks = list(tasks)
        if self.jobs <= 1 or len(tasks) <= 1:
            return [fn(t) for t in tasks]
        logger.debug("Running %d tasks on %d workers", len(tasks), self.jobs)
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(fn, tasks))

    # ========== Scalar Hardy ==========

    def verify_hardy(self, spec: str, ps: list[float], form: str, cfg: QuadConfig, name: str = "verify-hardy") -> SuiteResult:
        """One Hardy report per p, in p order."""
        resolve_function(spec)  # fail fast on a bad expression
        reports = self._map(_hardy_task, [(form, spec, p, cfg) for p in ps])
        result = SuiteResult(name)
        for report in reports:
            result.records.append(report.to_dict())
            result.verdicts.append(report.verdict.value)
        result.summary = {
            "function": spec,
            "form": form,
            "reports": len(reports),
            "violated": sum(r.verdict is Verdict.VIOLATED for r in reports),
            "converged": all(r.converged for r in reports),
        }
        return result

    def sweep(self, spec: str, ps: list[float], form: str, cfg: QuadConfig) -> SuiteResult:
        return self.verify_hardy(spec, ps, form, cfg, name="sweep")

    def example(self, cfg: QuadConfig) -> tuple[HardyReport, list[dict[str, Any]]]:
        """The worked example f(t) = 1/(t+1), p = 2, with reference deviations."""
        entry = CORPUS["recip"]
        f = entry.function()
        report = refined_check(f, 2.0, cfg)
        int_f2 = report.diagnostics["power_integral"]["value"]
        references = [
            ("lhs", report.lhs, math.pi**2 / 3),
            ("int_f2", int_f2, 1.0),
            ("correction", report.correction, 2 - math.pi**2 / 6),
            ("refined_rhs", report.refined_rhs, 2 + math.pi**2 / 6),
            ("refined_margin", report.refined_margin, 2 - math.pi**2 / 6),
        ]
        rows = [
            {"quantity": name, "value": value, "reference": ref, "deviation": value - ref}
            for name, value, ref in references
        ]
        return report, rows

    # ========== Superquadratic / Jensen ==========

    def verify_jensen(self, spec: str, grid: list[float], tol: float, trials: int, seed: int) -> SuiteResult:
        """Grid superquadraticity plus the sharpened Jensen gap on random measures."""
        f = resolve_function(spec)
        witness = check_superquadratic(f, grid, tol)
        convexity = convexity_check(f, grid, tol)
        expected = f.meta.get("expected")

        gaps = []
        for i in range(trials):
            rng = instance_rng(seed, i)
            m = random_measure(rng, 2 + i % 7)
            sharp = jensen_gap(f, m)
            classical = mp_jensen_gap(f, m)
            gaps.append({"index": i, "gap": sharp.gap, "classical_gap": classical.gap, "rhs": sharp.rhs})

        result = SuiteResult("verify-jensen")
        result.records = gaps
        status = Verdict.HOLDS
        if expected is not None and expected != witness.verdict.value:
            logger.warning("grid verdict %s does not match expected %s", witness.verdict.value, expected)
            status = Verdict.VIOLATED
        if witness.verdict is GridVerdict.CONSISTENT:
            worst = min((g["gap"] + JENSEN_TOL * max(1.0, abs(g["rhs"])) for g in gaps), default=0.0)
            if worst < 0:
                logger.warning("sharpened Jensen gap negative on a grid-consistent function")
                status = Verdict.VIOLATED
        result.verdicts.append(status.value)
        result.summary = {
            "function": f.describe(),
            "grid": witness.to_dict(),
            "expected": expected,
            "convex_on_grid": convexity.convex,
            "trials": trials,
            "min_gap": min((g["gap"] for g in gaps), default=None),
            "verdict": status.value,
        }
        return result

    # ========== Operator ==========

    def verify_operator(
        self,
        spec: str | None,
        p: float,
        cfg: QuadConfig,
        dim: int,
        grid_points: int,
        trials: int,
        seed: int,
    ) -> SuiteResult:
        """Operator Jensen suites, the refined operator Hardy report and Hansen's check."""
        result = SuiteResult("verify-operator")
        jensen_spec = spec or f"power:{max(p, 2.0)!r}:plus"
        lower, upper = self.config.get_grid_bounds()
        grid = log_grid(lower, upper, grid_points)

        instances = self._map(_theorem_instance, [(seed, i, jensen_spec) for i in range(trials)])
        result.records.extend({"check": "theorem-jensen", **row} for row in instances)
        worst = min((min(r["theorem_a_gap"], r["theorem_b_gap"]) for r in instances), default=0.0)
        jensen_ok = worst >= -OPERATOR_JENSEN_TOL
        result.verdicts.append(Verdict.HOLDS.value if jensen_ok else Verdict.VIOLATED.value)
        result.summary["jensen"] = {"function": jensen_spec, "trials": trials, "min_gap": worst}

        rng = instance_rng(seed, trials)
        eta = random_unit(rng, dim)
        if p >= 2:
            if spec is None:
                fld = random_smooth_field(rng, dim, grid)
            else:
                fld = expression_field(resolve_function(spec), random_psd(rng, dim), grid)
            report = operator_hardy_refined(fld, p, eta, cfg)
            result.records.append({"check": "operator-hardy", **report.to_dict()})
            result.verdicts.append(report.verdict.value)
            result.summary["hardy"] = {"field": fld.describe(), "verdict": report.verdict.value}

        if 1 < p <= 2:
            hansen_tol = self.config.get_hansen_tol()
            slacks = []
            for i in range(trials):
                fld = random_field(instance_rng(seed, trials + 1 + i), dim, grid)
                hansen = hansen_check(fld, p, cfg, tol=hansen_tol)
                slacks.append(hansen.eigmin_slack)
                result.records.append({"check": "hansen", "index": i, **hansen.to_dict()})
                result.verdicts.append(hansen.verdict.value)
            result.summary["hansen"] = {"trials": trials, "min_eigmin_slack": min(slacks, default=None)}
        elif p > 2:
            finding = hansen_counterexample_search(p, trials, seed, tol=self.config.get_hansen_tol())
            if finding is not None:
                result.findings.append(finding.to_dict())
            result.summary["hansen_search"] = {"trials": trials, "found": finding is not None}
        return result
