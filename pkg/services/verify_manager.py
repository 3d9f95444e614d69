import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from numerics import bounds
from numerics.cycles import OneForm, integrate_form
from numerics.monodromy import (
    build_K,
    monodromy_at_infinity,
    oval_decomposition,
    pl_continuation_residuals,
    sigma_interval,
    source_oval_decomposition,
)
from numerics.periods import circle_samples, delta0_audit, determinant_monodromy_check, determinant_polynomiality_check
from numerics.polynomial_core import Polynomial2, balance, critical_points, is_ultra_morse
from numerics.zerocount import AnalyticProbe, Contour, growth_zeros_check, kry_check, petrov_audit, petrov_reality, winding_count
from .analysis_manager import load_polynomial, polynomial_digest
from .report_writer import GroupResult, VerifyDocument

logger = logging.getLogger(__name__)

GROUPS = (
    "critical_points",
    "normalization",
    "exactness",
    "winding_oracle",
    "picard_lefschetz",
    "determinant",
    "geometric_lemma",
    "construction",
    "growth_kry",
    "bounds",
    "petrov",
    "infinity",
    "mardesic",
)

EXACT_FORMS = 20
WINDING_TRIALS = 50
SWEEP_GAPS = (1.0, 0.5, 0.1, 0.01)

# real oval around two minima and a saddle: H = 0.1 through (1.354, 0)
EIGHT_FIGURE = Polynomial2.from_terms({(4, 0): 1.0, (0, 4): 1.0, (2, 0): -2.0, (0, 2): 1.0, (1, 0): 0.3, (1, 1): 0.1})
EIGHT_FIGURE_OVAL = (0.1, (1.354, 0.0))


@dataclass
class GroupOutcome:
    name: str
    passed: bool
    detail: str


class VerifyManager:
    """Runs the self-audit groups against the configured input; shared state is built lazily"""

    def __init__(self, db_manager, writer, analysis_manager, monodromy_manager, zero_count_manager):
        self.db = db_manager
        self.writer = writer
        self.analysis = analysis_manager
        self.monodromy = monodromy_manager
        self.zero_count = zero_count_manager

    @property
    def config(self):
        return self.analysis.config

    @cached_property
    def ctx(self):
        return self.analysis.prepare()

    @cached_property
    def system(self):
        return self.monodromy.build_system(self.ctx)

    @cached_property
    def oval_setup(self):
        return self.zero_count.oval_context()

    @cached_property
    def oval_system(self):
        ctx, _ = self.oval_setup
        return self.monodromy.build_system(ctx)

    @cached_property
    def probe(self):
        ctx, oval = self.oval_setup
        return self.zero_count.probe(ctx, oval, self.config.one_form)

    @cached_property
    def sigma_zeros(self):
        ctx, _ = self.oval_setup
        return self.zero_count.count_on_sigma(ctx, self.probe)

    # ------------------------------------------------------------ groups

    def check_critical_points(self) -> GroupOutcome:
        tol = self.config.tolerances
        source = load_polynomial(self.config.input)
        crit = critical_points(source, tol)
        verdict = is_ultra_morse(source, tol)
        gradient = max((max(abs(g) for g in source.gradient(*cp.location)) for cp in crit), default=0.0) / source.scale
        n = source.n
        passed = verdict.ok and len(crit) == n * n and all(cp.morse for cp in crit) and gradient <= 1e-9
        detail = f"{len(crit)} of {n * n} Morse points, max |grad H| {gradient:.2e}; {verdict.diagnosis}"
        if not verdict.ok:
            detail += f" (clause {verdict.clause})"
        return GroupOutcome("critical_points", passed, detail)

    def check_normalization(self) -> GroupOutcome:
        report, n = self.ctx.report, self.ctx.n
        _, a, b = balance(report.balanced, self.ctx.tol, seed=self.config.seed)
        drift = max(abs(a - 1), abs(b))
        radius = max(abs(v) for v in report.critical_values)
        nu_error = abs(report.nu - report.c_doubleprime / (4 * n * n))
        passed = (
            0 < report.c_prime <= 1
            and 0 < report.c_doubleprime <= 1
            and nu_error <= 1e-12
            and radius <= 2 * (1 + 1e-9)
            and drift <= 1e-9
        )
        detail = (
            f"c'={report.c_prime:.6g}, c''={report.c_doubleprime:.6g}, nu={report.nu:.6g}, "
            f"max |value| {radius:.9g}, rebalance drift {drift:.2e}"
        )
        return GroupOutcome("normalization", passed, detail)

    def check_exactness(self) -> GroupOutcome:
        ctx, oval = self.oval_setup
        cycles = [oval, *self.system.deltas]
        rng = np.random.default_rng(self.config.seed)
        worst = 0.0
        for _ in range(EXACT_FORMS):
            degree = int(rng.integers(1, ctx.n + 2))
            terms = {(i, j): float(rng.normal()) for i in range(degree + 1) for j in range(degree + 1 - i)}
            f = Polynomial2.from_terms(terms, strict=False)
            scale = max(1.0, sum(abs(v) for v in terms.values()))
            form = OneForm.exact(f)
            for c in cycles:
                worst = max(worst, abs(integrate_form(c, form, ctx.tol)) / scale)
        passed = worst <= 1e-8
        return GroupOutcome("exactness", passed, f"{EXACT_FORMS} exact forms over {len(cycles)} cycles, worst {worst:.2e}")

    def check_winding_oracle(self) -> GroupOutcome:
        tol = self.config.tolerances
        rng = np.random.default_rng(self.config.seed)
        mismatches = []
        for trial in range(WINDING_TRIALS):
            degree = int(rng.integers(1, 7))
            roots = rng.normal(size=degree) + 1j * rng.normal(size=degree)
            center = 0.5 * complex(rng.normal(), rng.normal())
            radius = float(rng.uniform(0.3, 2.0))
            while np.min(np.abs(np.abs(roots - center) - radius)) < 0.05:
                radius += 0.1
            coeffs = np.poly(roots)
            probe = AnalyticProbe(lambda t, c=coeffs: complex(np.polyval(c, t)))
            observed = winding_count(probe, Contour.circle(center, radius), tol)
            expected = int(np.sum(np.abs(roots - center) < radius))
            if observed != expected:
                mismatches.append((trial, observed, expected))
        detail = f"{WINDING_TRIALS - len(mismatches)} of {WINDING_TRIALS} random polynomials counted exactly"
        if mismatches:
            detail += f"; mismatches (trial, observed, expected) {mismatches[:5]}"
        return GroupOutcome("winding_oracle", not mismatches, detail)

    def check_picard_lefschetz(self) -> GroupOutcome:
        residuals = pl_continuation_residuals(self.system)
        worst = max(residuals.values()) if residuals else 0.0
        passed = worst <= self.ctx.tol.pl_rtol
        return GroupOutcome("picard_lefschetz", passed, f"{len(residuals)} pairs, worst relative residual {worst:.2e}")

    def check_determinant(self) -> GroupOutcome:
        system = self.system
        loops = list(system.lambdas)
        if len(loops) >= 2:
            loops.append(loops[0].then(loops[1], "lambda_0*lambda_1"))
        check = determinant_monodromy_check(system, loops)
        fit = determinant_polynomiality_check(system, circle_samples(1.5, 10))
        lower = delta0_audit(system.base_periods, self.ctx.report)
        worst = max(check.residuals.values()) if check.residuals else 0.0
        passed = check.passed and fit.residual <= self.ctx.tol.fit_rtol and lower
        detail = (
            f"{len(loops)} loops, worst change {worst:.2e}; fit degree {fit.degree} residual {fit.residual:.2e}; "
            f"log|det| {system.base_periods.log_abs_det:.6g}, lower bound {'holds' if lower else 'fails'}"
        )
        return GroupOutcome("determinant", passed, detail)

    def check_geometric_lemma(self) -> GroupOutcome:
        _, oval = self.oval_setup
        signs = oval_decomposition(self.oval_system, oval)
        level, seed = EIGHT_FIGURE_OVAL
        _, eight = source_oval_decomposition(EIGHT_FIGURE, level, seed, self.config.tolerances)
        passed = np.count_nonzero(eight) == 3
        detail = f"oval = {signs.tolist()} in the delta basis; eight-figure oval = {eight.tolist()}"
        return GroupOutcome("geometric_lemma", bool(passed), detail)

    def check_construction(self) -> GroupOutcome:
        _, oval = self.oval_setup
        K = build_K(self.oval_system, oval=oval, form=self.config.one_form)
        failed = [c for c in K.edge_checks if not c.passed]
        value_ok = K.value_check is None or K.value_check.get("passed", True)
        passed = not failed and value_ok
        detail = (
            f"{len(K.edge_checks)} lifted edges, diam K' {K.intrinsic_diameter_K_prime:.4g}, "
            f"diam K {K.intrinsic_diameter_K:.4g}, clearance {K.clearance:.4g}"
        )
        if failed:
            detail += f"; failing edges {[(c.parent, c.child) for c in failed]}"
        return GroupOutcome("construction", passed, detail)

    def check_growth_kry(self) -> GroupOutcome:
        tol = self.config.tolerances
        identity = AnalyticProbe(lambda t: t, label="z")
        segment = Contour.segment(-1, 1, count=64)
        growth = growth_zeros_check(identity, [segment], [Contour.circle(0, 2)], [0j])
        kry = kry_check(
            identity,
            Contour.circle(0, 1, label="gamma"),
            Contour.circle(0, 2, label="U2"),
            Contour.circle(0, 3, label="U1"),
            Contour.circle(0, 4, label="U"),
            0.49,
            8.0,
            tol,
        )
        ctx, _ = self.oval_setup
        growth_input = self.zero_count.growth_audit(ctx, self.probe, self.sigma_zeros)
        kry_input = self.zero_count.kry_audit(ctx, self.probe, self.config.l)
        reports = {"growth(z)": growth, "kry(z)": kry, "growth(I)": growth_input, "kry(I)": kry_input}
        passed = all(r.passed for r in reports.values())
        detail = ", ".join(f"{k} {'ok' if r.passed else 'FAILED'} (ln rhs {r.ln_rhs:.4g})" for k, r in reports.items())
        return GroupOutcome("growth_kry", passed, detail)

    def check_bounds(self) -> GroupOutcome:
        report, n = self.ctx.report, self.ctx.n
        c1, c2 = report.c_prime, report.c_doubleprime
        table = bounds.bounds_report(n, c1, c2, c_appendix=self.config.c_appendix, l=self.config.l)
        non_finite = [k for k, v in table.entries.items() if v is None or not math.isfinite(v)]
        sweep_failures = []
        for m in range(2, 7):
            for g1 in SWEEP_GAPS:
                for g2 in SWEEP_GAPS:
                    lemma = bounds.main_lemma_bounds(m, g1, g2)
                    if not math.log(lemma["Bukpol"]) < lemma["Eq1.8"]:
                        sweep_failures.append((m, g1, g2))
        A1, A2 = bounds.theorem_A1(n, c1, c2), bounds.theorem_A2(n, c1, c2)
        count = self.sigma_zeros.count
        measured_ok = count == 0 or math.log(count) <= A1
        passed = not non_finite and not sweep_failures and A1 < A2 and measured_ok
        detail = f"{len(table.entries)} entries, ln A1 {A1:.6g} < ln A2 {A2:.6g}, {count} zeros on sigma"
        if non_finite:
            detail += f"; non-finite {non_finite}"
        if sweep_failures:
            detail += f"; Bukpol exceeds the main-lemma bound at {sweep_failures[:5]}"
        return GroupOutcome("bounds", passed, detail)

    def check_petrov(self) -> GroupOutcome:
        system = self.oval_system
        ctx, oval = self.oval_setup
        form = self.config.one_form
        indices = [j for j, v in enumerate(system.critical_values) if abs(v.imag) <= 1e-9]
        parts = []
        passed = True
        for j in indices:
            kind, residual, _, _ = petrov_reality(system, j, form)
            ok = residual <= ctx.tol.reality
            passed &= ok
            parts.append(f"{system.critical_values[j].real:.6g} {kind} reality {residual:.2e}")
        sd = sigma_interval(ctx.values, ctx.t0.real, ctx.nu)
        for end in (sd.a, sd.b):
            if end is None:
                continue
            j = min(indices, key=lambda k: abs(system.critical_values[k] - end))
            report = petrov_audit(system, oval, j, form)
            passed &= report.passed
            parts.append(f"match at {end:.6g} l0={report.l0} {'ok' if report.passed else 'FAILED'}")
        return GroupOutcome("petrov", passed, "; ".join(parts) or "no real critical values")

    def check_infinity(self) -> GroupOutcome:
        ctx, system = self.ctx, self.system
        report = monodromy_at_infinity(
            ctx.H, OneForm.monomial(0, 0), 5.0, system.deltas[0], ctx.values, ctx.tol, extra_forms=system.forms
        )
        passed = report.returned and report.divides
        worst = max(report.residuals) if report.residuals else math.nan
        detail = f"{report.circuits} circuits of |t| = {report.radius}, minimal order {report.minimal_order}, final residual {worst:.2e}"
        return GroupOutcome("infinity", passed, detail)

    def check_mardesic(self) -> GroupOutcome:
        zeros = self.sigma_zeros
        n = self.oval_setup[0].n
        passed = zeros.multiplicity_ok
        return GroupOutcome(
            "mardesic", passed, f"{zeros.count} zeros on sigma, multiplicities within n**4 = {n ** 4}: {passed}"
        )

    # ------------------------------------------------------------ command

    def run_group(self, name: str) -> GroupOutcome:
        try:
            outcome = getattr(self, f"check_{name}")()
        except Exception as e:
            logger.error(f"Verify group {name} raised {type(e).__name__}: {str(e)}")
            outcome = GroupOutcome(name, False, f"{type(e).__name__}: {str(e)}")
        logger.info(f"[{'PASS' if outcome.passed else 'FAIL'}] {name}: {outcome.detail}")
        return outcome

    def run(self, run_id=None) -> dict:
        """
        Run the selected groups (all when none are configured) and write verify.json
        Args:
            run_id: ledger row that receives one audit record per group
        Returns:
            dict with status, exit_code (number of failed groups, at most 100) and written files
        """
        names = list(self.config.groups) or list(GROUPS)
        results = []
        for name in names:
            outcome = self.run_group(name)
            results.append(GroupResult.model_validate(outcome))
            if run_id is not None:
                self.db.add_audit(run_id, name, outcome.passed, outcome.detail)
        failed = sum(not r.passed for r in results)
        source = load_polynomial(self.config.input)
        document = VerifyDocument(input_digest=polynomial_digest(source), groups=results, failed=failed)
        path = self.writer.write_document("verify", document)
        exit_code = min(failed, 100)
        return {"status": "success" if failed == 0 else "failed", "exit_code": exit_code, "document": document, "files": [path]}
