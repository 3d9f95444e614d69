import logging

import numpy as np

from numerics.cycles import trace_real_oval
from numerics.monodromy import MarkedCycleSystem, build_marked_system, picard_lefschetz_apply, pl_continuation_residuals
from numerics.errors import NotUltraMorse
from .report_writer import SystemManifest, finite

logger = logging.getLogger(__name__)


class MonodromyManager:
    def __init__(self, db_manager, writer, analysis_manager):
        self.db = db_manager
        self.writer = writer
        self.analysis = analysis_manager

    def build_system(self, ctx) -> MarkedCycleSystem:
        """Marked system of ctx.H at ctx.t0"""
        return build_marked_system(ctx.H, ctx.t0, ctx.nu, ctx.tol, ctx.critical)

    def oval_level(self, ctx) -> float:
        """Normalized level of the configured oval"""
        return float(ctx.report.to_normalized_value(self.analysis.config.oval.level).real)

    def trace_oval(self, ctx):
        """Trace the configured real oval on the normalized polynomial"""
        oval = self.analysis.config.oval
        u, v = ctx.report.source_frame.to_normalized(*oval.seed)
        level = self.oval_level(ctx)
        return trace_real_oval(ctx.H, level, (float(np.real(u)), float(np.real(v))), ctx.tol)

    @staticmethod
    def pl_matrices(system: MarkedCycleSystem) -> list[list[list[int]]]:
        """Matrix of the Picard-Lefschetz action of each lambda_j; column k is the image of delta_k"""
        out = []
        eye = np.eye(system.mu, dtype=int)
        for j in range(system.mu):
            M = np.column_stack([picard_lefschetz_apply(system, j, eye[k]) for k in range(system.mu)])
            out.append(M.tolist())
        return out

    def run(self) -> dict:
        """
        Build the marked system, audit PL against continuation and write the manifest
        Returns:
            dict with status, exit_code and written files
        """
        try:
            ctx = self.analysis.prepare()
            system = self.build_system(ctx)
            residuals = pl_continuation_residuals(system)
            worst = max(residuals.values()) if residuals else 0.0
            passed = worst <= ctx.tol.pl_rtol
            manifest = SystemManifest(
                input_digest=ctx.digest,
                t0=[system.t0.real, system.t0.imag],
                nu=system.nu,
                mu=system.mu,
                system=finite(system.to_manifest()),
                pl_matrices=self.pl_matrices(system),
                pl_residuals={f"{j},{k}": r for (j, k), r in sorted(residuals.items())},
                audit_passed=passed,
            )
            files = [self.writer.write_document("system", manifest)]
            for j, (alpha, lam) in enumerate(zip(system.alphas, system.lambdas)):
                files.append(self.writer.write_csv(f"alpha_{j}", ["re_t", "im_t"], alpha.to_rows()))
                files.append(self.writer.write_csv(f"lambda_{j}", ["re_t", "im_t"], lam.to_rows()))
            for j, delta in enumerate(system.deltas):
                files.append(self.writer.write_csv(f"delta_{j}", ["re_x", "im_x", "re_y", "im_y"], delta.to_rows()))
            paths = {p.label: p for p in system.alphas}
            files.append(self.writer.plot_system("critical_values", system.critical_values, system.nu, paths))
            files.append(self.writer.plot_system("loops", system.critical_values, system.nu, {p.label: p for p in system.lambdas}))
            if not passed:
                logger.warning(f"Picard-Lefschetz audit failed: worst residual {worst:.3e}")
                return {"status": "failed", "exit_code": 3, "worst_residual": worst, "files": files}
            logger.info(f"Monodromy audit passed: mu={system.mu}, worst residual {worst:.2e}")
            return {"status": "success", "exit_code": 0, "worst_residual": worst, "files": files}
        except NotUltraMorse as e:
            return {"status": "rejected", "exit_code": 2, "clause": e.clause, "diagnosis": e.diagnosis, "files": []}
        except Exception as e:
            logger.error(f"Error building marked system: {str(e)}")
            raise
