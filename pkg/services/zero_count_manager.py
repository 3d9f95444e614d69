import logging
import math
from dataclasses import replace

from numerics import bounds
from numerics.cycles import OneForm, polyline_clearance
from numerics.errors import ClearanceViolation, NotUltraMorse
from numerics.monodromy import route, sigma_interval, sigma_pieces, validate_t0
from numerics.zerocount import (
    AbelianProbe,
    Contour,
    cover_bernstein_estimate,
    count_zeros_in_annulus_sector,
    growth_zeros_check,
    kry_check,
    sample_contour,
    vanishes_identically,
    winding_report,
    zeros_on_interval,
)
from .report_writer import ZeroCountDocument, finite

logger = logging.getLogger(__name__)


class ZeroCountManager:
    def __init__(self, db_manager, writer, analysis_manager, monodromy_manager):
        self.db = db_manager
        self.writer = writer
        self.analysis = analysis_manager
        self.monodromy = monodromy_manager

    @property
    def config(self):
        return self.analysis.config

    def oval_context(self):
        """Context based at the level of the configured oval, and the traced oval"""
        ctx = self.analysis.prepare()
        level = self.monodromy.oval_level(ctx)
        validate_t0(ctx.values, level, ctx.nu)
        ctx = replace(ctx, t0=complex(level))
        return ctx, self.monodromy.trace_oval(ctx)

    def probe(self, ctx, oval, form: OneForm) -> AbelianProbe:
        return AbelianProbe(form, oval, ctx.tol, ctx.values, label="I")

    def identically_zero(self, ctx, probe) -> bool:
        """I vanishes on a short real segment from the base point"""
        segment = Contour.segment(ctx.t0, ctx.t0 + 0.5 * ctx.nu, count=8, label="identity_check")
        return vanishes_identically(sample_contour(probe, segment))

    def count_on_sigma(self, ctx, probe):
        sd = sigma_interval(ctx.values, ctx.t0.real, ctx.nu)
        return zeros_on_interval(probe, ctx.t0.real, sd.left, sd.right, ctx.n, ctx.tol)

    def sector_geometry(self, ctx, settings=None):
        """(a, theta0, approach) for the annulus around the nearer finite end of sigma"""
        settings = settings or self.config.sector
        sd = sigma_interval(ctx.values, ctx.t0.real, ctx.nu)
        a = sd.a if sd.a is not None else sd.b
        if a is None:
            raise ClearanceViolation("sigma has no finite end: no real critical value")
        theta0 = settings.theta0 if settings.theta0 is not None else (0.0 if ctx.t0.real > a else math.pi)
        start = a + ctx.nu * complex(math.cos(theta0), math.sin(theta0))
        approach = route(ctx.t0, start, ctx.values, 0.5 * ctx.nu, "approach")
        return complex(a), theta0, approach

    def count_in_sector(self, ctx, probe, settings=None):
        settings = settings or self.config.sector
        a, theta0, approach = self.sector_geometry(ctx, settings)
        return count_zeros_in_annulus_sector(
            probe, a, settings.psi_fraction * ctx.nu, ctx.nu, settings.l, theta0, approach, ctx.tol, per_turn=128
        )

    def count_in_circle(self, ctx, probe, settings=None):
        settings = settings or self.config.circle
        center = complex(*settings.center)
        contour = Contour.circle(center, settings.radius, label="circle")
        gap = polyline_clearance(contour.vertices, ctx.values)
        if gap <= 0.5 * ctx.nu:
            raise ClearanceViolation(f"Circle passes within {gap:.3g} of a critical value")
        history = route(ctx.t0, contour.start, ctx.values, 0.5 * ctx.nu, "to_circle")
        contour = replace(contour, history=history)
        report, samples = winding_report(probe, contour, ctx.tol, ctx.values)
        enclosed = [v for v in ctx.values if abs(v - center) < settings.radius]
        return report, samples, enclosed

    # ------------------------------------------------------------ one-sided audits on the input

    def growth_audit(self, ctx, probe, sigma_zeros):
        """Growth-and-zeros inequality on sigma, with U the nu/2-neighbourhood on the cover"""
        pieces = sigma_pieces(ctx.values, ctx.t0.real, ctx.nu, ctx.n)
        K = [Contour.from_path(pieces[k]).densify(ctx.nu / 4) for k in ("sigma_left", "sigma_right")]
        estimate = cover_bernstein_estimate(probe, K, 0.0, 0.5 * ctx.nu)
        D = sum(c.length() for c in K)
        return growth_zeros_check(probe, K, K, [z.t for z in sigma_zeros.zeros], D=D, eps=0.5 * ctx.nu, bernstein=estimate)

    def kry_audit(self, ctx, probe, l: int = 1):
        """
        KRY inequality on the outer arc of the sector around a (2l turns at radius nu); the nested domains
        are the eps- and 3eps-neighbourhoods of the arc on the cover, eps = nu / 6
        """
        params = bounds.kry_parameters(ctx.n, ctx.report.c_doubleprime, l)
        eps, D = params["eps"], params["D"]
        a, theta0, approach = self.sector_geometry(ctx)
        sector = Contour.sector(a, 0.5 * ctx.nu, ctx.nu, l, theta0, approach, per_turn=64)
        s, e = sector.pieces["gamma1"]
        gamma = Contour(sector.vertices[s : e + 1], False, "gamma1", sector.history)
        sd = sigma_interval(ctx.values, ctx.t0.real, ctx.nu)
        D1 = gamma.length() + (sd.right - sd.left)
        estimate = cover_bernstein_estimate(probe, [gamma], eps, 3 * eps)
        return kry_check(
            probe,
            gamma,
            gamma,
            gamma,
            gamma,
            eps,
            D,
            ctx.tol,
            gaps=(eps, eps, eps),
            diameters=(D1 + 2 * eps, D1 + 4 * eps),
            bernstein=estimate,
        )

    # ------------------------------------------------------------ command

    def _bound_audit(self, ctx, name: str, ln_bound: float, count: float) -> dict:
        passed = count <= 0 or math.log(count) <= ln_bound
        if not passed:
            logger.warning(f"Zero count {count} exceeds {name} = exp({ln_bound:.6g})")
        return {"bound": name, "ln_bound": ln_bound, "count": count, "passed": passed}

    def run(self) -> dict:
        """
        Count zeros of the configured integral in the configured region and write the report
        Returns:
            dict with status, exit_code and written files
        """
        try:
            ctx, oval = self.oval_context()
            form = self.config.one_form
            probe = self.probe(ctx, oval, form)
            region = self.config.region
            c1, c2 = ctx.report.c_prime, ctx.report.c_doubleprime
            files = [
                self.writer.write_csv("oval", ["re_x", "im_x", "re_y", "im_y"], oval.to_rows()),
                self.writer.plot_oval("oval", oval),
            ]
            if self.identically_zero(ctx, probe):
                logger.info("Form integrates to zero over the oval family; no zeros to count")
                details, count, zero = {"reason": "integral vanishes identically"}, 0, True
                audit = self._bound_audit(ctx, "TheoremA1", bounds.theorem_A1(ctx.n, c1, c2), 0)
            elif region == "sigma":
                result = self.count_on_sigma(ctx, probe)
                details, count, zero = result.to_dict(), result.count, result.identically_zero
                audit = self._bound_audit(ctx, "TheoremA1", bounds.theorem_A1(ctx.n, c1, c2), count)
                audit["multiplicity_ok"] = result.multiplicity_ok
                files.append(self.writer.write_csv("samples", ["re_t", "im_t", "abs_f", "arg_f"], result.samples.to_rows()))
                files.append(self.writer.plot_modulus("modulus", result.samples))
            elif region == "sector":
                result = self.count_in_sector(ctx, probe)
                details, count, zero = result.to_dict(), result.count, False
                audit = self._bound_audit(ctx, "SectorZeros", bounds.sector_zeros(ctx.n, c1, c2), result.per_sheet)
                files.append(self.writer.write_csv("samples", ["re_t", "im_t", "abs_f", "arg_f"], result.samples.to_rows()))
            else:
                report, samples, enclosed = self.count_in_circle(ctx, probe)
                details = report.to_dict()
                details["enclosed_critical_values"] = enclosed
                count, zero = report.winding, False
                if enclosed:
                    logger.warning("Circle encloses critical values: the winding counts zeros on one branch only")
                audit = self._bound_audit(ctx, "TheoremA", bounds.theorem_A(ctx.n, c1, c2, self.config.c_appendix), abs(count))
                files.append(self.writer.write_csv("samples", ["re_t", "im_t", "abs_f", "arg_f"], samples.to_rows()))
            document = ZeroCountDocument(
                input_digest=ctx.digest,
                region=region,
                form=finite(form.to_dict()),
                count=int(count),
                identically_zero=bool(zero),
                details=finite(details),
                bound_audit=finite(audit),
            )
            files.insert(0, self.writer.write_document("zero_count", document))
            exit_code = 0 if audit["passed"] and audit.get("multiplicity_ok", True) else 3
            return {"status": "success" if exit_code == 0 else "failed", "exit_code": exit_code, "document": document, "files": files}
        except NotUltraMorse as e:
            return {"status": "rejected", "exit_code": 2, "clause": e.clause, "diagnosis": e.diagnosis, "files": []}
        except Exception as e:
            logger.error(f"Error counting zeros: {str(e)}")
            raise
