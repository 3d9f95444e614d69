import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from numerics.bounds import bounds_report
from numerics.errors import ConfigViolation, NotUltraMorse, ZeroPolynomial
from numerics.monodromy import default_t0, validate_t0
from numerics.polynomial_core import (
    CriticalSet,
    NormalizationReport,
    Polynomial2,
    critical_points,
    is_ultra_morse,
    normalize,
)
from numerics.tolerances import Tolerances
from .report_writer import BoundsDocument, NormalizationDocument, finite

logger = logging.getLogger(__name__)


@dataclass
class AnalysisContext:
    """A normalized ultra-Morse polynomial with its base point; every command starts here"""

    source: Polynomial2
    digest: str
    report: NormalizationReport
    H: Polynomial2
    critical: CriticalSet
    t0: complex
    tol: Tolerances
    seed: int

    @property
    def n(self) -> int:
        return self.H.n

    @property
    def nu(self) -> float:
        return self.report.nu

    @property
    def values(self) -> list[complex]:
        return [complex(cp.value) for cp in self.critical]


def polynomial_digest(poly: Polynomial2) -> str:
    return hashlib.sha256(json.dumps(poly.to_json(), sort_keys=True).encode()).hexdigest()


def load_polynomial(path: Path) -> Polynomial2:
    """Read a polynomial JSON file; any parse problem is a ConfigViolation"""
    try:
        with open(path) as f:
            doc = json.load(f)
        return Polynomial2.from_json(doc)
    except FileNotFoundError:
        raise ConfigViolation(f"Input file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigViolation(f"Input {path} is not valid JSON: {str(e)}")
    except (KeyError, TypeError, ValueError, ZeroPolynomial) as e:
        raise ConfigViolation(f"Input {path} is not a polynomial document: {str(e)}")


class AnalysisManager:
    def __init__(self, db_manager, writer, config):
        self.db = db_manager
        self.writer = writer
        self.config = config

    def prepare(self, t0=None) -> AnalysisContext:
        """
        Load, check and normalize the input polynomial and resolve the base point
        Args:
            t0: normalized base point; the configured value or the default rule when omitted
        Returns:
            AnalysisContext
        Raises:
            NotUltraMorse: the input fails a clause of the ultra-Morse definition
        """
        tol = self.config.tolerances
        source = load_polynomial(self.config.input)
        verdict = is_ultra_morse(source, tol)
        if not verdict.ok:
            raise NotUltraMorse(verdict.clause, verdict.diagnosis)
        report = normalize(source, tol, seed=self.config.seed)
        H = report.rescaled
        critical = critical_points(H, tol)
        values = [complex(cp.value) for cp in critical]
        if t0 is None:
            t0 = self.config.t0_value
        if t0 is None:
            t0 = default_t0(values)
        validate_t0(values, t0, report.nu)
        logger.info(f"Prepared degree-{source.degree} input, t0={complex(t0):.6g}, nu={report.nu:.6g}")
        return AnalysisContext(source, polynomial_digest(source), report, H, critical, complex(t0), tol, self.config.seed)

    def bounds_document(self, ctx_or_report, digest: str) -> BoundsDocument:
        report = ctx_or_report.report if isinstance(ctx_or_report, AnalysisContext) else ctx_or_report
        b = bounds_report(
            report.n,
            report.c_prime,
            report.c_doubleprime,
            c_appendix=self.config.c_appendix,
            l=self.config.l,
        )
        return BoundsDocument(
            input_digest=digest,
            log10={k: v / math.log(10) for k, v in b.entries.items()},
            **b.to_dict(),
        )

    def analyze(self) -> dict:
        """
        Normalize the input and write normalization and bounds documents
        Returns:
            dict with status, exit_code and written files
        """
        try:
            tol = self.config.tolerances
            source = load_polynomial(self.config.input)
            digest = polynomial_digest(source)
            crit = critical_points(source, tol)
            verdict = is_ultra_morse(source, tol)
            report = normalize(source, tol, seed=self.config.seed) if verdict.ok else None
            document = NormalizationDocument(
                input_digest=digest,
                seed=self.config.seed,
                ultra_morse=verdict.ok,
                clause=verdict.clause,
                diagnosis=verdict.diagnosis,
                critical_points=finite([cp.to_dict() for cp in crit]),
                report=finite(report.to_dict()) if verdict.ok else None,
            )
            files = [self.writer.write_document("normalization", document)]
            if not verdict.ok:
                logger.warning(f"Input is not ultra-Morse: clause ({verdict.clause}) {verdict.diagnosis}")
                return {"status": "rejected", "exit_code": 2, "clause": verdict.clause, "diagnosis": verdict.diagnosis, "files": files}
            files.append(self.writer.write_document("bounds", self.bounds_document(report, digest)))
            files.append(
                self.writer.write_csv(
                    "critical_values",
                    ["re_t", "im_t"],
                    [[v.real, v.imag] for v in report.critical_values],
                )
            )
            logger.info(f"Analysis complete: c'={report.c_prime:.6g}, c''={report.c_doubleprime:.6g}")
            return {"status": "success", "exit_code": 0, "report": report, "files": files}
        except NotUltraMorse as e:
            logger.warning(f"Input rejected: {str(e)}")
            return {"status": "rejected", "exit_code": 2, "clause": e.clause, "diagnosis": e.diagnosis, "files": []}
        except Exception as e:
            logger.error(f"Error analyzing {self.config.input}: {str(e)}")
            raise

    def bounds(self) -> dict:
        """Write the bounds document for the input's gap functions"""
        try:
            ctx = self.prepare()
            document = self.bounds_document(ctx, ctx.digest)
            path = self.writer.write_document("bounds", document)
            return {"status": "success", "exit_code": 0, "document": document, "files": [path]}
        except NotUltraMorse as e:
            return {"status": "rejected", "exit_code": 2, "clause": e.clause, "diagnosis": e.diagnosis, "files": []}
        except Exception as e:
            logger.error(f"Error evaluating bounds: {str(e)}")
            raise
