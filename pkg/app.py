import argparse
import json
import logging
import sys
from typing import Optional

from pydantic import ValidationError

from database.db import create_session_factory, init_db
from database.db_manager import DatabaseManager
from database.models import RunStatus
from numerics.errors import ConfigViolation, NonIsolatedCriticalLocus, NotEnoughCriticalValues, NotUltraMorse
from numerics.tolerances import Tolerances
from services.analysis_manager import AnalysisManager, load_polynomial, polynomial_digest
from services.monodromy_manager import MonodromyManager
from services.report_writer import ReportWriter
from services.run_config import COMMANDS, RunConfig, load_config
from services.verify_manager import GROUPS, VerifyManager
from services.zero_count_manager import ZeroCountManager

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler()
    ]
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_ULTRA_MORSE = 2
EXIT_AUDIT = 3


class CliParser(argparse.ArgumentParser):
    """argparse reports usage errors with exit code 2, which is reserved here for rejected inputs"""

    def error(self, message):
        raise ConfigViolation(message)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="abelian", description="Zeros of Abelian integrals over level-curve cycles")
    parser.add_argument("--config", help="alternate config.json")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", help="polynomial JSON file")
        p.add_argument("--out", dest="out_dir", help="output directory")
        p.add_argument("--t0", help="normalized base point, e.g. 0.1 or 0.1+0.2j")
        p.add_argument("--seed", type=int)
        p.add_argument("--c-appendix", dest="c_appendix", type=int, choices=(5000, 5))
        p.add_argument("--l", type=int, help="sheet count for sector bounds")
        p.add_argument("--verbose", action="store_true", default=None, help="debug logging")
        if name == "count-zeros":
            p.add_argument("--form", help='one-form as JSON, e.g. \'{"monomial": [0, 0]}\'')
            p.add_argument("--region", choices=("sigma", "sector", "circle"))
        if name == "verify":
            p.add_argument("--list", dest="list_groups", action="store_true", default=None)
            p.add_argument("--group", dest="groups", action="append", choices=GROUPS)
    return parser


def parse_tolerances(extra: list[str]) -> dict[str, float]:
    """
    Collect --tol.<name>=<value> (or --tol.<name> <value>) from the arguments argparse left over
    Raises:
        ConfigViolation: unknown argument, unknown tolerance name or non-numeric value
    """
    names = set(Tolerances.names())
    overrides: dict[str, float] = {}
    i = 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--tol."):
            raise ConfigViolation(f"Unrecognized argument: {arg}")
        key, sep, value = arg[len("--tol."):].partition("=")
        if not sep:
            if i + 1 >= len(extra):
                raise ConfigViolation(f"Missing value for {arg}")
            value = extra[i + 1]
            i += 1
        if key not in names:
            raise ConfigViolation(f"Unknown tolerance {key!r}; known: {', '.join(sorted(names))}")
        try:
            overrides[key] = float(value)
        except ValueError:
            raise ConfigViolation(f"Tolerance {key} is not a number: {value!r}")
        i += 1
    return overrides


def run_command(config: RunConfig, db_manager: DatabaseManager, run_id: Optional[int]) -> dict:
    writer = ReportWriter(config.out_dir)
    analysis = AnalysisManager(db_manager, writer, config)
    if config.command == "analyze":
        return analysis.analyze()
    if config.command == "bounds":
        return analysis.bounds()
    monodromy = MonodromyManager(db_manager, writer, analysis)
    if config.command == "monodromy":
        return monodromy.run()
    zero_count = ZeroCountManager(db_manager, writer, analysis, monodromy)
    if config.command == "count-zeros":
        return zero_count.run()
    return VerifyManager(db_manager, writer, analysis, monodromy, zero_count).run(run_id)


def print_result(config: RunConfig, result: dict) -> None:
    if result["status"] == "rejected":
        print(f"Not ultra-Morse: clause ({result['clause']}) {result['diagnosis']}")
    elif config.command == "bounds":
        document = result["document"]
        print(json.dumps(document.model_dump(mode="json")["entries"], sort_keys=True, indent=2))
        print(f"{'bound':<24}{'ln':>22}{'log10':>22}")
        for name, ln_value in sorted(document.entries.items()):
            if ln_value is None:
                print(f"{name:<24}{'n/a':>22}{'n/a':>22}")
            else:
                print(f"{name:<24}{ln_value:>22.10g}{document.log10[name]:>22.10g}")
    elif config.command == "verify":
        for group in result["document"].groups:
            print(f"{'PASS' if group.passed else 'FAIL'} {group.name}: {group.detail}")
        print(f"{result['document'].failed} group(s) failed")
    elif config.command == "count-zeros":
        print(f"{result['document'].count} zero(s) in region {config.region}")
    for path in result.get("files", []):
        print(path)


def _final_status(result: dict) -> RunStatus:
    if result["status"] == "rejected":
        return RunStatus.REJECTED
    return RunStatus.PASSED if result["exit_code"] == EXIT_OK else RunStatus.FAILED


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args, extra = build_parser().parse_known_args(argv)
        cli = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        cli["tolerance_overrides"] = parse_tolerances(extra)
        config = load_config(args.command, cli, args.config)
    except (ConfigViolation, ValidationError) as e:
        logger.error(f"Invalid invocation: {str(e)}")
        return EXIT_CONFIG

    if config.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    if config.command == "verify" and config.list_groups:
        for name in GROUPS:
            print(name)
        return EXIT_OK

    engine, Session = create_session_factory(config.database_url)
    init_db(engine)
    session = Session()
    db_manager = DatabaseManager(session)
    run_id = None
    try:
        digest = polynomial_digest(load_polynomial(config.input))
        run_id = db_manager.add_run(config.command, digest, str(config.out_dir)).id
        result = run_command(config, db_manager, run_id)
        db_manager.update_run_status(run_id, _final_status(result), result["exit_code"])
        print_result(config, result)
        return result["exit_code"]
    except ConfigViolation as e:
        logger.error(f"Configuration error: {str(e)}")
        exit_code = EXIT_CONFIG
    except (NotUltraMorse, NonIsolatedCriticalLocus, NotEnoughCriticalValues) as e:
        logger.error(f"Input rejected: {str(e)}")
        print(f"Not ultra-Morse: {str(e)}")
        exit_code = EXIT_NOT_ULTRA_MORSE
    except Exception as e:
        logger.error(f"{config.command} failed: {type(e).__name__}: {str(e)}")
        exit_code = EXIT_AUDIT
    finally:
        session.close()
    if run_id is not None:
        status = RunStatus.REJECTED if exit_code == EXIT_NOT_ULTRA_MORSE else RunStatus.FAILED
        with Session() as s:
            DatabaseManager(s).update_run_status(run_id, status, exit_code)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
