"""Command-line entry point for the stochastic lifts experiments."""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from loguru import logger
from pydantic import ValidationError

from stochastic_lifts.config import get_settings
from stochastic_lifts.errors import InputError
from stochastic_lifts.experimentation.config import ExperimentConfig, load_config
from stochastic_lifts.experimentation.runner import EXIT_INPUT, run

# Load environment variables
load_dotenv()

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


class InterceptHandler(logging.Handler):
    """Send standard-library records to loguru."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno
        frame, depth = logging.currentframe(), 2
        while frame and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1
        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def setup_logging(level: str, log_dir: str) -> None:
    """Console sink on stderr, so reports on stdout stay clean, plus a rotating file sink."""
    logger.remove()
    logger.add(sys.stderr, colorize=True, format=LOG_FORMAT, level=level)
    logger.add(
        os.path.join(log_dir, "stochastic_lifts_{time}.log"),
        rotation="500 MB",
        retention="10 days",
        compression="zip",
        level="DEBUG",
        enqueue=True,
        backtrace=True,
        diagnose=True,
    )
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the parameters; flags override it")
    common.add_argument("--seed", type=int, help="Base seed, required by randomized commands")
    common.add_argument("--jobs", type=int, help="Worker processes")
    common.add_argument("--format", choices=["json", "csv"], help="Report format")
    common.add_argument("--output", help="Write the report here instead of stdout")
    common.add_argument("--timing", action="store_true", default=None, help="Include wall time in the report")
    common.add_argument("--p", nargs="+", help="Edge or label probabilities, e.g. 1/4 0.5")
    common.add_argument("--s", nargs="+", help="Cell probabilities")
    common.add_argument("--radius", type=int)
    common.add_argument("--radii", type=int, nargs="+")
    common.add_argument("--trials", type=int)
    common.add_argument("--graph", help='Generator name and arguments such as "box:5,5", or a graph file')
    common.add_argument("--fixture", help="Named fixture")
    common.add_argument("--pair", help="Named fibred graph pair")
    common.add_argument("--r0", type=int, help="Cell separation radius")
    common.add_argument("--centres", type=int, nargs="+", help="Explicit cell centres")
    common.add_argument("--c", type=int, help="Cycle length used to switch floors in the cover")

    parser = argparse.ArgumentParser(description="Exact lift couplings, percolation comparisons and BK checks.")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common], help="Check the golden fixtures")
    verify.add_argument("target", nargs="?", help='"counterexamples" or a fixture name')
    coupling = commands.add_parser("coupling", parents=[common], help="Build and check the main coupling")
    coupling.add_argument("--instance", help="JSON file with mu, rho and pm")
    coupling.add_argument("--fibre-map", dest="fibre_map", help="JSON fibre map, replacing the instance pm")
    lakon = commands.add_parser("lakon-sweep", parents=[common], help="Every deterministic section strategy")
    lakon.add_argument("--max-fibre", dest="max_fibre", type=int)
    commands.add_parser("perco-compare", parents=[common], help="Reach upstairs against downstairs")
    cells = commands.add_parser("cells", parents=[common], help="Build and audit cell decompositions")
    cells.add_argument("--dump-cells", dest="dump_cells", action="store_true", default=None)
    commands.add_parser("delta", parents=[common], help="Certify a positive delta on every fixture cell")
    commands.add_parser("aug-compare", parents=[common], help="Augmented against plain reach")
    bk = commands.add_parser("bk", parents=[common], help="BK inequality checks")
    bk.add_argument("--e1", help="Event as a hex bitmask or min-terms such as '0,1;2'")
    bk.add_argument("--e2")
    bk.add_argument("--n", type=int, help="Ground set size of --e1 and --e2")
    bk.add_argument("--exhaustive", type=int, help="Sweep every pair of increasing events on this many coordinates")
    cycles = commands.add_parser("cycles", parents=[common], help="Threshold proxies on products with cycles")
    cycles.add_argument("--m", dest="cycle_lengths", type=int, nargs="+", help="Cycle lengths")
    properties = commands.add_parser("properties", parents=[common], help="Randomized coupling suites")
    properties.add_argument("--instances", type=int)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the flags over the --config file, if any."""
    values: Dict[str, Any] = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "target")}
    if getattr(args, "target", None):
        values["fixture"] = args.target
    if args.config:
        return load_config(args.config, values)
    return ExperimentConfig.model_validate(values)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_dir)

    try:
        config = config_from_args(args)
    except (ValidationError, InputError) as e:
        logger.error(f"Invalid parameters: {e}")
        return EXIT_INPUT

    logger.info(f"Running {config.command}")
    report, code = run(config)
    text = report.render(config.format)
    if config.output:
        with open(config.output, "w") as f:
            f.write(text)
        logger.info(f"Saved report to {config.output}")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
