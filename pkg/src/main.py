import argparse
import logging
import sys

from sympy.external.gmpy import GROUND_TYPES

from src.core.config import DEFAULT_SETTINGS
from src.ui.commands import COMMANDS, run_command

LOGGER = logging.getLogger("src.main")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="algebra-deformations",
        description="Deformations of associative algebras over Artin local bases: "
        "Maurer-Cartan elements, cobar resolutions and flat deformations.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--algebra", help="algebra A (JSON)")
    parser.add_argument("--base", help="Artin local base B (JSON)")
    parser.add_argument("--cochain", action="append", default=[], help="arity-2 cochain (JSON); repeat for pairs")
    parser.add_argument("--derivation", help="degree-1 derivation of the cobar algebra (JSON)")
    parser.add_argument("--flat", action="append", default=[], help="flat deformation (JSON); repeat for pairs")
    parser.add_argument("--generator", help="arity-1 gauge generator (JSON)")
    parser.add_argument("--word-bound", type=int, help="polydegree bound W of the cobar truncation")
    parser.add_argument("--degree", type=int, help="Hochschild degree for hh")
    parser.add_argument("--seed", type=int, default=DEFAULT_SETTINGS.seed)
    parser.add_argument("--samples", type=int, default=DEFAULT_SETTINGS.samples)
    parser.add_argument("--search", action="store_true", help="exhaustive parameter search in gauge solves")
    parser.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None):
    # 1. Parse the command line
    args = build_parser().parse_args(argv)

    # 2. Diagnostics go to stderr, reports to stdout
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    # 3. Report the arithmetic backend before doing any work
    LOGGER.info(f"Exact arithmetic backend: {GROUND_TYPES}")
    if GROUND_TYPES == "python":
        LOGGER.warning("gmpy2 not found; rational arithmetic falls back to pure Python and runs slower")

    # 4. Run the command
    report = run_command(
        args.command,
        algebra=args.algebra,
        base=args.base,
        cochain=args.cochain,
        derivation=args.derivation,
        flat=args.flat,
        generator=args.generator,
        word_bound=args.word_bound,
        degree=args.degree,
        seed=args.seed,
        samples=args.samples,
        search=args.search,
        verbose=args.verbose,
    )
    print(report.to_json())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
