"""
Command-line front end.

    toeplitz-roots root --p 2 --input phi.json --out runs/phi
    toeplitz-roots verify --p 2 --input phi.json --psi runs/phi.json
    toeplitz-roots mellin --input phi.json
    toeplitz-roots convolve --input factors.json --out runs/h
    toeplitz-roots lemma-a --input random.json
    toeplitz-roots lemma-b --input random.json

Every subcommand is a registered ``Command`` (see ``toeplitz_roots.commands``).
Reports are JSON (stdout when ``--out`` is not given) with CSV companions.
Library errors become ``{"error": {"category", "type", "message"}}`` on
stdout and exit status 1; a check that runs but misses its tolerance also
exits with 1.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .commands.base import Command, get_command
from .exceptions import RangeError, ToeplitzRootError, UnsupportedSymbolError
from .grid import MIN_GRID_SIZE
from .roots import MODES, RootOptions
from .symbols import QuasihomogeneousSymbol, symbol_from_dict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """
    One CLI invocation.

    Attributes:
        command: Registered command name
        input: JSON problem document
        output: Output path prefix (reports go to stdout when None)
        p: Degree override for the symbol
        tol: Identity tolerance override (applies to the active Mellin mode)
        grid: Grid size override
        k_max: Last basis index checked
        pairing: Gamma pairing strategy
        branch: Index of the p-th root of C^p
        mode: Mellin mode of the identity check
        psi: Sampled psi for ``verify`` (result JSON or CSV)
        cache: Use the on-disk result cache
    """
    command: str
    input: Optional[Path] = None
    output: Optional[Path] = None
    p: Optional[int] = None
    tol: Optional[float] = None
    grid: Optional[int] = None
    k_max: Optional[int] = None
    pairing: Optional[str] = None
    branch: Optional[int] = None
    mode: Optional[str] = None
    psi: Optional[Path] = None
    cache: bool = False

    def __post_init__(self) -> None:
        get_command(self.command)
        if self.p is not None and self.p < 1:
            raise RangeError(f"--p must be a positive integer, got {self.p}")
        if self.tol is not None and not self.tol > 0.0:
            raise RangeError(f"--tol must be positive, got {self.tol}")
        if self.grid is not None and self.grid < MIN_GRID_SIZE:
            raise RangeError(f"--grid must be at least {MIN_GRID_SIZE}, got {self.grid}")
        if self.k_max is not None and self.k_max < 0:
            raise RangeError(f"--k-max must be non-negative, got {self.k_max}")
        if self.branch is not None and self.branch < 0:
            raise RangeError(f"--branch must be non-negative, got {self.branch}")
        if self.mode is not None and self.mode not in MODES:
            raise UnsupportedSymbolError(f"unknown --mode '{self.mode}'")
        for path in (self.input, self.psi):
            if path is not None and not Path(path).is_file():
                raise UnsupportedSymbolError(f"cannot read input file {path}")

    def load_input(self) -> Dict[str, Any]:
        """The input document, or an empty one when no input was given."""
        if self.input is None:
            return {}
        try:
            data = json.loads(Path(self.input).read_text())
        except json.JSONDecodeError as exc:
            raise UnsupportedSymbolError(f"{self.input} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise UnsupportedSymbolError(f"{self.input} must hold a JSON object")
        return data

    def load_symbol(self, default_p: Optional[int] = None) -> QuasihomogeneousSymbol:
        data = self.load_input()
        if not data:
            raise UnsupportedSymbolError(f"'{self.command}' needs --input with a symbol")
        p = self.p if self.p is not None else data.get("p", default_p)
        return symbol_from_dict(data, p=p)

    def root_options(self) -> RootOptions:
        """RootOptions with this invocation's overrides applied."""
        options = RootOptions()
        overrides: Dict[str, Any] = {}
        if self.grid is not None:
            overrides["grid_size"] = self.grid
        if self.k_max is not None:
            overrides["k_max"] = self.k_max
        if self.pairing is not None:
            overrides["pairing"] = self.pairing
        if self.branch is not None:
            overrides["branch"] = self.branch
        if self.mode is not None:
            overrides["mode"] = self.mode
        if self.tol is not None:
            mode = self.mode or options.mode
            overrides["tolerance" if mode == "closed" else "numeric_tolerance"] = self.tol
        return replace(options, **overrides)


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", type=Path, help="JSON problem document")
    parser.add_argument("--out", type=Path, dest="output",
                        help="Output path prefix (writes PREFIX.json and PREFIX.csv)")
    parser.add_argument("--p", type=int, help="Degree of the symbol (overrides the input)")
    parser.add_argument("--tol", type=float, help="Identity tolerance")
    parser.add_argument("--grid", type=int, help="Grid size (default 256)")
    parser.add_argument("--k-max", type=int, dest="k_max", help="Last basis index checked (default 50)")
    parser.add_argument("--pairing", help="Gamma pairing strategy: optimized or canonical")
    parser.add_argument("--branch", type=int, help="Index 0..p-1 of the p-th root of C^p")
    parser.add_argument("--mode", help=f"Mellin mode of the identity check ({', '.join(MODES)})")


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per registered command."""
    parser = argparse.ArgumentParser(
        prog="toeplitz-roots",
        description="p-th roots of quasihomogeneous Toeplitz operators on the Bergman space",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="More logging (repeat for debug output)")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log errors")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in sorted(Command.__registry__):
        command = Command.__registry__[name]
        sub = subparsers.add_parser(name, help=command.help, description=command.help)
        _add_common_arguments(sub)
        command.add_arguments(sub)
    return parser


def configure_logging(verbose: int = 0, quiet: bool = False) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def run(config: RunConfig) -> int:
    """
    Execute one command.

    Returns:
        0 if every check of the command is within tolerance, 1 otherwise

    Raises:
        ToeplitzRootError: Library errors, for ``main`` to report
    """
    command = get_command(config.command)()
    logger.info(f"Running '{config.command}'")
    return 0 if command.execute(config) else 1


def error_document(exc: ToeplitzRootError) -> Dict[str, Any]:
    return {"error": {"category": exc.category, "type": type(exc).__name__, "message": str(exc)}}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(list(argv) if argv is not None else None)
    configure_logging(args.verbose, args.quiet)
    extras: List[str] = ["verbose", "quiet"]
    values = {k: v for k, v in vars(args).items() if k not in extras}
    try:
        config = RunConfig(**values)
        return run(config)
    except ToeplitzRootError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        sys.stdout.write(json.dumps(error_document(exc), sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
