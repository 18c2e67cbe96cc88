"""The ``verify`` command: check a sampled psi against the symbol."""

import argparse
from pathlib import Path
from typing import TYPE_CHECKING

from ..exceptions import UnsupportedSymbolError
from ..roots import RootOptions, candidate_from_psi, load_psi, target_shift
from ..toeplitz import verify_identity
from .base import Command, write_report

if TYPE_CHECKING:
    from ..cli import RunConfig


class VerifyCommand(Command):
    """
    Recompute the root identity for a psi read from disk.

    The Mellin values of psi come from quadrature of the samples, so the
    numeric tolerance applies unless ``--tol`` is given.
    """
    help = "Check S^p = T for a psi read from a result JSON or CSV file"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--psi", type=Path, help="psi samples (result JSON or r,re,im CSV)")

    def execute(self, config: "RunConfig") -> bool:
        if config.psi is None:
            raise UnsupportedSymbolError("'verify' needs --psi")
        symbol = config.load_symbol()
        defaults = RootOptions()
        k_max = config.k_max if config.k_max is not None else defaults.k_max
        tol = config.tol if config.tol is not None else defaults.numeric_tolerance

        psi = load_psi(config.psi)
        candidate = candidate_from_psi(psi, k_max + symbol.p - 1, defaults.quadrature)
        report = verify_identity(target_shift(symbol, k_max), candidate, symbol.p, tol, k_max, "numeric")
        document = {"p": symbol.p, "psi": str(config.psi), "residuals": report.to_dict()}
        write_report(config.output, document, {"": report.to_csv()})
        return report.passed
