"""The ``root`` command: construct psi and write the result document."""

import argparse
import logging
from typing import TYPE_CHECKING

from ..cache import ResultCache
from ..roots import RootProblem, construct_root, result_to_dict, write_result
from .base import Command, write_report

if TYPE_CHECKING:
    from ..cli import RunConfig

logger = logging.getLogger(__name__)


class RootCommand(Command):
    """Construct the p-th root of the operator with the input symbol."""
    help = "Construct the radial part psi of the p-th root"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--cache", action="store_true",
                            help="Reuse results from the on-disk cache")

    def execute(self, config: "RunConfig") -> bool:
        problem = RootProblem(config.load_symbol(), config.root_options())
        problem_doc = problem.to_dict()
        cache = ResultCache() if config.cache else None

        document = cache.load(problem_doc) if cache else None
        if document is None:
            document = result_to_dict(construct_root(problem))
            if cache and document["failure"] is None:
                cache.save(problem_doc, document)

        if config.output is not None:
            write_result(document, config.output)
        else:
            write_report(None, document)
        if not document["success"]:
            logger.warning("identity check failed; see 'residuals' in the report")
        return bool(document["success"])
