"""Command base class, registry access and report writing."""

import argparse
import logging
import sys
from abc import abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Type

from ..registry import AutoRegisterMeta, lookup, make_kebab_extractor
from ..roots import dumps

if TYPE_CHECKING:
    from ..cli import RunConfig

logger = logging.getLogger(__name__)


class Command(metaclass=AutoRegisterMeta):
    """
    A CLI subcommand.

    Subclasses implement ``execute`` and may add flags in ``add_arguments``;
    the registry key comes from the class name.
    """
    __registry_key__ = 'name'
    __key_extractor__ = make_kebab_extractor('Command')
    __registry_name__ = 'command'
    __discovery_package__ = 'toeplitz_roots.commands'

    help: str = ""

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Add command-specific flags."""

    @abstractmethod
    def execute(self, config: "RunConfig") -> bool:
        """Run the command and write its artifacts; True if all checks pass."""


def get_command(name: str) -> Type[Command]:
    return lookup(Command.__registry__, name, "command")


def write_report(
    output: Optional[Path], document: Dict[str, Any], tables: Optional[Dict[str, str]] = None
) -> List[Path]:
    """
    Write ``output.json`` and one CSV per table (``""`` names ``output.csv``,
    any other key ``output.<key>.csv``). Without ``output`` the JSON goes to
    stdout and tables are skipped.
    """
    text = dumps(document)
    if output is None:
        sys.stdout.write(text)
        return []
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    written = [output.with_name(output.name + ".json")]
    written[0].write_text(text)
    for key, table in (tables or {}).items():
        suffix = ".csv" if not key else f".{key}.csv"
        path = output.with_name(output.name + suffix)
        path.write_text(table)
        written.append(path)
    logger.info(f"💾 Wrote {', '.join(str(p) for p in written)}")
    return written
