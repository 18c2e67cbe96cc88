"""
Strategy class discovery.

Imports every module of a package so that ``AutoRegisterMeta`` sees the
classes defined there, and reports the subclasses of a base it found. Used by
``LazyDiscoveryDict`` to fill the CLI command registry from
``toeplitz_roots.commands``.
"""

import importlib
import inspect
import logging
import pkgutil
from collections.abc import Iterable
from types import ModuleType
from typing import Callable, Iterator, List, Optional, Set, Type

logger = logging.getLogger(__name__)


def _import_modules(
    package_path: Iterable[str], package_prefix: str, exclude_modules: Set[str]
) -> Iterator[ModuleType]:
    """Yield the importable plain modules of a package, skipping broken ones."""
    for info in pkgutil.iter_modules(package_path, package_prefix):
        if info.ispkg or any(part in info.name for part in exclude_modules):
            continue
        try:
            yield importlib.import_module(info.name)
        except ImportError as e:
            logger.debug(f"Skipping {info.name}: {e}")
        except Exception as e:
            logger.warning(f"Module {info.name} failed to load: {e}")


def _defined_subclasses(module: ModuleType, base_class: Type) -> List[Type]:
    return [
        obj
        for _, obj in inspect.getmembers(module, inspect.isclass)
        if obj is not base_class
        and issubclass(obj, base_class)
        and obj.__module__ == module.__name__
        and not inspect.isabstract(obj)
    ]


def discover_registry_classes(
    package_path: Iterable[str],
    package_prefix: str,
    base_class: Type,
    exclude_modules: Optional[Set[str]] = None,
    validation_func: Optional[Callable[[Type], bool]] = None,
) -> List[Type]:
    """
    Import the modules of a package and collect concrete subclasses of ``base_class``.

    Args:
        package_path: Package ``__path__`` to scan
        package_prefix: Module prefix for importlib (e.g. "toeplitz_roots.commands.")
        base_class: Base class to filter for (e.g. Command)
        exclude_modules: Module name substrings to skip
        validation_func: Optional predicate; classes failing it are left out

    Returns:
        Discovered classes, in module order

    Example:
        >>> import toeplitz_roots.commands
        >>> from toeplitz_roots.commands.base import Command
        >>> found = discover_registry_classes(
        ...     toeplitz_roots.commands.__path__, "toeplitz_roots.commands.", Command
        ... )
        >>> sorted(c.name for c in found)
        ['convolve', 'lemma-a', 'lemma-b', 'mellin', 'root', 'verify']
    """
    found: List[Type] = []
    for module in _import_modules(package_path, package_prefix, exclude_modules or set()):
        for cls in _defined_subclasses(module, base_class):
            if validation_func is not None and not validation_func(cls):
                logger.debug(f"{cls.__name__} rejected by validation")
                continue
            found.append(cls)

    logger.info(
        f"Found {len(found)} {base_class.__name__} classes under {package_prefix.rstrip('.')}: "
        f"{[cls.__name__ for cls in found]}"
    )
    return found
