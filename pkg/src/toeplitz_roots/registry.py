"""
Metaclass infrastructure for named, pluggable strategies.

Three families in the package are selected by name at run time: Gamma-pair
strategies (``optimized`` / ``canonical``), grid interpolation kinds
(``quintic`` / ``pchip``) and CLI commands (``root``, ``verify``, ...).
Each family has an abstract base class that declares ``__registry_key__``;
``AutoRegisterMeta`` then creates a registry on the base and registers every
concrete subclass at class-definition time.

Architecture:
------------
1. RegistryConfig describes registration behaviour
2. AutoRegisterMeta reads it from the base class body and applies it
3. LazyDiscoveryDict imports a discovery package on first read, so
   registries whose members live in separate modules (the CLI commands) fill
   themselves without import-order bookkeeping
"""

import importlib
import logging
import re
from abc import ABCMeta
from collections.abc import MutableMapping
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, Iterator, Mapping, Optional, Type

logger = logging.getLogger(__name__)

RegistryDict = Dict[str, Type]
KeyExtractor = Callable[[str, Type], str]

# class-body dunders read by AutoRegisterMeta, by RegistryConfig field
_CLASS_OPTIONS = {
    "key_extractor": "__key_extractor__",
    "skip_if_no_key": "__skip_if_no_key__",
    "registry_name": "__registry_name__",
    "discovery_package": "__discovery_package__",
}


class LazyDiscoveryDict(MutableMapping):
    """
    Registry mapping that discovers its members on first read.

    Discovery imports every module of the configured package once; the
    metaclass registers the classes found there as a side effect. Writes
    never trigger discovery.
    """

    def __init__(self) -> None:
        self._members: RegistryDict = {}
        self._base_class: Optional[Type] = None
        self._config: Optional["RegistryConfig"] = None
        self._discovered = False

    @property
    def configured(self) -> bool:
        return self._config is not None

    def bind(self, base_class: Type, config: "RegistryConfig") -> None:
        self._base_class = base_class
        self._config = config

    def peek(self, key: str) -> Optional[Type]:
        """Member lookup without discovery."""
        return self._members.get(key)

    def _discover(self) -> None:
        if self._discovered or self._config is None or not self._config.discovery_package:
            return
        self._discovered = True

        package_name = self._config.discovery_package
        try:
            package = importlib.import_module(package_name)
        except Exception as e:
            logger.warning(f"Discovery of {self._config.registry_name}s in {package_name} failed: {e}")
            return
        if not hasattr(package, "__path__"):
            return

        from .discovery import discover_registry_classes

        discover_registry_classes(package.__path__, f"{package_name}.", self._base_class)
        logger.debug(f"{len(self._members)} {self._config.registry_name}s after discovery")

    def __getitem__(self, key: str) -> Type:
        self._discover()
        return self._members[key]

    def __setitem__(self, key: str, cls: Type) -> None:
        self._members[key] = cls

    def __delitem__(self, key: str) -> None:
        del self._members[key]

    def __iter__(self) -> Iterator[str]:
        self._discover()
        return iter(self._members)

    def __len__(self) -> int:
        self._discover()
        return len(self._members)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._members!r})"


@dataclass(frozen=True)
class RegistryConfig:
    """
    Configuration for automatic class registration behavior.

    Attributes:
        registry_dict: Mapping the classes are registered into
        key_attribute: Name of class attribute holding the registration key
        key_extractor: Optional function deriving the key from the class name
                      when ``key_attribute`` is unset.
                      Signature: (class_name: str, cls: Type) -> str
        skip_if_no_key: If True, skip registration when no key is available.
                       If False, a missing key is an error.
        log_registration: If True, log a debug message per registration
        registry_name: Human-readable name for logging (e.g. 'command')
        discovery_package: Package imported on first registry read
                          (inferred from the base class module if None)
    """
    registry_dict: RegistryDict
    key_attribute: str
    key_extractor: Optional[KeyExtractor] = None
    skip_if_no_key: bool = False
    log_registration: bool = True
    registry_name: str = "strategy"
    discovery_package: Optional[str] = None


def _registry_owner(new_class: Type, attrs: dict) -> Optional[Type]:
    """The class whose body opened the registry ``new_class`` belongs to."""
    for base in new_class.__mro__[1:]:
        if "__registry__" in base.__dict__:
            return base
    if "__registry_key__" in attrs:
        new_class.__registry__ = LazyDiscoveryDict()
        return new_class
    return None


class AutoRegisterMeta(ABCMeta):
    """
    Metaclass registering concrete subclasses of a strategy base.

    Usage:
        class PairingStrategy(metaclass=AutoRegisterMeta):
            __registry_key__ = 'name'
            __key_extractor__ = make_kebab_extractor('Pairing')

            @abstractmethod
            def pair(self, g): ...

        class CanonicalPairing(PairingStrategy):   # registered as 'canonical'
            def pair(self, g): return g

    Abstract classes (non-empty ``__abstractmethods__``) are never registered.
    """

    def __new__(mcs, name: str, bases: tuple, attrs: dict,
                registry_config: Optional[RegistryConfig] = None):
        new_class = super().__new__(mcs, name, bases, attrs)

        config = registry_config or mcs._config_from_class(new_class, attrs)
        if config is None:
            return new_class
        mcs._bind_lazy_registry(new_class, config)

        if not bases or getattr(new_class, "__abstractmethods__", None):
            return new_class

        key = new_class.__dict__.get(config.key_attribute)
        if key is None and config.key_extractor is not None:
            key = config.key_extractor(name, new_class)
        if key is None:
            if config.skip_if_no_key:
                return new_class
            raise ValueError(
                f"{config.registry_name} {name} needs a '{config.key_attribute}' attribute "
                f"or a key extractor on its base"
            )

        mcs._register_class(new_class, key, config)
        return new_class

    @staticmethod
    def _config_from_class(new_class: Type, attrs: dict) -> Optional[RegistryConfig]:
        """Build the config from the dunders of the registry-owning base."""
        owner = _registry_owner(new_class, attrs)
        if owner is None:
            return None

        options: Dict[str, Any] = {
            field: owner.__dict__.get(dunder) for field, dunder in _CLASS_OPTIONS.items()
        }
        if isinstance(options["key_extractor"], staticmethod):
            options["key_extractor"] = options["key_extractor"].__func__
        options["skip_if_no_key"] = bool(options["skip_if_no_key"])
        if options["registry_name"] is None:
            options["registry_name"] = re.sub(r"(?<!^)(?=[A-Z])", " ", owner.__name__).lower()

        return RegistryConfig(
            registry_dict=owner.__registry__,
            key_attribute=owner.__registry_key__,
            **options,
        )

    @staticmethod
    def _bind_lazy_registry(new_class: Type, config: RegistryConfig) -> None:
        registry = config.registry_dict
        if not isinstance(registry, LazyDiscoveryDict) or registry.configured:
            return
        if config.discovery_package is None:
            package = new_class.__module__.rsplit(".", 1)[0]
            config = replace(config, discovery_package=package)
            logger.debug(f"{config.registry_name} registry discovers from '{package}'")
        registry.bind(new_class, config)

    @staticmethod
    def _register_class(cls: Type, key: str, config: RegistryConfig) -> None:
        registry = config.registry_dict
        if isinstance(registry, LazyDiscoveryDict):
            existing = registry.peek(key)
        else:
            existing = registry.get(key)
        if existing is not None and existing is not cls:
            logger.warning(
                f"{config.registry_name} '{key}' redefined: "
                f"{existing.__qualname__} replaced by {cls.__qualname__}"
            )
        registry[key] = cls
        setattr(cls, config.key_attribute, key)
        if config.log_registration:
            logger.debug(f"Registered {cls.__name__} as {config.registry_name} '{key}'")


def make_kebab_extractor(suffix: str) -> KeyExtractor:
    """
    Create a key extractor turning class names into kebab-case keys.

    Examples:
        extract = make_kebab_extractor('Command')
        extract('LemmaACommand', cls) -> 'lemma-a'
        extract('RootCommand', cls) -> 'root'
    """

    def extractor(name: str, cls: Type) -> str:
        stem = name[: -len(suffix)] if suffix and name.endswith(suffix) else name
        return re.sub(r"(?<!^)(?=[A-Z])", "-", stem).lower()

    return extractor


def lookup(registry: Mapping[str, Any], key: str, kind: str) -> Any:
    """
    Fetch a registered class, raising a domain error for unknown names.

    Raises:
        UnsupportedSymbolError: If ``key`` is not registered
    """
    from .exceptions import UnsupportedSymbolError

    try:
        return registry[key]
    except KeyError:
        known = ", ".join(sorted(registry)) or "none"
        raise UnsupportedSymbolError(f"unknown {kind} '{key}' (known: {known})") from None
