"""Tests for toeplitz_roots.registry module."""

from abc import abstractmethod

import pytest

from toeplitz_roots.exceptions import UnsupportedSymbolError
from toeplitz_roots.registry import (
    AutoRegisterMeta,
    LazyDiscoveryDict,
    RegistryConfig,
    lookup,
    make_kebab_extractor,
)


class TestLazyDiscoveryDict:
    """Test LazyDiscoveryDict functionality."""

    def test_basic_dict_operations(self):
        """Test a dict without a discovery package behaves like a dict."""
        registry = LazyDiscoveryDict()
        registry['test'] = object
        assert 'test' in registry
        assert len(registry) == 1
        assert registry['test'] is object
        assert registry.get('nonexistent', 'default') == 'default'

    def test_writes_do_not_discover(self):
        """Test registration and peek leave discovery pending."""
        registry = LazyDiscoveryDict()
        registry.bind(object, RegistryConfig(registry_dict=registry, key_attribute='name',
                                             discovery_package='toeplitz_roots.commands'))
        registry['x'] = int
        assert registry.peek('x') is int
        assert registry._discovered is False
        assert 'x' in registry
        assert registry._discovered is True


class TestRegistryConfig:
    """Test RegistryConfig dataclass."""

    def test_minimal_config(self):
        """Test defaults of RegistryConfig."""
        registry_dict = {}
        config = RegistryConfig(registry_dict=registry_dict, key_attribute='name')
        assert config.registry_dict is registry_dict
        assert config.skip_if_no_key is False
        assert config.log_registration is True
        assert config.registry_name == "strategy"
        assert config.discovery_package is None


class TestKebabExtractor:
    """Test make_kebab_extractor."""

    @pytest.mark.parametrize(
        "suffix, name, key",
        [
            ("Command", "LemmaACommand", "lemma-a"),
            ("Command", "RootCommand", "root"),
            ("Pairing", "OptimizedPairing", "optimized"),
            ("Interpolation", "PchipInterpolation", "pchip"),
            ("Pairing", "Sorted", "sorted"),
        ],
    )
    def test_keys(self, suffix, name, key):
        """Test class names become kebab-case keys without the suffix."""
        assert make_kebab_extractor(suffix)(name, object) == key


class TestAutoRegisterMeta:
    """Test AutoRegisterMeta metaclass."""

    def test_registration(self):
        """Test concrete subclasses register and abstract ones do not."""

        class Strategy(metaclass=AutoRegisterMeta):
            __registry_key__ = 'name'
            __discovery_package__ = __name__
            __key_extractor__ = make_kebab_extractor('Strategy')

            @abstractmethod
            def run(self): ...

        class FastStrategy(Strategy):
            def run(self):
                return "fast"

        class Intermediate(Strategy):
            pass

        assert isinstance(Strategy.__registry__, LazyDiscoveryDict)
        assert dict(Strategy.__registry__) == {'fast': FastStrategy}
        assert FastStrategy.name == 'fast'
        assert 'intermediate' not in Strategy.__registry__

    def test_explicit_key(self):
        """Test a key set in the class body wins over the extractor."""

        class Strategy(metaclass=AutoRegisterMeta):
            __registry_key__ = 'name'
            __discovery_package__ = __name__
            __key_extractor__ = make_kebab_extractor('Strategy')

        class Custom(Strategy):
            name = 'special'

        assert Strategy.__registry__['special'] is Custom

    def test_missing_key(self):
        """Test a missing key without an extractor."""

        class Strategy(metaclass=AutoRegisterMeta):
            __registry_key__ = 'name'
            __discovery_package__ = __name__

        with pytest.raises(ValueError):
            class Anonymous(Strategy):
                pass

    def test_skip_if_no_key(self):
        """Test __skip_if_no_key__ leaves keyless classes out."""

        class Strategy(metaclass=AutoRegisterMeta):
            __registry_key__ = 'name'
            __discovery_package__ = __name__
            __skip_if_no_key__ = True

        class Anonymous(Strategy):
            pass

        assert len(Strategy.__registry__) == 0

    def test_redefinition(self, caplog):
        """Test re-registering a key replaces the class and warns."""

        class Strategy(metaclass=AutoRegisterMeta):
            __registry_key__ = 'name'
            __discovery_package__ = __name__
            __key_extractor__ = make_kebab_extractor('Strategy')

        class SlowStrategy(Strategy):
            pass

        first = SlowStrategy

        class SlowStrategy(Strategy):  # noqa: F811
            pass

        assert Strategy.__registry__['slow'] is SlowStrategy
        assert Strategy.__registry__['slow'] is not first
        assert "redefined" in caplog.text


class TestLookup:
    """Test lookup."""

    def test_found(self):
        """Test a registered key."""
        assert lookup({'a': int}, 'a', 'thing') is int

    def test_unknown(self):
        """Test unknown keys list the known ones."""
        with pytest.raises(UnsupportedSymbolError, match="known: a, b"):
            lookup({'b': int, 'a': str}, 'c', 'thing')
