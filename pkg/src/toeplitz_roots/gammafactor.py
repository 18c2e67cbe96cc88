"""
Gamma-quotient factorization of the root's Mellin transform.

For a degree-p symbol with proper rational Mellin transform

    phi_hat(z) = constant * prod_{j<m} (z + a_j) / prod_{k<n} (z + b_k)

the function lambda(zeta) = psi_hat(2 p zeta) of a p-th root psi is, up to a
multiplicative constant, the product of Gamma quotients

    Gamma(zeta + A0) / Gamma(zeta + A0')
    * prod_j Gamma(zeta + A_j) / Gamma(zeta + A_j')
    * prod_k Gamma(zeta + B_k) / Gamma(zeta + B_k')

with A0 = 1/(2p), A0' = (2p-1)/(2p), A_j = (a_j+p+1)/(2p),
A_j' = (a_j+p-1)/(2p), B_k = (b_k+p-1)/(2p), B_k' = (b_k+p+1)/(2p).

Each quotient with numerator parameter below the denominator parameter is a
Beta function B(zeta + a, b) up to the constant 1/Gamma(b), the Mellin
transform of r^a (1-r)^(b-1). Quotients the other way round are shifted once
with Gamma(x + 1) = x Gamma(x), leaving a multiplier (zeta + A') that acts as
the operator (A' - rD) on the function side.
"""

import logging
import math
from abc import abstractmethod
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .exceptions import PositivityError, RangeError, UnsupportedSymbolError
from .registry import AutoRegisterMeta, lookup, make_kebab_extractor
from .specialfun import log_beta, log_gamma
from .symbols import RationalMellin

logger = logging.getLogger(__name__)

Pair = Tuple[float, float]

# Parameters this close are treated as equal (quotient identically 1)
EQUAL_PARAMETER_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GammaQuotientProduct:
    """
    Product constant * prod Gamma(zeta + num) / Gamma(zeta + den).

    Attributes:
        pairs: (num_param, den_param) tuples, all parameters positive
        constant: Leading constant; 1 for products built from a symbol,
                  the symbol's own constant only enters the root's calibration
    """
    pairs: Tuple[Pair, ...]
    constant: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple((float(n), float(d)) for n, d in self.pairs))
        for num, den in self.pairs:
            if not (num > 0.0 and den > 0.0):
                raise PositivityError(f"Gamma quotient parameters must be positive, got ({num}, {den})")

    @property
    def numerators(self) -> List[float]:
        return [num for num, _ in self.pairs]

    @property
    def denominators(self) -> List[float]:
        return [den for _, den in self.pairs]


@dataclass(frozen=True)
class BetaFactorization:
    """
    Product of Beta functions and linear multipliers.

    Represents constant * prod B(zeta + a, b) * prod (zeta + A').

    Attributes:
        constant: Leading constant
        beta_factors: (a, b) tuples, the Mellin transforms of r^a (1-r)^(b-1)
        diff_factors: The A' of the multipliers (zeta + A')
    """
    constant: float
    beta_factors: Tuple[Pair, ...]
    diff_factors: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta_factors",
                           tuple((float(a), float(b)) for a, b in self.beta_factors))
        object.__setattr__(self, "diff_factors", tuple(float(d) for d in self.diff_factors))
        for a, b in self.beta_factors:
            if not (a > 0.0 and b > 0.0):
                raise PositivityError(f"Beta factor parameters must be positive, got ({a}, {b})")


def build_quotients(rm: RationalMellin, p: int) -> GammaQuotientProduct:
    """
    Gamma-quotient product of lambda(zeta) = psi_hat(2 p zeta).

    Args:
        rm: Mellin transform of the symbol's radial part
        p: Degree of the symbol (>= 2)

    Returns:
        Pairs [(A0, A0')] + [(A_j, A_j')]_j + [(B_k, B_k')]_k, constant 1

    Raises:
        RangeError: If p < 2 (the degree-1 root is the operator itself)
        PositivityError: If a parameter is not positive; the message names
                        the root responsible
    """
    if p < 2:
        raise RangeError(f"build_quotients needs p >= 2, got p = {p}")
    two_p = 2.0 * p

    pairs: List[Pair] = [(1.0 / two_p, (two_p - 1.0) / two_p)]
    for a in rm.numerator_roots:
        num, den = (a + p + 1.0) / two_p, (a + p - 1.0) / two_p
        if not (num > 0.0 and den > 0.0):
            raise PositivityError(
                f"numerator root a = {a} gives non-positive Gamma parameters "
                f"A = {num:.6g}, A' = {den:.6g} at p = {p}"
            )
        pairs.append((num, den))
    for b in rm.denominator_roots:
        num, den = (b + p - 1.0) / two_p, (b + p + 1.0) / two_p
        if not (num > 0.0 and den > 0.0):
            raise PositivityError(
                f"denominator root b = {b} gives non-positive Gamma parameters "
                f"B = {num:.6g}, B' = {den:.6g} at p = {p}"
            )
        pairs.append((num, den))

    logger.debug(f"build_quotients: p={p}, {len(pairs)} pairs {pairs}")
    return GammaQuotientProduct(tuple(pairs))


def pair_optimize(g: GammaQuotientProduct) -> GammaQuotientProduct:
    """
    Re-pair numerator and denominator parameters in sorted order.

    The product is unchanged; sorted matching maximizes the number of pairs
    with num < den, which minimizes the multipliers left by ``to_beta_factors``.
    """
    pairs = tuple(zip(sorted(g.numerators), sorted(g.denominators)))
    return GammaQuotientProduct(pairs, g.constant)


class PairingStrategy(metaclass=AutoRegisterMeta):
    """Named rule pairing Gamma numerators with denominators."""
    __registry_key__ = 'name'
    __key_extractor__ = make_kebab_extractor('Pairing')
    __registry_name__ = 'pairing strategy'
    __discovery_package__ = __name__

    @abstractmethod
    def pair(self, g: GammaQuotientProduct) -> GammaQuotientProduct:
        """Return the re-paired product."""


class OptimizedPairing(PairingStrategy):
    """Sorted-multiset matching, few or no multipliers."""

    def pair(self, g: GammaQuotientProduct) -> GammaQuotientProduct:
        return pair_optimize(g)


class CanonicalPairing(PairingStrategy):
    """The pairing as built, one multiplier per numerator root."""

    def pair(self, g: GammaQuotientProduct) -> GammaQuotientProduct:
        return g


def get_pairing(name: str) -> PairingStrategy:
    """Instantiate a registered pairing strategy by name."""
    return lookup(PairingStrategy.__registry__, name, "pairing strategy")()


def to_beta_factors(g: GammaQuotientProduct) -> BetaFactorization:
    """
    Normalize a Gamma-quotient product into Beta factors and multipliers.

    - num < den: Beta factor (num, den - num)
    - num == den: dropped, the quotient is identically 1
    - den < num < den + 1: Beta factor (num, den + 1 - num) and multiplier den

    The constant absorbs 1/Gamma(b) for every Beta factor so that
    ``eval_factored`` of the result equals ``eval_quotients`` of ``g``.

    Raises:
        UnsupportedSymbolError: If num >= den + 1 (one shift is not enough)
    """
    betas: List[Pair] = []
    diffs: List[float] = []
    for num, den in g.pairs:
        if abs(num - den) <= EQUAL_PARAMETER_TOLERANCE * max(1.0, den):
            continue
        if num < den:
            betas.append((num, den - num))
        elif num < den + 1.0:
            betas.append((num, den + 1.0 - num))
            diffs.append(den)
        else:
            raise UnsupportedSymbolError(
                f"Gamma quotient ({num}, {den}) needs more than one shift to normalize"
            )

    log_norm = sum(log_gamma(b) for _, b in betas)
    bf = BetaFactorization(g.constant * math.exp(-log_norm), tuple(betas), tuple(diffs))
    logger.debug(
        f"to_beta_factors: {len(betas)} Beta factors, {len(diffs)} multipliers, "
        f"exponent budget {exponent_budget(bf):.6g}"
    )
    return bf


def factorize(rm: RationalMellin, p: int, pairing: str = "optimized") -> BetaFactorization:
    """build_quotients, the named pairing, then to_beta_factors."""
    g = get_pairing(pairing).pair(build_quotients(rm, p))
    return to_beta_factors(g)


def exponent_budget(bf: BetaFactorization) -> float:
    """Sum of the Beta exponents b, the beta_sum of the convolution envelope."""
    return float(sum(b for _, b in bf.beta_factors))


Value = Union[float, np.ndarray]


def eval_quotients(g: GammaQuotientProduct, zeta: Value) -> Value:
    """constant * prod Gamma(zeta + num) / Gamma(zeta + den), via log_gamma."""
    z = np.asarray(zeta, dtype=float)
    total = np.zeros_like(z)
    for num, den in g.pairs:
        total = total + log_gamma(z + num) - log_gamma(z + den)
    value = g.constant * np.exp(total)
    return float(value) if np.ndim(value) == 0 else value


def eval_factored(bf: BetaFactorization, zeta: Value) -> Value:
    """
    Evaluate constant * prod B(zeta + a, b) * prod (zeta + A').

    Args:
        bf: Factorization
        zeta: Real point(s) > 0

    Raises:
        RangeError: If zeta is not positive
    """
    z = np.asarray(zeta, dtype=float)
    if np.any(~(z > 0.0)):
        raise RangeError(f"eval_factored needs zeta > 0, got {zeta!r}")
    total = np.zeros_like(z)
    for a, b in bf.beta_factors:
        total = total + log_beta(z + a, b)
    value = bf.constant * np.exp(total)
    for shift in bf.diff_factors:
        value = value * (z + shift)
    return float(value) if np.ndim(value) == 0 else value
