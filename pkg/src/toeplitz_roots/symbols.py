"""
Radial symbols and their Mellin transforms.

A quasihomogeneous symbol of degree p is f(r e^{i theta}) = e^{i p theta} phi(r).
Here phi is either a finite sum of terms c r^a (ln r)^b, or is given directly
by its Mellin transform, a proper rational function with real zeros and poles:

    phi_hat(z) = constant * prod_j (z + a_j) / prod_k (z + b_k)

The two forms are interconvertible (``mellin_of_terms`` / ``terms_of_mellin``).
"""

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import PoleError, ProperError, RangeError, UnsupportedSymbolError
from .specialfun import QuadratureSpec, integrate01_batch

logger = logging.getLogger(__name__)

# Imaginary parts up to this (relative) size are rounding noise on real roots
REAL_ROOT_TOLERANCE = 1e-9
# Conjugate pairs this close to the axis are split multiple roots
_MULTIPLE_ROOT_TOLERANCE = 1e-5
# Powers closer than this are merged into one pole
_POWER_MERGE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class RadialTerm:
    """
    One term c * r^a * (ln r)^b of a radial symbol.

    Attributes:
        c: Coefficient
        a: Power of r (>= 0)
        b: Power of ln r (nonnegative integer)
    """
    c: float
    a: float
    b: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.c) or not math.isfinite(self.a):
            raise UnsupportedSymbolError(f"term has non-finite data: {self}")
        if int(self.b) != self.b or self.b < 0:
            raise UnsupportedSymbolError(f"log power must be a nonnegative integer: {self}")
        if self.a < 0.0:
            raise UnsupportedSymbolError(f"term power must be >= 0 (unbounded term): {self}")
        if self.a == 0.0 and self.b > 0:
            raise UnsupportedSymbolError(
                f"term (ln r)^{self.b} without a positive power of r is unbounded"
            )


@dataclass(frozen=True)
class RadialTermSum:
    """A bounded radial function sum_i c_i r^{a_i} (ln r)^{b_i} on (0, 1)."""
    terms: Tuple[RadialTerm, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise UnsupportedSymbolError("a radial symbol needs at least one term")

    @classmethod
    def of(cls, *triples: Tuple[float, float, int]) -> "RadialTermSum":
        """Build from (c, a, b) triples."""
        return cls(tuple(RadialTerm(float(c), float(a), int(b)) for c, a, b in triples))

    def __call__(self, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return evaluate(self, r)


@dataclass(frozen=True)
class RationalMellin:
    """
    Factored proper rational Mellin transform.

    Roots are stored sorted; common roots of numerator and denominator are
    cancelled on construction.

    Attributes:
        constant: Nonzero leading constant
        numerator_roots: The a_j of the factors (z + a_j)
        denominator_roots: The b_k of the factors (z + b_k)
    """
    constant: float
    numerator_roots: Tuple[float, ...] = ()
    denominator_roots: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.constant or not math.isfinite(self.constant):
            raise UnsupportedSymbolError(f"Mellin constant must be finite and nonzero, got {self.constant}")
        num, den = _cancel(sorted(map(float, self.numerator_roots)),
                           sorted(map(float, self.denominator_roots)))
        object.__setattr__(self, "numerator_roots", tuple(num))
        object.__setattr__(self, "denominator_roots", tuple(den))
        if len(num) >= len(den):
            raise ProperError(
                f"Mellin transform is not proper: numerator degree {len(num)} "
                f">= denominator degree {len(den)}"
            )

    @property
    def m(self) -> int:
        return len(self.numerator_roots)

    @property
    def n(self) -> int:
        return len(self.denominator_roots)

    def __call__(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        return mellin_eval(self, z)


def _cancel(num: List[float], den: List[float]) -> Tuple[List[float], List[float]]:
    """Remove roots appearing on both sides (one occurrence per match)."""
    num = list(num)
    remaining = []
    for b in den:
        match = next(
            (i for i, a in enumerate(num)
             if abs(a - b) <= _POWER_MERGE_TOLERANCE * max(1.0, abs(b))),
            None,
        )
        if match is None:
            remaining.append(b)
        else:
            num.pop(match)
    return num, remaining


@dataclass(frozen=True)
class QuasihomogeneousSymbol:
    """
    Symbol e^{i p theta} phi(r) of a quasihomogeneous Toeplitz operator.

    At least one of ``radial`` and ``mellin`` is given; ``mellin`` is derived
    from ``radial`` when missing.

    Attributes:
        p: Degree of quasihomogeneity (>= 1)
        radial: phi as a term sum, if known
        mellin: phi_hat in factored rational form
    """
    p: int
    radial: Optional[RadialTermSum] = None
    mellin: Optional[RationalMellin] = field(default=None)

    def __post_init__(self) -> None:
        if int(self.p) != self.p or self.p < 1:
            raise RangeError(f"degree p must be a positive integer, got {self.p}")
        if self.radial is None and self.mellin is None:
            raise UnsupportedSymbolError("symbol needs a term sum or a rational Mellin transform")
        if self.mellin is None:
            object.__setattr__(self, "mellin", mellin_of_terms(self.radial))

    def radial_part(self) -> RadialTermSum:
        """phi as a term sum, recovered by partial fractions when needed."""
        if self.radial is not None:
            return self.radial
        return terms_of_mellin(self.mellin)

    def with_degree(self, p: int) -> "QuasihomogeneousSymbol":
        return QuasihomogeneousSymbol(p, self.radial, self.mellin)


def evaluate(s: RadialTermSum, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """phi(r) = sum c r^a (ln r)^b, vectorized over r in (0, 1]."""
    rr = np.asarray(r, dtype=float)
    log_r = np.log(rr)
    out = np.zeros_like(rr)
    for term in s.terms:
        part = term.c * rr ** term.a
        if term.b:
            part = part * log_r ** term.b
        out = out + part
    if out.ndim == 0:
        return float(out)
    return out


def _grouped(s: RadialTermSum) -> Dict[float, Dict[int, float]]:
    """Coefficients keyed by power then log power; merged and zero-free."""
    groups: Dict[float, Dict[int, float]] = defaultdict(lambda: defaultdict(float))
    powers: List[float] = []
    for term in s.terms:
        key = next(
            (a for a in powers
             if abs(a - term.a) <= _POWER_MERGE_TOLERANCE * max(1.0, abs(a))),
            None,
        )
        if key is None:
            key = term.a
            powers.append(key)
        groups[key][term.b] += term.c
    cleaned: Dict[float, Dict[int, float]] = {}
    for a, by_log in groups.items():
        kept = {b: c for b, c in by_log.items() if c != 0.0}
        if kept:
            cleaned[a] = kept
    return cleaned


def _polish(poly: Polynomial, root: complex, steps: int = 4) -> complex:
    deriv = poly.deriv()
    for _ in range(steps):
        slope = deriv(root)
        if slope == 0:
            break
        step = poly(root) / slope
        root = root - step
        if abs(step) <= 1e-16 * max(1.0, abs(root)):
            break
    return root


def _real_roots(poly: Polynomial) -> List[float]:
    """
    Real roots of a polynomial, with multiplicity.

    Raises:
        UnsupportedSymbolError: If some root is genuinely complex
    """
    if poly.degree() < 1:
        return []
    real: List[float] = []
    complex_roots: List[complex] = []
    for root in poly.roots():
        root = _polish(poly, complex(root))
        if abs(root.imag) <= REAL_ROOT_TOLERANCE * max(1.0, abs(root)):
            real.append(root.real)
        else:
            complex_roots.append(root)

    # Multiple real roots come back from the eigenvalue solver as tight
    # conjugate clusters.
    scale = float(np.sum(np.abs(poly.coef)))
    while complex_roots:
        root = complex_roots.pop()
        if abs(root.imag) > _MULTIPLE_ROOT_TOLERANCE * max(1.0, abs(root)):
            raise UnsupportedSymbolError(
                f"numerator has a complex root {root.real:.6g}{root.imag:+.6g}i; "
                "only real linear factors are supported"
            )
        partner = min(range(len(complex_roots)),
                      key=lambda i: abs(complex_roots[i] - root.conjugate()),
                      default=None)
        x = root.real
        size = max(1.0, abs(x)) ** poly.degree()
        if partner is None or abs(poly(x)) > 1e-8 * scale * size:
            raise UnsupportedSymbolError(
                f"numerator has a complex root {root.real:.6g}{root.imag:+.6g}i; "
                "only real linear factors are supported"
            )
        complex_roots.pop(partner)
        real.extend([x, x])
    return sorted(real)


def mellin_of_terms(s: RadialTermSum) -> RationalMellin:
    """
    Mellin transform of a term sum as a factored rational function.

    Each term contributes c (-1)^b b! / (z + a)^{b+1}.

    Args:
        s: Radial term sum

    Returns:
        The factored, cancelled rational transform

    Raises:
        UnsupportedSymbolError: If the numerator has non-real roots or the
                                terms cancel to zero
        ProperError: If the result is not proper
    """
    groups = _grouped(s)
    if not groups:
        raise UnsupportedSymbolError("symbol terms cancel to the zero function")

    orders = {a: max(by_log) + 1 for a, by_log in groups.items()}
    denominator = Polynomial([1.0])
    for a, order in orders.items():
        denominator = denominator * Polynomial([a, 1.0]) ** order

    numerator = Polynomial([0.0])
    for a, by_log in groups.items():
        others = Polynomial([1.0])
        for a2, order2 in orders.items():
            if a2 != a:
                others = others * Polynomial([a2, 1.0]) ** order2
        for b, c in by_log.items():
            weight = c * (-1.0) ** b * math.factorial(b)
            numerator = numerator + weight * Polynomial([a, 1.0]) ** (orders[a] - b - 1) * others

    numerator = numerator.trim(1e-13 * float(np.max(np.abs(numerator.coef))))
    constant = float(numerator.coef[-1])
    num_roots = sorted(-x for x in _real_roots(numerator / constant))
    den_roots = sorted(a for a, order in orders.items() for _ in range(order))
    rm = RationalMellin(constant, tuple(num_roots), tuple(den_roots))
    logger.debug(f"mellin_of_terms: {len(s.terms)} terms -> m={rm.m}, n={rm.n}")
    return rm


def mellin_eval(rm: RationalMellin, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """
    Evaluate constant * prod(z + a_j) / prod(z + b_k).

    Raises:
        PoleError: If z is a pole
    """
    zz = np.asarray(z)
    value = np.full(zz.shape, rm.constant, dtype=np.result_type(zz, float))
    for b in rm.denominator_roots:
        gap = zz + b
        if np.any(np.abs(gap) <= 1e-14 * np.maximum(1.0, np.abs(zz))):
            raise PoleError(f"Mellin transform evaluated at its pole z = {-b}")
        value = value / gap
    for a in rm.numerator_roots:
        value = value * (zz + a)
    if value.ndim == 0:
        return value.item()
    return value


def mellin_numeric(
    f: Callable[..., Any],
    z: float,
    spec: Optional[QuadratureSpec] = None,
    singularity: Tuple[float, float] = (0.0, 0.0),
    with_complement: bool = False,
) -> Union[float, complex]:
    """
    Mellin transform by quadrature, integral of f(r) r^{z-1} over (0, 1).

    Args:
        f: Vectorized function on (0, 1), real or complex valued; called as
           ``f(r, 1 - r)`` when ``with_complement`` is set
        z: Real evaluation point (> 0)
        spec: Quadrature settings
        singularity: Exponents (s0, s1) with f ~ r^s0 near 0, (1-r)^s1 near 1

    Raises:
        RangeError: If z is not positive
        AccuracyError: If the quadrature does not converge
    """
    if not z > 0.0:
        raise RangeError(f"numeric Mellin transform needs z > 0, got {z}")
    spec = (spec or QuadratureSpec()).with_hints(z - 1.0 + singularity[0], singularity[1])

    def batch(x: np.ndarray, xc: np.ndarray, index: np.ndarray) -> np.ndarray:
        values = np.asarray(f(x, xc) if with_complement else f(x)) * x ** (z - 1.0)
        rows = np.stack([values.real, np.imag(values)])
        return rows[index]

    values, _ = integrate01_batch(batch, 2, spec)
    if values[1] == 0.0:
        return float(values[0])
    return complex(values[0], values[1])


def _series_quotient(num: np.ndarray, den: np.ndarray, order: int) -> np.ndarray:
    """First ``order`` power-series coefficients of num/den (den[0] != 0)."""
    num = np.concatenate([num, np.zeros(order)])[:order]
    den = np.concatenate([den, np.zeros(order)])[:order]
    out = np.zeros(order)
    for k in range(order):
        out[k] = (num[k] - np.dot(den[1:k + 1], out[k - 1::-1][:k])) / den[0]
    return out


def terms_of_mellin(rm: RationalMellin) -> RadialTermSum:
    """
    Invert ``mellin_of_terms`` by partial fractions.

    A pole of order j+1 at z = -b maps 1/(z+b)^{j+1} to
    (-1)^j r^b (ln r)^j / j!.

    Raises:
        UnsupportedSymbolError: If a pole gives an unbounded term
    """
    poles: Dict[float, int] = {}
    for b in rm.denominator_roots:
        poles[b] = poles.get(b, 0) + 1

    triples: List[Tuple[float, float, int]] = []
    for b, order in poles.items():
        # Expand constant*prod(w + a - b) / prod_{b' != b}(w + b' - b)^{mu'} at w = 0
        num = (rm.constant * Polynomial.fromroots([b - a for a in rm.numerator_roots])
               if rm.numerator_roots else Polynomial([rm.constant]))
        den = Polynomial([1.0])
        for b2, order2 in poles.items():
            if b2 != b:
                den = den * Polynomial([b2 - b, 1.0]) ** order2
        coeffs = _series_quotient(num.coef, den.coef, order)
        for k, kappa in enumerate(coeffs):
            j = order - 1 - k
            if kappa == 0.0:
                continue
            if b < 0.0 or (b == 0.0 and j > 0):
                raise UnsupportedSymbolError(
                    f"pole of order {j + 1} at z = {-b} gives an unbounded radial term"
                )
            triples.append((kappa * (-1.0) ** j / math.factorial(j), b, j))
    return RadialTermSum.of(*triples)


def symbol_from_dict(data: Dict[str, Any], p: Optional[int] = None) -> QuasihomogeneousSymbol:
    """
    Parse the JSON symbol schema.

    Accepts ``{"p": int, "terms": [{"c", "a", "b"}, ...]}`` or
    ``{"p": int, "rational": {"constant", "num_roots", "den_roots"}}``.
    ``p`` overrides the degree stored in ``data``.

    Raises:
        UnsupportedSymbolError: If the document is malformed
    """
    if not isinstance(data, dict):
        raise UnsupportedSymbolError("symbol document must be a JSON object")
    degree = p if p is not None else data.get("p")
    if degree is None:
        raise UnsupportedSymbolError("symbol document has no degree 'p' and none was given")
    try:
        if "terms" in data:
            radial = RadialTermSum.of(
                *((t["c"], t["a"], t.get("b", 0)) for t in data["terms"])
            )
            return QuasihomogeneousSymbol(int(degree), radial=radial)
        if "rational" in data:
            rat = data["rational"]
            rm = RationalMellin(
                float(rat["constant"]),
                tuple(rat.get("num_roots", ())),
                tuple(rat["den_roots"]),
            )
            return QuasihomogeneousSymbol(int(degree), mellin=rm)
    except (KeyError, TypeError, ValueError) as exc:
        raise UnsupportedSymbolError(f"malformed symbol document: {exc}") from exc
    raise UnsupportedSymbolError("symbol document needs 'terms' or 'rational'")


def symbol_to_dict(symbol: QuasihomogeneousSymbol) -> Dict[str, Any]:
    """Serialize a symbol to the JSON schema, preferring the term form."""
    if symbol.radial is not None:
        return {
            "p": symbol.p,
            "terms": [{"c": t.c, "a": t.a, "b": t.b} for t in symbol.radial.terms],
        }
    rm = symbol.mellin
    return {
        "p": symbol.p,
        "rational": {
            "constant": rm.constant,
            "num_roots": list(rm.numerator_roots),
            "den_roots": list(rm.denominator_roots),
        },
    }


def load_symbol(path: Union[str, Path], p: Optional[int] = None) -> QuasihomogeneousSymbol:
    """Read a symbol document from disk."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UnsupportedSymbolError(f"{path} is not valid JSON: {exc}") from exc
    return symbol_from_dict(data, p=p)


def term_sum_from_pairs(pairs: Iterable[Sequence[float]]) -> RadialTermSum:
    """Shorthand for polynomial symbols: (c, a) pairs without logarithms."""
    return RadialTermSum.of(*((c, a, 0) for c, a in pairs))
