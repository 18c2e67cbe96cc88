"""
Special functions and quadrature on the unit interval.

Everything else in the package is built on two primitives:

- ``log_gamma`` / ``beta``: Gamma-function algebra for real positive
  arguments, implemented in-repo (Lanczos sum, Stirling series, and a Taylor
  series around the zeros of log-Gamma at 1 and 2).
- ``integrate01`` / ``integrate01_batch``: double-exponential (tanh-sinh)
  quadrature on (0, 1). The substitution x = expit(pi*sinh(t)) clusters
  abscissae at both endpoints, so algebraic-logarithmic endpoint
  singularities r^s0 (1-r)^s1 with s0, s1 > -1 need no splitting.

Integrands receive both x and its complement 1-x; the complement is
computed from the transformation itself and is exact near x = 1, which
matters for factors like (1-x)^(b-1).
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.special import expit, zeta

from .exceptions import AccuracyError, RangeError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Lanczos sum with g = 7 and nine coefficients
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_EULER_GAMMA = 0.57721566490153286061

# Bernoulli terms B_2k / (2k (2k-1)) of the Stirling series
_STIRLING_COEFFS = np.array([
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
])
_STIRLING_MIN = 10.0

# ln Gamma(1+e) = -gamma*e + sum_{k>=2} (-1)^k zeta(k) e^k / k
_TAYLOR_RADIUS = 0.25
_TAYLOR_ORDER = 40
_TAYLOR_COEFFS = np.array(
    [0.0, -_EULER_GAMMA]
    + [(-1.0) ** k * float(zeta(k)) / k for k in range(2, _TAYLOR_ORDER + 1)]
)


def _lanczos(x: np.ndarray) -> np.ndarray:
    """ln Gamma(x) for x >= 0.5 from the Lanczos sum."""
    z = x - 1.0
    series = np.full_like(z, _LANCZOS_COEFFS[0])
    for i in range(1, len(_LANCZOS_COEFFS)):
        series = series + _LANCZOS_COEFFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(series)


def _stirling(x: np.ndarray) -> np.ndarray:
    """ln Gamma(x) for x >= 10 from the asymptotic series."""
    inv = 1.0 / x
    inv2 = inv * inv
    tail = np.zeros_like(x)
    for coeff in _STIRLING_COEFFS[::-1]:
        tail = tail * inv2 + coeff
    return (x - 0.5) * np.log(x) - x + _HALF_LOG_2PI + tail * inv


def _taylor_near_one(eps: np.ndarray) -> np.ndarray:
    """ln Gamma(1+eps) for |eps| <= 0.25."""
    return np.polynomial.polynomial.polyval(eps, _TAYLOR_COEFFS)


def _log_gamma_reflected(x: np.ndarray) -> np.ndarray:
    """ln Gamma(x) for x >= 0.5 (no reflection needed)."""
    out = np.empty_like(x)
    near_one = np.abs(x - 1.0) <= _TAYLOR_RADIUS
    near_two = np.abs(x - 2.0) <= _TAYLOR_RADIUS
    large = x >= _STIRLING_MIN
    rest = ~(near_one | near_two | large)

    out[near_one] = _taylor_near_one(x[near_one] - 1.0)
    eps = x[near_two] - 2.0
    out[near_two] = _taylor_near_one(eps) + np.log1p(eps)
    out[large] = _stirling(x[large])
    out[rest] = _lanczos(x[rest])
    return out


def log_gamma(x: ArrayLike) -> ArrayLike:
    """
    Natural logarithm of the Gamma function for positive real arguments.

    Args:
        x: Positive real number or array of them

    Returns:
        ln Gamma(x), with the shape of ``x``

    Raises:
        RangeError: If any argument is not strictly positive
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise RangeError(f"log_gamma requires x > 0, got {x!r}")

    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat < 0.5
    out[~small] = _log_gamma_reflected(flat[~small])
    if np.any(small):
        xs = flat[small]
        # Gamma(x) Gamma(1-x) = pi / sin(pi x)
        out[small] = (
            math.log(math.pi) - np.log(np.sin(math.pi * xs))
            - _log_gamma_reflected(1.0 - xs)
        )
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def log_beta(x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """ln B(x, y) = ln Gamma(x) + ln Gamma(y) - ln Gamma(x + y)."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.any(~(xa > 0.0)) or np.any(~(ya > 0.0)):
        raise RangeError(f"beta requires positive arguments, got ({x!r}, {y!r})")
    return log_gamma(xa) + log_gamma(ya) - log_gamma(xa + ya)


def beta(x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """
    Euler Beta function B(x, y) for positive real arguments.

    Args:
        x: First argument (> 0)
        y: Second argument (> 0)

    Returns:
        B(x, y) = exp(ln Gamma(x) + ln Gamma(y) - ln Gamma(x + y))

    Raises:
        RangeError: If an argument is not strictly positive
    """
    value = np.exp(log_beta(x, y))
    if np.ndim(value) == 0:
        return float(value)
    return value


def falling_factorial(s: float, k: int) -> float:
    """s (s-1) ... (s-k+1), with the empty product 1 for k = 0."""
    out = 1.0
    for i in range(k):
        out *= s - i
    return out


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Accuracy settings for ``integrate01``.

    Attributes:
        relative_tolerance: Target relative accuracy of the integral
        max_levels: Number of step halvings before giving up
        endpoint_hints: Optional exponents (s0, s1) of integrable endpoint
                       singularities r^s0 near 0 and (1-r)^s1 near 1.
                       Used to size the truncation of the infinite rule.
        absolute_floor: Absolute accuracy accepted for integrals near zero
    """
    relative_tolerance: float = 1e-10
    max_levels: int = 10
    endpoint_hints: Optional[Tuple[float, float]] = None
    absolute_floor: float = 1e-14

    def __post_init__(self) -> None:
        if not self.relative_tolerance > 0.0:
            raise RangeError(
                f"relative_tolerance must be positive, got {self.relative_tolerance}"
            )
        if self.max_levels < 1:
            raise RangeError(f"max_levels must be at least 1, got {self.max_levels}")
        if self.endpoint_hints is not None:
            s0, s1 = self.endpoint_hints
            if not (s0 > -1.0 and s1 > -1.0):
                raise RangeError(
                    f"endpoint exponents must exceed -1, got {self.endpoint_hints}"
                )

    def loosened(self, factor: float) -> "QuadratureSpec":
        """Copy with the relative tolerance multiplied by ``factor``."""
        return replace(self, relative_tolerance=self.relative_tolerance * factor)

    def with_hints(self, s0: float, s1: float) -> "QuadratureSpec":
        """Copy with endpoint hints, clamped just above -1."""
        floor = -1.0 + 1e-6
        return replace(self, endpoint_hints=(max(s0, floor), max(s1, floor)))


# Level-0 step and the cap keeping exp(pi*sinh(t)) finite
_BASE_STEP = 0.5
_T_CAP = 6.0
_MIN_LEVELS = 3
# Tail mass of order 1e-17 is dropped: pi*sinh(t_max)*(1+s) >= 17*ln(10)
_TAIL_EXPONENT = 17.0 * math.log(10.0)
# Integrand samples evaluated per call
_CHUNK_ELEMENTS = 1 << 21

BatchIntegrand = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _truncation(spec: QuadratureSpec) -> float:
    """Half-width of the t-interval carrying the rule."""
    if spec.endpoint_hints is None:
        worst = 0.0
    else:
        worst = min(0.0, min(spec.endpoint_hints))
    t_max = math.asinh(_TAIL_EXPONENT / (math.pi * (1.0 + worst)))
    return min(t_max, _T_CAP)


def _abscissae(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Abscissae, complements and dx/dt for the double-exponential map."""
    arg = math.pi * np.sinh(t)
    x = expit(arg)
    xc = expit(-arg)
    dxdt = math.pi * np.cosh(t) * x * xc
    keep = (x > 0.0) & (xc > 0.0)
    return x[keep], xc[keep], dxdt[keep]


def _level_nodes(level: int, t_max: float) -> Tuple[np.ndarray, float]:
    """New t-nodes introduced at ``level`` and the step of that level."""
    step = _BASE_STEP / (2 ** level)
    count = int(math.floor(t_max / step))
    j = np.arange(-count, count + 1)
    if level > 0:
        j = j[j % 2 != 0]
    return j * step, step


def integrate01_batch(
    f: BatchIntegrand,
    size: int,
    spec: QuadratureSpec,
    floors: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate a family of integrands over (0, 1) on one shared rule.

    Args:
        f: Callable ``f(x, xc, index)`` returning an array of shape
           ``(len(index), len(x))``: the members ``index`` of the family
           evaluated at abscissae ``x`` with complements ``xc = 1 - x``
        size: Number of members in the family
        spec: Accuracy settings
        floors: Optional per-member absolute accuracies, raising
               ``spec.absolute_floor`` for members known to cancel

    Returns:
        Tuple of (values, error_estimates), each of length ``size``

    Raises:
        AccuracyError: If some member misses its tolerance after
                      ``spec.max_levels`` halvings; ``node_index`` names the
                      worst member
    """
    t_max = _truncation(spec)
    floor = np.full(size, spec.absolute_floor)
    if floors is not None:
        floor = np.maximum(floor, np.asarray(floors, dtype=float))
    sums = np.zeros(size)
    values = np.zeros(size)
    errors = np.full(size, np.inf)
    active = np.arange(size)

    for level in range(spec.max_levels + 1):
        t, step = _level_nodes(level, t_max)
        x, xc, dxdt = _abscissae(t)
        chunk = max(1, _CHUNK_ELEMENTS // max(1, x.size))
        for start in range(0, active.size, chunk):
            part = active[start:start + chunk]
            samples = np.asarray(f(x, xc, part), dtype=float)
            samples = np.where(np.isfinite(samples), samples, 0.0)
            sums[part] += samples @ dxdt
        previous = values.copy()
        values[active] = sums[active] * step
        if level == 0:
            continue
        errors[active] = np.abs(values[active] - previous[active])
        if level + 1 < _MIN_LEVELS:
            continue
        target = np.maximum(spec.relative_tolerance * np.abs(values), floor)
        converged = errors <= target
        active = np.flatnonzero(~converged)
        if active.size == 0:
            logger.debug(f"integrate01_batch: {size} integrals converged at level {level}")
            return values, errors

    worst = int(np.argmax(errors / np.maximum(np.abs(values), floor)))
    raise AccuracyError(
        f"quadrature did not converge for {active.size} of {size} integrands "
        f"after {spec.max_levels} levels (worst index {worst}, "
        f"estimate {values[worst]:.6g} +/- {errors[worst]:.2g})",
        estimate=float(values[worst]),
        error_estimate=float(errors[worst]),
        node_index=worst,
    )


def integrate01(
    f: Callable[[np.ndarray], np.ndarray],
    spec: Optional[QuadratureSpec] = None,
    with_complement: bool = False,
) -> Tuple[float, float]:
    """
    Integrate a real function over (0, 1).

    Args:
        f: Vectorized integrand ``f(x)``; with ``with_complement`` it is
           called as ``f(x, 1 - x)`` with an exact complement
        spec: Accuracy settings (defaults to ``QuadratureSpec()``)
        with_complement: Pass the complement as a second argument

    Returns:
        Tuple of (value, error_estimate)

    Raises:
        AccuracyError: If the tolerance is not reached within
                      ``spec.max_levels`` halvings
    """
    spec = spec or QuadratureSpec()

    def batch(x: np.ndarray, xc: np.ndarray, index: np.ndarray) -> np.ndarray:
        out = f(x, xc) if with_complement else f(x)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape)[None, :]

    try:
        values, errors = integrate01_batch(batch, 1, spec)
    except AccuracyError as exc:
        raise AccuracyError(
            f"integrate01 did not converge: {exc}",
            estimate=exc.estimate,
            error_estimate=exc.error_estimate,
        ) from exc
    return float(values[0]), float(errors[0])


def tanh_sinh_rule(
    level: int,
    spec: Optional[QuadratureSpec] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Fixed double-exponential rule on (0, 1) with step 0.5 / 2^level.

    Returns:
        Tuple of (abscissae, complements, weights), for tensor-product use
    """
    t_max = _truncation(spec or QuadratureSpec())
    step = _BASE_STEP / (2 ** level)
    count = int(math.floor(t_max / step))
    x, xc, dxdt = _abscissae(np.arange(-count, count + 1) * step)
    return x, xc, dxdt * step
