"""
Quasihomogeneous Toeplitz operators as weighted shifts.

On the Bergman space the Toeplitz operator with symbol e^{i p theta} phi(r)
maps z^k to w_k z^(k+p) with w_k = 2 (k+p+1) phi_hat(2k+p+2). Composition,
root verification and finite sections are all computed on these weights.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from .exceptions import RangeError
from .specialfun import QuadratureSpec, integrate01_batch

logger = logging.getLogger(__name__)

# Target weights below this are compared absolutely
ABSOLUTE_RESIDUAL_THRESHOLD = 1e-12

MellinEvaluator = Callable[[float], Union[float, complex]]


@dataclass(frozen=True, eq=False)
class WeightedShift:
    """
    The operator z^k -> w_k z^(k+p) for k = 0..k_max.

    Attributes:
        p: Degree (shift length)
        weights: w_0, ..., w_{k_max} (real, or complex for complex roots)
    """
    p: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.p < 1:
            raise RangeError(f"shift degree must be positive, got {self.p}")
        weights = np.asarray(self.weights)
        if weights.ndim != 1 or weights.size == 0:
            raise RangeError("a weighted shift needs at least one weight")
        if not np.all(np.isfinite(weights)):
            raise RangeError("shift weights must be finite")
        object.__setattr__(self, "weights", weights)

    @property
    def k_max(self) -> int:
        return int(self.weights.size) - 1


def shift_of_symbol(p: int, mellin: MellinEvaluator, k_max: int) -> WeightedShift:
    """
    Weights w_k = 2 (k+p+1) phi_hat(2k+p+2) for k = 0..k_max.

    Args:
        p: Degree of the symbol
        mellin: Evaluator of phi_hat at real points
        k_max: Last weight index
    """
    if k_max < 0:
        raise RangeError(f"k_max must be >= 0, got {k_max}")
    weights = [2.0 * (k + p + 1) * mellin(2.0 * k + p + 2.0) for k in range(k_max + 1)]
    return WeightedShift(p, np.asarray(weights))


def compose_power(s: WeightedShift, p: int, k_max: Optional[int] = None) -> WeightedShift:
    """
    p-th power of a degree-1 shift: W_k = prod_{j<p} w_{k+j}.

    Raises:
        RangeError: If ``s`` is not of degree 1 or has too few weights
    """
    if s.p != 1:
        raise RangeError(f"compose_power needs a degree-1 shift, got degree {s.p}")
    if p < 1:
        raise RangeError(f"power must be positive, got {p}")
    k_max = s.k_max - p + 1 if k_max is None else k_max
    if k_max < 0 or s.k_max < k_max + p - 1:
        raise RangeError(
            f"degree-1 shift with {s.k_max + 1} weights cannot give {p}-fold products up to k = {k_max}"
        )
    weights = np.array([np.prod(s.weights[k:k + p]) for k in range(k_max + 1)])
    return WeightedShift(p, weights)


@dataclass(frozen=True, eq=False)
class IdentityReport:
    """
    Per-k comparison of a composed root with the target operator.

    Attributes:
        residuals: Relative residuals (absolute where the target weight is
                   below ``ABSOLUTE_RESIDUAL_THRESHOLD``)
        absolute: Which residuals are absolute
        tol: Pass threshold
        mode: How the root's Mellin values were obtained
    """
    residuals: np.ndarray
    absolute: np.ndarray
    tol: float
    mode: str = "closed"

    @property
    def failed_k(self) -> List[int]:
        return [int(k) for k in np.flatnonzero(~(self.residuals <= self.tol))]

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def passed(self) -> bool:
        return not self.failed_k

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "tol": self.tol,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "failed_k": self.failed_k,
            "residuals": [float(x) for x in self.residuals],
            "absolute": [int(k) for k in np.flatnonzero(self.absolute)],
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["k", "residual", "kind", "passed"])
        for k, (res, absolute) in enumerate(zip(self.residuals, self.absolute)):
            writer.writerow([k, repr(float(res)), "absolute" if absolute else "relative",
                             int(res <= self.tol)])
        return buffer.getvalue()


def verify_identity(
    target: WeightedShift,
    candidate_root: WeightedShift,
    p: int,
    tol: float = 1e-6,
    k_max: Optional[int] = None,
    mode: str = "closed",
) -> IdentityReport:
    """
    Compare compose_power(candidate_root, p) with ``target`` weight by weight.

    Vanishing of every residual on k = 0..k_max means equality of the two
    Mellin transforms on an arithmetic progression, which determines the
    symbol.
    """
    if target.p != p:
        raise RangeError(f"target has degree {target.p}, expected {p}")
    available = min(target.k_max, candidate_root.k_max - p + 1)
    k_max = available if k_max is None else k_max
    if k_max > available or k_max < 0:
        raise RangeError(f"weights only allow checking k <= {available}, asked for {k_max}")

    composed = compose_power(candidate_root, p, k_max).weights
    wanted = target.weights[:k_max + 1]
    scale = np.abs(wanted)
    absolute = scale < ABSOLUTE_RESIDUAL_THRESHOLD
    diff = np.abs(composed - wanted)
    residuals = np.where(absolute, diff, diff / np.where(absolute, 1.0, scale))
    report = IdentityReport(residuals, absolute, tol, mode)
    if report.passed:
        logger.debug(f"verify_identity: max residual {report.max_residual:.3g} for k <= {k_max}")
    else:
        logger.debug(f"verify_identity: {len(report.failed_k)} residuals above {tol}")
    return report


def truncated_matrix(s: WeightedShift, n: int) -> np.ndarray:
    """
    n x n finite section in the orthonormal basis sqrt(k+1) z^k.

    Entry (k+p, k) is w_k sqrt((k+1)/(k+p+1)); all others vanish.

    Raises:
        RangeError: If n exceeds k_max + 1
    """
    if n < 1 or n > s.k_max + 1:
        raise RangeError(f"finite section size {n} outside 1..{s.k_max + 1}")
    dtype = complex if np.iscomplexobj(s.weights) else float
    out = np.zeros((n, n), dtype=dtype)
    for k in range(n - s.p):
        out[k + s.p, k] = s.weights[k] * math.sqrt((k + 1) / (k + s.p + 1))
    return out


def projection_weight(
    phi: Callable[[np.ndarray], np.ndarray],
    p: int,
    k: int,
    spec: Optional[QuadratureSpec] = None,
    angular_points: int = 64,
    symbol: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
) -> complex:
    """
    w_k from the Bergman projection: (k+p+1) <T z^k, z^(k+p)>.

    The area integral (1/pi) over the disk of f(r e^{i theta}) z^k
    conj(z^(k+p)) is taken with the trapezoid rule in theta and a
    double-exponential rule in r.

    Args:
        phi: Radial part, used for f = e^{i p theta} phi(r) when ``symbol``
             is not given
        p: Shift length
        k: Basis index
        spec: Radial quadrature settings
        angular_points: Trapezoid nodes in theta
        symbol: Optional full symbol f(r, theta), vectorized
    """
    theta = 2.0 * math.pi * np.arange(angular_points) / angular_points
    if symbol is None:
        def symbol(r, th):
            return np.exp(1j * p * th) * phi(r)

    def integrand(x, xc, index):
        values = symbol(x[:, None], theta[None, :]) * np.exp(-1j * p * theta)[None, :]
        angular = np.mean(values, axis=1) * x ** (2 * k + p + 1)
        return np.stack([angular.real, angular.imag])[index]

    parts, _ = integrate01_batch(integrand, 2, spec or QuadratureSpec())
    return complex(2.0 * (k + p + 1) * complex(parts[0], parts[1]))
