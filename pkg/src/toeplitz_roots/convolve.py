"""
Mellin convolution of Beta-term functions on graded grids.

The Mellin convolution on (0, 1) is

    (f * g)(r) = integral_r^1 f(r/t) g(t) dt/t

and its Mellin transform is the product of the transforms. The building
blocks are Beta terms c r^a (1-r)^(b-1), whose transform is c B(z+a, b).

For an outer Beta term and any inner function G, the substitution
t = r + u(1-r) gives

    (f * G)(r) = c r^a (1-r)^b integral_0^1 u^(b-1) t^(-a-b) G(t) du,

which isolates the endpoint behaviour analytically. Differentiating under the
integral sign (dt/dr = 1-u) gives the derivatives of the product as well, so
a whole chain of convolutions can carry its derivatives ("jets") without any
numerical differentiation. The u-integral itself is taken in the variable v
with t = r^v, which resolves the scale of t near tiny r.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import AccuracyError, RangeError, UnsupportedSymbolError
from .grid import Grid, GridFunction, TypeEnvelope
from .specialfun import (
    QuadratureSpec,
    beta,
    falling_factorial,
    integrate01_batch,
    tanh_sinh_rule,
)

logger = logging.getLogger(__name__)

Term = Tuple[float, float, float]
Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]

INNER_TOLERANCE_FACTOR = 10.0
MAX_CUBE_FACTORS = 3


def _power_derivative(
    a: float, e: float, k: int, r: np.ndarray, rc: np.ndarray
) -> np.ndarray:
    """k-th derivative of r^a (1-r)^e by the Leibniz rule."""
    out = np.zeros(np.broadcast(r, rc).shape)
    for s in range(k + 1):
        coeff = math.comb(k, s) * falling_factorial(a, s) * falling_factorial(e, k - s)
        if coeff == 0.0:
            continue
        out = out + coeff * (-1.0) ** (k - s) * r ** (a - s) * rc ** (e - (k - s))
    return out


@dataclass(frozen=True)
class BetaTermFunction:
    """
    Finite sum of Beta terms c r^a (1-r)^(b-1).

    Attributes:
        terms: (c, a, b) triples; b > 0 for every term of a convolution factor
    """
    terms: Tuple[Term, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "terms", tuple((float(c), float(a), float(b)) for c, a, b in self.terms if c != 0.0)
        )

    @property
    def envelope(self) -> TypeEnvelope:
        """Type (min a, min b) of the sum, one power per factor."""
        if not self.terms:
            raise RangeError("the zero function has no envelope")
        return TypeEnvelope((min(a for _, a, _ in self.terms),), min(b for _, _, b in self.terms))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def derivative(self, r: np.ndarray, rc: Optional[np.ndarray] = None, k: int = 0) -> np.ndarray:
        """k-th derivative at r, using the complement rc near 1."""
        r = np.asarray(r, dtype=float)
        rc = 1.0 - r if rc is None else np.asarray(rc, dtype=float)
        out = np.zeros(np.broadcast(r, rc).shape)
        for c, a, b in self.terms:
            out = out + c * _power_derivative(a, b - 1.0, k, r, rc)
        return out

    def __call__(self, r: np.ndarray, rc: Optional[np.ndarray] = None) -> np.ndarray:
        return self.derivative(r, rc, 0)

    def mellin(self, z: float) -> float:
        """Closed-form Mellin transform sum c B(z + a, b)."""
        return float(sum(c * beta(z + a, b) for c, a, b in self.terms))

    def jets(self, order: int) -> List[Evaluator]:
        return [lambda t, tc, k=k: self.derivative(t, tc, k) for k in range(order + 1)]


def beta_term(a: float, b: float, c: float = 1.0) -> BetaTermFunction:
    """The single term c r^a (1-r)^(b-1)."""
    if not b > 0.0:
        raise RangeError(f"Beta term needs b > 0, got {b}")
    return BetaTermFunction(((c, a, b),))


def apply_diff_factor(shift: float, f: BetaTermFunction) -> BetaTermFunction:
    """
    Apply the operator (A' - rD) to a Beta-term sum.

    c r^a (1-r)^(b-1) maps to c (A'-a) r^a (1-r)^(b-1) + c (b-1) r^(a+1) (1-r)^(b-2).
    Zero coefficients are dropped, so annihilated terms disappear.
    """
    terms: List[Term] = []
    for c, a, b in f.terms:
        terms.append((c * (shift - a), a, b))
        terms.append((c * (b - 1.0), a + 1.0, b - 1.0))
    return BetaTermFunction(tuple(terms))


def absorb_diff_factors(
    factors: Sequence[BetaTermFunction], shifts: Sequence[float]
) -> Tuple[List[BetaTermFunction], List[float]]:
    """
    Push multipliers (zeta + A') onto convolution factors where exact.

    A multiplier moves onto a factor only when every term of that factor has
    b > 1, so the factor vanishes at r = 1 and no boundary term appears.

    Returns:
        Tuple of (updated factors, shifts that could not be absorbed)
    """
    factors = list(factors)
    remaining: List[float] = []
    for shift in shifts:
        candidates = [
            i for i, f in enumerate(factors)
            if f.terms and all(b > 1.0 for _, _, b in f.terms)
        ]
        if not candidates:
            remaining.append(shift)
            continue
        best = max(candidates, key=lambda i: min(b for _, _, b in factors[i].terms))
        factors[best] = apply_diff_factor(shift, factors[best])
        logger.debug(f"absorbed multiplier (zeta + {shift:.6g}) into factor {best}")
    return factors, remaining


def diff_operator(shifts: Sequence[float]) -> np.ndarray:
    """
    Coefficients e_i with prod_j (A'_j - rD) = sum_i e_i r^i D^i.

    (A' - rD) r^i D^i = (A' - i) r^i D^i - r^(i+1) D^(i+1).
    """
    coeffs = np.array([1.0])
    for shift in shifts:
        nxt = np.zeros(len(coeffs) + 1)
        for i, e in enumerate(coeffs):
            nxt[i] += (shift - i) * e
            nxt[i + 1] -= e
        coeffs = nxt
    return coeffs


def apply_diff_operator(
    jets: Sequence[GridFunction], shifts: Sequence[float]
) -> GridFunction:
    """H = prod (A'_j - rD) h from the jets h, h', ..., h^(d) on one grid."""
    coeffs = diff_operator(shifts)
    if len(jets) < len(coeffs):
        raise RangeError(f"{len(shifts)} multipliers need {len(coeffs)} jets, got {len(jets)}")
    h = jets[0]
    nodes = h.grid.nodes
    values = sum(e * nodes ** i * jets[i].values for i, e in enumerate(coeffs))
    envelope = TypeEnvelope(h.envelope.a_list, h.envelope.beta_sum - len(shifts))
    return GridFunction(h.grid, values, envelope, h.interpolation)


def _check_spec(spec: Optional[QuadratureSpec]) -> QuadratureSpec:
    return spec or QuadratureSpec()


def _fold_pieces(log_nodes: np.ndarray, inner_edge: Optional[float]) -> List[Tuple[np.ndarray, ...]]:
    """
    (start, width, tail) of the v-intervals each node's integral is split into.

    A sampled inner function is only piecewise smooth: its normalized values
    are held constant past the upper hull edge 1 - ``inner_edge``. Splitting
    at t = 1 - inner_edge keeps every piece smooth. ``tail`` is 1 - start - width.
    """
    size = log_nodes.size
    if inner_edge is None:
        return [(np.zeros(size), np.ones(size), np.zeros(size))]
    split = np.clip(math.log1p(-inner_edge) / log_nodes, 0.0, 1.0)
    return [
        (np.zeros(size), split, 1.0 - split),
        (split, 1.0 - split, np.zeros(size)),
    ]


def _beta_fold(
    outer: BetaTermFunction,
    inner: Sequence[Evaluator],
    inner_envelope: TypeEnvelope,
    grid: Grid,
    spec: QuadratureSpec,
    order: int,
    interpolation: str,
    inner_edge: Optional[float] = None,
) -> List[GridFunction]:
    """
    Jets of outer * inner at the grid nodes, up to ``order``.

    ``inner_edge`` is the distance from 1 of the upper hull edge of a sampled
    inner function (None for closed-form inner functions).

    The i-th derivative integral is of size I_0 / (1-r)^i and enters the jets
    at that scale, so it is accurate to ``relative_tolerance`` of that size
    even where its own value cancels.
    """
    nodes, comps = grid.nodes, grid.complements
    log_nodes = np.log(nodes)
    pieces = _fold_pieces(log_nodes, inner_edge)
    jets = [np.zeros(grid.size) for _ in range(order + 1)]

    for c, a, b in outer.terms:
        if not b > 0.0:
            raise RangeError(f"outer Beta term needs b > 0, got {b}")
        term_spec = spec.with_hints(min(0.0, inner_envelope.beta - 1.0), b - 1.0)
        integrals: List[np.ndarray] = []
        for i in range(order + 1):
            def integrand(x, xc, index, i=i, a=a, b=b, piece=None):
                start, width, tail = (part[index][:, None] for part in piece)
                log_r = log_nodes[index][:, None]
                r = nodes[index][:, None]
                rc = comps[index][:, None]
                v = start + width * x[None, :]
                vc = tail + width * xc[None, :]
                t = np.exp(v * log_r)
                tc = -np.expm1(v * log_r)
                u = r * np.expm1(-vc * log_r) / rc
                uc = tc / rc
                kernel = np.zeros_like(t)
                for l in range(i + 1):
                    coeff = math.comb(i, l) * falling_factorial(-a - b, i - l)
                    if coeff:
                        kernel = kernel + coeff * t ** (-a - b - (i - l)) * inner[l](t, tc)
                jac = width * t * (-log_r) / rc
                return u ** (b - 1.0) * uc ** i * kernel * jac

            floors = None
            if i > 0:
                floors = spec.relative_tolerance * np.abs(integrals[0]) / comps ** i / len(pieces)
            total = np.zeros(grid.size)
            for piece in pieces:
                live = np.flatnonzero(piece[1] > 0.0)
                if live.size == 0:
                    continue
                try:
                    values, _ = integrate01_batch(
                        lambda x, xc, index, piece=piece, live=live: integrand(x, xc, live[index], piece=piece),
                        live.size, term_spec, None if floors is None else floors[live],
                    )
                except AccuracyError as exc:
                    node = int(live[exc.node_index])
                    raise AccuracyError(
                        f"convolution quadrature failed at node {node} "
                        f"(r = {nodes[node]:.6g}, derivative {i}): {exc}",
                        estimate=exc.estimate,
                        error_estimate=exc.error_estimate,
                        node_index=node,
                    ) from exc
                total[live] += values
            integrals.append(total)

        for j in range(order + 1):
            for i in range(j + 1):
                prefactor = _power_derivative(a, b, j - i, nodes, comps)
                jets[j] = jets[j] + c * math.comb(j, i) * prefactor * integrals[i]

    envelope = inner_envelope.merge(outer.envelope)
    return [
        GridFunction(grid, jets[k], envelope.derivative(k), interpolation)
        for k in range(order + 1)
    ]


def _generic_fold(
    f: GridFunction, g: GridFunction, grid: Grid, spec: QuadratureSpec, interpolation: str
) -> GridFunction:
    """(f * g)(r) = |ln r| integral_0^1 f(r^(1-v)) g(r^v) dv for sampled f and g."""
    nodes = grid.nodes
    log_nodes = np.log(nodes)
    s0 = min(0.0, g.envelope.beta - 1.0)
    s1 = min(0.0, f.envelope.beta - 1.0)

    def integrand(x, xc, index):
        log_r = log_nodes[index][:, None]
        outer = f.evaluate(np.exp(xc[None, :] * log_r), -np.expm1(xc[None, :] * log_r))
        inner = g.evaluate(np.exp(x[None, :] * log_r), -np.expm1(x[None, :] * log_r))
        return np.real(outer * inner) * (-log_r)

    values, _ = integrate01_batch(integrand, grid.size, spec.with_hints(s0, s1))
    return GridFunction(grid, values, f.envelope.merge(g.envelope), interpolation)


Factor = Union[BetaTermFunction, GridFunction]


def convolve_pair(
    f: Factor,
    g: Factor,
    grid: Grid,
    spec: Optional[QuadratureSpec] = None,
    interpolation: str = "quintic",
) -> GridFunction:
    """
    Mellin convolution of two functions sampled on ``grid``.

    A Beta-term factor is taken as the outer function, so its endpoint
    behaviour is handled analytically; two sampled functions use the
    symmetric form in the variable v with t = r^v.

    Raises:
        AccuracyError: If the quadrature fails; ``node_index`` names the node
    """
    spec = _check_spec(spec)
    if isinstance(g, BetaTermFunction) and not isinstance(f, BetaTermFunction):
        f, g = g, f
    if isinstance(f, BetaTermFunction):
        if isinstance(g, BetaTermFunction):
            inner, envelope, edge = g.jets(0), g.envelope, None
        else:
            inner, envelope, edge = [g.evaluate], g.envelope, float(g.grid.complements[-1])
        return _beta_fold(f, inner, envelope, grid, spec, 0, interpolation, edge)[0]
    return _generic_fold(f, g, grid, spec, interpolation)


def convolve_jets(
    factors: Sequence[BetaTermFunction],
    grid: Grid,
    spec: Optional[QuadratureSpec] = None,
    order: int = 0,
    interpolation: str = "quintic",
) -> List[GridFunction]:
    """
    n-fold convolution and its derivatives up to ``order``.

    Factors are folded in order of decreasing a. Intermediate folds use a
    quadrature tolerance ``INNER_TOLERANCE_FACTOR`` times looser than the
    final one.

    Returns:
        [h, h', ..., h^(order)] on ``grid``

    Raises:
        RangeError: If no factor is given or a factor is identically zero
        AccuracyError: Propagated from the quadrature
    """
    spec = _check_spec(spec)
    if not factors:
        raise RangeError("convolution needs at least one factor")
    if any(f.is_zero for f in factors):
        raise RangeError("convolution factor is identically zero")

    ordered = sorted(factors, key=lambda f: f.envelope.alpha, reverse=True)
    first = ordered[0]
    if len(ordered) == 1:
        return [
            GridFunction(grid, first.derivative(grid.nodes, grid.complements, k),
                         first.envelope.derivative(k), interpolation)
            for k in range(order + 1)
        ]

    inner: Sequence[Evaluator] = first.jets(order)
    envelope = first.envelope
    edge: Optional[float] = None
    result: List[GridFunction] = []
    for step, outer in enumerate(ordered[1:], start=1):
        final = step == len(ordered) - 1
        level_spec = spec if final else spec.loosened(INNER_TOLERANCE_FACTOR)
        result = _beta_fold(outer, inner, envelope, grid, level_spec, order, interpolation, edge)
        inner = [jet.evaluate for jet in result]
        edge = float(grid.complements[-1])
        envelope = result[0].envelope
        logger.debug(f"convolve_jets: fold {step}/{len(ordered) - 1} done on {grid.size} nodes")
    return result


def convolve_all(
    factors: Sequence[BetaTermFunction],
    grid: Grid,
    spec: Optional[QuadratureSpec] = None,
    interpolation: str = "quintic",
) -> GridFunction:
    """n-fold Mellin convolution of Beta-term factors on ``grid``."""
    return convolve_jets(factors, grid, spec, 0, interpolation)[0]


def self_convolution_closed_form(n: int, r: np.ndarray) -> np.ndarray:
    """The n-fold self-convolution of r: r (ln(1/r))^(n-1) / (n-1)!."""
    r = np.asarray(r, dtype=float)
    return r * (-np.log(r)) ** (n - 1) / math.factorial(n - 1)


def pair_bound(a: float, b: float, c: float, d: float, r: float) -> float:
    """
    Explicit bound on r^a (1-r)^(b-1) * r^c (1-r)^(d-1), normalized.

    With the factors ordered so that a <= c, the convolution equals
    r^a (1-r)^(b+d-1) times integral_0^1 t^(c-a-b) u^(b-1) (1-u)^(d-1) du,
    and the integral is at most

    - B(b, d) when c - a >= b,
    - B(c - a, d) when 0 < c - a < b,
    - min over 0 < eps <= b of r^(-eps) B(eps, d) when c = a.

    Returns:
        The bound on the convolution divided by r^a (1-r)^(b+d-1)
    """
    if a > c:
        a, b, c, d = c, d, a, b
    if not (b > 0.0 and d > 0.0):
        raise RangeError(f"pair_bound needs b, d > 0, got {b}, {d}")
    gap = c - a
    if gap >= b:
        return float(beta(b, d))
    if gap > 1e-12:
        return float(beta(gap, d))

    log_r = math.log(r)

    def objective(eps: float) -> float:
        return -eps * log_r + math.log(beta(eps, d))

    found = minimize_scalar(objective, bounds=(1e-9 * b, b), method="bounded")
    return float(math.exp(min(found.fun, objective(b))))


def convolve_cube(
    factors: Sequence[BetaTermFunction],
    r: float,
    level: int = 6,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """
    n-fold convolution at one point through its unit-cube form.

    The iterated integral over x_1, ..., x_{n-1} is mapped onto [0, 1]^(n-1)
    by x_i = r/y_{i-1} + (1 - r/y_{i-1}) xi_i with y_i = x_1 ... x_i, then
    evaluated with a tensor-product double-exponential rule.

    Raises:
        UnsupportedSymbolError: If more than three factors are given
    """
    n = len(factors)
    if n == 0:
        raise RangeError("convolution needs at least one factor")
    if n > MAX_CUBE_FACTORS:
        raise UnsupportedSymbolError(f"unit-cube evaluation supports at most {MAX_CUBE_FACTORS} factors")
    rc = 1.0 - r
    if n == 1:
        return float(factors[0](np.asarray(r), np.asarray(rc)))

    x, xc, w = tanh_sinh_rule(level, spec)
    xi = np.meshgrid(*([x] * (n - 1)), indexing="ij")
    xic = np.meshgrid(*([xc] * (n - 1)), indexing="ij")
    weights = np.prod(np.meshgrid(*([w] * (n - 1)), indexing="ij"), axis=0)

    y = np.ones_like(weights)
    eta = np.ones_like(weights)
    integrand = np.ones_like(weights)
    for i in range(n - 1):
        gap = rc * eta / y
        x_i = r / y + gap * xi[i]
        x_ic = gap * xic[i]
        integrand = integrand * factors[i](x_i, x_ic) * gap / x_i
        y = y * x_i
        eta = eta * xi[i]
    last = r / y
    integrand = integrand * factors[-1](last, rc * eta / y)
    return float(np.sum(integrand * weights))
