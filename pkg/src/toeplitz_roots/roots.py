"""
Construction of p-th roots of quasihomogeneous Toeplitz operators.

Given T with symbol e^{i p theta} phi(r), the root S has symbol
e^{i theta} psi(r) with

    psi(r) = 2p C H(r^(2p)),

where H is the Mellin convolution of the Beta factors of lambda(zeta) =
psi_hat(2 p zeta), acted on by the multipliers (zeta + A') as (A' - rD), and
C is fixed by the k = 0 case of the root identity

    prod_{j<p} (2k+2j+4) psi_hat(2k+2j+3) = 2 (k+p+1) phi_hat(2k+p+2).

H is sampled on a grid in t = r^(2p) whose hull reaches delta^(2p), so that
psi on [delta, 1 - delta] is an exact resampling of H.
"""

import cmath
import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .convolve import (
    absorb_diff_factors,
    apply_diff_operator,
    beta_term,
    convolve_all,
    convolve_jets,
    diff_operator,
)
from .exceptions import AccuracyError, DegenerateCalibrationError, RangeError, UnsupportedSymbolError
from .gammafactor import BetaFactorization, eval_factored, factorize
from .grid import (
    Grid,
    GridFunction,
    TypeEnvelope,
    envelope_ratio,
    graded_grid,
    grid_derivative,
    matched_grid,
)
from .specialfun import QuadratureSpec
from .symbols import (
    QuasihomogeneousSymbol,
    RadialTermSum,
    RationalMellin,
    mellin_eval,
    mellin_numeric,
    symbol_to_dict,
)
from .toeplitz import (
    IdentityReport,
    WeightedShift,
    shift_of_symbol,
    verify_identity,
)

logger = logging.getLogger(__name__)

MODES = ("closed", "numeric")
# Smallest hull for the grid in t = r^(2p)
_MIN_T_DELTA = 1e-280
# z values for the closed/numeric Mellin consistency diagnostic
CONSISTENCY_POINTS = (3.0, 5.0, 7.0, 9.0)


@dataclass(frozen=True)
class RootOptions:
    """
    Numerical options of a root construction.

    Attributes:
        grid_size: Nodes of the psi grid
        delta: Distance of the psi grid from 0 and 1
        quadrature: Quadrature settings of the final convolution
        pairing: Registered Gamma pairing strategy
        interpolation: Registered grid interpolation kind
        branch: Which p-th root of C^p to take (0 is principal)
        tolerance: Identity tolerance in closed Mellin mode
        numeric_tolerance: Identity tolerance in numeric Mellin mode
        k_max: Last basis index checked by the identity
        mode: Mellin mode of the identity check ("closed" or "numeric")
    """
    grid_size: int = 256
    delta: float = 1e-6
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    pairing: str = "optimized"
    interpolation: str = "quintic"
    branch: int = 0
    tolerance: float = 1e-6
    numeric_tolerance: float = 1e-4
    k_max: int = 50
    mode: str = "closed"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise UnsupportedSymbolError(f"unknown Mellin mode '{self.mode}' (known: {', '.join(MODES)})")
        if self.k_max < 0:
            raise RangeError(f"k_max must be >= 0, got {self.k_max}")
        if not (self.tolerance > 0.0 and self.numeric_tolerance > 0.0):
            raise RangeError("identity tolerances must be positive")

    @property
    def active_tolerance(self) -> float:
        return self.tolerance if self.mode == "closed" else self.numeric_tolerance

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        hints = data["quadrature"]["endpoint_hints"]
        data["quadrature"]["endpoint_hints"] = list(hints) if hints is not None else None
        return data


@dataclass(frozen=True)
class RootProblem:
    """A symbol and the options to construct its root with."""
    symbol: QuasihomogeneousSymbol
    options: RootOptions = field(default_factory=RootOptions)

    def __post_init__(self) -> None:
        if not 0 <= self.options.branch < self.symbol.p:
            raise RangeError(f"branch must lie in 0..{self.symbol.p - 1}, got {self.options.branch}")

    def to_dict(self) -> Dict[str, Any]:
        return {"symbol": symbol_to_dict(self.symbol), "options": self.options.to_dict()}


@dataclass(frozen=True, eq=False)
class RootResult:
    """
    Outcome of ``construct_root``; returned even when the identity check fails.

    Attributes:
        problem: The problem solved
        psi: Radial part of the root on the psi grid
        constant: Calibrated constant C (complex in general)
        factorization: Beta factorization (None for p = 1)
        h: H on its grid in t = r^(2p) (None for p = 1)
        unabsorbed: Multipliers applied to h through its derivatives
        report: Identity residuals per k
        consistency: Relative closed/numeric Mellin gaps at CONSISTENCY_POINTS
        failure: Why psi could not be sampled (then psi is NaN and h is None)
    """
    problem: RootProblem
    psi: GridFunction
    constant: complex
    factorization: Optional[BetaFactorization]
    h: Optional[GridFunction]
    unabsorbed: Tuple[float, ...]
    report: Optional[IdentityReport] = None
    consistency: Tuple[float, ...] = ()
    failure: Optional[str] = None

    @property
    def p(self) -> int:
        return self.problem.symbol.p

    @property
    def success(self) -> bool:
        return self.failure is None and self.report is not None and self.report.passed

    @property
    def sup_psi(self) -> float:
        return self.psi.sup_norm()


def _radial_envelope(radial: RadialTermSum) -> TypeEnvelope:
    """Type of phi at 0: lowest power with its largest log power."""
    alpha = min(t.a for t in radial.terms)
    logs = max(t.b for t in radial.terms if t.a == alpha)
    return TypeEnvelope((alpha,) * (logs + 1), 1.0)


def calibrate_constant(
    bf: BetaFactorization, rm: RationalMellin, p: int, branch: int = 0
) -> complex:
    """
    Fix C from the k = 0 root identity.

    With psi_hat(z) = C u(z/(2p)) and u = eval_factored(bf, .), the identity
    reads C^p prod_j (2j+4) u((2j+3)/(2p)) = (2p+2) phi_hat(p+2). The
    returned C is the ``branch``-th p-th root, branch 0 being principal.

    Raises:
        DegenerateCalibrationError: If u vanishes at a calibration point or
                                   phi_hat(p+2) = 0
    """
    points = np.array([(2.0 * j + 3.0) / (2.0 * p) for j in range(p)])
    u = np.atleast_1d(eval_factored(bf, points))
    if np.any(~np.isfinite(u)) or np.any(np.abs(u) < 1e-300):
        raise DegenerateCalibrationError(f"factorization vanishes at a calibration point {points.tolist()}")
    lhs = float(np.prod([(2.0 * j + 4.0) * u[j] for j in range(p)]))
    rhs = (2.0 * p + 2.0) * mellin_eval(rm, p + 2.0)
    if rhs == 0.0:
        raise DegenerateCalibrationError(f"phi_hat({p + 2}) = 0 leaves the constant undetermined")

    power = complex(rhs / lhs)
    modulus = abs(power) ** (1.0 / p)
    angle = (cmath.phase(power) + 2.0 * math.pi * branch) / p
    if power.imag == 0.0 and power.real > 0.0 and (2 * branch) % p == 0:
        # real roots stay real: +modulus for branch 0, -modulus for branch p/2
        constant = complex(modulus if branch == 0 else -modulus, 0.0)
    else:
        constant = cmath.rect(modulus, angle)
    logger.debug(f"calibrate_constant: C^{p} = {power:.12g}, C = {constant:.12g}")
    return constant


def _resample_psi(h: GridFunction, grid: Grid, p: int, scale: complex) -> GridFunction:
    """psi(r) = scale * H(r^(2p)) on the psi grid."""
    log_t = 2.0 * p * np.log(grid.nodes)
    values = scale * h.evaluate(np.exp(log_t), -np.expm1(log_t))
    if scale.imag == 0.0:
        values = np.real(values)
    return GridFunction(grid, values, h.envelope.scaled(2.0 * p), h.interpolation)


def _t_grid(grid: Grid, options: RootOptions, p: int) -> Grid:
    delta_low = max(options.delta ** (2 * p), _MIN_T_DELTA)
    return matched_grid(grid, delta_low, options.delta)


def construct_root(problem: RootProblem) -> RootResult:
    """
    Construct the radial part psi of the p-th root.

    p = 1 returns phi itself with C = 1. Otherwise the Beta factorization is
    built with the configured pairing, multipliers are absorbed into factors
    that vanish at r = 1, H is convolved on the t-grid (carrying derivatives
    for the multipliers left over), C is calibrated and psi resampled.

    The identity is then checked; failure is logged and flagged on the
    result, not raised. A convolution whose quadrature cannot reach its
    tolerance leaves psi unsampled (NaN) with ``failure`` set; the closed-form
    identity check still runs on the calibrated factorization.

    Raises:
        PositivityError, ProperError, UnsupportedSymbolError: From the
            factorization of the symbol
    """
    symbol, options = problem.symbol, problem.options
    p = symbol.p
    grid = graded_grid(options.grid_size, options.delta)
    failure: Optional[str] = None

    if p == 1:
        radial = symbol.radial_part()
        psi = GridFunction(grid, radial(grid.nodes), _radial_envelope(radial), options.interpolation)
        result = RootResult(problem, psi, complex(1.0, 0.0), None, None, ())
    else:
        bf = factorize(symbol.mellin, p, options.pairing)
        factors = [beta_term(a, b) for a, b in bf.beta_factors]
        factors, remaining = absorb_diff_factors(factors, bf.diff_factors)
        t_grid = _t_grid(grid, options, p)
        logger.debug(
            f"construct_root: p={p}, {len(factors)} factors, {len(remaining)} multipliers "
            f"through derivatives, t-grid of {t_grid.size} nodes"
        )
        constant = calibrate_constant(bf, symbol.mellin, p, options.branch)
        try:
            jets = convolve_jets(factors, t_grid, options.quadrature, len(remaining), options.interpolation)
        except AccuracyError as exc:
            failure = str(exc)
            logger.warning(f"psi left unsampled: {failure}")
            envelope = TypeEnvelope(
                tuple(a for a, _ in bf.beta_factors), sum(b for _, b in bf.beta_factors)
            ).scaled(2.0 * p)
            psi = GridFunction(grid, np.full(grid.size, np.nan), envelope, options.interpolation)
            result = RootResult(problem, psi, constant, bf, None, tuple(remaining), failure=failure)
        else:
            h = apply_diff_operator(jets, remaining) if remaining else jets[0]
            psi = _resample_psi(h, grid, p, 2.0 * p * constant * bf.constant)
            result = RootResult(problem, psi, constant, bf, h, tuple(remaining))

    report = identity_report(result, "closed" if failure else None)
    consistency = mellin_consistency(result) if p > 1 and failure is None else ()
    result = replace(result, report=report, consistency=consistency)
    if result.success:
        logger.info(
            f"✅ Constructed root of degree {p}: max residual {report.max_residual:.3g}, "
            f"sup|psi| = {result.sup_psi:.6g}"
        )
    elif failure is None:
        logger.warning(
            f"Root of degree {p} misses the identity tolerance {report.tol:g}: "
            f"max residual {report.max_residual:.3g} at k = {report.failed_k[:5]}"
        )
    if consistency and max(consistency) > options.numeric_tolerance:
        logger.warning(
            f"closed and numeric Mellin values of psi differ by up to {max(consistency):.3g}"
        )
    return result


def psi_mellin(res: RootResult, z: float, mode: str = "closed") -> Union[float, complex]:
    """
    Mellin transform of psi at z > 0.

    closed: C * eval_factored(bf, z/(2p)) (phi_hat itself for p = 1);
    numeric: quadrature of the psi grid.
    """
    if mode not in MODES:
        raise UnsupportedSymbolError(f"unknown Mellin mode '{mode}'")
    if not z > 0.0:
        raise RangeError(f"psi_mellin needs z > 0, got {z}")
    if mode == "closed":
        if res.factorization is None:
            return mellin_eval(res.problem.symbol.mellin, z)
        value = res.constant * eval_factored(res.factorization, z / (2.0 * res.p))
        return value.real if value.imag == 0.0 else value
    env = res.psi.envelope
    return mellin_numeric(
        res.psi.evaluate, z, res.problem.options.quadrature,
        singularity=(max(env.alpha, 0.0), min(0.0, env.beta - 1.0)),
        with_complement=True,
    )


def root_shift(res: RootResult, k_max: int, mode: str = "closed") -> WeightedShift:
    """Degree-1 shift of the root: w_k = 2 (k+2) psi_hat(2k+3), k = 0..k_max."""
    weights = [2.0 * (k + 2) * psi_mellin(res, 2.0 * k + 3.0, mode) for k in range(k_max + 1)]
    return WeightedShift(1, np.asarray(weights))


def target_shift(symbol: QuasihomogeneousSymbol, k_max: int) -> WeightedShift:
    """Weights of T itself from phi_hat."""
    return shift_of_symbol(symbol.p, lambda z: mellin_eval(symbol.mellin, z), k_max)


def identity_report(res: RootResult, mode: Optional[str] = None) -> IdentityReport:
    """Check the root identity for k = 0..k_max in the given Mellin mode."""
    options = res.problem.options
    mode = mode or options.mode
    tol = options.tolerance if mode == "closed" else options.numeric_tolerance
    k_max = options.k_max
    target = target_shift(res.problem.symbol, k_max)
    candidate = root_shift(res, k_max + res.p - 1, mode)
    return verify_identity(target, candidate, res.p, tol, k_max, mode)


def mellin_consistency(res: RootResult) -> Tuple[float, ...]:
    """Relative gaps between closed and numeric psi_hat at CONSISTENCY_POINTS."""
    gaps = []
    for z in CONSISTENCY_POINTS:
        closed = psi_mellin(res, z, "closed")
        numeric = psi_mellin(res, z, "numeric")
        gaps.append(abs(numeric - closed) / abs(closed))
    return tuple(float(g) for g in gaps)


def literal_h(res: RootResult) -> GridFunction:
    """
    H as prod (A'_j - rD) h with h the plain convolution of the Beta factors
    and derivatives from grid stencils; a cross-check of the jet-based H.

    Raises:
        RangeError: For p = 1 or a result whose convolution failed
        UnsupportedSymbolError: If more than three multipliers are present
    """
    if res.factorization is None or res.h is None:
        raise RangeError("no sampled convolution (degree-1 root or failed quadrature)")
    bf = res.factorization
    options = res.problem.options
    factors = [beta_term(a, b) for a, b in bf.beta_factors]
    h = convolve_all(factors, res.h.grid, options.quadrature, options.interpolation)
    shifts = bf.diff_factors
    coeffs = diff_operator(shifts)
    nodes = h.grid.nodes
    values = coeffs[0] * h.values
    for i in range(1, len(coeffs)):
        values = values + coeffs[i] * nodes ** i * grid_derivative(h, i).values
    envelope = TypeEnvelope(h.envelope.a_list, h.envelope.beta_sum - len(shifts))
    return GridFunction(h.grid, values, envelope, h.interpolation)


def result_to_dict(res: RootResult) -> Dict[str, Any]:
    """JSON document of a root construction (no timestamps; deterministic)."""
    max_ratio, _ = envelope_ratio(res.psi, 0)
    env = res.psi.envelope
    doc: Dict[str, Any] = {
        "problem": res.problem.to_dict(),
        "psi": res.psi.to_dict(),
        "constant": {"re": res.constant.real, "im": res.constant.imag},
        "success": res.success,
        "failure": res.failure,
        "sup_psi": res.sup_psi,
        "residuals": res.report.to_dict() if res.report else None,
        "consistency": list(res.consistency),
        "envelope": {
            "alpha": env.alpha,
            "beta": env.beta,
            "log_power": env.log_power,
            "max_ratio": max_ratio,
        },
    }
    if res.factorization is not None:
        doc["factorization"] = {
            "constant": res.factorization.constant,
            "beta_factors": [list(f) for f in res.factorization.beta_factors],
            "diff_factors": list(res.factorization.diff_factors),
            "unabsorbed": list(res.unabsorbed),
        }
    return doc


def psi_csv(psi: GridFunction) -> str:
    """CSV with columns r, re, im."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["r", "re", "im"])
    values = np.asarray(psi.values, dtype=complex)
    for r, v in zip(psi.grid.nodes, values):
        writer.writerow([repr(float(r)), repr(float(v.real)), repr(float(v.imag))])
    return buffer.getvalue()


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_result(doc: Dict[str, Any], prefix: Union[str, Path]) -> List[Path]:
    """
    Write ``prefix.json`` and ``prefix.csv`` for a result document.

    Returns:
        The paths written
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    json_path = prefix.with_name(prefix.name + ".json")
    csv_path = prefix.with_name(prefix.name + ".csv")
    json_path.write_text(dumps(doc))
    csv_path.write_text(psi_csv(GridFunction.from_dict(doc["psi"])))
    logger.info(f"💾 Wrote {json_path} and {csv_path}")
    return [json_path, csv_path]


def load_psi(path: Union[str, Path]) -> GridFunction:
    """
    Read psi from a result JSON document or an (r, re, im) / (r, value) CSV.

    Raises:
        UnsupportedSymbolError: If the file cannot be parsed
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UnsupportedSymbolError(f"{path} is not valid JSON: {exc}") from exc
        return GridFunction.from_dict(doc.get("psi", doc))

    rows = list(csv.reader(io.StringIO(text)))
    try:
        header, body = rows[0], [row for row in rows[1:] if row]
        nodes = np.array([float(row[0]) for row in body])
        if len(header) >= 3:
            values = np.array([complex(float(row[1]), float(row[2])) for row in body])
        else:
            values = np.array([float(row[1]) for row in body])
        return GridFunction(Grid.from_nodes(nodes), values, TypeEnvelope((0.0,), 1.0))
    except (IndexError, ValueError) as exc:
        raise UnsupportedSymbolError(f"malformed psi CSV {path}: {exc}") from exc


def candidate_from_psi(psi: GridFunction, k_max: int, spec: Optional[QuadratureSpec] = None) -> WeightedShift:
    """Degree-1 shift of an arbitrary sampled psi, Mellin values by quadrature."""
    env = psi.envelope
    weights = [
        2.0 * (k + 2) * mellin_numeric(
            psi.evaluate, 2.0 * k + 3.0, spec,
            singularity=(max(env.alpha, 0.0), min(0.0, env.beta - 1.0)),
            with_complement=True,
        )
        for k in range(k_max + 1)
    ]
    return WeightedShift(1, np.asarray(weights))
