"""
Envelope commands ``lemma-a`` and ``lemma-b``.

Both convolve each factor set on a grid and on the grid with twice as many
nodes, and report the ratio of |h| (or |h^(k)|) to its tracked envelope. A
set passes when the largest ratio is finite and moves by less than the
allowed drift under refinement.
"""

from abc import abstractmethod
from typing import TYPE_CHECKING, Any, Dict, List, Sequence, Tuple

import numpy as np

from ..convolve import BetaTermFunction, convolve_all
from ..exceptions import RangeError
from ..grid import DEFAULT_DELTA, DEFAULT_GRID_SIZE, MAX_DERIVATIVE_ORDER, envelope_ratio, graded_grid
from ..roots import RootOptions
from .base import Command, write_report
from .convolve import describe, factor_sets

if TYPE_CHECKING:
    from ..cli import RunConfig


def _ratios(
    factors: List[BetaTermFunction], size: int, orders: Sequence[int]
) -> Tuple[Dict[int, float], Dict[int, List[Tuple[float, float]]], Dict[str, Any]]:
    options = RootOptions()
    h = convolve_all(factors, graded_grid(size, DEFAULT_DELTA), options.quadrature, options.interpolation)
    maxima, profiles = {}, {}
    for k in orders:
        maxima[k], profiles[k] = envelope_ratio(h, k)
    return maxima, profiles, h.envelope.to_dict()


class _EnvelopeCommand(Command):
    """Shared refinement loop; subclasses fix the derivative orders and drift."""
    max_drift = 0.05

    @abstractmethod
    def orders(self, data: Dict[str, Any]) -> List[int]:
        """Derivative orders whose envelopes are checked."""

    def execute(self, config: "RunConfig") -> bool:
        data = config.load_input()
        orders = self.orders(data)
        size = config.grid or DEFAULT_GRID_SIZE
        rows, table = [], ["set,order,r,ratio"]
        for index, factors in enumerate(factor_sets(data)):
            coarse, profiles, envelope = _ratios(factors, size, orders)
            fine, _, _ = _ratios(factors, 2 * size, orders)
            for k in orders:
                drift = abs(fine[k] - coarse[k]) / coarse[k] if coarse[k] > 0.0 else float("inf")
                ok = bool(np.isfinite(coarse[k]) and drift < self.max_drift)
                rows.append({
                    "set": index, "order": k, "factors": describe(factors), "envelope": envelope,
                    "max_ratio": coarse[k], "refined_max_ratio": fine[k], "drift": drift, "passed": ok,
                })
                table.extend(f"{index},{k},{r!r},{q!r}" for r, q in profiles[k])

        passed = all(row["passed"] for row in rows)
        document = {"grid": size, "max_drift": self.max_drift, "sets": rows, "passed": passed}
        write_report(config.output, document, {"": "\n".join(table) + "\n"})
        return passed


class LemmaACommand(_EnvelopeCommand):
    """|h| against r^alpha (1-r)^(beta-1) (ln(e/r))^(l-1)."""
    help = "Envelope ratio of n-fold convolutions under grid refinement"
    max_drift = 0.05

    def orders(self, data: Dict[str, Any]) -> List[int]:
        return [0]


class LemmaBCommand(_EnvelopeCommand):
    """|h^(k)| against the envelope shifted to (alpha-k, beta-k)."""
    help = "Envelope ratio of derivatives of n-fold convolutions"
    max_drift = 0.10

    def orders(self, data: Dict[str, Any]) -> List[int]:
        orders = [int(k) for k in data.get("orders", (1, 2))]
        if any(k < 1 or k > MAX_DERIVATIVE_ORDER for k in orders):
            raise RangeError(f"derivative orders must lie in 1..{MAX_DERIVATIVE_ORDER}, got {orders}")
        return orders
