"""The ``convolve`` command and the factor-set input shared with the lemma commands."""

from typing import TYPE_CHECKING, Any, Dict, List

import numpy as np

from ..convolve import BetaTermFunction, beta_term, convolve_all
from ..exceptions import RangeError, UnsupportedSymbolError
from ..grid import DEFAULT_DELTA, DEFAULT_GRID_SIZE, graded_grid
from ..roots import RootOptions
from ..symbols import mellin_numeric
from .base import Command, write_report

if TYPE_CHECKING:
    from ..cli import RunConfig

MULTIPLICATIVITY_POINTS = (3.0, 5.0, 7.0, 11.0)
# Ranges of randomly drawn factors
RANDOM_A = (0.1, 3.0)
RANDOM_B = (0.3, 2.0)


def factor_sets(data: Dict[str, Any]) -> List[List[BetaTermFunction]]:
    """
    Factor sets from an input document.

    ``{"factors": [{"a", "b", "c"?}, ...]}`` gives one set;
    ``{"random": {"count", "max_factors", "seed"}}`` draws ``count`` sets of
    1..max_factors factors with a in [0.1, 3] and b in [0.3, 2].
    """
    if "factors" in data:
        try:
            return [[beta_term(float(f["a"]), float(f["b"]), float(f.get("c", 1.0)))
                     for f in data["factors"]]]
        except (KeyError, TypeError, ValueError) as exc:
            raise UnsupportedSymbolError(f"malformed factor list: {exc}") from exc
    if "random" in data:
        spec = data["random"]
        count = int(spec.get("count", 20))
        max_factors = int(spec.get("max_factors", 5))
        if count < 1 or max_factors < 1:
            raise RangeError("random factor sets need count and max_factors >= 1")
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        sets = []
        for _ in range(count):
            n = int(rng.integers(1, max_factors + 1))
            a = rng.uniform(*RANDOM_A, size=n)
            b = rng.uniform(*RANDOM_B, size=n)
            sets.append([beta_term(float(x), float(y)) for x, y in zip(a, b)])
        return sets
    raise UnsupportedSymbolError("input needs 'factors' or 'random'")


def describe(factors: List[BetaTermFunction]) -> List[Dict[str, float]]:
    return [{"c": c, "a": a, "b": b} for f in factors for c, a, b in f.terms]


class ConvolveCommand(Command):
    """
    n-fold convolution of the input factors on the graded grid.

    The check compares the quadrature Mellin transform of the result with
    the product of the closed-form factor transforms.
    """
    help = "Write the grid of an n-fold Mellin convolution of Beta terms"

    def execute(self, config: "RunConfig") -> bool:
        sets = factor_sets(config.load_input())
        if len(sets) != 1:
            raise UnsupportedSymbolError("'convolve' takes a single 'factors' list")
        factors = sets[0]
        options = RootOptions()
        tol = config.tol if config.tol is not None else options.numeric_tolerance
        grid = graded_grid(config.grid or DEFAULT_GRID_SIZE, DEFAULT_DELTA)
        h = convolve_all(factors, grid, options.quadrature, options.interpolation)

        env = h.envelope
        checks = []
        for z in MULTIPLICATIVITY_POINTS:
            expected = float(np.prod([f.mellin(z) for f in factors]))
            found = mellin_numeric(
                h.evaluate, z, options.quadrature,
                singularity=(max(env.alpha, 0.0), min(0.0, env.beta - 1.0)),
                with_complement=True,
            )
            checks.append({"z": z, "product": expected, "numeric": found,
                           "relative_gap": abs(found - expected) / abs(expected)})

        passed = all(c["relative_gap"] <= tol for c in checks)
        document = {"factors": describe(factors), "h": h.to_dict(),
                    "multiplicativity": checks, "tol": tol, "passed": passed}
        write_report(config.output, document, {"": h.to_csv()})
        return passed
