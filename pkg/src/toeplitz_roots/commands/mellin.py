"""The ``mellin`` command: phi_hat in closed form and by quadrature."""

from typing import TYPE_CHECKING, List

from ..roots import RootOptions
from ..symbols import evaluate, mellin_eval, mellin_numeric
from .base import Command, write_report

if TYPE_CHECKING:
    from ..cli import RunConfig

DEFAULT_POINTS = (3.0, 5.0, 7.0, 9.0)


class MellinCommand(Command):
    """Evaluate phi_hat at the input ``points`` both ways and compare."""
    help = "Evaluate the Mellin transform of phi in closed form and numerically"

    def execute(self, config: "RunConfig") -> bool:
        data = config.load_input()
        symbol = config.load_symbol(default_p=1)
        points: List[float] = [float(z) for z in data.get("points", DEFAULT_POINTS)]
        defaults = RootOptions()
        tol = config.tol if config.tol is not None else defaults.numeric_tolerance

        radial = symbol.radial_part()
        rows = []
        for z in points:
            closed = mellin_eval(symbol.mellin, z)
            numeric = mellin_numeric(lambda r: evaluate(radial, r), z, defaults.quadrature)
            gap = abs(numeric - closed) / abs(closed) if closed else abs(numeric)
            rows.append({"z": z, "closed": closed, "numeric": numeric, "relative_gap": gap})

        passed = all(row["relative_gap"] <= tol for row in rows)
        table = "z,closed,numeric,relative_gap\n" + "".join(
            f"{row['z']!r},{row['closed']!r},{row['numeric']!r},{row['relative_gap']!r}\n" for row in rows
        )
        write_report(config.output, {"values": rows, "tol": tol, "passed": passed}, {"": table})
        return passed
