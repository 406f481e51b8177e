"""Solver run reports and their serialization."""

import json
from dataclasses import dataclass, field


@dataclass
class SolverReport:
    """Iteration traces and summary diagnostics of one solve."""
    objective: list = field(default_factory=list)
    primal_residual: list = field(default_factory=list)
    rel_data_error: float = float("nan")
    iterations: int = 0
    wall_time: float = 0.0
    flops: float = 0.0
    converged: bool = False
    descriptor: str = ""

    def to_dict(self):
        return {
            "descriptor": self.descriptor,
            "iterations": self.iterations,
            "converged": self.converged,
            "rel_data_error": self.rel_data_error,
            "wall_time": self.wall_time,
            "flops": self.flops,
            "objective": list(self.objective),
            "primal_residual": list(self.primal_residual),
        }

    def to_json(self, path=None):
        payload = json.dumps(self.to_dict(), sort_keys=True, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(payload + "\n")
        return payload

    def traces_to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iteration,objective,primal_residual\n")
            for i, (obj, res) in enumerate(zip(self.objective, self.primal_residual)):
                fh.write(f"{i},{obj!r},{res!r}\n")
