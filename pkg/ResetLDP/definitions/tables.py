"""Output tables and their columns."""
import enum
from typing import List


class Tables(enum.Enum):
    """Tables written by the commands, columns named after the symbols"""

    Phi = {"columns": ["k", "phi", "regime", "residual"]}
    Rate = {"columns": ["w", "I", "k_star", "regime"]}
    Airy = {"columns": ["i", "z", "nu", "c"]}
    Varpi = {"columns": ["k", "varpi", "phi", "ok"]}
    Scaling = {"columns": ["r", "w", "I_r", "scaled_I_1", "rel_dev"]}
    Trajectories = {"columns": ["F", "W", "N", "backlog"]}
    Cgf = {"columns": ["k", "g_hat", "ci_lo", "ci_hi", "ess", "reliable"]}
    EmpiricalRate = {
        "columns": ["w_lo", "w_hi", "count", "p_hat", "I_hat", "I_lo", "I_hi", "bound"]
    }
    Checks = {"columns": ["check", "passed", "detail"]}
    Report = {"columns": ["field", "value"]}

    @property
    def columns(self) -> List[str]:
        return list(self.value["columns"])
