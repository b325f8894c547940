"""
smallball: run configuration model for the command-line runner
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, get_args

from pydantic import Field, model_validator

from smallball.models.base import SmallballModel

CommandName = Literal[
    "q",
    "smooth",
    "lemma1",
    "thm1",
    "fit",
    "thm2",
    "thm3",
    "thm4",
    "beta",
    "plant",
    "sweep",
]

COMMANDS = get_args(CommandName)

# Commands that draw random numbers whatever their parameters are
STOCHASTIC_COMMANDS = {"smooth", "lemma1", "plant"}

# Built-in laws accepted in place of a distribution file
NAMED_INPUTS = {"rademacher", "bernoulli", "lazy", "uniform3", "point"}


class ExperimentConfig(SmallballModel):
    """A single CLI run: which command, on which inputs, with which parameters"""
    command: CommandName = Field(..., description="Sub-command id")
    inputs: Dict[str, str] = Field(default_factory=dict, description="dist / weights / gap / measure paths")
    params: Dict[str, Any] = Field(default_factory=dict, description="Numeric parameters (tau, kappa, delta, r, m, ...)")
    grid: Dict[str, List[Any]] = Field(default_factory=dict, description="Sweep axes (sweep only)")
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)
    output: Optional[str] = Field(None, description="Result file; stdout when omitted")
    format: Literal["json", "csv"] = "json"

    @model_validator(mode="after")
    def _check_config(self) -> "ExperimentConfig":
        for key, value in self.inputs.items():
            if value in NAMED_INPUTS:
                continue
            if not Path(value).exists():
                raise ValueError(f"input '{key}' refers to a missing file: {value}")
        if self.is_stochastic and self.seed is None:
            raise ValueError(f"command '{self.command}' draws random numbers and needs a seed")
        if self.command == "sweep":
            if not self.grid:
                raise ValueError("sweep needs at least one grid axis")
            if self.params.get("operation") not in COMMANDS or self.params.get("operation") == "sweep":
                raise ValueError("sweep needs params.operation naming the command run in each cell")
        return self

    @property
    def is_stochastic(self) -> bool:
        if self.command in STOCHASTIC_COMMANDS:
            return True
        if self.params.get("method") == "monte-carlo":
            return True
        if self.command == "sweep":
            return self.params.get("operation") in STOCHASTIC_COMMANDS
        return False
