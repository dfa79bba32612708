"""Per-command experiment configuration."""

import json
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from ..core.measure import format_fraction
from ..errors import InputError

Command = Literal[
    "verify",
    "coupling",
    "lakon-sweep",
    "perco-compare",
    "cells",
    "delta",
    "aug-compare",
    "bk",
    "cycles",
    "properties",
]

RANDOMIZED = {"perco-compare", "aug-compare", "cycles", "properties"}


def parse_rational(value: Any) -> Fraction:
    """Accept "num/den" strings, integers and decimal strings; floats go through their decimal repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"Not a rational: {value!r}") from e


class ExperimentConfig(BaseModel):
    """Parameters of one run; fields not used by the command are ignored."""

    command: Command
    name: Optional[str] = None
    seed: Optional[int] = None
    jobs: int = Field(default=1, ge=1)
    format: Literal["json", "csv"] = "json"
    output: Optional[str] = None
    timing: bool = False

    fixture: str = "all"
    instance: Optional[str] = None
    fibre_map: Optional[str] = None
    graph: Optional[str] = None
    pair: Optional[str] = None
    p: List[Fraction] = Field(default_factory=list)
    s: List[Fraction] = Field(default_factory=list)
    radius: Optional[int] = Field(default=None, ge=0)
    radii: List[int] = Field(default_factory=list)
    trials: int = Field(default=0, ge=0)
    r0: int = Field(default=1, ge=1)
    centres: Optional[List[int]] = None
    c: int = Field(default=4, ge=0)
    dump_cells: bool = False
    e1: Optional[str] = None
    e2: Optional[str] = None
    n: Optional[int] = Field(default=None, ge=0, le=20)
    exhaustive: Optional[int] = Field(default=None, ge=0, le=6)
    cycle_lengths: List[int] = Field(default_factory=list)
    max_fibre: int = Field(default=3, ge=1, le=4)
    instances: int = Field(default=100, ge=0)

    model_config = {"arbitrary_types_allowed": True}

    @field_validator("p", "s", mode="before")
    @classmethod
    def _rationals(cls, value: Any) -> List[Fraction]:
        if value is None:
            return []
        if isinstance(value, (str, int, float, Fraction)):
            value = [value]
        return [parse_rational(v) for v in value]

    @field_validator("p", "s")
    @classmethod
    def _unit_interval(cls, values: List[Fraction]) -> List[Fraction]:
        for v in values:
            if not 0 <= v <= 1:
                raise ValueError(f"probability {v} outside [0, 1]")
        return values

    @model_validator(mode="after")
    def _seed_for_random_commands(self) -> "ExperimentConfig":
        if self.command in RANDOMIZED and self.seed is None:
            raise ValueError(f"command {self.command} needs an explicit seed")
        return self

    def echo(self) -> Dict[str, Any]:
        """JSON-ready copy of the parameters, rationals as "num/den" strings."""
        data = self.model_dump(exclude={"jobs", "output", "timing", "format"})
        for key in ("p", "s"):
            data[key] = [format_fraction(v) for v in getattr(self, key)]
        return data


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read a JSON config and apply command-line overrides on top of it."""
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read config {path}: {e}") from e
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.model_validate(data)
