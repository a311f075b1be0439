from os import path
from pathlib import Path
from typing import Literal, Optional

import yaml
from deepmerge import Merger
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cavityring import config
from cavityring.dynamics import DynamicsParams, MomentState, derive_dynamics_params
from cavityring.exceptions import InvalidInputError
from cavityring.hamiltonian import RingTopology
from cavityring.symmetry import GroupKind
from cavityring.system_params import SystemParams

# Nested mappings merge; a list in the upper document replaces the lower one.
profile_merger = Merger([(dict, ["merge"]), (list, ["override"])], ["override"], ["override"])


class SystemConfig(SystemParams):
    """System constants plus the manifold and symmetry choices of a run."""

    n_ex: int = Field(1, alias="n_ex", ge=0)
    group: GroupKind = Field(GroupKind.DIHEDRAL, alias="group")
    topology: Literal["ring", "all-pairs"] = Field("ring", alias="topology")
    basis: Literal["collective", "product"] = Field("collective", alias="basis")

    def params(self) -> SystemParams:
        return SystemParams(**self.model_dump(include=set(SystemParams.model_fields)))

    def ring(self) -> RingTopology:
        return RingTopology.named(self.topology, self.n_cavities)


class DynamicsConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    p: Optional[float] = Field(None, alias="p", ge=0)  # Not required with derive
    q: Optional[float] = Field(None, alias="q")  # Not required with derive
    derive: bool = Field(False, alias="derive")  # Take p, q from system g, chi, gamma
    x0: float = Field(1.0, alias="x0")
    y0: float = Field(0.0, alias="y0")
    u0: float = Field(0.0, alias="u0")
    w0: float = Field(0.0, alias="w0")
    tau_end: float = Field(10.0, alias="tau_end", gt=0)
    dt: float = Field(1e-3, alias="dt", gt=0)

    @model_validator(mode="after")
    def _check_ratio_pair(self):
        if (self.p is None) != (self.q is None):
            raise ValueError("p and q must be given together.")
        return self

    def validate_source(self) -> None:
        """Exactly one of explicit (p, q) or derive must be chosen."""
        explicit = self.p is not None
        if explicit == self.derive:
            raise InvalidInputError(
                "Give either p and q, or derive (from g, chi and gamma), but not both."
            )

    def initial_state(self) -> MomentState:
        return MomentState(x=self.x0, y=self.y0, u=self.u0, w=self.w0)

    def resolve(self, system: SystemParams) -> DynamicsParams:
        self.validate_source()
        if self.derive:
            return derive_dynamics_params(system.g, system.chi, system.gamma, system.omega)
        return DynamicsParams.from_ratios(self.p, self.q)


class SweepConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    command: Literal["evolve", "spectrum"] = Field("evolve", alias="command")
    g: Optional[list[float]] = Field(None, alias="g")  # None: system value
    chi: Optional[list[float]] = Field(None, alias="chi")  # None: system value
    gamma: Optional[list[float]] = Field(None, alias="gamma")  # None: system value

    @field_validator("g", "chi", "gamma")
    @classmethod
    def _check_grid(cls, grid):
        if grid is None:
            return grid
        if not grid:
            raise ValueError("Sweep grids must not be empty.")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"Sweep grid {grid} must be strictly increasing.")
        return grid


class OutputConfig(BaseModel):
    path: Optional[Path] = Field(None, alias="path")  # None: stdout
    format: Literal["csv", "json"] = Field("csv", alias="format")


class ComparePoint(BaseModel):
    g: float = Field(..., alias="g", gt=0)  # Required field
    chi: float = Field(..., alias="chi")  # Required field


class CompareConfig(BaseModel):
    sections: list[Literal["counting", "spectra", "dynamics"]] = Field(
        ["counting", "spectra", "dynamics"], alias="sections", min_length=1
    )
    tolerance: float = Field(config.MATCH_ATOL, alias="tolerance", gt=0)
    points: list[ComparePoint] = Field(
        [ComparePoint(g=1.0, chi=1.0), ComparePoint(g=1.0, chi=0.0), ComparePoint(g=3.0, chi=4.0)],
        alias="points",
        min_length=1,
    )
    whitelist: Optional[Path] = Field(None, alias="whitelist")  # None: packaged list


class RunConfig(BaseModel):
    """A run profile; `include` names a profile merged underneath this one."""

    include: Optional[str] = Field(None, alias="include")  # Not required
    system: SystemConfig = Field(default_factory=SystemConfig, alias="system")
    dynamics: DynamicsConfig = Field(default_factory=DynamicsConfig, alias="dynamics")
    sweep: Optional[SweepConfig] = Field(None, alias="sweep")
    output: OutputConfig = Field(default_factory=OutputConfig, alias="output")
    compare: CompareConfig = Field(default_factory=CompareConfig, alias="compare")


def fetch_include_values(include: str) -> dict:
    if not path.isabs(include):
        include = path.join(config.CONFIG_FILE_PATH or ".", include)
    try:
        with open(include, "r") as f:
            included = yaml.safe_load(f)
    except OSError as exc:
        raise InvalidInputError(f"Cannot read included profile {include}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise InvalidInputError(f"Included profile {include} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(included, dict):
        raise InvalidInputError(f"Included profile {include} is not a mapping.")
    return included


def merge_include(document: dict) -> dict:
    """Lays a profile over the one it includes; nothing is validated until both are merged."""
    include = document.get("include")
    if not include:
        return document
    return profile_merger.merge(fetch_include_values(include), document)


def _prune(overrides: dict) -> dict:
    """Drops unset flags so they do not shadow profile values."""
    pruned = {}
    for key, value in overrides.items():
        if isinstance(value, dict):
            value = _prune(value)
            if not value:
                continue
        if value is None:
            continue
        pruned[key] = value
    return pruned


def load_run_config(config_file: Optional[Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Reads a YAML or JSON profile and lays command-line overrides on top."""
    document: dict = {}
    if config_file is not None:
        try:
            document = yaml.safe_load(config_file.read_text()) or {}
        except OSError as exc:
            raise InvalidInputError(f"Cannot read profile {config_file}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise InvalidInputError(f"Profile {config_file} is not valid YAML/JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise InvalidInputError(f"Profile {config_file} must be a mapping.")
        config.CONFIG_FILE_PATH = str(config_file.parent)
    else:
        config.CONFIG_FILE_PATH = None
    merged = profile_merger.merge(merge_include(document), _prune(overrides or {}))
    return RunConfig(**merged)
